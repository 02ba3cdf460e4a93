#!/usr/bin/env python3
"""Runner-protocol adapter for Gradle + Robolectric projects.

Invoked as

    gradle_robolectric_runner.py [--module app] [--variant Debug] [--gradle CMD]
        --project DIR --test-class FQCN --sdk N

Runs the test methods of FQCN pinned to SDK N (those carrying
``@Config(sdk = N)``) and prints one JSON document on stdout:

    {"status": "passed"|"failed"|"error", "failed_test": ..., "message": ..., "duration_ms": N}

Exit code is 0, 1 or 2 to match the status. A test class that does not
compile counts as a failed test so that the refinement loop can react to it.
"""

import argparse
import glob
import json
import os
import re
import shlex
import subprocess
import sys
import time
import xml.etree.ElementTree as ET

EXIT = {"passed": 0, "failed": 1, "error": 2}
TAIL = 4000


def emit(status, failed_test=None, message=None, started=None):
    duration = int((time.monotonic() - started) * 1000) if started is not None else 0
    print(json.dumps({"status": status, "failed_test": failed_test,
                      "message": message, "duration_ms": duration}))
    sys.stdout.flush()
    sys.exit(EXIT[status])


def find_test_source(project, module, fqcn):
    rel = fqcn.replace(".", os.sep) + ".java"
    for root in ("src/test/java", "src/test/kotlin"):
        path = os.path.join(project, module, root, rel)
        if os.path.isfile(path):
            return path
    return None


CONFIG_THEN_METHOD = re.compile(
    r"@Config\s*\(\s*sdk\s*=\s*(\d+)\s*\)"   # the pin added by the wrapper
    r"(?:\s*@[\w.]+(?:\([^)]*\))?)*"          # other annotations
    r"[\w\s<>\[\],.?]*?\b(\w+)\s*\(")         # modifiers, return type, name


def methods_for_level(source_text, sdk):
    return [name for level, name in CONFIG_THEN_METHOD.findall(source_text) if int(level) == sdk]


def gradle_command(args):
    if args.gradle:
        return shlex.split(args.gradle)
    wrapper = os.path.join(args.project, "gradlew")
    if os.path.isfile(wrapper):
        return [wrapper]
    return ["gradle"]


def first_failure(results_dir, fqcn):
    reports = sorted(glob.glob(os.path.join(results_dir, "TEST-*.xml")))
    wanted = [r for r in reports if os.path.basename(r) == "TEST-%s.xml" % fqcn] or reports
    seen_any = False
    for report in wanted:
        try:
            root = ET.parse(report).getroot()
        except ET.ParseError:
            continue
        seen_any = True
        for case in root.iter("testcase"):
            for tag in ("failure", "error"):
                node = case.find(tag)
                if node is not None:
                    text = (node.get("message") or "").strip()
                    body = (node.text or "").strip()
                    if body and body not in text:
                        text = (text + "\n" + body).strip()
                    return seen_any, case.get("name"), text or tag
    return seen_any, None, None


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--project", required=True)
    parser.add_argument("--test-class", required=True)
    parser.add_argument("--sdk", required=True, type=int)
    parser.add_argument("--module", default="app")
    parser.add_argument("--variant", default="Debug")
    parser.add_argument("--gradle", default=os.environ.get("EVOLVE_GRADLE"))
    args = parser.parse_args()
    started = time.monotonic()

    task = "test%sUnitTest" % args.variant
    source = find_test_source(args.project, args.module, args.test_class)
    filters = []
    if source:
        with open(source, encoding="utf-8", errors="replace") as f:
            filters = ["%s.%s" % (args.test_class, m) for m in methods_for_level(f.read(), args.sdk)]
    if not filters:
        filters = [args.test_class]

    results_dir = os.path.join(args.project, args.module, "build", "test-results", task)
    for stale in glob.glob(os.path.join(results_dir, "TEST-*.xml")):
        os.remove(stale)

    cmd = gradle_command(args) + [":%s:%s" % (args.module, task), "--console=plain",
                                  "-Drobolectric.enabledSdks=%d" % args.sdk]
    for flt in filters:
        cmd += ["--tests", flt]
    try:
        proc = subprocess.run(cmd, cwd=args.project, stdout=subprocess.PIPE,
                              stderr=subprocess.STDOUT, text=True, errors="replace")
    except OSError as e:
        emit("error", message="cannot start gradle: %s" % e, started=started)

    seen, failed_test, message = first_failure(results_dir, args.test_class)
    if failed_test:
        emit("failed", failed_test, message, started)
    if proc.returncode == 0 and seen:
        emit("passed", started=started)
    output = proc.stdout[-TAIL:]
    if "Compilation failed" in proc.stdout or "compileDebugUnitTestJavaWithJavac" in proc.stdout \
            or re.search(r"error: ", proc.stdout):
        simple = args.test_class.rsplit(".", 1)[-1]
        emit("failed", simple, "test compilation failed:\n" + output, started)
    emit("error", message="gradle exited %d without test results:\n%s" % (proc.returncode, output),
         started=started)


if __name__ == "__main__":
    main()
