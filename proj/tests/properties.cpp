#include "properties.hpp"

#include <algorithm>
#include <map>
#include <regex>
#include <set>
#include <sstream>

#include "evolve/analysis.hpp"
#include "evolve/error.hpp"
#include "evolve/harness.hpp"
#include "evolve/lexer.hpp"
#include "evolve/prompts.hpp"
#include "evolve/report.hpp"
#include "support.hpp"

namespace properties {

using namespace evolve;
using testing_support::pick;
using testing_support::Rng;
using testing_support::uniform;
namespace fs = std::filesystem;

namespace {

std::string shown(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '\n') out += "\\n";
    else if (c == '\r') out += "\\r";
    else out += c;
  }
  return "\"" + out + "\"";
}

void expect(Report& r, bool cond, const std::string& what) {
  if (!cond && r.failures.size() < 20) r.failures.push_back(what);
}

DeprecationRecord timepicker_record() {
  DeprecationRecord r;
  r.deprecated = parse_signature("android.widget.TimePicker#getCurrentHour()");
  r.deprecation_level = 23;
  r.replacements = {parse_signature("android.widget.TimePicker#getHour()")};
  return r;
}

// A snippet of statements with a known set of real call lines.
struct Snippet {
  std::string text;
  std::vector<int> call_lines;  // 1-based, relative to the snippet
};

Snippet usage_snippet(Rng& rng) {
  Snippet s;
  int line = 1;
  const int statements = uniform(rng, 0, 12);
  auto add = [&](const std::string& text, int call_line_offset) {
    if (!s.text.empty()) {
      s.text += "\n";
      ++line;
    }
    if (call_line_offset >= 0) s.call_lines.push_back(line + call_line_offset);
    s.text += text;
    line += static_cast<int>(std::count(text.begin(), text.end(), '\n'));
  };
  for (int i = 0; i < statements; ++i) {
    switch (uniform(rng, 0, 12)) {
      case 0: add("int h" + std::to_string(i) + " = picker.getCurrentHour();", 0); break;
      case 1: add("// picker.getCurrentHour();", -1); break;
      case 2: add("/* picker.getCurrentHour(); */", -1); break;
      case 3: add("/*\n * picker.getCurrentHour();\n */", -1); break;
      case 4: add("String s = \"picker.getCurrentHour()\";", -1); break;
      case 5: add("String s = \"say \\\"x.getCurrentHour()\\\" twice\";", -1); break;
      case 6: add("char c = '\"'; int z = t.getCurrentHour();", 0); break;
      case 7: add("String t = \"\"\"\n    a.getCurrentHour()\n    \"\"\";", -1); break;
      case 8: add("getCurrentHour();", -1); break;
      case 9: add("x.getCurrentHourOfDay();", -1); break;
      case 10: add("int q = this.picker\n    .getCurrentHour ();", 1); break;
      case 11: add("String u = \"//\"; int w = p.getCurrentHour(); // p.getCurrentHour()", 0); break;
      default: add("char d = '\\''; log(\"/* not a comment\");", -1); break;
    }
  }
  return s;
}

std::vector<int> usage_lines(const std::string& text) {
  const SourceUnit unit("gen.java", text);
  std::vector<int> lines;
  for (const auto& u : find_usages(unit, timepicker_record())) lines.push_back(u.line);
  return lines;
}

}  // namespace

Report lexer_preserves_layout(std::uint64_t seed, int cases) {
  Report r{"lexer length/newline preservation", 0, {}};
  Rng rng(seed);
  const std::vector<std::string> pieces = {"a",  "foo", " ",  "\t", "\n", "\r\n", "\"", "'",    "/",  "*", "//",
                                           "/*", "*/",  "\"\"\"", "\\", "\\\"", "x.getCurrentHour(", "{",  "}",
                                           "(",  ")",   ";",  "\xc3\xa9", "0x1F", "@Test"};
  for (int c = 0; c < cases; ++c, ++r.cases) {
    std::string text;
    const int n = uniform(rng, 0, 80);
    for (int i = 0; i < n; ++i) text += pick(rng, pieces);
    const auto masked = lex_strip(text).text;
    bool ok = masked.size() == text.size();
    for (std::size_t i = 0; ok && i < text.size(); ++i) {
      const bool nl = text[i] == '\n' || text[i] == '\r';
      if (nl != (masked[i] == '\n' || masked[i] == '\r') || (nl && masked[i] != text[i])) ok = false;
      if (masked[i] != text[i] && masked[i] != ' ') ok = false;
    }
    expect(r, ok, "layout changed for " + shown(text));
  }
  return r;
}

Report detector_ignores_comments_and_strings(std::uint64_t seed, int cases) {
  Report r{"detector comment/string immunity", 0, {}};
  Rng rng(seed);
  for (int c = 0; c < cases; ++c, ++r.cases) {
    const auto s = usage_snippet(rng);
    // Wrap in a class so that the snippet sits at a known offset of 2 lines.
    const std::string text = "class A {\nvoid m() {\n" + s.text + "\n}\n}\n";
    std::vector<int> expected;
    for (int l : s.call_lines) expected.push_back(l + 2);
    const auto got = usage_lines(text);
    expect(r, got == expected,
           "expected " + std::to_string(expected.size()) + " usages, got " + std::to_string(got.size()) + " in " +
               shown(text));
  }
  return r;
}

Report detector_is_compositional(std::uint64_t seed, int cases) {
  Report r{"detector concatenation compositionality", 0, {}};
  Rng rng(seed);
  for (int c = 0; c < cases; ++c, ++r.cases) {
    const auto a = usage_snippet(rng);
    const auto b = usage_snippet(rng);
    const int a_lines = static_cast<int>(std::count(a.text.begin(), a.text.end(), '\n')) + 1;
    auto expected = usage_lines(a.text);
    for (int l : usage_lines(b.text)) expected.push_back(l + a_lines);
    const auto got = usage_lines(a.text + "\n" + b.text);
    expect(r, got == expected, "concatenation changed usages for " + shown(a.text) + " + " + shown(b.text));
  }
  return r;
}

Report wrap_doubles_test_methods(std::uint64_t seed, int cases) {
  Report r{"wrap_test doubles test methods", 0, {}};
  Rng rng(seed);
  const std::vector<std::string> fillers = {
      "    private int counter = 3;\n",
      "    private final int[] values = {1, 2, 3};\n",
      "    @Before\n    public void setUp() {\n        if (counter > 0) { counter--; }\n    }\n",
      "    private void helper() {\n        String s = \"} @Test void fake() {\";\n    }\n",
      "    private final Runnable task = new Runnable() {\n        public void run() { }\n    };\n",
      "    /* @Test public void commented() { } */\n",
      "    static class Inner {\n        @Test\n        public void nestedNotWrapped() { }\n    }\n",
      "    @After\n    public void tearDown() { }\n",
  };
  for (int c = 0; c < cases; ++c, ++r.cases) {
    const int old_level = uniform(rng, 1, 33);
    const int new_level = uniform(rng, old_level + 1, 34);
    const int k = uniform(rng, 1, 5);

    std::vector<std::string> members;
    std::vector<std::string> names;
    for (int j = 0; j < k; ++j) {
      const auto name = "case" + std::to_string(j) + pick(rng, std::vector<std::string>{"Basic", "Edge", "_x", ""});
      names.push_back(name);
      std::string m;
      switch (uniform(rng, 0, 4)) {
        case 0: m = "    @Test\n"; break;
        case 1: m = "    @Test\n    @Config(sdk = Build.VERSION_CODES.M) // pinned\n"; break;
        case 2: m = "    @Config(sdk = 21)\n    @Test\n"; break;
        case 3: m = "    @Test @Config(sdk = {19, 21})\n"; break;
        default: m = "    @org.junit.Test(timeout = 1000)\n"; break;
      }
      m += "    public void " + name + "() throws Exception {\n        assertEquals(\"}\", value());\n";
      if (uniform(rng, 0, 1)) m += "        for (int i = 0; i < 2; i++) { check(i); }\n";
      m += "    }\n";
      members.push_back(m);
    }
    const int extra = uniform(rng, 0, 4);
    for (int j = 0; j < extra; ++j) members.push_back(pick(rng, fillers));
    std::shuffle(members.begin(), members.end(), rng);

    std::string src;
    if (uniform(rng, 0, 1)) src += "package com.example.gen" + std::to_string(c) + ";\n\n";
    if (uniform(rng, 0, 1)) src += "import org.junit.Test;\n";
    if (uniform(rng, 0, 2) == 0) src += "import org.robolectric.annotation.Config;\n";
    src += "\n@RunWith(RobolectricTestRunner.class)\n";
    if (uniform(rng, 0, 1)) src += "@Config(sdk = {Build.VERSION_CODES.Q, Build.VERSION_CODES.R})\n";
    src += "public class GeneratedTest {\n";
    for (std::size_t j = 0; j < members.size(); ++j) src += (j ? "\n" : "") + members[j];
    src += "}\n";

    std::string out;
    try {
      out = wrap_test(src, make_level_pair(old_level, new_level));
    } catch (const std::exception& e) {
      expect(r, false, std::string("wrap_test threw ") + e.what() + " on " + shown(src));
      continue;
    }

    // Independent check: every pinned method and its level, by regex.
    static const std::regex pinned(R"(@Config\(sdk = (\d+)\)[^{;]*?\b(\w+)_(oldApi|newApi)\s*\()");
    std::multiset<std::string> seen;
    bool levels_ok = true;
    for (auto it = std::sregex_iterator(out.begin(), out.end(), pinned); it != std::sregex_iterator(); ++it) {
      const int level = std::stoi((*it)[1]);
      const bool is_old = (*it)[3] == "oldApi";
      levels_ok &= level == (is_old ? old_level : new_level);
      seen.insert((*it)[2].str() + "_" + (*it)[3].str());
    }
    std::multiset<std::string> want;
    for (const auto& n : names) {
      want.insert(n + "_oldApi");
      want.insert(n + "_newApi");
    }
    expect(r, seen == want && levels_ok,
           "pinned methods differ (" + std::to_string(seen.size()) + " vs " + std::to_string(want.size()) +
               ") for " + shown(src));

    auto listed = test_method_names(out);
    std::multiset<std::string> listed_set(listed.begin(), listed.end());
    expect(r, listed_set == want, "test_method_names disagrees on " + shown(out));

    std::size_t imports = 0;
    for (std::size_t p = out.find("import org.robolectric.annotation.Config;"); p != std::string::npos;
         p = out.find("import org.robolectric.annotation.Config;", p + 1)) {
      ++imports;
    }
    expect(r, imports == 1, "expected one Config import in " + shown(out));
    expect(r, out.find("VERSION_CODES.M)") == std::string::npos && out.find("{19, 21}") == std::string::npos &&
                  out.find("@Config(sdk = 21)\n    @Test") == std::string::npos,
           "method-level @Config survived in " + shown(out));
    for (const auto& f : fillers) {
      const auto in_src = std::count(members.begin(), members.end(), f);
      std::size_t in_out = 0;
      for (auto p = out.find(f); p != std::string::npos; p = out.find(f, p + 1)) ++in_out;
      expect(r, static_cast<std::size_t>(in_src) == in_out, "non-test member duplicated or lost in " + shown(out));
    }
  }
  return r;
}

Report apply_restore_is_identity(std::uint64_t seed, int cases) {
  Report r{"apply_update/restore identity", 0, {}};
  Rng rng(seed);
  testing_support::TempDir tmp;
  const std::vector<fs::perms> modes = {fs::perms(0644), fs::perms(0600), fs::perms(0755), fs::perms(0640)};

  auto snapshot = [](const fs::path& root) {
    std::vector<std::tuple<std::string, std::string, unsigned>> out;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
      out.emplace_back(e.path().lexically_relative(root).generic_string(),
                       e.is_regular_file() ? testing_support::slurp(e.path()) : "<dir>",
                       static_cast<unsigned>(e.status().permissions()));
    }
    std::sort(out.begin(), out.end());
    return out;
  };
  auto bytes = [&](int max_len) {
    std::string s(static_cast<std::size_t>(uniform(rng, 0, max_len)), '\0');
    for (auto& ch : s) ch = static_cast<char>(uniform(rng, 0, 255));
    return s;
  };

  for (int c = 0; c < cases; ++c, ++r.cases) {
    const auto root = tmp / ("p" + std::to_string(c));
    std::vector<fs::path> files;
    const int n = uniform(rng, 1, 5);
    for (int i = 0; i < n; ++i) {
      fs::path rel = "src";
      for (int d = uniform(rng, 0, 2); d > 0; --d) rel /= "d" + std::to_string(uniform(rng, 0, 2));
      rel /= "F" + std::to_string(i) + ".java";
      testing_support::spit(root / rel, bytes(300));
      fs::permissions(root / rel, pick(rng, modes));
      files.push_back(rel);
    }
    const auto before = snapshot(root);

    try {
      const auto& target = pick(rng, files);
      const auto mode = fs::status(root / target).permissions();
      const auto text = bytes(400);
      const auto token = apply_update(root, target, text);
      expect(r, testing_support::slurp(root / target) == text, "update not written");
      expect(r, fs::status(root / target).permissions() == mode, "permissions changed by update");

      // Either a brand-new file under new directories or the file just updated.
      fs::path fresh = "test";
      for (int d = uniform(rng, 0, 3); d > 0; --d) fresh /= "n" + std::to_string(d);
      fresh /= "T" + std::to_string(c) + ".java";
      if (uniform(rng, 0, 3) == 0) fresh = target;
      const auto installed = install_file(root, fresh, bytes(100));

      restore(installed);
      restore(token);
    } catch (const std::exception& e) {
      expect(r, false, std::string("threw ") + e.what());
      continue;
    }
    expect(r, snapshot(root) == before, "tree differs after restore in case " + std::to_string(c));
    fs::remove_all(root);
  }
  return r;
}

Report refinement_kind_truth_table(std::uint64_t seed, int cases) {
  Report r{"select_refinement_kind truth table", 0, {}};
  Rng rng(seed);
  // (old passed, new passed) -> expected kind; both passed has none.
  const std::map<std::pair<bool, bool>, std::optional<PromptKind>> table = {
      {{false, false}, PromptKind::RefineOldFailure},
      {{false, true}, PromptKind::RefineOldFailure},
      {{true, false}, PromptKind::RefineNewFailure},
      {{true, true}, std::nullopt},
  };
  std::set<std::pair<bool, bool>> covered;
  for (int c = 0; c < cases; ++c, ++r.cases) {
    const bool old_ok = uniform(rng, 0, 1);
    const bool new_ok = uniform(rng, 0, 1);
    covered.insert({old_ok, new_ok});
    const int lvl = uniform(rng, 1, 33);
    auto outcome = [&](bool ok, int level) {
      return ok ? TestRunOutcome::passed(level, uniform(rng, 0, 9999))
                : TestRunOutcome::failed(level, "t" + std::to_string(uniform(rng, 0, 99)), "msg",
                                         uniform(rng, 0, 9999));
    };
    const auto o = outcome(old_ok, lvl);
    const auto n = outcome(new_ok, lvl + 1);
    const auto want = table.at({old_ok, new_ok});
    try {
      const auto got = select_refinement_kind(o, n);
      expect(r, want && got == *want, "wrong kind for (" + std::to_string(old_ok) + "," + std::to_string(new_ok) + ")");
    } catch (const Error& e) {
      expect(r, !want && e.code() == ErrorCode::NoFailure, std::string("unexpected error ") + e.what());
    }
  }
  expect(r, covered.size() == 4, "not all four outcome pairs were generated");
  return r;
}

Report aggregate_is_permutation_invariant(std::uint64_t seed, int cases) {
  Report r{"report permutation invariance", 0, {}};
  Rng rng(seed);
  const std::vector<std::string> apis = {"android.a.B#c()", "android.a.B#d(int)", "android.x.Y#z(long[], int)",
                                         "android.widget.TimePicker#getCurrentHour()", "android.os.V#w(long)"};
  const std::vector<SessionStatus> statuses = {SessionStatus::Succeeded, SessionStatus::SucceededValidatorFlagged,
                                               SessionStatus::FailedBoundReached, SessionStatus::FailedNoCode,
                                               SessionStatus::FailedInfrastructure};
  for (int c = 0; c < cases; ++c, ++r.cases) {
    std::vector<SessionResult> results;
    const int n = uniform(rng, 0, 80);
    std::map<int, int> buckets;
    int failed = 0;
    for (int i = 0; i < n; ++i) {
      SessionResult s;
      s.session = "s" + std::to_string(i);
      s.api = pick(rng, apis);
      s.status = pick(rng, statuses);
      s.iterations = uniform(rng, 0, 5);
      if (uniform(rng, 0, 3)) s.update_ms = uniform(rng, 0, 20000);
      if (uniform(rng, 0, 3)) s.test_gen_ms = uniform(rng, 0, 20000);
      for (int k = uniform(rng, 0, s.iterations); k > 0; --k) s.refinements_ms.push_back(uniform(rng, 0, 9000));
      if (is_failure(s.status)) ++failed;
      else ++buckets[s.iterations];
      results.push_back(std::move(s));
    }
    auto shuffled = results;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const auto a = aggregate(results);
    const auto b = aggregate(shuffled);
    expect(r, a == b, "aggregate changed under permutation, case " + std::to_string(c));
    for (auto f : {ReportFormat::PlainTable, ReportFormat::DelimitedValues, ReportFormat::StructuredDocument}) {
      expect(r, render_report(a, f) == render_report(b, f), "rendering changed under permutation");
    }
    // Brute-force tallies as the oracle for conservation.
    bool tallies = a.histogram.total == n && a.histogram.failed == failed;
    for (int k = 0; k <= 5; ++k) tallies &= a.histogram.buckets.at(k) == buckets[k];
    int usages = 0;
    for (const auto& row : a.rows) {
      usages += row.usages;
      tallies &= row.succeeded + row.flagged + row.failed == row.usages;
    }
    expect(r, tallies && usages == n, "tallies do not match brute-force counts, case " + std::to_string(c));
  }
  return r;
}

}  // namespace properties
