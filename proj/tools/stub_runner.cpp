// Replays a scripted sequence of runner results. The n-th invocation (n
// counted from the lines already in the log) answers with steps[n]; once
// the script runs out the last step repeats.
//
// Script: {"log": "<path>", "steps": [{"status": "passed"|"failed"|"error",
//          "failed_test": ..., "message": ..., "duration_ms": N,
//          "exit": N, "raw": "<stdout verbatim>", "sleep_ms": N}, ...]}

#include <chrono>
#include <cstdio>
#include <fcntl.h>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <sys/file.h>
#include <thread>
#include <unistd.h>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int fail(const std::string& why) {
  std::cerr << "stub-runner: " << why << '\n';
  return 2;
}

std::string slurp(int fd) {
  std::string text;
  char buf[4096];
  ::lseek(fd, 0, SEEK_SET);
  for (ssize_t n; (n = ::read(fd, buf, sizeof buf)) > 0;) text.append(buf, static_cast<std::size_t>(n));
  return text;
}

}  // namespace

int main(int argc, char** argv) {
  std::string script_path, project, test_class;
  int sdk = 0;
  CLI::App app{"scripted test runner"};
  app.add_option("--script", script_path)->required();
  app.add_option("--project", project)->required();
  app.add_option("--test-class", test_class)->required();
  app.add_option("--sdk", sdk)->required();
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  json script;
  try {
    std::ifstream in(script_path);
    script = json::parse(in);
  } catch (const json::exception& e) {
    return fail(std::string("bad script: ") + e.what());
  }
  if (!script.contains("steps") || !script["steps"].is_array() || script["steps"].empty()) {
    return fail("script needs a non-empty steps array");
  }
  fs::path log_path = script.value("log", script_path + ".log");
  if (log_path.is_relative()) log_path = fs::path(script_path).parent_path() / log_path;

  const int fd = ::open(log_path.c_str(), O_RDWR | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd < 0) return fail("cannot open log " + log_path.string());
  ::flock(fd, LOCK_EX);
  std::size_t index = 0;
  for (char c : slurp(fd)) index += c == '\n';
  const json entry = {{"invocation", index}, {"project", project}, {"test_class", test_class}, {"sdk", sdk}};
  const auto line = entry.dump() + "\n";
  [[maybe_unused]] auto written = ::write(fd, line.data(), line.size());
  ::flock(fd, LOCK_UN);
  ::close(fd);

  const auto& steps = script["steps"];
  const auto& step = steps[std::min(index, steps.size() - 1)];
  if (step.contains("sleep_ms")) std::this_thread::sleep_for(std::chrono::milliseconds(step["sleep_ms"].get<int>()));

  if (step.contains("raw")) {
    std::cout << step["raw"].get<std::string>();
    return step.value("exit", 0);
  }
  const auto status = step.value("status", std::string("passed"));
  json doc;
  doc["status"] = status;
  doc["failed_test"] = step.contains("failed_test") ? step["failed_test"] : json(nullptr);
  doc["message"] = step.contains("message") ? step["message"] : json(nullptr);
  doc["duration_ms"] = step.value("duration_ms", 0);
  std::cout << doc.dump() << '\n';
  const int by_status = status == "passed" ? 0 : status == "failed" ? 1 : 2;
  return step.value("exit", by_status);
}
