#include "evolve/harness.hpp"

#include <atomic>
#include <cerrno>
#include <charconv>
#include <fcntl.h>
#include <fstream>
#include <sys/file.h>
#include <unistd.h>

#include <nlohmann/json.hpp>

#include "evolve/error.hpp"
#include "process.hpp"
#include "text_util.hpp"

namespace evolve {

namespace fs = std::filesystem;

LevelPair make_level_pair(int old_level, int new_level) {
  if (old_level < 1 || new_level < 1 || old_level >= new_level) {
    throw Error(ErrorCode::InvalidLevels,
                "need 1 <= old < new, got " + std::to_string(old_level) + ":" + std::to_string(new_level));
  }
  return {old_level, new_level};
}

LevelPair parse_level_pair(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) throw Error(ErrorCode::InvalidLevels, "expected OLD:NEW, got " + std::string(text));
  auto number = [&](std::string_view part) {
    part = detail::trim(part);
    int value = 0;
    auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), value);
    if (ec != std::errc() || ptr != part.data() + part.size() || part.empty()) {
      throw Error(ErrorCode::InvalidLevels, "not a level: '" + std::string(part) + "'");
    }
    return value;
  };
  return make_level_pair(number(text.substr(0, colon)), number(text.substr(colon + 1)));
}

LevelPair default_level_pair(const DeprecationRecord& record, std::optional<LevelPair> override_levels) {
  if (override_levels) return make_level_pair(override_levels->old_level, override_levels->new_level);
  if (record.deprecation_level < 2) {
    throw Error(ErrorCode::LevelUnderflow, record.deprecated.canonical() + " deprecated at level " +
                                               std::to_string(record.deprecation_level));
  }
  return {record.deprecation_level - 1, record.deprecation_level};
}

// ---------------------------------------------------------------------------
// Files

namespace {

std::atomic<unsigned> g_tmp_counter{0};

void write_atomic(const fs::path& path, std::string_view text) {
  const auto tmp = path.parent_path() / ("." + path.filename().string() + ".evolve-tmp-" +
                                         std::to_string(::getpid()) + "-" + std::to_string(g_tmp_counter++));
  try {
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw Error(ErrorCode::WriteFailure, "cannot create " + tmp.string());
      out.write(text.data(), static_cast<std::streamsize>(text.size()));
      out.close();
      if (!out) throw Error(ErrorCode::WriteFailure, "cannot write " + tmp.string());
    }
    std::error_code ec;
    if (fs::exists(path, ec)) fs::permissions(tmp, fs::status(path).permissions(), ec);
    fs::rename(tmp, path);
  } catch (const fs::filesystem_error& e) {
    std::error_code ignored;
    fs::remove(tmp, ignored);
    throw Error(ErrorCode::WriteFailure, e.what());
  } catch (...) {
    std::error_code ignored;
    fs::remove(tmp, ignored);
    throw;
  }
}

}  // namespace

fs::path resolve_in_project(const fs::path& root, const fs::path& relative) {
  std::error_code ec;
  const auto root_c = fs::weakly_canonical(fs::absolute(root), ec);
  if (ec) throw Error(ErrorCode::FileMissing, "bad project root " + root.string());
  const auto target = fs::weakly_canonical(relative.is_absolute() ? relative : root_c / relative, ec);
  if (ec) throw Error(ErrorCode::FileMissing, "bad path " + relative.string());
  const auto rel = target.lexically_relative(root_c);
  if (rel.empty() || rel == "." || *rel.begin() == "..") {
    throw Error(ErrorCode::FileMissing, relative.string() + " is outside project " + root.string());
  }
  return target;
}

BackupToken apply_update(const fs::path& project_root, const fs::path& unit_path, std::string_view updated_text) {
  const auto path = resolve_in_project(project_root, unit_path);
  if (!fs::is_regular_file(path)) throw Error(ErrorCode::FileMissing, path.string());
  BackupToken token{path, detail::read_file(path), {}};
  write_atomic(path, updated_text);
  return token;
}

BackupToken install_file(const fs::path& project_root, const fs::path& relative, std::string_view text) {
  const auto path = resolve_in_project(project_root, relative);
  BackupToken token{path, std::nullopt, {}};
  if (fs::exists(path)) {
    if (!fs::is_regular_file(path)) throw Error(ErrorCode::WriteFailure, path.string() + " is not a file");
    token.original = detail::read_file(path);
  } else {
    for (auto dir = path.parent_path(); !fs::exists(dir); dir = dir.parent_path()) {
      token.created_dirs.push_back(dir);
    }
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw Error(ErrorCode::WriteFailure, "cannot create " + path.parent_path().string());
  }
  try {
    write_atomic(path, text);
  } catch (...) {
    std::error_code ignored;
    for (const auto& dir : token.created_dirs) fs::remove(dir, ignored);
    throw;
  }
  return token;
}

void restore(const BackupToken& token) {
  if (token.original) {
    write_atomic(token.path, *token.original);
  } else {
    std::error_code ec;
    fs::remove(token.path, ec);
  }
  for (const auto& dir : token.created_dirs) {
    std::error_code ec;
    if (fs::is_directory(dir, ec) && fs::is_empty(dir, ec)) fs::remove(dir, ec);
  }
}

ProjectLease::ProjectLease(const fs::path& root) {
  fd_ = ::open(root.c_str(), O_RDONLY | O_DIRECTORY | O_CLOEXEC);
  if (fd_ < 0) throw Error(ErrorCode::FileMissing, "cannot open project " + root.string());
  while (::flock(fd_, LOCK_EX) != 0) {
    if (errno != EINTR) {
      ::close(fd_);
      throw Error(ErrorCode::ProjectBusy, "cannot lock project " + root.string());
    }
  }
}

ProjectLease::~ProjectLease() {
  if (fd_ >= 0) {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
}

// ---------------------------------------------------------------------------
// Runner protocol

TestRunOutcome parse_runner_result(std::string_view stdout_text, int exit_code, int level) {
  auto protocol = [](const std::string& why) { return Error(ErrorCode::RunnerProtocolError, why); };

  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(detail::trim(stdout_text));
  } catch (const nlohmann::json::parse_error&) {
    throw protocol("stdout is not a single JSON document: '" + std::string(stdout_text.substr(0, 200)) + "'");
  }
  if (!doc.is_object() || doc.size() != 4 || !doc.contains("status") || !doc.contains("failed_test") ||
      !doc.contains("message") || !doc.contains("duration_ms")) {
    throw protocol("expected exactly {status, failed_test, message, duration_ms}");
  }
  const auto& status = doc["status"];
  const auto& failed_test = doc["failed_test"];
  const auto& message = doc["message"];
  const auto& duration = doc["duration_ms"];
  if (!status.is_string()) throw protocol("status must be a string");
  if (!failed_test.is_null() && !failed_test.is_string()) throw protocol("failed_test must be string or null");
  if (!message.is_null() && !message.is_string()) throw protocol("message must be string or null");
  if (!duration.is_number_integer() || duration.get<long long>() < 0) {
    throw protocol("duration_ms must be a non-negative integer");
  }

  const auto s = status.get<std::string>();
  const auto ms = duration.get<std::int64_t>();
  const int expected_exit = s == "passed" ? 0 : s == "failed" ? 1 : s == "error" ? 2 : -1;
  if (expected_exit < 0) throw protocol("unknown status '" + s + "'");
  if (expected_exit != exit_code) {
    throw protocol("status '" + s + "' disagrees with exit code " + std::to_string(exit_code));
  }

  if (s == "passed") {
    if (!failed_test.is_null() || !message.is_null()) throw protocol("passed result must not name a failure");
    return TestRunOutcome::passed(level, ms);
  }
  if (s == "failed") {
    if (!failed_test.is_string() || !message.is_string()) {
      throw protocol("failed result must carry failed_test and message");
    }
    return TestRunOutcome::failed(level, failed_test.get<std::string>(), message.get<std::string>(), ms);
  }
  return TestRunOutcome::infrastructure(level, message.is_string() ? message.get<std::string>() : "runner error", ms);
}

CommandRunner::CommandRunner(RunnerConfig config) : config_(std::move(config)) {}

TestRunOutcome CommandRunner::run(const fs::path& project_root, const std::string& test_class, int level) {
  auto argv = config_.command;
  argv.insert(argv.end(), {"--project", fs::absolute(project_root).lexically_normal().string(), "--test-class",
                           test_class, "--sdk", std::to_string(level)});
  const auto result = detail::run_process(argv, config_.timeout);
  if (result.spawn_failed) return TestRunOutcome::infrastructure(level, result.spawn_error);
  if (result.timed_out) {
    return TestRunOutcome::infrastructure(
        level, "runner timed out after " + std::to_string(config_.timeout.count()) + " ms", result.elapsed.count());
  }
  if (!result.exited_normally) {
    throw Error(ErrorCode::RunnerProtocolError, "runner terminated abnormally");
  }
  return parse_runner_result(result.out, result.exit_code, level);
}

LevelOutcomes run_tests(TestRunner& runner, const fs::path& project_root, const std::string& test_class,
                        LevelPair levels) {
  auto old_result = runner.run(project_root, test_class, levels.old_level);
  auto new_result = runner.run(project_root, test_class, levels.new_level);
  return {std::move(old_result), std::move(new_result)};
}

}  // namespace evolve
