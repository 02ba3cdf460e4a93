#pragma once

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "evolve/catalog.hpp"
#include "evolve/outcome.hpp"

namespace evolve {

// ---------------------------------------------------------------------------
// API levels

/// The two SDK levels a wrapped test runs under. Construct through
/// `make_level_pair` to get the ordering check.
struct LevelPair {
  int old_level = 0;
  int new_level = 0;

  bool operator==(const LevelPair&) const = default;
};

/// Throws Error{InvalidLevels} unless 1 <= old < new.
LevelPair make_level_pair(int old_level, int new_level);

/// Parses `OLD:NEW`. Throws Error{InvalidLevels}.
LevelPair parse_level_pair(std::string_view text);

/// One level below the deprecation level and the deprecation level itself,
/// unless an override is given. Throws Error{LevelUnderflow} when the record
/// was deprecated at level 1 and no override applies.
LevelPair default_level_pair(const DeprecationRecord& record, std::optional<LevelPair> override_levels = {});

// ---------------------------------------------------------------------------
// Project mutation

/// Everything needed to undo one file write: the original bytes (absent when
/// the file did not exist) and any directories the write created.
struct BackupToken {
  std::filesystem::path path;
  std::optional<std::string> original;
  std::vector<std::filesystem::path> created_dirs;  // deepest first
};

/// Resolves `relative` under `root`, rejecting paths that escape it.
/// Throws Error{FileMissing}.
std::filesystem::path resolve_in_project(const std::filesystem::path& root, const std::filesystem::path& relative);

/// Atomically replaces an existing file under the project root. Throws
/// Error{FileMissing} (missing or outside the root) or Error{WriteFailure};
/// on WriteFailure the original file is untouched.
BackupToken apply_update(const std::filesystem::path& project_root, const std::filesystem::path& unit_path,
                         std::string_view updated_text);

/// Like apply_update but the file (and its parent directories) may not exist
/// yet.
BackupToken install_file(const std::filesystem::path& project_root, const std::filesystem::path& relative,
                         std::string_view text);

/// Puts the bytes back, or removes a file and directories that did not exist.
void restore(const BackupToken& token);

/// Exclusive lease on a project tree, held via flock(2) on the root
/// directory. Serializes sessions across threads and processes.
class ProjectLease {
 public:
  explicit ProjectLease(const std::filesystem::path& root);
  ~ProjectLease();
  ProjectLease(const ProjectLease&) = delete;
  ProjectLease& operator=(const ProjectLease&) = delete;

 private:
  int fd_ = -1;
};

// ---------------------------------------------------------------------------
// Test sources

struct TestClassInfo {
  std::string package_name;  // empty for the default package
  std::string class_name;

  std::string qualified_name() const {
    return package_name.empty() ? class_name : package_name + "." + class_name;
  }
};

/// Throws Error{UnparsableTestClass} when no class declaration is found.
TestClassInfo inspect_test_class(std::string_view source);

/// Package declared by a source file, if any.
std::optional<std::string> declared_package(std::string_view source);

/// Prepends `package <name>;` when the source declares none.
std::string ensure_package(std::string_view source, const std::string& package_name);

/// Duplicates every `@Test` method of the first top-level class into
/// `<name>_oldApi` and `<name>_newApi`, each pinned with a method-level
/// `@Config(sdk = N)`. Existing method-level `@Config` annotations on test
/// methods are dropped; class-level annotations are untouched. Adds the
/// Config import if missing. Java sources only.
/// Throws Error{NoTestMethods} or Error{UnparsableTestClass}.
std::string wrap_test(std::string_view test_source, LevelPair levels);

/// Names of the `@Test` methods of the first top-level class, in order.
std::vector<std::string> test_method_names(std::string_view test_source);

// ---------------------------------------------------------------------------
// Runner protocol

/// Runs the test class at one SDK level.
class TestRunner {
 public:
  virtual ~TestRunner() = default;
  virtual TestRunOutcome run(const std::filesystem::path& project_root, const std::string& test_class,
                             int level) = 0;
};

struct RunnerConfig {
  std::vector<std::string> command;  // argv prefix; protocol flags are appended
  std::chrono::milliseconds timeout = std::chrono::minutes(15);
};

/// Parses the runner's stdout document and checks it against the exit code
/// (0 passed, 1 failed, 2 error). Throws Error{RunnerProtocolError}.
TestRunOutcome parse_runner_result(std::string_view stdout_text, int exit_code, int level);

/// Invokes `<command> --project <abs> --test-class <fqcn> --sdk <level>`.
/// Timeouts and unstartable commands become InfrastructureError outcomes;
/// protocol violations throw Error{RunnerProtocolError}.
class CommandRunner : public TestRunner {
 public:
  explicit CommandRunner(RunnerConfig config);
  TestRunOutcome run(const std::filesystem::path& project_root, const std::string& test_class,
                     int level) override;

 private:
  RunnerConfig config_;
};

struct LevelOutcomes {
  TestRunOutcome old_result;
  TestRunOutcome new_result;
};

/// Old level first, then new level, always both.
LevelOutcomes run_tests(TestRunner& runner, const std::filesystem::path& project_root,
                        const std::string& test_class, LevelPair levels);

}  // namespace evolve
