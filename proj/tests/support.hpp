#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "evolve/error.hpp"
#include "evolve/gateway.hpp"
#include "evolve/harness.hpp"

namespace testing_support {

namespace fs = std::filesystem;

inline fs::path fixtures() { return EVOLVE_FIXTURES_DIR; }

/// Code of the evolve::Error thrown by `fn`, or nothing when it returns.
inline std::optional<evolve::ErrorCode> thrown_code(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const evolve::Error& e) {
    return e.code();
  }
  return std::nullopt;
}

inline std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void spit(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << text;
}

/// Fresh directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = fs::temp_directory_path() /
            ("evolve-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++) + "-" +
             std::to_string(std::random_device{}()));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const fs::path& rel) const { return path_ / rel; }

 private:
  fs::path path_;
};

/// Snapshot of every regular file under a root, for before/after comparison.
inline std::vector<std::pair<std::string, std::string>> tree(const fs::path& root) {
  std::vector<std::pair<std::string, std::string>> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) files.emplace_back(e.path().lexically_relative(root).generic_string(), slurp(e.path()));
    if (e.is_directory()) files.emplace_back(e.path().lexically_relative(root).generic_string() + "/", "");
  }
  std::sort(files.begin(), files.end());
  return files;
}

/// Chat provider that answers from a fixed list and remembers the prompts.
class ScriptedProvider : public evolve::ChatProvider {
 public:
  explicit ScriptedProvider(std::vector<std::string> replies) : replies_(std::move(replies)) {}

  evolve::ProviderReply send(const std::string&, const std::string& prompt) override {
    prompts.push_back(prompt);
    const auto i = std::min(prompts.size() - 1, replies_.size() - 1);
    return {replies_[i], std::nullopt};
  }

  std::vector<std::string> prompts;

 private:
  std::vector<std::string> replies_;
};

/// In-process runner answering from a fixed list of outcomes, in call order.
class ScriptedRunner : public evolve::TestRunner {
 public:
  explicit ScriptedRunner(std::vector<evolve::RunStatus> statuses, std::string failed_test = "testIt",
                          std::string message = "expected:<1> but was:<2>")
      : statuses_(std::move(statuses)), failed_test_(std::move(failed_test)), message_(std::move(message)) {}

  evolve::TestRunOutcome run(const fs::path& root, const std::string& test_class, int level) override {
    calls.push_back({root, test_class, level});
    const auto i = std::min(calls.size() - 1, statuses_.size() - 1);
    switch (statuses_[i]) {
      case evolve::RunStatus::Passed: return evolve::TestRunOutcome::passed(level);
      case evolve::RunStatus::Failed:
        return evolve::TestRunOutcome::failed(level, failed_test_ + (i % 2 == 0 ? "_oldApi" : "_newApi"), message_);
      case evolve::RunStatus::InfrastructureError: return evolve::TestRunOutcome::infrastructure(level, "boom");
    }
    return evolve::TestRunOutcome::passed(level);
  }

  struct Call {
    fs::path root;
    std::string test_class;
    int level;
  };
  std::vector<Call> calls;

 private:
  std::vector<evolve::RunStatus> statuses_;
  std::string failed_test_;
  std::string message_;
};

inline std::string fenced(const std::string& code, const std::string& lang = "java") {
  return "Here is the updated code:\n\n```" + lang + "\n" + code + "\n```\n\nThis keeps older devices working.";
}

using Rng = std::mt19937_64;

inline int uniform(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

template <typename T>
const T& pick(Rng& rng, const std::vector<T>& items) {
  return items[static_cast<std::size_t>(uniform(rng, 0, static_cast<int>(items.size()) - 1))];
}

}  // namespace testing_support
