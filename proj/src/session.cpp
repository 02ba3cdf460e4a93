#include "evolve/session.hpp"

#include <algorithm>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "evolve/error.hpp"
#include "text_util.hpp"

namespace evolve {

namespace fs = std::filesystem;

namespace {

constexpr std::pair<SessionStatus, std::string_view> kStatusNames[] = {
    {SessionStatus::Pending, "Pending"},
    {SessionStatus::UpdatedAwaitingTest, "UpdatedAwaitingTest"},
    {SessionStatus::Testing, "Testing"},
    {SessionStatus::RefiningCode, "RefiningCode"},
    {SessionStatus::RefiningTest, "RefiningTest"},
    {SessionStatus::Succeeded, "Succeeded"},
    {SessionStatus::SucceededValidatorFlagged, "SucceededValidatorFlagged"},
    {SessionStatus::FailedBoundReached, "FailedBoundReached"},
    {SessionStatus::FailedNoCode, "FailedNoCode"},
    {SessionStatus::FailedInfrastructure, "FailedInfrastructure"},
};

std::string strip_level_suffix(std::string name) {
  for (std::string_view suffix : {"_oldApi", "_newApi"}) {
    if (name.size() > suffix.size() && name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0) {
      name.resize(name.size() - suffix.size());
      break;
    }
  }
  return name;
}

std::string describe(const TestRunOutcome& o) {
  std::string s = std::string(to_string(o.status)) + "@" + std::to_string(o.level);
  if (o.failed_test) s += " " + *o.failed_test;
  return s;
}

std::string with_newline(std::string text) {
  if (text.empty() || text.back() != '\n') text += '\n';
  return text;
}

// Everything a session needs between steps; keeps run_session readable.
class Driver {
 public:
  Driver(const SessionInputs& in, Gateway& gateway, TestRunner& runner, MigrationSession& s)
      : in_(in), gateway_(gateway), runner_(runner), s_(s) {}

  void run();
  void restore_all();

 private:
  void log(std::string event, std::string outcome) {
    s_.history.push_back({s_.iteration, std::move(event), std::move(outcome)});
  }
  void finish(SessionStatus status, std::string why) {
    s_.status = status;
    log("terminal", std::string(to_string(status)) + (why.empty() ? "" : ": " + why));
  }
  ChatExchange ask(PromptKind kind, const PromptContext& ctx);
  void install_test(const std::string& raw_test);
  void replace_code(const std::string& code);
  PromptContext base_context() const;

  const SessionInputs& in_;
  Gateway& gateway_;
  TestRunner& runner_;
  MigrationSession& s_;
  std::vector<BackupToken> backups_;
  std::optional<fs::path> test_path_;
  std::string test_class_;
  std::string code_package_;
  std::optional<int> line_hint_;
  std::string original_;
};

PromptContext Driver::base_context() const {
  PromptContext ctx;
  ctx.deprecated_display = s_.record.deprecated.display();
  ctx.deprecation_level = s_.record.deprecation_level;
  for (const auto& r : s_.record.replacements) ctx.replacements_display.push_back(r.display());
  return ctx;
}

ChatExchange Driver::ask(PromptKind kind, const PromptContext& ctx) {
  const auto prompt = render(kind, ctx, in_.options.truncation);
  log(std::string(to_string(kind)), "prompt " + prompt.fingerprint);
  ++s_.gateway_calls;
  return gateway_.complete(s_.session_id, prompt);
}

void Driver::replace_code(const std::string& code) {
  s_.current_code = with_newline(code);
  backups_.push_back(apply_update(in_.project_root, s_.usage.unit_path, s_.current_code));
}

void Driver::install_test(const std::string& raw_test) {
  const auto test = ensure_package(raw_test, code_package_);
  const auto wrapped = wrap_test(test, s_.levels);
  const auto info = inspect_test_class(test);
  auto rel = in_.options.test_source_dir;
  if (!info.package_name.empty()) {
    for (const auto& part : detail::split(info.package_name, '.')) rel /= part;
  }
  rel /= info.class_name + ".java";

  // A reply that renames the class must not leave the previous file behind.
  const auto target = resolve_in_project(in_.project_root, rel);
  if (test_path_ && *test_path_ != target) {
    for (auto i = backups_.size(); i-- > 0;) {
      if (backups_[i].path != *test_path_) continue;
      restore(backups_[i]);
      backups_.erase(backups_.begin() + static_cast<std::ptrdiff_t>(i));
    }
  }
  backups_.push_back(install_file(in_.project_root, rel, wrapped));
  test_path_ = target;
  s_.current_test = test;
  test_class_ = info.qualified_name();
  log("install_test", test_class_ + " " + std::to_string(test_method_names(test).size()) + " method(s)");
}

void Driver::run() {
  const auto& usage = s_.usage;
  original_ = detail::read_file(resolve_in_project(in_.project_root, usage.unit_path));
  s_.current_code = original_;
  code_package_ = declared_package(original_).value_or("");

  const SourceUnit unit(usage.unit_path, original_);
  const auto sites = find_usages(unit, s_.record);
  const auto here = std::find_if(sites.begin(), sites.end(), [&](const UsageSite& u) { return u.line == usage.line; });
  if (here == sites.end()) {
    return finish(SessionStatus::FailedInfrastructure,
                  "no usage of " + s_.record.deprecated.member_name + " at line " + std::to_string(usage.line));
  }
  if (!here->enclosing_function) {
    return finish(SessionStatus::FailedInfrastructure, "usage is not inside a method");
  }
  if (sites.size() > 1) line_hint_ = usage.line;

  // (1) update
  auto ctx = base_context();
  ctx.code_snippet = original_;
  ctx.usage_line_hint = line_hint_;
  auto ex = ask(in_.options.update_kind, ctx);
  s_.timings.update_ms = ex.latency_ms;
  replace_code(extract_code(ex.response_text).text);
  s_.status = SessionStatus::UpdatedAwaitingTest;
  log("apply_update", usage.unit_path);

  // (2) baseline test against the pre-update function
  ctx = base_context();
  ctx.code_snippet = original_;
  ctx.function_name = here->enclosing_function;
  ex = ask(PromptKind::GenerateTest, ctx);
  s_.timings.test_gen_ms = ex.latency_ms;
  install_test(extract_code(ex.response_text).text);

  // (3)-(6)
  for (;;) {
    s_.status = SessionStatus::Testing;
    const auto outcomes = run_tests(runner_, in_.project_root, test_class_, s_.levels);
    s_.runner_invocations += 2;
    log("run", describe(outcomes.old_result) + ", " + describe(outcomes.new_result));

    for (const auto* o : {&outcomes.old_result, &outcomes.new_result}) {
      if (o->status == RunStatus::InfrastructureError) {
        return finish(SessionStatus::FailedInfrastructure, o->message.value_or("runner error"));
      }
    }
    if (outcomes.old_result.status == RunStatus::Passed && outcomes.new_result.status == RunStatus::Passed) {
      s_.validation = validate_update(s_.current_code, s_.record);
      log("validate", std::string(to_string(s_.validation->verdict)));
      return finish(s_.validation->verdict == Verdict::Valid ? SessionStatus::Succeeded
                                                             : SessionStatus::SucceededValidatorFlagged,
                    "");
    }
    if (s_.iteration >= s_.max_iterations) {
      return finish(SessionStatus::FailedBoundReached, "tests still failing after " +
                                                           std::to_string(s_.iteration) + " refinement(s)");
    }

    const auto kind = select_refinement_kind(outcomes.old_result, outcomes.new_result);
    const auto& failing = kind == PromptKind::RefineOldFailure ? outcomes.old_result : outcomes.new_result;
    s_.status = kind == PromptKind::RefineOldFailure ? SessionStatus::RefiningTest : SessionStatus::RefiningCode;

    ctx = base_context();
    ctx.code_snippet = s_.current_code;
    ctx.test_name = strip_level_suffix(failing.failed_test.value_or(""));
    ctx.error_message = failing.message && !failing.message->empty() ? *failing.message : "(no message)";
    ctx.test_code_snippet = *s_.current_test;
    if (kind == PromptKind::RefineNewFailure) *ctx.test_code_snippet += "\n\n" + s_.current_code;
    ctx.supplemental_context = in_.options.supplemental_context;

    ++s_.iteration;
    ex = ask(kind, ctx);
    s_.timings.refinements_ms.push_back(ex.latency_ms);
    const auto reply = extract_code(ex.response_text);
    if (classify_refinement_reply(reply, kind) == ReplyKind::TestReplacement) {
      s_.status = SessionStatus::RefiningTest;
      install_test(reply.text);
    } else {
      replace_code(reply.text);
      log("apply_update", usage.unit_path);
    }
  }
}

void Driver::restore_all() {
  if (in_.options.keep_changes && is_success(s_.status)) return;
  for (auto it = backups_.rbegin(); it != backups_.rend(); ++it) {
    try {
      restore(*it);
    } catch (const std::exception& e) {
      log("restore", std::string("failed: ") + e.what());
    }
  }
  backups_.clear();
}

}  // namespace

std::string_view to_string(SessionStatus s) noexcept {
  for (const auto& [status, name] : kStatusNames) {
    if (status == s) return name;
  }
  return "Pending";
}

std::optional<SessionStatus> parse_session_status(std::string_view text) noexcept {
  for (const auto& [status, name] : kStatusNames) {
    if (name == text) return status;
  }
  return std::nullopt;
}

bool is_success(SessionStatus s) noexcept {
  return s == SessionStatus::Succeeded || s == SessionStatus::SucceededValidatorFlagged;
}

bool is_failure(SessionStatus s) noexcept {
  return s == SessionStatus::FailedBoundReached || s == SessionStatus::FailedNoCode ||
         s == SessionStatus::FailedInfrastructure;
}

bool is_terminal(SessionStatus s) noexcept { return is_success(s) || is_failure(s); }

std::string default_session_id(const UsageSite& usage) {
  return usage.unit_path + ":" + std::to_string(usage.line) + ":" + usage.matched_member;
}

ReplyKind classify_refinement_reply(const ExtractedCode& reply, PromptKind kind) {
  if (!is_refinement_kind(kind)) throw std::invalid_argument("not a refinement prompt kind");
  if (kind == PromptKind::RefineOldFailure) return ReplyKind::TestReplacement;
  const SourceUnit unit("<reply>", reply.text);
  const auto& toks = unit.tokens();
  for (std::size_t i = 0; i + 1 < toks.size(); ++i) {
    if (unit.token_text(toks[i]) != "@" || toks[i + 1].kind != TokenKind::Identifier) continue;
    std::size_t j = i + 1;
    while (j + 2 < toks.size() && unit.token_text(toks[j + 1]) == "." &&
           toks[j + 2].kind == TokenKind::Identifier) {
      j += 2;
    }
    const auto name = unit.token_text(toks[j]);
    if (name == "RunWith" || (name.size() >= 4 && name.substr(name.size() - 4) == "Test")) {
      return ReplyKind::TestReplacement;
    }
  }
  return ReplyKind::CodeReplacement;
}

MigrationSession run_session(const SessionInputs& inputs, Gateway& gateway, TestRunner& runner) {
  MigrationSession s;
  s.session_id = inputs.session_id.empty() ? default_session_id(inputs.usage) : inputs.session_id;
  s.record = inputs.record;
  s.usage = inputs.usage;
  s.levels = inputs.levels;
  s.max_iterations = inputs.options.max_iterations;

  std::optional<ProjectLease> lease;
  Driver driver(inputs, gateway, runner, s);
  auto fail = [&](SessionStatus status, const std::string& why) {
    s.status = status;
    s.history.push_back({s.iteration, "terminal", std::string(to_string(status)) + ": " + why});
  };
  try {
    if (s.max_iterations < 0) throw std::invalid_argument("max_iterations must be >= 0");
    lease.emplace(inputs.project_root);
    driver.run();
  } catch (const Error& e) {
    const bool no_code = e.code() == ErrorCode::NoCodeFound || e.code() == ErrorCode::NoTestMethods ||
                         e.code() == ErrorCode::UnparsableTestClass;
    fail(no_code ? SessionStatus::FailedNoCode : SessionStatus::FailedInfrastructure, e.what());
  } catch (const std::exception& e) {
    fail(SessionStatus::FailedInfrastructure, e.what());
  }
  driver.restore_all();
  return s;
}

nlohmann::ordered_json session_result_json(const MigrationSession& s) {
  nlohmann::ordered_json doc;
  doc["session"] = s.session_id;
  doc["api"] = s.record.deprecated.canonical();
  doc["status"] = to_string(s.status);
  doc["iterations"] = s.iteration;
  if (s.validation) {
    doc["validation"] = {{"replacement_present", s.validation->replacement_present},
                         {"guard_present", s.validation->guard_present},
                         {"deprecated_retained", s.validation->deprecated_retained},
                         {"verdict", to_string(s.validation->verdict)}};
  } else {
    doc["validation"] = nullptr;
  }
  nlohmann::ordered_json timings;
  timings["update"] = s.timings.update_ms ? nlohmann::ordered_json(*s.timings.update_ms) : nlohmann::ordered_json();
  timings["test_gen"] = s.timings.test_gen_ms ? nlohmann::ordered_json(*s.timings.test_gen_ms) : nlohmann::ordered_json();
  timings["refinements"] = s.timings.refinements_ms;
  doc["timings_ms"] = std::move(timings);
  doc["history"] = nlohmann::ordered_json::array();
  for (const auto& h : s.history) {
    doc["history"].push_back({{"iteration", h.iteration}, {"event", h.event}, {"outcome", h.outcome}});
  }
  return doc;
}

}  // namespace evolve
