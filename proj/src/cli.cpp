#include "evolve/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "evolve/analysis.hpp"
#include "evolve/catalog.hpp"
#include "evolve/error.hpp"
#include "evolve/gateway.hpp"
#include "evolve/harness.hpp"
#include "evolve/report.hpp"
#include "process.hpp"
#include "text_util.hpp"

namespace evolve {

namespace fs = std::filesystem;

namespace {

// Thrown for anything that must stop the run before a project is touched.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string catalog;
  std::vector<std::string> projects;
  std::string provider = "replay";
  std::string transcript;
  std::string runner;
  std::string levels;
  int max_iterations = 5;
  std::string variant = "full";
  bool keep_changes = false;
  std::string out_dir;
  std::vector<std::string> usages;
  std::string api;
  int jobs = 1;
  std::string model = std::string(kDefaultModel);
  std::string base_url = HttpProviderConfig{}.base_url;
  bool relaxed_replay = false;
  int runner_timeout_s = 900;
  std::string test_dir = "app/src/test/java";
  std::string context_file;
  std::string format = "table";
  std::string write_to;
};

bool is_source(const fs::path& p) { return p.extension() == ".java" || p.extension() == ".kt"; }

bool excluded(const fs::path& rel) {
  const auto s = rel.generic_string();
  for (const auto& part : rel) {
    const auto name = part.string();
    if (name == "build" || name == ".git" || name == ".gradle") return true;
  }
  return s.find("src/test/") != std::string::npos || s.find("src/androidTest/") != std::string::npos ||
         s.rfind("src/test", 0) == 0;
}

// Main-source files under the project, sorted, relative to the root.
std::vector<std::string> project_sources(const fs::path& root) {
  std::vector<std::string> files;
  std::error_code ec;
  for (auto it = fs::recursive_directory_iterator(root, fs::directory_options::skip_permission_denied, ec);
       it != fs::recursive_directory_iterator(); it.increment(ec)) {
    if (ec) break;
    const auto rel = it->path().lexically_relative(root);
    if (it->is_directory() && excluded(rel / "x")) {
      it.disable_recursion_pending();
      continue;
    }
    if (it->is_regular_file() && is_source(it->path()) && !excluded(rel)) files.push_back(rel.generic_string());
  }
  std::sort(files.begin(), files.end());
  return files;
}

struct FoundUsage {
  std::size_t record;
  UsageSite site;
};

std::vector<FoundUsage> scan_project(const fs::path& root, const Catalog& catalog) {
  std::vector<FoundUsage> found;
  for (const auto& rel : project_sources(root)) {
    const SourceUnit unit(rel, detail::read_file(root / rel));
    for (std::size_t r = 0; r < catalog.records().size(); ++r) {
      for (auto& site : find_usages(unit, catalog.records()[r])) found.push_back({r, std::move(site)});
    }
  }
  std::stable_sort(found.begin(), found.end(), [](const FoundUsage& a, const FoundUsage& b) {
    return std::tie(a.site.unit_path, a.site.line, a.site.column) < std::tie(b.site.unit_path, b.site.line, b.site.column);
  });
  return found;
}

Catalog load_catalog_or_throw(const std::string& path) {
  if (path.empty()) throw ConfigError("--catalog is required");
  try {
    return Catalog::from_file(path);
  } catch (const Error& e) {
    throw ConfigError(std::string("catalog: ") + e.what());
  }
}

fs::path existing_project(const std::string& path) {
  std::error_code ec;
  if (!fs::is_directory(path, ec)) throw ConfigError("project directory not found: " + path);
  return fs::weakly_canonical(fs::absolute(path));
}

std::string sanitize(const std::string& id) {
  std::string out;
  for (char c : id) {
    const bool keep = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '.' ||
                      c == '-' || c == '_';
    out += keep ? c : '_';
  }
  return out;
}

int cmd_scan(const Options& o, std::ostream& out, std::ostream& err) {
  const auto catalog = load_catalog_or_throw(o.catalog);
  if (o.projects.size() != 1) throw ConfigError("scan takes exactly one --project");
  const auto root = existing_project(o.projects.front());
  const auto found = scan_project(root, catalog);

  std::map<std::string, int> per_api;
  for (const auto& r : catalog.records()) per_api[r.deprecated.canonical()] = 0;
  for (const auto& f : found) {
    const auto api = catalog.records()[f.record].deprecated.canonical();
    ++per_api[api];
    nlohmann::ordered_json line;
    line["file"] = f.site.unit_path;
    line["line"] = f.site.line;
    line["column"] = f.site.column;
    line["api"] = api;
    line["function"] = f.site.enclosing_function ? nlohmann::ordered_json(*f.site.enclosing_function)
                                                 : nlohmann::ordered_json();
    out << line.dump() << '\n';
  }
  for (const auto& [api, n] : per_api) err << n << "  " << api << '\n';
  err << found.size() << " usage(s) in total. Matching is by member name; receivers are not type-checked, so "
                         "unrelated methods with the same name are reported too.\n";
  return kExitOk;
}

struct Planned {
  std::size_t project;
  SessionInputs inputs;
};

struct UsageSelector {
  std::string file;
  int line;
};

UsageSelector parse_selector(const std::string& text) {
  const auto colon = text.rfind(':');
  if (colon == std::string::npos || colon == 0) throw ConfigError("--usage expects FILE:LINE, got " + text);
  try {
    std::size_t used = 0;
    const int line = std::stoi(text.substr(colon + 1), &used);
    if (used != text.size() - colon - 1 || line < 1) throw std::invalid_argument("line");
    return {fs::path(text.substr(0, colon)).lexically_normal().generic_string(), line};
  } catch (const std::logic_error&) {
    throw ConfigError("--usage expects FILE:LINE, got " + text);
  }
}

std::shared_ptr<Gateway> make_gateway(const Options& o, const fs::path& out_dir) {
  if (o.provider == "replay") {
    if (o.transcript.empty()) throw ConfigError("--provider replay needs --transcript");
    if (!fs::is_regular_file(o.transcript)) throw ConfigError("transcript not found: " + o.transcript);
    try {
      return std::make_shared<ReplayGateway>(Transcript::load(o.transcript),
                                             o.relaxed_replay ? ReplayMatch::SequenceOnly : ReplayMatch::Strict);
    } catch (const Error& e) {
      throw ConfigError(std::string("transcript: ") + e.what());
    }
  }
  if (o.provider != "live" && o.provider != "record") throw ConfigError("unknown provider " + o.provider);
  const char* key = std::getenv(std::string(kApiKeyEnv).c_str());
  if (key == nullptr || *key == '\0') throw ConfigError(std::string(kApiKeyEnv) + " is not set");
  HttpProviderConfig http;
  http.base_url = o.base_url;
  http.api_key = key;
  auto provider = std::make_shared<HttpChatProvider>(http);
  std::shared_ptr<TranscriptWriter> recorder;
  if (o.provider == "record") {
    const fs::path path = o.transcript.empty() ? out_dir / "transcript.jsonl" : fs::path(o.transcript);
    try {
      recorder = std::make_shared<TranscriptWriter>(path);
    } catch (const Error& e) {
      throw ConfigError(e.what());
    }
  }
  return std::make_shared<LiveGateway>(provider, o.model, recorder);
}

int cmd_migrate(const Options& o, std::ostream& out, std::ostream& err) {
  // Everything below up to the session loop only validates; no project is
  // modified before it.
  const auto catalog = load_catalog_or_throw(o.catalog);
  if (o.projects.empty()) throw ConfigError("--project is required");
  if (o.out_dir.empty()) throw ConfigError("--out is required");
  if (o.max_iterations < 1) throw ConfigError("--max-iterations must be >= 1");
  if (o.jobs < 1) throw ConfigError("--jobs must be >= 1");
  if (o.runner.empty()) throw ConfigError("--runner is required");
  const auto runner_argv = detail::split_command_line(o.runner);
  if (runner_argv.empty()) throw ConfigError("--runner is empty");

  PromptKind update_kind = PromptKind::UpdateFull;
  if (o.variant == "A") update_kind = PromptKind::UpdatePromptA;
  else if (o.variant == "B") update_kind = PromptKind::UpdatePromptB;
  else if (o.variant != "full") throw ConfigError("--prompt-variant must be full, A or B");

  std::optional<LevelPair> override_levels;
  if (!o.levels.empty()) {
    try {
      override_levels = parse_level_pair(o.levels);
    } catch (const Error& e) {
      throw ConfigError(e.what());
    }
  }
  std::optional<std::string> context;
  if (!o.context_file.empty()) {
    try {
      context = detail::read_file(o.context_file);
    } catch (const Error& e) {
      throw ConfigError(e.what());
    }
  }

  std::vector<fs::path> roots;
  std::set<fs::path> seen_roots;
  for (const auto& p : o.projects) {
    roots.push_back(existing_project(p));
    if (!seen_roots.insert(roots.back()).second) throw ConfigError("project given twice: " + p);
  }

  std::vector<UsageSelector> selectors;
  for (const auto& u : o.usages) selectors.push_back(parse_selector(u));
  if (!selectors.empty() && roots.size() > 1) throw ConfigError("--usage needs a single --project");

  std::vector<Planned> plan;
  std::vector<bool> used_selector(selectors.size(), false);
  for (std::size_t p = 0; p < roots.size(); ++p) {
    const auto found = scan_project(roots[p], catalog);
    std::map<std::string, std::set<std::size_t>> apis_per_file;
    for (const auto& f : found) apis_per_file[f.site.unit_path].insert(f.record);

    for (const auto& f : found) {
      const auto& record = catalog.records()[f.record];
      if (!o.api.empty() && record.deprecated.canonical() != o.api && record.deprecated.display() != o.api) continue;
      if (!selectors.empty()) {
        bool hit = false;
        for (std::size_t s = 0; s < selectors.size(); ++s) {
          if (selectors[s].file == f.site.unit_path && selectors[s].line == f.site.line) {
            hit = true;
            used_selector[s] = true;
          }
        }
        if (!hit) continue;
      }
      SessionInputs in;
      in.record = record;
      in.usage = f.site;
      in.project_root = roots[p];
      try {
        in.levels = default_level_pair(record, override_levels);
      } catch (const Error& e) {
        throw ConfigError(std::string(e.what()) + "; pass --levels");
      }
      in.session_id = default_session_id(f.site);
      if (roots.size() > 1) in.session_id = roots[p].filename().string() + "/" + in.session_id;
      in.options.max_iterations = o.max_iterations;
      in.options.update_kind = update_kind;
      in.options.keep_changes = o.keep_changes;
      in.options.supplemental_context = context;
      in.options.test_source_dir = o.test_dir;

      const auto n_apis = apis_per_file[f.site.unit_path].size();
      if (update_kind == PromptKind::UpdatePromptA && n_apis > 1) {
        err << "warning: " << f.site.unit_path << " uses " << n_apis
            << " different deprecated APIs; prompt variant A names none of them, so this session cannot aim at "
            << record.deprecated.display() << " alone (multi-API limitation). Run one session per API.\n";
      }
      plan.push_back({p, std::move(in)});
    }
  }
  for (std::size_t s = 0; s < selectors.size(); ++s) {
    if (!used_selector[s]) {
      throw ConfigError("no catalog usage at " + selectors[s].file + ":" + std::to_string(selectors[s].line));
    }
  }
  if (plan.empty()) throw ConfigError("no usages selected");

  const fs::path out_dir = o.out_dir;
  std::error_code ec;
  fs::create_directories(out_dir / "results", ec);
  if (ec) throw ConfigError("cannot create " + (out_dir / "results").string());
  const auto gateway = make_gateway(o, out_dir);

  RunnerConfig rc;
  rc.command = runner_argv;
  rc.timeout = std::chrono::seconds(o.runner_timeout_s);

  // Sessions on one project run in order; distinct projects may overlap.
  std::vector<MigrationSession> results(plan.size());
  std::map<std::size_t, std::vector<std::size_t>> by_project;
  for (std::size_t i = 0; i < plan.size(); ++i) by_project[plan[i].project].push_back(i);
  std::vector<std::vector<std::size_t>> queues;
  for (auto& [p, q] : by_project) queues.push_back(std::move(q));

  std::atomic<std::size_t> next_queue{0};
  auto worker = [&] {
    CommandRunner runner(rc);
    for (std::size_t q; (q = next_queue++) < queues.size();) {
      for (auto i : queues[q]) results[i] = run_session(plan[i].inputs, *gateway, runner);
    }
  };
  const auto n_threads = std::min<std::size_t>(static_cast<std::size_t>(o.jobs), queues.size());
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (std::size_t t = 0; t < n_threads; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }

  std::vector<SessionStatus> statuses;
  for (const auto& s : results) {
    statuses.push_back(s.status);
    const auto path = out_dir / "results" / (sanitize(s.session_id) + ".json");
    std::ofstream f(path, std::ios::trunc);
    f << session_result_json(s).dump(2) << '\n';
    if (!f) err << "error: cannot write " << path.string() << '\n';
    out << s.session_id << "  " << to_string(s.status) << "  iterations=" << s.iteration << '\n';
    if (is_failure(s.status) && !s.history.empty()) err << s.session_id << ": " << s.history.back().outcome << '\n';
  }
  return exit_code_for(statuses);
}

int cmd_report(const Options& o, std::ostream& out, std::ostream&) {
  if (o.out_dir.empty()) throw ConfigError("--out is required");
  const auto format = parse_report_format(o.format);
  if (!format) throw ConfigError("--format must be table, csv or json");
  const fs::path dir = fs::path(o.out_dir) / "results";
  std::vector<fs::path> files;
  std::error_code ec;
  for (const auto& e : fs::directory_iterator(dir, ec)) {
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  }
  if (files.empty()) throw ConfigError("no session results under " + dir.string());
  std::sort(files.begin(), files.end());

  std::vector<SessionResult> results;
  for (const auto& f : files) {
    try {
      results.push_back(parse_session_result(nlohmann::json::parse(detail::read_file(f))));
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(f.string() + ": " + e.what());
    } catch (const Error& e) {
      throw ConfigError(f.string() + ": " + e.what());
    }
  }
  try {
    out << render_report(aggregate(results, o.max_iterations), *format);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  return kExitOk;
}

int cmd_catalog(const Options& o, std::ostream& out, std::ostream& err) {
  const auto catalog = load_catalog_or_throw(o.catalog);
  if (o.write_to.empty()) {
    save_catalog(out, catalog.records());
  } else {
    std::ofstream f(o.write_to, std::ios::trunc);
    save_catalog(f, catalog.records());
    if (!f) throw ConfigError("cannot write " + o.write_to);
  }
  err << catalog.records().size() << " record(s) valid\n";
  return kExitOk;
}

}  // namespace

int exit_code_for(const std::vector<SessionStatus>& statuses) {
  if (std::any_of(statuses.begin(), statuses.end(), [](SessionStatus s) { return !is_success(s); })) {
    return kExitFailed;
  }
  if (std::any_of(statuses.begin(), statuses.end(),
                  [](SessionStatus s) { return s == SessionStatus::SucceededValidatorFlagged; })) {
    return kExitFlagged;
  }
  return kExitOk;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Update deprecated Android API usages with an LLM, checked by generated Robolectric tests"};
  app.name("evolve");
  app.require_subcommand(1);

  auto* scan = app.add_subcommand("scan", "List usages of catalog APIs in a project");
  scan->add_option("--catalog", o.catalog, "Deprecation catalog (JSONL)")->required();
  scan->add_option("--project", o.projects, "Project root")->required();

  auto* migrate = app.add_subcommand("migrate", "Run one update session per selected usage");
  migrate->add_option("--catalog", o.catalog, "Deprecation catalog (JSONL)")->required();
  migrate->add_option("--project", o.projects, "Project root; repeat for several projects")->required();
  migrate->add_option("--provider", o.provider, "live, replay or record")
      ->check(CLI::IsMember({"live", "replay", "record"}));
  migrate->add_option("--transcript", o.transcript, "Transcript to replay from or record to");
  migrate->add_option("--runner", o.runner, "Test runner command line")->required();
  migrate->add_option("--levels", o.levels, "OLD:NEW SDK levels for every session");
  migrate->add_option("--max-iterations", o.max_iterations, "Refinement bound");
  migrate->add_option("--prompt-variant", o.variant, "full, A or B");
  migrate->add_flag("--keep-changes", o.keep_changes, "Leave successful updates in the project");
  migrate->add_option("--out", o.out_dir, "Output directory")->required();
  migrate->add_option("--usage", o.usages, "FILE:LINE selector; repeatable");
  migrate->add_option("--api", o.api, "Only usages of this API");
  migrate->add_option("--jobs", o.jobs, "Projects migrated in parallel");
  migrate->add_option("--model", o.model, "Chat model");
  migrate->add_option("--base-url", o.base_url, "Chat-completion endpoint prefix");
  migrate->add_flag("--relaxed-replay", o.relaxed_replay, "Replay by sequence only, ignoring prompt text");
  migrate->add_option("--runner-timeout", o.runner_timeout_s, "Seconds per runner invocation");
  migrate->add_option("--test-dir", o.test_dir, "Test source root inside the project");
  migrate->add_option("--context", o.context_file, "Extra source appended to refinement prompts");

  auto* report = app.add_subcommand("report", "Aggregate session results");
  report->add_option("--out", o.out_dir, "Directory given to migrate --out")->required();
  report->add_option("--format", o.format, "table, csv or json");
  report->add_option("--max-iterations", o.max_iterations, "Refinement bound used by the runs");

  auto* cat = app.add_subcommand("catalog", "Validate and normalize a catalog");
  cat->add_option("--catalog", o.catalog, "Deprecation catalog (JSONL)")->required();
  cat->add_option("--write", o.write_to, "Write the normalized catalog here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (scan->parsed()) return cmd_scan(o, out, err);
    if (migrate->parsed()) return cmd_migrate(o, out, err);
    if (report->parsed()) return cmd_report(o, out, err);
    return cmd_catalog(o, out, err);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }
}

}  // namespace evolve
