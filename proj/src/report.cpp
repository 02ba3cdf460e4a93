#include "evolve/report.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include <nlohmann/json.hpp>

#include "evolve/error.hpp"

namespace evolve {
namespace {

Error invalid(const std::string& why) { return Error(ErrorCode::InvalidRecord, why); }

std::optional<std::int64_t> optional_ms(const nlohmann::json& doc, const char* key) {
  if (!doc.contains(key) || doc[key].is_null()) return std::nullopt;
  if (!doc[key].is_number_integer() || doc[key].get<std::int64_t>() < 0) {
    throw invalid(std::string("timings_ms.") + key + " must be a non-negative integer or null");
  }
  return doc[key].get<std::int64_t>();
}

std::string fixed1(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1f", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

ApiResultRow totals(const std::vector<ApiResultRow>& rows) {
  ApiResultRow t{"Total"};
  for (const auto& r : rows) {
    t.usages += r.usages;
    t.succeeded += r.succeeded;
    t.flagged += r.flagged;
    t.failed += r.failed;
  }
  return t;
}

std::string render_table(const Aggregates& a) {
  std::vector<ApiResultRow> rows = a.rows;
  rows.push_back(totals(a.rows));
  const std::vector<std::string> header = {"API", "#Usages", "Succeeded", "Flagged", "Failed"};
  std::vector<std::vector<std::string>> cells;
  for (const auto& r : rows) {
    cells.push_back({r.api, std::to_string(r.usages), std::to_string(r.succeeded), std::to_string(r.flagged),
                     std::to_string(r.failed)});
  }
  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) {
    width[c] = header[c].size();
    for (const auto& row : cells) width[c] = std::max(width[c], row[c].size());
  }
  std::ostringstream out;
  auto emit = [&](const std::vector<std::string>& row) {
    std::string line = row[0] + std::string(width[0] - row[0].size(), ' ');
    for (std::size_t c = 1; c < row.size(); ++c) line += "  " + std::string(width[c] - row[c].size(), ' ') + row[c];
    out << line << '\n';
  };
  emit(header);
  std::size_t rule = width[0];
  for (std::size_t c = 1; c < width.size(); ++c) rule += 2 + width[c];
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i + 1 == cells.size()) out << std::string(rule, '-') << '\n';
    emit(cells[i]);
  }

  out << "\nIterations  Sessions\n";
  for (const auto& [k, v] : a.histogram.buckets) {
    out << std::string(10 - std::min<std::size_t>(10, std::to_string(k).size()), ' ') << k << "  "
        << std::string(8 - std::min<std::size_t>(8, std::to_string(v).size()), ' ') << v << '\n';
  }
  const auto failed = std::to_string(a.histogram.failed);
  const auto total = std::to_string(a.histogram.total);
  out << "    failed  " << std::string(8 - std::min<std::size_t>(8, failed.size()), ' ') << failed << '\n';
  out << "     total  " << std::string(8 - std::min<std::size_t>(8, total.size()), ' ') << total << '\n';

  out << "\nPhase        mean ms  samples\n";
  auto phase = [&](const char* name, const PhaseMean& m) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%-10s  %9s  %7d\n", name, fixed1(m.mean_ms).c_str(), m.samples);
    out << buf;
  };
  phase("update", a.timings.update);
  phase("test_gen", a.timings.test_gen);
  phase("refinement", a.timings.refinement);
  return out.str();
}

std::string render_csv(const Aggregates& a) {
  std::ostringstream out;
  out << "api,usages,succeeded,flagged,failed\n";
  auto emit = [&](const ApiResultRow& r) {
    out << csv_field(r.api) << ',' << r.usages << ',' << r.succeeded << ',' << r.flagged << ',' << r.failed << '\n';
  };
  for (const auto& r : a.rows) emit(r);
  emit(totals(a.rows));
  out << "\niterations,sessions\n";
  for (const auto& [k, v] : a.histogram.buckets) out << k << ',' << v << '\n';
  out << "failed," << a.histogram.failed << "\ntotal," << a.histogram.total << '\n';
  out << "\nphase,mean_ms,samples\n";
  out << "update," << fixed1(a.timings.update.mean_ms) << ',' << a.timings.update.samples << '\n';
  out << "test_gen," << fixed1(a.timings.test_gen.mean_ms) << ',' << a.timings.test_gen.samples << '\n';
  out << "refinement," << fixed1(a.timings.refinement.mean_ms) << ',' << a.timings.refinement.samples << '\n';
  return out.str();
}

std::string render_json(const Aggregates& a) {
  auto row_json = [](const ApiResultRow& r) {
    return nlohmann::ordered_json{{"api", r.api},
                                  {"usages", r.usages},
                                  {"succeeded", r.succeeded},
                                  {"flagged", r.flagged},
                                  {"failed", r.failed}};
  };
  nlohmann::ordered_json doc;
  doc["rows"] = nlohmann::ordered_json::array();
  for (const auto& r : a.rows) doc["rows"].push_back(row_json(r));
  auto total = row_json(totals(a.rows));
  total.erase("api");
  doc["total"] = std::move(total);
  nlohmann::ordered_json buckets = nlohmann::ordered_json::object();
  for (const auto& [k, v] : a.histogram.buckets) buckets[std::to_string(k)] = v;
  doc["histogram"] = {{"buckets", std::move(buckets)}, {"failed", a.histogram.failed}, {"total", a.histogram.total}};
  auto phase = [](const PhaseMean& m) { return nlohmann::ordered_json{{"mean", m.mean_ms}, {"samples", m.samples}}; };
  doc["timings_ms"] = {{"update", phase(a.timings.update)},
                       {"test_gen", phase(a.timings.test_gen)},
                       {"refinement", phase(a.timings.refinement)}};
  return doc.dump(2) + "\n";
}

}  // namespace

SessionResult parse_session_result(const nlohmann::json& doc) {
  if (!doc.is_object()) throw invalid("result must be a JSON object");
  SessionResult r;
  try {
    r.session = doc.at("session").get<std::string>();
    r.api = doc.at("api").get<std::string>();
    const auto status = doc.at("status").get<std::string>();
    const auto parsed = parse_session_status(status);
    if (!parsed) throw invalid("unknown status '" + status + "'");
    r.status = *parsed;
    if (!doc.at("iterations").is_number_integer()) throw invalid("iterations must be an integer");
    r.iterations = doc["iterations"].get<int>();
    if (doc.contains("timings_ms") && !doc["timings_ms"].is_null()) {
      const auto& t = doc["timings_ms"];
      if (!t.is_object()) throw invalid("timings_ms must be an object");
      r.update_ms = optional_ms(t, "update");
      r.test_gen_ms = optional_ms(t, "test_gen");
      if (t.contains("refinements")) {
        for (const auto& v : t["refinements"]) {
          if (!v.is_number_integer() || v.get<std::int64_t>() < 0) throw invalid("bad refinement timing");
          r.refinements_ms.push_back(v.get<std::int64_t>());
        }
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw invalid(e.what());
  }
  return r;
}

SessionResult to_result(const MigrationSession& s) {
  return {s.session_id,           s.record.deprecated.canonical(), s.status, s.iteration, s.timings.update_ms,
          s.timings.test_gen_ms, s.timings.refinements_ms};
}

Aggregates aggregate(const std::vector<SessionResult>& results, int max_iterations) {
  if (max_iterations < 0) throw invalid("max_iterations must be >= 0");
  Aggregates a;
  a.max_iterations = max_iterations;
  for (int k = 0; k <= max_iterations; ++k) a.histogram.buckets[k] = 0;

  std::map<std::string, ApiResultRow> rows;
  // Integer sums keep the means independent of input order.
  std::int64_t sums[3] = {0, 0, 0};
  for (const auto& r : results) {
    if (!is_terminal(r.status)) {
      throw Error(ErrorCode::NonTerminalRecord, r.session + " has status " + std::string(to_string(r.status)));
    }
    if (r.iterations < 0 || r.iterations > max_iterations) {
      throw invalid(r.session + " reports " + std::to_string(r.iterations) + " iterations, bound is " +
                    std::to_string(max_iterations));
    }
    auto& row = rows[r.api];
    row.api = r.api;
    ++row.usages;
    if (r.status == SessionStatus::Succeeded) ++row.succeeded;
    if (r.status == SessionStatus::SucceededValidatorFlagged) ++row.flagged;
    if (is_failure(r.status)) {
      ++row.failed;
      ++a.histogram.failed;
    } else {
      ++a.histogram.buckets[r.iterations];
    }
    ++a.histogram.total;
    if (r.update_ms) {
      sums[0] += *r.update_ms;
      ++a.timings.update.samples;
    }
    if (r.test_gen_ms) {
      sums[1] += *r.test_gen_ms;
      ++a.timings.test_gen.samples;
    }
    for (auto ms : r.refinements_ms) {
      sums[2] += ms;
      ++a.timings.refinement.samples;
    }
  }
  PhaseMean* phases[3] = {&a.timings.update, &a.timings.test_gen, &a.timings.refinement};
  for (int i = 0; i < 3; ++i) {
    if (phases[i]->samples > 0) phases[i]->mean_ms = static_cast<double>(sums[i]) / phases[i]->samples;
  }
  for (auto& [api, row] : rows) a.rows.push_back(std::move(row));
  return a;
}

std::optional<ReportFormat> parse_report_format(std::string_view text) noexcept {
  if (text == "table") return ReportFormat::PlainTable;
  if (text == "csv") return ReportFormat::DelimitedValues;
  if (text == "json") return ReportFormat::StructuredDocument;
  return std::nullopt;
}

std::string render_report(const Aggregates& aggregates, ReportFormat format) {
  switch (format) {
    case ReportFormat::PlainTable: return render_table(aggregates);
    case ReportFormat::DelimitedValues: return render_csv(aggregates);
    case ReportFormat::StructuredDocument: return render_json(aggregates);
  }
  return {};
}

}  // namespace evolve
