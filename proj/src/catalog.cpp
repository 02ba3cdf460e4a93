#include "evolve/catalog.hpp"

#include <cctype>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "evolve/error.hpp"
#include "text_util.hpp"

namespace evolve {
namespace {

using ordered_json = nlohmann::ordered_json;

bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  auto head = static_cast<unsigned char>(s.front());
  if (!(std::isalpha(head) || head == '_' || head == '$')) return false;
  for (char c : s) {
    auto u = static_cast<unsigned char>(c);
    if (!(std::isalnum(u) || u == '_' || u == '$')) return false;
  }
  return true;
}

[[noreturn]] void malformed(std::string_view text, const std::string& why) {
  throw Error(ErrorCode::MalformedSignature, "'" + std::string(text) + "': " + why);
}

std::vector<std::string> split_params(std::string_view inner, std::string_view whole) {
  std::vector<std::string> params;
  if (detail::trim(inner).empty()) return params;
  int nesting = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= inner.size(); ++i) {
    char c = i < inner.size() ? inner[i] : ',';
    if (c == '<' || c == '[') ++nesting;
    if (c == '>' || c == ']') --nesting;
    if (nesting < 0) malformed(whole, "unbalanced brackets in parameter list");
    if (c == ',' && nesting == 0) {
      auto piece = detail::trim(inner.substr(start, i - start));
      if (piece.empty()) malformed(whole, "empty parameter type");
      params.emplace_back(piece);
      start = i + 1;
    }
  }
  if (nesting != 0) malformed(whole, "unbalanced brackets in parameter list");
  return params;
}

}  // namespace

std::string ApiSignature::canonical() const {
  std::string out;
  if (!package_path.empty()) out += package_path + ".";
  out += class_name + "#" + member_name + "(" + detail::join(param_types, ", ") + ")";
  return out;
}

std::string ApiSignature::display() const {
  return class_name + "." + member_name + "(" + detail::join(param_types, ", ") + ")";
}

ApiSignature parse_signature(std::string_view raw) {
  const std::string_view text = detail::trim(raw);
  if (text.empty()) malformed(raw, "blank signature");

  const auto open = text.find('(');
  if (open == std::string_view::npos) malformed(text, "missing parameter list");
  int depth = 0;
  for (char c : text) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (depth < 0 || depth > 1) malformed(text, "unbalanced parentheses");
  }
  if (depth != 0 || text.back() != ')') malformed(text, "unbalanced parentheses");
  if (text.find('(', open + 1) != std::string_view::npos) malformed(text, "nested parentheses");

  const std::string_view head = detail::trim(text.substr(0, open));
  std::string_view owner;
  std::string_view member;
  if (auto hash = head.find('#'); hash != std::string_view::npos) {
    owner = head.substr(0, hash);
    member = head.substr(hash + 1);
  } else {
    auto dot = head.rfind('.');
    if (dot == std::string_view::npos) malformed(text, "missing class segment");
    owner = head.substr(0, dot);
    member = head.substr(dot + 1);
  }
  if (member.empty()) malformed(text, "missing member name");
  if (!is_identifier(member)) malformed(text, "member name is not an identifier");
  if (owner.empty()) malformed(text, "empty class segment");

  auto segments = detail::split(owner, '.');
  for (const auto& seg : segments) {
    if (!is_identifier(seg)) malformed(text, "empty or invalid class segment");
  }

  // Leading lowercase segments are the package; the rest is the class path.
  std::size_t first_class = 0;
  while (first_class < segments.size() &&
         std::islower(static_cast<unsigned char>(segments[first_class].front()))) {
    ++first_class;
  }
  if (first_class == segments.size()) first_class = segments.size() - 1;

  ApiSignature sig;
  sig.package_path = detail::join({segments.begin(), segments.begin() + first_class}, ".");
  sig.class_name = detail::join({segments.begin() + first_class, segments.end()}, ".");
  sig.member_name = std::string(member);
  sig.param_types = split_params(text.substr(open + 1, text.size() - open - 2), text);
  return sig;
}

DeprecationRecord parse_record_line(std::string_view line, std::size_t line_no) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(line_no, std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw SchemaError(line_no, "record must be an object");
  for (const auto& [key, _] : doc.items()) {
    if (key != "deprecated" && key != "level" && key != "replacements" && key != "notes") {
      throw SchemaError(line_no, "unknown field '" + key + "'");
    }
  }

  DeprecationRecord record;
  try {
    if (!doc.contains("deprecated") || !doc["deprecated"].is_string()) {
      throw SchemaError(line_no, "'deprecated' must be a string");
    }
    const auto deprecated_text = doc["deprecated"].get<std::string>();
    if (deprecated_text.find('#') == std::string::npos) {
      throw SchemaError(line_no, "'deprecated' must use the canonical Class#member form");
    }
    record.deprecated = parse_signature(deprecated_text);

    if (!doc.contains("level") || !doc["level"].is_number_integer()) {
      throw SchemaError(line_no, "'level' must be an integer");
    }
    const auto level = doc["level"].get<long long>();
    if (level < 1 || level > 10000) throw SchemaError(line_no, "'level' must be a positive API level");
    record.deprecation_level = static_cast<int>(level);

    if (!doc.contains("replacements") || !doc["replacements"].is_array() ||
        doc["replacements"].empty()) {
      throw SchemaError(line_no, "'replacements' must be a non-empty array");
    }
    for (const auto& item : doc["replacements"]) {
      if (!item.is_string()) throw SchemaError(line_no, "replacement must be a string");
      auto sig = parse_signature(item.get<std::string>());
      for (const auto& existing : record.replacements) {
        if (existing == sig) throw SchemaError(line_no, "duplicate replacement " + sig.canonical());
      }
      record.replacements.push_back(std::move(sig));
    }

    if (doc.contains("notes")) {
      if (!doc["notes"].is_string()) throw SchemaError(line_no, "'notes' must be a string");
      record.notes = doc["notes"].get<std::string>();
    }
  } catch (const SchemaError&) {
    throw;
  } catch (const Error& e) {
    throw SchemaError(line_no, e.what());
  }
  return record;
}

std::string serialize_record(const DeprecationRecord& record) {
  ordered_json doc;
  doc["deprecated"] = record.deprecated.canonical();
  doc["level"] = record.deprecation_level;
  doc["replacements"] = ordered_json::array();
  for (const auto& r : record.replacements) doc["replacements"].push_back(r.canonical());
  if (record.notes) doc["notes"] = *record.notes;
  return doc.dump();
}

std::vector<DeprecationRecord> load_catalog(std::istream& in) {
  std::vector<DeprecationRecord> records;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    auto record = parse_record_line(line, line_no);
    auto key = record.deprecated.canonical();
    if (!seen.insert(key).second) throw Error(ErrorCode::DuplicateRecord, key);
    records.push_back(std::move(record));
  }
  return records;
}

void save_catalog(std::ostream& out, const std::vector<DeprecationRecord>& records) {
  for (const auto& r : records) out << serialize_record(r) << '\n';
}

Catalog::Catalog(std::vector<DeprecationRecord> records) : records_(std::move(records)) {
  std::set<std::string> seen;
  for (const auto& r : records_) {
    auto key = r.deprecated.canonical();
    if (!seen.insert(key).second) throw Error(ErrorCode::DuplicateRecord, key);
  }
}

Catalog Catalog::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::FileMissing, "cannot read catalog " + path.string());
  return Catalog(load_catalog(in));
}

std::optional<DeprecationRecord> Catalog::lookup(std::string_view signature_text) const {
  ApiSignature query;
  try {
    query = parse_signature(signature_text);
  } catch (const Error&) {
    return std::nullopt;
  }

  const bool canonical_query = signature_text.find('#') != std::string_view::npos;
  if (canonical_query) {
    for (const auto& r : records_) {
      if (r.deprecated == query) return r;
    }
    return std::nullopt;
  }

  const auto class_matches = [&](const std::string& stored) {
    if (!query.package_path.empty()) return false;
    if (stored == query.class_name) return true;
    return stored.size() > query.class_name.size() &&
           stored.ends_with("." + query.class_name);
  };
  const DeprecationRecord* found = nullptr;
  for (const auto& r : records_) {
    const auto& sig = r.deprecated;
    const bool hit = query.package_path.empty()
                         ? class_matches(sig.class_name)
                         : (sig.package_path == query.package_path && sig.class_name == query.class_name);
    if (!hit || sig.member_name != query.member_name || sig.param_types != query.param_types) continue;
    if (found != nullptr) {
      throw Error(ErrorCode::AmbiguousSignature,
                  std::string(signature_text) + " matches " + found->deprecated.canonical() +
                      " and " + sig.canonical());
    }
    found = &r;
  }
  if (found == nullptr) return std::nullopt;
  return *found;
}

}  // namespace evolve
