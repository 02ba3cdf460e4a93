#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace evolve {

/// A method signature as it appears in API difference reports.
///
/// `class_name` may itself be dotted for nested types
/// (`Notification.Builder`); the package is the run of leading segments that
/// start with a lowercase letter. Parameter types are kept verbatim and never
/// resolved.
struct ApiSignature {
  std::string package_path;
  std::string class_name;
  std::string member_name;
  std::vector<std::string> param_types;

  bool operator==(const ApiSignature&) const = default;

  /// `package.Class#member(type1, type2)`
  std::string canonical() const;
  /// `Class.member(type1, type2)`
  std::string display() const;
};

/// Accepts canonical (`a.b.C#m(t)`) and display (`C.m(t)`) forms.
/// Throws Error{MalformedSignature}.
ApiSignature parse_signature(std::string_view text);

struct DeprecationRecord {
  ApiSignature deprecated;
  int deprecation_level = 0;
  std::vector<ApiSignature> replacements;
  std::optional<std::string> notes;

  bool operator==(const DeprecationRecord&) const = default;
};

/// Parses one catalog line. Throws SchemaError tagged with `line_no`.
DeprecationRecord parse_record_line(std::string_view line, std::size_t line_no);
std::string serialize_record(const DeprecationRecord& record);

/// Reads line-delimited records; blank lines are skipped. Throws SchemaError
/// or Error{DuplicateRecord}.
std::vector<DeprecationRecord> load_catalog(std::istream& in);
void save_catalog(std::ostream& out, const std::vector<DeprecationRecord>& records);

/// Immutable after construction, so concurrent readers need no locking.
class Catalog {
 public:
  Catalog() = default;
  explicit Catalog(std::vector<DeprecationRecord> records);

  static Catalog from_file(const std::filesystem::path& path);

  const std::vector<DeprecationRecord>& records() const noexcept { return records_; }
  bool empty() const noexcept { return records_.empty(); }

  /// Canonical queries match exactly. Display queries match on class, member
  /// and parameter list, where the query class may be the trailing part of a
  /// nested class path. Throws Error{AmbiguousSignature} when a display query
  /// hits more than one record; malformed queries yield no result.
  std::optional<DeprecationRecord> lookup(std::string_view signature_text) const;

 private:
  std::vector<DeprecationRecord> records_;
};

}  // namespace evolve
