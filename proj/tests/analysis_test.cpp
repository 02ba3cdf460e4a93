#include <gtest/gtest.h>

#include <sstream>

#include "evolve/analysis.hpp"
#include "support.hpp"

using namespace evolve;
using testing_support::fixtures;
using testing_support::slurp;

namespace {

DeprecationRecord record(const std::string& deprecated, int level, std::vector<std::string> replacements) {
  DeprecationRecord r;
  r.deprecated = parse_signature(deprecated);
  r.deprecation_level = level;
  for (const auto& s : replacements) r.replacements.push_back(parse_signature(s));
  return r;
}

DeprecationRecord external_storage() {
  return record("android.os.Environment#getExternalStorageDirectory()", 21,
                {"android.content.Context#getExternalFilesDir(java.lang.String)"});
}

DeprecationRecord timepicker() {
  return record("android.widget.TimePicker#getCurrentHour()", 23, {"android.widget.TimePicker#getHour()"});
}

DeprecationRecord gps_listener() {
  return record("android.location.LocationManager#addGpsStatusListener(android.location.GpsStatus.Listener)", 24,
                {"android.location.LocationManager#registerGnssStatusCallback(android.location.GnssStatus.Callback)"});
}

std::string listing(const std::string& name) { return slurp(fixtures() / "listings" / name); }

// Lines holding `.member(` outside a leading line comment, found by plain
// string search over the raw text.
std::vector<int> brute_force_lines(const std::string& text, const std::string& member) {
  std::vector<int> lines;
  std::istringstream in(text);
  std::string line;
  for (int n = 1; std::getline(in, line); ++n) {
    const auto first = line.find_first_not_of(" \t");
    if (first != std::string::npos && line.compare(first, 2, "//") == 0) continue;
    if (line.find("." + member + "(") != std::string::npos) lines.push_back(n);
  }
  return lines;
}

std::vector<int> lines_of(const std::vector<UsageSite>& sites) {
  std::vector<int> out;
  for (const auto& s : sites) out.push_back(s.line);
  return out;
}

}  // namespace

TEST(FindUsages, ExternalStorageUsageHasOneSite) {
  const SourceUnit unit("Storage.java", listing("external_storage_usage.java"));
  const auto sites = find_usages(unit, external_storage());
  ASSERT_EQ(sites.size(), 1u);
  EXPECT_EQ(sites[0].unit_path, "Storage.java");
  EXPECT_EQ(sites[0].line, 2);
  EXPECT_EQ(sites[0].column, 39);
  EXPECT_EQ(sites[0].matched_member, "getExternalStorageDirectory");
  EXPECT_FALSE(sites[0].enclosing_function);
}

TEST(FindUsages, NoSuchMemberMeansNoSites) {
  const SourceUnit unit("Toast.java", listing("toast_util.java"));
  EXPECT_TRUE(find_usages(unit, timepicker()).empty());
}

TEST(FindUsages, ConcatenatedCopiesShiftByLineCount) {
  const auto once = listing("external_storage_usage.java");
  const auto twice = once + once;
  const SourceUnit unit("Twice.java", twice);
  const auto sites = find_usages(unit, external_storage());
  EXPECT_EQ(lines_of(sites), brute_force_lines(twice, "getExternalStorageDirectory"));
  ASSERT_EQ(sites.size(), 2u);
  EXPECT_EQ(sites[1].line, sites[0].line + SourceUnit("Once.java", once).line_count());
}

TEST(FindUsages, MatchesAgreeWithLineScanOnEveryFixture) {
  for (const auto* name : {"gps_listener_callback_update.java", "gps_listener_uninitialized_callback.java",
                           "gps_listener_with_context.java", "gps_listener_single_test.java",
                           "gps_listener_split_tests.java"}) {
    const auto text = listing(name);
    EXPECT_EQ(lines_of(find_usages(SourceUnit(name, text), gps_listener())),
              brute_force_lines(text, "addGpsStatusListener"))
        << name;
  }
}

TEST(FindUsages, BareCallsAndLongerNamesAreNotSites) {
  const SourceUnit unit("A.java", "class A { void m() { getCurrentHour(); p.getCurrentHourOfDay(); p.getCurrentHour; } }");
  EXPECT_TRUE(find_usages(unit, timepicker()).empty());
}

TEST(FindUsages, SplitAcrossLinesReportsTheMemberLine) {
  const SourceUnit unit("A.java", "class A {\n  int m() {\n    return this.picker\n        .getCurrentHour ();\n  }\n}\n");
  const auto sites = find_usages(unit, timepicker());
  ASSERT_EQ(sites.size(), 1u);
  EXPECT_EQ(sites[0].line, 4);
  EXPECT_EQ(sites[0].column, 10);
  EXPECT_EQ(sites[0].enclosing_function, "m");
  EXPECT_EQ(sites[0].enclosing_span, (LineSpan{2, 5}));
}

TEST(EnclosingFunction, CallbackUpdateResolvesToNamedMethods) {
  const SourceUnit unit("Provider.java", listing("gps_listener_callback_update.java"));
  const auto sites = find_usages(unit, gps_listener());
  ASSERT_EQ(sites.size(), 1u);
  EXPECT_EQ(sites[0].line, 21);
  EXPECT_EQ(sites[0].enclosing_function, "addGpsStatusListener");
  EXPECT_EQ(sites[0].enclosing_span, (LineSpan{1, 23}));

  // The anonymous class body has no name of its own; its overriding method does.
  EXPECT_EQ(enclosing_function(unit, 5)->name, "addGpsStatusListener");
  EXPECT_EQ(enclosing_function(unit, 15)->name, "addGpsStatusListener");
  const auto inner = enclosing_function(unit, 11);
  ASSERT_TRUE(inner);
  EXPECT_EQ(inner->name, "onSatelliteStatusChanged");
  EXPECT_EQ(inner->span, (LineSpan{7, 13}));
}

TEST(EnclosingFunction, FieldLineIsOutsideAnyMethod) {
  const SourceUnit unit("Provider.java", listing("gps_listener_uninitialized_callback.java"));
  EXPECT_FALSE(enclosing_function(unit, 1));
  EXPECT_EQ(enclosing_function(unit, 2)->name, "addGpsStatusListener");
}

TEST(MethodScopes, ControlBlocksLambdasAndTypesAreNotMethods) {
  const std::string text =
      "public class A<T> extends B implements C {\n"                // 1
      "  static { init(); }\n"                                      // 2
      "  @Override\n"                                               // 3
      "  public <R> List<R> map(Function<T, R> f) throws IOException {\n"  // 4
      "    if (f != null) { for (int i = 0; i < 3; i++) { g(); } }\n"      // 5
      "    Runnable r = () -> { run(); };\n"                        // 6
      "    Object o = new Object() { };\n"                          // 7
      "    synchronized (this) { h(); }\n"                          // 8
      "    try { k(); } catch (Exception e) { } \n"                 // 9
      "    return null;\n"                                          // 10
      "  }\n"                                                       // 11
      "  A(int x) { super(x); }\n"                                  // 12
      "  int[] arr() { return new int[] { 1 }; }\n"                 // 13
      "}\n";
  const auto scopes = method_scopes(SourceUnit("A.java", text));
  ASSERT_EQ(scopes.size(), 3u);
  EXPECT_EQ(scopes[0], (FunctionScope{"map", {4, 11}}));
  EXPECT_EQ(scopes[1], (FunctionScope{"A", {12, 12}}));
  EXPECT_EQ(scopes[2], (FunctionScope{"arr", {13, 13}}));
}

TEST(MethodScopes, KotlinFunctionsWithReturnTypes) {
  const std::string text =
      "class Clock(private val picker: TimePicker) {\n"
      "    fun hour(): Int {\n"
      "        return picker.getCurrentHour()\n"
      "    }\n"
      "}\n";
  const SourceUnit unit("Clock.kt", text);
  const auto sites = find_usages(unit, timepicker());
  ASSERT_EQ(sites.size(), 1u);
  EXPECT_EQ(sites[0].enclosing_function, "hour");
}

TEST(MethodScopes, UnbalancedFileClosesAtLastLine) {
  const SourceUnit unit("A.java", "class A {\n  void m() {\n    x.y();\n");
  const auto scopes = method_scopes(unit);
  ASSERT_EQ(scopes.size(), 1u);
  EXPECT_EQ(scopes[0], (FunctionScope{"m", {2, 3}}));
}

TEST(HasCall, DeclarationsAndAnnotationsAreNotCalls) {
  EXPECT_FALSE(has_call(SourceUnit("a", "public void getHour() {}"), "getHour"));
  EXPECT_FALSE(has_call(SourceUnit("a", "List<X> getHour() {}"), "getHour"));
  EXPECT_FALSE(has_call(SourceUnit("a", "@getHour(1) int x;"), "getHour"));
  EXPECT_FALSE(has_call(SourceUnit("a", "// t.getHour()\n\"getHour()\""), "getHour"));
  EXPECT_TRUE(has_call(SourceUnit("a", "int h = t.getHour();"), "getHour"));
  EXPECT_TRUE(has_call(SourceUnit("a", "return getHour();"), "getHour"));
  EXPECT_TRUE(has_call(SourceUnit("a", "x = new Callback();"), "Callback"));
  EXPECT_TRUE(has_call(SourceUnit("a", "f(getExternalFilesDir(null));"), "getExternalFilesDir"));
}

TEST(HasSdkGuard, ComparisonMustShareTheStatement) {
  EXPECT_TRUE(has_sdk_guard(SourceUnit("a", "if (Build.VERSION.SDK_INT < 23) {}")));
  EXPECT_TRUE(has_sdk_guard(SourceUnit("a", "if (android.os.Build.VERSION.SDK_INT >=\n android.os.Build.VERSION_CODES.N) {}")));
  EXPECT_TRUE(has_sdk_guard(SourceUnit("a", "boolean b = 21 <= Build.VERSION.SDK_INT || Build.VERSION.SDK_INT == 3;")));
  EXPECT_FALSE(has_sdk_guard(SourceUnit("a", "int v = Build.VERSION.SDK_INT; if (v >= 23) {}")));
  EXPECT_FALSE(has_sdk_guard(SourceUnit("a", "// if (Build.VERSION.SDK_INT >= 23)\n")));
  EXPECT_FALSE(has_sdk_guard(SourceUnit("a", "if (VERSION.SDK_INT >= 23) {}")));
}

TEST(Verdict, TruthTableOverAllEightCombinations) {
  for (int bits = 0; bits < 8; ++bits) {
    const bool r = bits & 1, g = bits & 2, d = bits & 4;
    const auto v = classify_verdict(r, g, d);
    EXPECT_EQ(v == Verdict::Valid, r && g && d) << bits;
    EXPECT_EQ(v == Verdict::MissingReplacement, !r) << bits;
    EXPECT_EQ(v == Verdict::ReplacementOnly, r && !d) << bits;
    EXPECT_EQ(v == Verdict::MissingGuard, r && d && !g) << bits;
  }
}

TEST(Verdict, NamesRoundTrip) {
  for (auto v : {Verdict::Valid, Verdict::MissingReplacement, Verdict::MissingGuard, Verdict::ReplacementOnly}) {
    EXPECT_EQ(parse_verdict(to_string(v)), v);
  }
  EXPECT_FALSE(parse_verdict("valid"));
}

TEST(ValidateUpdate, GuardedTimePickerIsValid) {
  EXPECT_EQ(validate_update(listing("timepicker_guarded_update.java"), timepicker()),
            (UpdateValidation{true, true, true, Verdict::Valid}));
}

TEST(ValidateUpdate, ReplacementOnlyTimePicker) {
  EXPECT_EQ(validate_update(listing("timepicker_replacement_only.java"), timepicker()),
            (UpdateValidation{true, false, false, Verdict::ReplacementOnly}));
}

TEST(ValidateUpdate, UnchangedSnippetMissesTheReplacement) {
  EXPECT_EQ(validate_update(listing("timepicker_prompt_snippet.java"), timepicker()),
            (UpdateValidation{false, false, true, Verdict::MissingReplacement}));
}

TEST(ValidateUpdate, UnguardedPairIsMissingGuard) {
  EXPECT_EQ(validate_update(listing("external_storage_usage.java"), external_storage()),
            (UpdateValidation{true, false, true, Verdict::MissingGuard}));
}

TEST(ValidateUpdate, GuardedStorageIsValid) {
  EXPECT_EQ(validate_update(listing("external_storage_guarded.java"), external_storage()),
            (UpdateValidation{true, true, true, Verdict::Valid}));
}

TEST(ValidateUpdate, CallbackUpdatesPassStructuralChecks) {
  for (const auto* name :
       {"gps_listener_callback_update.java", "gps_listener_uninitialized_callback.java", "gps_listener_with_context.java"}) {
    EXPECT_EQ(validate_update(listing(name), gps_listener()), (UpdateValidation{true, true, true, Verdict::Valid}))
        << name;
  }
}

TEST(ValidateUpdate, EveryReplacementMustBeCalled) {
  const auto r = record("android.net.ConnectivityManager#getAllNetworkInfo()", 23,
                        {"android.net.ConnectivityManager#getAllNetworks()",
                         "android.net.ConnectivityManager#getNetworkInfo(android.net.Network)"});
  const std::string one = "if (Build.VERSION.SDK_INT >= 23) { cm.getAllNetworks(); } else { cm.getAllNetworkInfo(); }";
  const std::string both =
      "if (Build.VERSION.SDK_INT >= 23) { for (Network n : cm.getAllNetworks()) cm.getNetworkInfo(n); }"
      " else { cm.getAllNetworkInfo(); }";
  EXPECT_EQ(validate_update(one, r).verdict, Verdict::MissingReplacement);
  EXPECT_EQ(validate_update(both, r).verdict, Verdict::Valid);
}
