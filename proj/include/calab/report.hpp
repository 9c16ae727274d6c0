#pragma once

#include "json.hpp"

#include <string>
#include <vector>

namespace calab {

using Json = nlohmann::json;

/// One pass/fail record. `comparison` says how value meets expected:
/// "within" |value - expected| <= tolerance, "at_most" value <= expected + tolerance,
/// "at_least" value >= expected - tolerance.
struct Check {
    std::string name;
    double value = 0.0;
    double expected = 0.0;
    double tolerance = 0.0;
    std::string comparison;
    bool pass = false;
};

Check within(std::string name, double value, double expected, double tolerance);
Check at_most(std::string name, double value, double bound, double tolerance = 0.0);
Check at_least(std::string name, double value, double bound, double tolerance = 0.0);
/// A boolean outcome recorded as value 1/0 against expected 1.
Check holds(std::string name, bool ok);

bool all_pass(const std::vector<Check>& checks);

/// Non-finite values serialize as null.
Json number(double v);
Json to_json(const Check& c);
Json to_json(const std::vector<Check>& checks);

constexpr const char* report_schema = "calab-report/1";

/// Deterministic text: sorted keys, two-space indent, trailing newline.
std::string dump(const Json& j);

/// Round-trip formatting for CSV cells; empty for non-finite values.
std::string csv_number(double v);
/// Quotes a cell when it contains a comma, quote or newline.
std::string csv_cell(const std::string& s);
std::string csv_line(const std::vector<std::string>& cells);

} // namespace calab
