#include "calab/report.hpp"

#include <cmath>
#include <cstdio>

namespace calab {

namespace {

Check make(std::string name, double value, double expected, double tolerance, const char* cmp, bool pass)
{
    return {std::move(name), value, expected, tolerance, cmp, pass && std::isfinite(value)};
}

} // namespace

Check within(std::string name, double value, double expected, double tolerance)
{
    return make(std::move(name), value, expected, tolerance, "within", std::abs(value - expected) <= tolerance);
}

Check at_most(std::string name, double value, double bound, double tolerance)
{
    return make(std::move(name), value, bound, tolerance, "at_most", value <= bound + tolerance);
}

Check at_least(std::string name, double value, double bound, double tolerance)
{
    return make(std::move(name), value, bound, tolerance, "at_least", value >= bound - tolerance);
}

Check holds(std::string name, bool ok)
{
    return make(std::move(name), ok ? 1.0 : 0.0, 1.0, 0.0, "within", ok);
}

bool all_pass(const std::vector<Check>& checks)
{
    for (const auto& c : checks)
        if (!c.pass) return false;
    return true;
}

Json number(double v)
{
    return std::isfinite(v) ? Json(v) : Json(nullptr);
}

Json to_json(const Check& c)
{
    return {{"name", c.name}, {"value", number(c.value)}, {"expected", number(c.expected)},
            {"tolerance", number(c.tolerance)}, {"comparison", c.comparison}, {"pass", c.pass}};
}

Json to_json(const std::vector<Check>& checks)
{
    Json a = Json::array();
    for (const auto& c : checks) a.push_back(to_json(c));
    return a;
}

std::string dump(const Json& j)
{
    return j.dump(2) + "\n";
}

std::string csv_number(double v)
{
    if (!std::isfinite(v)) return "";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string csv_cell(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + "\"";
}

std::string csv_line(const std::vector<std::string>& cells)
{
    std::string out;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out += ',';
        out += csv_cell(cells[i]);
    }
    return out + "\n";
}

} // namespace calab
