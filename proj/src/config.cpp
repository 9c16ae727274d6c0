#include "calab/config.hpp"

#include <cmath>

namespace calab {

namespace {

void expect_object(const Json& j, const std::string& what)
{
    if (!j.is_object()) throw ConfigError(what + " must be a JSON object");
}

} // namespace

double get_number(const Json& j, const std::string& key)
{
    if (!j.contains(key)) throw ConfigError("missing key '" + key + "'");
    const Json& v = j.at(key);
    if (!v.is_number()) throw ConfigError("'" + key + "' must be a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError("'" + key + "' must be finite");
    return x;
}

double get_number(const Json& j, const std::string& key, double fallback)
{
    return j.contains(key) ? get_number(j, key) : fallback;
}

int get_int(const Json& j, const std::string& key, int fallback)
{
    if (!j.contains(key)) return fallback;
    const Json& v = j.at(key);
    if (!v.is_number_integer()) throw ConfigError("'" + key + "' must be an integer");
    return v.get<int>();
}

bool get_bool(const Json& j, const std::string& key, bool fallback)
{
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_boolean()) throw ConfigError("'" + key + "' must be a boolean");
    return j.at(key).get<bool>();
}

std::string get_string(const Json& j, const std::string& key, const std::string& fallback)
{
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_string()) throw ConfigError("'" + key + "' must be a string");
    return j.at(key).get<std::string>();
}

Mat get_matrix(const Json& j, int n)
{
    if (!j.is_array() || static_cast<int>(j.size()) != n) throw ConfigError("matrix must have " + std::to_string(n) + " rows");
    Mat m(n, n);
    for (int i = 0; i < n; ++i) {
        const Json& row = j[static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<int>(row.size()) != n) throw ConfigError("matrix rows must have " + std::to_string(n) + " entries");
        for (int k = 0; k < n; ++k) {
            if (!row[static_cast<std::size_t>(k)].is_number()) throw ConfigError("matrix entries must be numbers");
            m(i, k) = row[static_cast<std::size_t>(k)].get<double>();
        }
    }
    return m;
}

GridSpec parse_grid(const Json& j, GridSpec defaults)
{
    if (j.is_null()) return defaults;
    expect_object(j, "grid");
    GridSpec g;
    g.n = get_int(j, "n", defaults.n);
    g.L = get_int(j, "L", defaults.L);
    g.circle_nodes = get_int(j, "circle_nodes", defaults.circle_nodes);
    if (g.n != 2 && g.n != 3) throw ConfigError("grid.n must be 2 or 3");
    if (g.L < 1 || g.L > 200) throw ConfigError("grid.L must lie in [1, 200]");
    if (g.circle_nodes < 0 || (g.n == 3 && g.circle_nodes != 0)) throw ConfigError("grid.circle_nodes applies to n = 2 only");
    return g;
}

Json to_json(const GridSpec& g)
{
    return {{"n", g.n}, {"L", g.L}, {"circle_nodes", g.circle_nodes}};
}

GridPtr make_grid(const GridSpec& g)
{
    return build_grid(g.n, g.L, g.circle_nodes);
}

Body parse_body(const Json& d, int n, std::uint64_t default_seed)
{
    expect_object(d, "body descriptor");
    const std::string type = get_string(d, "type", "");
    Body body;
    try {
        if (type == "ball") {
            const double r = get_number(d, "radius", 1.0);
            if (!(r > 0.0)) throw ConfigError("ball radius must be positive");
            body = ball(r, n);
        } else if (type == "ellipsoid") {
            Mat A;
            if (d.contains("matrix")) {
                A = get_matrix(d.at("matrix"), n);
            } else {
                const Json& axes = d.contains("axes") ? d.at("axes") : Json();
                if (!axes.is_array() || static_cast<int>(axes.size()) != n) throw ConfigError("ellipsoid needs 'axes' with n entries or 'matrix'");
                A = Mat::Zero(n, n);
                for (int i = 0; i < n; ++i) {
                    if (!axes[static_cast<std::size_t>(i)].is_number()) throw ConfigError("ellipsoid axes must be numbers");
                    A(i, i) = axes[static_cast<std::size_t>(i)].get<double>();
                }
            }
            body = ellipsoid(A);
        } else if (type == "perturbed_ball") {
            const double eps = get_number(d, "eps");
            if (!d.contains("terms") || !d.at("terms").is_array()) throw ConfigError("perturbed_ball needs 'terms': [[index, coefficient], ...]");
            std::vector<HarmonicTerm> terms;
            for (const Json& t : d.at("terms")) {
                if (!t.is_array() || t.size() != 2 || !t[0].is_number_integer() || t[0].get<std::int64_t>() < 0 || !t[1].is_number())
                    throw ConfigError("perturbed_ball terms are [index, coefficient] pairs");
                terms.push_back({t[0].get<std::size_t>(), t[1].get<double>()});
            }
            body = perturbed_ball(n, std::move(terms), eps);
        } else if (type == "random") {
            std::uint64_t seed = default_seed;
            if (d.contains("seed")) {
                const Json& v = d.at("seed");
                if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0))
                    throw ConfigError("random body 'seed' must be a nonnegative integer");
                seed = d.at("seed").get<std::uint64_t>();
            }
            body = random_even_body(n, seed, get_int(d, "budget", 50));
        } else if (type == "l4") {
            const double s = get_number(d, "smoothing", 0.25);
            if (!(s > 0.0)) throw ConfigError("l4 smoothing must be positive");
            body = smoothed_l4_body(n, s);
        } else {
            throw ConfigError("unknown body type '" + type + "'");
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const ContractError& e) {
        throw ConfigError(std::string("body descriptor: ") + e.what());
    }
    if (d.contains("transform")) {
        const Mat T = get_matrix(d.at("transform"), n);
        if (!(std::abs(T.determinant()) > 1e-12)) throw ConfigError("transform must be invertible");
        body = linear_image(body, T);
    }
    return body;
}

SphereFunction parse_gauge(const Json& d, int n)
{
    expect_object(d, "body descriptor");
    const std::string type = get_string(d, "type", "");
    SphereFunction g;
    if (type == "ball") {
        const double r = get_number(d, "radius", 1.0);
        g = [r](const Vec& x) { return x.norm() / r; };
    } else if (type == "ellipsoid" && !d.contains("matrix")) {
        Vec inv(n);
        for (int i = 0; i < n; ++i) inv[i] = 1.0 / d.at("axes")[static_cast<std::size_t>(i)].get<double>();
        g = [inv](const Vec& x) { return inv.cwiseProduct(x).norm(); };
    } else if (type == "ellipsoid") {
        const Mat Ai = get_matrix(d.at("matrix"), n).inverse();
        g = [Ai](const Vec& x) { return (Ai * x).norm(); };
    } else if (type == "l4") {
        auto l4 = smoothed_l4_support(n, get_number(d, "smoothing", 0.25));
        g = [l4](const Vec& x) { return l4->value(x); };
    } else {
        return {};
    }
    if (d.contains("transform")) {
        const Mat Ti = get_matrix(d.at("transform"), n).inverse();
        return [g, Ti](const Vec& x) { return g(Ti * x); };
    }
    return g;
}

} // namespace calab
