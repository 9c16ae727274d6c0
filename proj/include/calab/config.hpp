#pragma once

#include "calab/body.hpp"
#include "calab/report.hpp"

#include <cstdint>
#include <string>

namespace calab {

/// Malformed or inconsistent configuration. The CLI maps it to exit status 2.
struct ConfigError : ContractError {
    using ContractError::ContractError;
};

struct GridSpec {
    int n = 3;
    int L = 20;
    int circle_nodes = 0; // n = 2 only; 0 keeps the default node count
};

/// {"n": 3, "L": 20, "circle_nodes": 0}; missing keys take the given defaults.
GridSpec parse_grid(const Json& j, GridSpec defaults = {});
Json to_json(const GridSpec& g);
GridPtr make_grid(const GridSpec& g);

/// Body descriptors:
///   {"type": "ball", "radius": 1}
///   {"type": "ellipsoid", "axes": [2, 1, 1]}  or  {"type": "ellipsoid", "matrix": [[...], ...]}
///   {"type": "perturbed_ball", "eps": 0.1, "terms": [[index, coefficient], ...]}
///   {"type": "random", "seed": 7}             (seed defaults to the run seed)
///   {"type": "l4", "smoothing": 0.25}         (smoothed l4 gauge body)
/// Any descriptor may add "transform": [[...], ...] for the linear image T(K).
Body parse_body(const Json& d, int n, std::uint64_t default_seed);
/// Closed-form gauge |x|_K for ball, ellipsoid and l4 descriptors (with their transform);
/// empty for the other families.
SphereFunction parse_gauge(const Json& d, int n);

/// Typed lookups that raise ConfigError naming the key.
double get_number(const Json& j, const std::string& key);
double get_number(const Json& j, const std::string& key, double fallback);
int get_int(const Json& j, const std::string& key, int fallback);
bool get_bool(const Json& j, const std::string& key, bool fallback);
std::string get_string(const Json& j, const std::string& key, const std::string& fallback);
Mat get_matrix(const Json& j, int n);

} // namespace calab
