#include "calab/commands.hpp"

#include "calab/acceptance.hpp"
#include "calab/config.hpp"
#include "calab/isomorphic.hpp"
#include "calab/minkowski.hpp"
#include "calab/parallel.hpp"
#include "calab/pinching.hpp"
#include "calab/spectral.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

namespace calab {

namespace {

using Clock = std::chrono::steady_clock;

struct Context {
    const Json& config;
    std::uint64_t seed;
    int threads;
    std::filesystem::path base_dir;
    std::vector<Check> checks;
    Json results = Json::object();
    std::vector<std::pair<std::string, std::string>> files;
    Json sections = Json::array();
};

Body config_body(const Context& c, int n, const char* key = "body")
{
    if (!c.config.contains(key)) throw ConfigError(std::string("missing '") + key + "' descriptor");
    return parse_body(c.config.at(key), n, c.seed);
}

BodyOnGrid valid_on_grid(Body b, GridPtr grid)
{
    BodyOnGrid bg = evaluate_on_grid(std::move(b), grid);
    if (!bg.valid) throw NumericalError(bg.body->label() + " is not strongly convex on the grid");
    return bg;
}

Json mat_json(const Mat& m)
{
    Json a = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        a.push_back(row);
    }
    return a;
}

Json numbers(const std::vector<double>& v)
{
    Json a = Json::array();
    for (double x : v) a.push_back(number(x));
    return a;
}

Json pinching_json(const PinchingReport& p)
{
    return {{"n", p.n}, {"r_curv", p.r_curv}, {"R_curv", p.R_curv}, {"A", p.A}, {"B", p.B}, {"r_in", p.r_in},
            {"R_out", p.R_out}, {"p_main", p.p_main}, {"p_strong", p.p_strong}, {"admissible", p.admissible}};
}

std::string node_header(int n)
{
    return n == 2 ? "node,x,y" : "node,x,y,z";
}

std::string node_prefix(const SphereGrid& g, std::size_t k)
{
    std::string s = std::to_string(k);
    for (Eigen::Index i = 0; i < g.nodes[k].size(); ++i) s += "," + csv_number(g.nodes[k][i]);
    return s;
}

double default_tolerance(int n)
{
    return n == 2 ? 1e-6 : 1e-3;
}

void spectrum(Context& c)
{
    const GridSpec gs = parse_grid(c.config.value("grid", Json()), {3, 20, 0});
    const int n = gs.n;
    auto grid = make_grid(gs);
    auto body = config_body(c, n);
    const int k = get_int(c.config, "k", 12);
    if (k < 2 * n + 2) throw ConfigError("'k' must be at least 2n + 2");
    const double tol = get_number(c.config, "tolerance", default_tolerance(n));
    auto sys = assemble(build_state(valid_on_grid(body, grid)), make_basis(grid), {.threads = c.threads});
    auto all = solve_spectrum(sys, static_cast<std::size_t>(k), Subspace::all);
    auto even = solve_spectrum(sys, 1, Subspace::even_nonconstant);
    const double l1e = even.lambda1_even.value_or(NAN);
    const double gap = hessian_gap_even(sys);

    c.checks.push_back(within("lambda1", all.lambda1.value_or(NAN), n - 1.0, tol));
    c.checks.push_back(within("lambda1 multiplicity", all.lambda1_multiplicity, n, 0.0));
    c.checks.push_back(at_most("max eigenpair residual", std::max(all.max_residual(), even.max_residual()), 1e-8));
    c.checks.push_back(at_most("gap identity defect", std::abs(gap - (l1e - n + 2.0)) / l1e, 1e-3));

    Json clusters = Json::array();
    for (const auto& cl : all.clusters) clusters.push_back({{"value", cl.value}, {"multiplicity", cl.multiplicity}});
    c.results = {{"body", body->label()},
                 {"nodes", grid->size()},
                 {"basis_size", sys.basis.size()},
                 {"eigenvalues", numbers(all.eigenvalues)},
                 {"clusters", clusters},
                 {"lambda1", number(all.lambda1.value_or(NAN))},
                 {"lambda1_multiplicity", all.lambda1_multiplicity},
                 {"lambda1_even", number(l1e)},
                 {"hessian_gap", number(gap)},
                 {"max_residual", number(all.max_residual())}};
    std::string csv = "index,eigenvalue,residual\n";
    for (std::size_t i = 0; i < all.eigenvalues.size(); ++i)
        csv += csv_line({std::to_string(i), csv_number(all.eigenvalues[i]), csv_number(all.residuals[i])});
    c.files.emplace_back("eigenvalues.csv", csv);
}

void bochner(Context& c)
{
    const GridSpec gs = parse_grid(c.config.value("grid", Json()), {3, 24, 0});
    const int n = gs.n;
    auto grid = make_grid(gs);
    std::vector<Body> bodies;
    if (c.config.contains("bodies")) {
        if (!c.config.at("bodies").is_array()) throw ConfigError("'bodies' must be an array of descriptors");
        for (const Json& d : c.config.at("bodies")) bodies.push_back(parse_body(d, n, c.seed));
    } else {
        bodies.push_back(config_body(c, n));
    }
    const int count = get_int(c.config, "functions", 20);
    const int degree = get_int(c.config, "degree", n == 2 ? 12 : 8);
    if (count < 1 || degree < 1 || degree > gs.L) throw ConfigError("'functions' must be positive and 'degree' within the grid band");
    const double tol = get_number(c.config, "tolerance", default_tolerance(n));
    std::string csv = "body,function,pointwise,galerkin\n";
    Json rows = Json::array();
    for (std::size_t b = 0; b < bodies.size(); ++b) {
        auto state = build_state(valid_on_grid(bodies[b], grid));
        auto sys = assemble(state, make_basis(grid), {.threads = c.threads});
        double pw = 0.0, gk = 0.0;
        for (int s = 0; s < count; ++s) {
            auto f = random_expansion(n, degree, c.seed * 7919ull + 1000ull * b + static_cast<std::uint64_t>(s));
            Eigen::VectorXd v = Eigen::VectorXd::Zero(sys.S.rows());
            for (std::size_t a = 0; a < f.coefficients.size(); ++a) v[static_cast<Eigen::Index>(a)] = f.coefficients[a];
            const double r1 = bochner_residual(state, f), r2 = discrete_bochner_residual(sys, v);
            pw = std::max(pw, r1);
            gk = std::max(gk, r2);
            csv += csv_line({std::to_string(b), std::to_string(s), csv_number(r1), csv_number(r2)});
        }
        const std::string id = "body " + std::to_string(b) + " ";
        c.checks.push_back(at_most(id + "pointwise max residual", pw, tol));
        c.checks.push_back(at_most(id + "Galerkin max residual", gk, tol));
        rows.push_back({{"body", bodies[b]->label()}, {"pointwise_max", pw}, {"galerkin_max", gk}});
    }
    c.results = {{"bodies", rows}, {"functions", count}, {"degree", degree}};
    c.files.emplace_back("bochner.csv", csv);
}

void pinch(Context& c)
{
    const GridSpec gs = parse_grid(c.config.value("grid", Json()), {3, 16, 0});
    const int n = gs.n;
    auto grid = make_grid(gs);
    auto body = config_body(c, n);
    const bool optimize = get_bool(c.config, "optimize", false);
    const int iterations = get_int(c.config, "iterations", 200);
    const double tol = get_number(c.config, "tolerance", 1e-3 * n);
    Mat T = Mat::Identity(n, n);
    Json search = nullptr;
    if (optimize) {
        auto s = optimize_image(body, grid, iterations);
        T = s.T;
        search = {{"T", mat_json(s.T)}, {"initial_p_strong", s.initial.p_strong}, {"evaluations", s.evaluations}};
    }
    auto image = optimize ? linear_image(body, T) : body;
    const auto rep = measure_pinching(valid_on_grid(image, grid));
    const auto sc = spectral_consistency(body, grid, T, -1, tol);

    c.checks.push_back(at_most("r_curv <= R_curv", rep.r_curv - rep.R_curv, 0.0));
    c.checks.push_back(at_most("A <= B", rep.A - rep.B, 0.0));
    c.checks.push_back(at_most("r_curv <= r_in", rep.r_curv - rep.r_in, 0.0, 1e-8));
    c.checks.push_back(at_most("R_out <= R_curv", rep.R_out - rep.R_curv, 0.0, 1e-8));
    c.checks.push_back(at_least("lambda1_even >= n - p_strong", sc.lambda1_even, sc.bound, tol));

    c.results = {{"body", body->label()}, {"report", pinching_json(rep)}, {"image_search", search}, {"lambda1_even", sc.lambda1_even}};
    std::string csv = "label,n,r_curv,R_curv,A,B,r_in,R_out,p_main,p_strong,admissible\n";
    csv += csv_line({body->label(), std::to_string(n), csv_number(rep.r_curv), csv_number(rep.R_curv), csv_number(rep.A),
                     csv_number(rep.B), csv_number(rep.r_in), csv_number(rep.R_out), csv_number(rep.p_main),
                     csv_number(rep.p_strong), rep.admissible ? "1" : "0"});
    c.files.emplace_back("pinch.csv", csv);
}

void isomorphic_cmd(Context& c)
{
    const GridSpec gs = parse_grid(c.config.value("grid", Json()), {3, 24, 0});
    const int n = gs.n;
    auto grid = make_grid(gs);
    auto body = config_body(c, n);
    const double alpha = get_number(c.config, "alpha"), beta = get_number(c.config, "beta");
    if (!(alpha > 0.0 && beta > 0.0)) throw ConfigError("'alpha' and 'beta' must be positive");
    const double C = get_number(c.config, "C", 1.0);
    auto con = construct(body, grid, alpha, beta, parse_gauge(c.config.at("body"), n));
    const auto v = verify(valid_on_grid(con.smoothed, grid), con.params, con.K);
    const double dual = dual_route_gap(con, *grid);
    for (auto& ch : bound_checks(v, "")) c.checks.push_back(ch);
    c.checks.push_back(at_most("geometric distance <= dBM", v.geometric_distance, con.params.dBM, 1e-3 * con.params.dBM));
    c.checks.push_back(at_most("dual route gap", dual, 1e-6));

    const auto& p = con.params;
    const double gamma = c.config.contains("gamma") ? get_number(c.config, "gamma") : isometric_gamma(n, p.D, C);
    c.results = {{"body", body->label()},
                 {"params", {{"n", p.n}, {"alpha", p.alpha}, {"beta", p.beta}, {"D", p.D}, {"r", p.r}, {"R", p.R}, {"A", p.A}, {"B", p.B}, {"dBM", p.dBM}}},
                 {"scale", con.scale},
                 {"geometric_distance", v.geometric_distance},
                 {"dual_route_gap", dual},
                 {"gamma", gamma},
                 {"p_gamma_D", p_gamma_D(n, gamma, p.D)},
                 {"C", C}};
    std::string csv = "bound,measured,predicted,slack,pass\n";
    for (const auto& b : v.bounds)
        csv += csv_line({b.name, csv_number(b.measured), csv_number(b.predicted), csv_number(iso_verification_slack), b.pass ? "1" : "0"});
    c.files.emplace_back("verification.csv", csv);
}

std::vector<double> read_density(const std::filesystem::path& path, std::size_t nodes)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open density file " + path.string());
    std::vector<double> d(nodes, NAN);
    std::string line;
    std::size_t count = 0, lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || (lineno == 1 && line.rfind("node", 0) == 0)) continue;
        std::istringstream ss(line);
        std::string a, b;
        if (!std::getline(ss, a, ',') || !std::getline(ss, b)) throw ConfigError("density file line " + std::to_string(lineno) + " is not 'node,value'");
        std::size_t node = 0;
        double value = 0.0;
        try {
            node = std::stoul(a);
            value = std::stod(b);
        } catch (const std::exception&) {
            throw ConfigError("density file line " + std::to_string(lineno) + " is not numeric");
        }
        if (node >= nodes || !std::isnan(d[node])) throw ConfigError("density file has a bad or repeated node index at line " + std::to_string(lineno));
        d[node] = value;
        ++count;
    }
    if (count != nodes) throw ConfigError("density file must list all " + std::to_string(nodes) + " nodes");
    return d;
}

void solve(Context& c)
{
    const GridSpec gs = parse_grid(c.config.value("grid", Json()), {2, 64, 0});
    const int n = gs.n;
    auto grid = make_grid(gs);
    const double p = get_number(c.config, "p", 0.0);
    if (!(p > -n && p < 1.0)) throw ConfigError("'p' must lie in (-n, 1)");
    SolverOptions opt;
    opt.degree = get_int(c.config, "degree", std::min(32, gs.L));
    opt.max_iterations = get_int(c.config, "max_iterations", opt.max_iterations);
    opt.gradient_tolerance = get_number(c.config, "gradient_tolerance", opt.gradient_tolerance);
    if (opt.degree < 2 || opt.degree > gs.L) throw ConfigError("'degree' must lie in [2, grid.L]");
    const Json target = c.config.value("target", Json());
    if (!target.is_object()) throw ConfigError("'target' must be an object with 'body' or 'density_file'");
    Body K;
    TargetMeasure mu;
    if (target.contains("body")) {
        K = parse_body(target.at("body"), n, c.seed);
        mu = lp_surface_target(K, grid, p);
    } else if (target.contains("density_file")) {
        const std::filesystem::path path = c.base_dir / get_string(target, "density_file", "");
        mu = make_target(grid, read_density(path, grid->size()));
    } else {
        throw ConfigError("'target' needs 'body' or 'density_file'");
    }
    const std::uint64_t start_seed = c.config.contains("start_seed") ? static_cast<std::uint64_t>(get_int(c.config, "start_seed", 0)) : c.seed;
    auto r = minimize(mu, p, random_start(n, opt.degree, start_seed, grid), opt);
    const auto bg = evaluate_on_grid(shape_body(r.shape), grid);

    bool decreasing = true;
    for (std::size_t i = 1; i < r.history.size(); ++i) decreasing = decreasing && r.history[i] <= r.history[i - 1];
    c.checks.push_back(holds("converged", r.converged));
    c.checks.push_back(at_most("EL residual", r.el_residual, 1e-4));
    c.checks.push_back(at_least("min eig D2h >= eig_floor", r.min_eig, r.eig_floor));
    c.checks.push_back(holds("F decreases monotonically", decreasing));
    Json recovery = nullptr;
    if (K) {
        const double VK = quantities(valid_on_grid(K, grid)).volume;
        const double s = std::pow(VK / r.volume, 1.0 / n);
        double err = 0.0;
        for (std::size_t k = 0; k < grid->size(); ++k) {
            const double hk = K->value(grid->nodes[k]);
            err = std::max(err, std::abs(s * bg.h[k] - hk) / hk);
        }
        recovery = err;
        c.checks.push_back(at_most("recovery error", err, get_number(c.config, "recovery_tolerance", 1e-3)));
    }
    Json probe = nullptr;
    const int starts = get_int(c.config, "starts", 1);
    if (starts > 1 && K) {
        auto u = uniqueness_probe(K, p, starts, start_seed + 1, grid, opt, c.threads);
        probe = {{"clusters", u.clusters}, {"cluster_of", u.cluster_of}, {"distances", u.distances}};
    }
    c.results = {{"coefficients", r.shape.coefficients},
                 {"degree", r.shape.degree},
                 {"F", r.F},
                 {"el_residual", r.el_residual},
                 {"el_constant", r.el_constant},
                 {"min_eig", r.min_eig},
                 {"eig_floor", r.eig_floor},
                 {"volume", r.volume},
                 {"normalization", "V = 1"},
                 {"iterations", r.iterations},
                 {"converged", r.converged},
                 {"status", r.status},
                 {"history", numbers(r.history)},
                 {"recovery_error", recovery},
                 {"uniqueness_probe", probe}};
    std::string csv = node_header(n) + ",h\n";
    for (std::size_t k = 0; k < grid->size(); ++k) csv += node_prefix(*grid, k) + "," + csv_number(bg.h[k]) + "\n";
    c.files.emplace_back("h.csv", csv);
}

std::vector<Json> sweep_values(const Json& vary)
{
    std::vector<Json> values;
    if (vary.contains("values")) {
        if (!vary.at("values").is_array()) throw ConfigError("'vary.values' must be an array");
        for (const Json& v : vary.at("values")) values.push_back(v);
    } else if (vary.contains("integers")) {
        const Json& r = vary.at("integers");
        const int from = get_int(r, "from", 0), count = get_int(r, "count", 0);
        if (count < 0 || from < 0) throw ConfigError("'vary.integers' needs nonnegative from and count");
        for (int i = 0; i < count; ++i) values.emplace_back(from + i);
    } else if (vary.contains("range")) {
        const Json& r = vary.at("range");
        const double from = get_number(r, "from"), to = get_number(r, "to");
        const int count = get_int(r, "count", 0);
        if (count < 0) throw ConfigError("'vary.range.count' must be nonnegative");
        for (int i = 0; i < count; ++i) values.emplace_back(count == 1 ? from : from + (to - from) * i / (count - 1));
    } else {
        throw ConfigError("'vary' needs 'values', 'integers' or 'range'");
    }
    return values;
}

struct SweepRow {
    std::string label;
    double lambda1 = NAN, lambda1_even = NAN, gap = NAN, p_main = NAN, p_strong = NAN, omega_gap = NAN;
    std::string error;
};

void sweep(Context& c)
{
    const GridSpec gs = parse_grid(c.config.value("grid", Json()), {2, 40, 0});
    const int n = gs.n;
    auto grid = make_grid(gs);
    const Json family = c.config.value("family", Json());
    if (!family.is_object() || !family.contains("body") || !family.contains("vary"))
        throw ConfigError("'family' needs 'body' (descriptor template) and 'vary'");
    const Json vary = family.at("vary");
    if (!vary.is_object()) throw ConfigError("'family.vary' must be an object");
    const std::string pointer = get_string(vary, "pointer", "/seed");
    Json::json_pointer ptr;
    try {
        ptr = Json::json_pointer(pointer);
    } catch (const std::exception&) {
        throw ConfigError("'family.vary.pointer' is not a JSON pointer");
    }
    const auto values = sweep_values(vary);
    const std::string base = get_string(family.at("body"), "label", get_string(family.at("body"), "type", "body"));
    std::vector<Json> descriptors;
    for (const Json& v : values) {
        Json d = family.at("body");
        d.erase("label");
        d[ptr] = v;
        descriptors.push_back(d);
    }
    // Structural problems are configuration errors; failures of a body are per-row.
    if (!descriptors.empty()) {
        try {
            parse_body(descriptors.front(), n, c.seed);
        } catch (const NumericalError&) {
        }
    }
    std::vector<SweepRow> rows(descriptors.size());
    parallel_for(rows.size(), c.threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            SweepRow& r = rows[i];
            r.label = base + "[" + pointer + "=" + values[i].dump() + "]";
            try {
                auto body = parse_body(descriptors[i], n, c.seed);
                auto bg = valid_on_grid(body, grid);
                const auto pin = measure_pinching(bg);
                r.p_main = pin.p_main;
                r.p_strong = pin.p_strong;
                const auto q = quantities(bg);
                const auto qp = quantities(valid_on_grid(polar(body), grid));
                r.omega_gap = std::abs(q.omega_n - qp.omega_n) / q.omega_n;
                auto sys = assemble(build_state(std::move(bg)), make_basis(grid));
                r.lambda1 = solve_spectrum(sys, static_cast<std::size_t>(2 * n + 2), Subspace::all).lambda1.value_or(NAN);
                r.lambda1_even = solve_spectrum(sys, 1, Subspace::even_nonconstant).lambda1_even.value_or(NAN);
                r.gap = hessian_gap_even(sys);
            } catch (const std::exception& e) {
                r.error = e.what();
            }
        }
    });
    std::string csv = std::string(sweep_csv_header) + "\n";
    Json jrows = Json::array();
    int errors = 0;
    double min_l1e = INFINITY, min_margin = INFINITY, max_l1 = 0.0;
    for (const auto& r : rows) {
        csv += csv_line({r.label, csv_number(r.lambda1), csv_number(r.lambda1_even), csv_number(r.gap), csv_number(r.p_main),
                         csv_number(r.p_strong), csv_number(r.omega_gap), r.error});
        jrows.push_back({{"label", r.label}, {"lambda1", number(r.lambda1)}, {"lambda1_even", number(r.lambda1_even)},
                         {"hessian_gap", number(r.gap)}, {"p_main", number(r.p_main)}, {"p_strong", number(r.p_strong)},
                         {"omega_self_duality_gap", number(r.omega_gap)}, {"error", r.error}});
        if (!r.error.empty()) {
            ++errors;
            continue;
        }
        min_l1e = std::min(min_l1e, r.lambda1_even);
        min_margin = std::min(min_margin, r.lambda1_even - (n - r.p_strong));
        max_l1 = std::max(max_l1, std::abs(r.lambda1 - (n - 1.0)));
    }
    c.checks.push_back(within("rows with errors", errors, 0, 0.0));
    if (rows.size() > static_cast<std::size_t>(errors)) {
        c.checks.push_back(at_most("max |lambda1 - (n-1)|", max_l1, get_number(c.config, "tolerance", 1e-3)));
        c.checks.push_back(at_least("min lambda1_even - (n - p_strong)", min_margin, 0.0, 1e-2));
        if (n == 2) c.checks.push_back(at_least("min lambda1_even", min_l1e, 2.0, 1e-6));
    }
    c.results = {{"csv_schema", sweep_csv_schema}, {"rows", jrows}, {"errors", errors}};
    c.files.emplace_back("sweep.csv", csv);
}

void verify_all(Context& c)
{
    AcceptanceOptions o;
    o.seed = c.seed;
    o.threads = c.threads;
    if (c.config.contains("criteria")) {
        const Json& ids = c.config.at("criteria");
        if (!ids.is_array()) throw ConfigError("'criteria' must be an array of criterion numbers");
        for (const Json& id : ids) {
            if (!id.is_number_integer() || id.get<int>() < 1 || id.get<int>() > numerical_criteria)
                throw ConfigError("criterion numbers lie in [1, " + std::to_string(numerical_criteria) + "]");
            o.criteria.push_back(id.get<int>());
        }
    }
    std::vector<int> ids = o.criteria;
    if (ids.empty())
        for (int i = 1; i <= numerical_criteria; ++i) ids.push_back(i);
    Json criteria = Json::array();
    std::string csv = "criterion,title,checks,failed,pass\n";
    for (int id : ids) {
        auto r = run_criterion(id, o);
        int failed = 0;
        for (const auto& ch : r.checks) {
            Check prefixed = ch;
            prefixed.name = "criterion " + std::to_string(id) + ": " + ch.name;
            c.checks.push_back(prefixed);
            failed += ch.pass ? 0 : 1;
        }
        criteria.push_back(to_json(r));
        csv += csv_line({std::to_string(id), r.title, std::to_string(r.checks.size()), std::to_string(failed), r.pass() ? "1" : "0"});
        for (const auto& t : r.timings)
            c.sections.push_back({{"criterion", id}, {"label", t.label}, {"seconds", t.seconds}, {"budget", t.budget}});
    }
    c.results = {{"criteria", criteria}};
    c.files.emplace_back("criteria.csv", csv);
}

} // namespace

const std::vector<std::string>& command_names()
{
    static const std::vector<std::string> names{"spectrum", "bochner", "pinch", "isomorphic", "solve", "sweep", "verify-all"};
    return names;
}

CommandOutput run_command(const std::string& command, const Json& config, const RunOptions& options)
{
    if (!config.is_object()) throw ConfigError("config must be a JSON object");
    if (std::find(command_names().begin(), command_names().end(), command) == command_names().end())
        throw ConfigError("unknown command '" + command + "'");
    if (config.contains("command") && config.at("command") != command)
        throw ConfigError("config is for command " + config.at("command").dump() + ", not '" + command + "'");
    std::uint64_t seed = 0;
    if (options.seed) {
        seed = *options.seed;
    } else if (config.contains("seed")) {
        const Json& s = config.at("seed");
        if (!s.is_number_integer() || (!s.is_number_unsigned() && s.get<std::int64_t>() < 0)) throw ConfigError("'seed' must be a nonnegative integer");
        seed = config.at("seed").get<std::uint64_t>();
    }
    if (options.threads < 1) throw ConfigError("--threads must be at least 1");

    Context c{config, seed, options.threads, options.base_dir, {}, Json::object(), {}, Json::array()};
    const auto t0 = Clock::now();
    Json error = nullptr;
    try {
        if (command == "spectrum") spectrum(c);
        else if (command == "bochner") bochner(c);
        else if (command == "pinch") pinch(c);
        else if (command == "isomorphic") isomorphic_cmd(c);
        else if (command == "solve") solve(c);
        else if (command == "sweep") sweep(c);
        else verify_all(c);
    } catch (const NumericalError& e) {
        error = e.what();
        c.checks.push_back(holds("completed without numerical failure", false));
        c.files.clear();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    Json echo = config;
    echo["command"] = command;
    echo["seed"] = seed;
    CommandOutput out;
    out.pass = all_pass(c.checks) && error.is_null();
    const Json report = {{"schema", report_schema}, {"command", command}, {"config", echo}, {"checks", to_json(c.checks)},
                         {"results", c.results}, {"pass", out.pass}, {"error", error}};
    out.files.emplace_back("report.json", dump(report));
    for (auto& f : c.files) out.files.push_back(std::move(f));
    out.timing = {{"command", command}, {"seconds", std::chrono::duration<double>(Clock::now() - t0).count()}, {"sections", c.sections}};
    return out;
}

} // namespace calab
