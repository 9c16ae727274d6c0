#include "doctest.h"

#include "calab/minkowski.hpp"

#include <cmath>

using namespace calab;

namespace {

const double pi = std::acos(-1.0);

Mat diag2(double a, double b)
{
    Mat m = Mat::Zero(2, 2);
    m(0, 0) = a;
    m(1, 1) = b;
    return m;
}

// sup |h_a / V_a^{1/n} - h_b / V_b^{1/n}| relative to h_b.
double normalized_distance(Body a, Body b, GridPtr grid)
{
    const int n = grid->dimension;
    const auto ga = evaluate_on_grid(a, grid), gb = evaluate_on_grid(b, grid);
    const double sa = std::pow(quadrature(*grid, ga.vk), -1.0 / n), sb = std::pow(quadrature(*grid, gb.vk), -1.0 / n);
    double d = 0.0;
    for (std::size_t k = 0; k < grid->size(); ++k) d = std::max(d, std::abs(sa * ga.h[k] - sb * gb.h[k]) / (sb * gb.h[k]));
    return d;
}

bool decreasing(const std::vector<double>& h)
{
    for (std::size_t i = 1; i < h.size(); ++i)
        if (h[i] > h[i - 1]) return false;
    return true;
}

} // namespace

TEST_CASE("target measures")
{
    auto grid = build_grid(2, 16);
    CHECK(uniform_target(grid).density.size() == grid->size());
    std::vector<double> d(grid->size(), 1.0);
    d[0] = 0.0;
    CHECK_THROWS_AS(make_target(grid, d), ContractError);
    d[0] = 1.0;
    d[1] = 1.0 + 1e-9;
    CHECK_THROWS_AS(make_target(grid, d), ContractError);
    CHECK_THROWS_AS(make_target(grid, std::vector<double>(3, 1.0)), ContractError);
    auto mu = lp_surface_target(ellipsoid(diag2(1.5, 1.0)), grid, 0.5);
    for (std::size_t k = 0; k < grid->size(); ++k) CHECK(mu.density[k] == mu.density[grid->antipode[k]]);
}

TEST_CASE("functional values")
{
    auto grid = build_grid(2, 32);
    auto mu = uniform_target(grid);
    auto unit = evaluate_on_grid(ball(1.0, 2), grid);
    CHECK(std::abs(functional(unit, mu, 0.0) - 1.0 / std::sqrt(pi)) <= 1e-13);
    // Ball of radius r against the round measure: (2 pi / p) pi^{-p/2}, independent of r.
    for (double p : {-1.5, -0.5, 0.5, 0.9}) {
        const double expected = 2.0 * pi / p * std::pow(pi, -p / 2.0);
        CHECK(functional(evaluate_on_grid(ball(2.7, 2), grid), mu, p) == doctest::Approx(expected).epsilon(1e-12));
    }
    for (double p : {0.0, 0.5, -1.0}) {
        for (std::uint64_t s = 0; s < 4; ++s) {
            auto K = random_even_body(2, s, 50);
            const double f1 = functional(evaluate_on_grid(K, grid), mu, p);
            const double f3 = functional(evaluate_on_grid(linear_image(K, 3.0 * Mat::Identity(2, 2)), grid), mu, p);
            CHECK(std::abs(f1 - f3) <= 1e-10 * std::abs(f1));
            if (p == 0.0) CHECK(functional(unit, mu, 0.0) <= f1);
        }
    }
    CHECK_THROWS_AS(functional(unit, mu, 1.0), ContractError);
    CHECK_THROWS_AS(functional(unit, mu, -2.0), ContractError);
}

TEST_CASE("even shapes")
{
    auto grid = build_grid(2, 32);
    CHECK(even_basis_size(2, 4) == 5);
    CHECK(even_basis_size(3, 4) == 15);
    auto E = ellipsoid(diag2(1.2, 1.0));
    auto s = project_even(E, grid, 24);
    auto body = shape_body(s);
    for (const Vec& t : grid->nodes) CHECK(std::abs(body->value(t) - E->value(t)) <= 1e-8);
    auto b = project_even(ball(2.0, 2), grid, 6);
    for (std::size_t i = 1; i < b.coefficients.size(); ++i) CHECK(std::abs(b.coefficients[i]) <= 1e-14);
    s.coefficients[0] = -1.0;
    CHECK_THROWS_AS(shape_body(s), ContractError);
    auto r1 = random_start(2, 16, 5, grid), r2 = random_start(2, 16, 5, grid);
    CHECK(r1.coefficients == r2.coefficients);
    CHECK(evaluate_on_grid(shape_body(r1), grid).valid);
}

TEST_CASE("round trips")
{
    auto grid = build_grid(2, 64);
    SolverOptions opt;
    SUBCASE("round measure at p = 0 gives the ball")
    {
        for (std::uint64_t seed = 0; seed < 3; ++seed) {
            auto r = minimize(uniform_target(grid), 0.0, random_start(2, opt.degree, seed, grid), opt);
            CHECK(r.converged);
            CHECK(decreasing(r.history));
            CHECK(r.history.size() == static_cast<std::size_t>(r.iterations) + 1);
            CHECK(r.el_residual <= 1e-4);
            CHECK(r.min_eig >= r.eig_floor);
            CHECK(std::abs(r.volume - 1.0) <= 1e-12);
            CHECK(std::abs(r.F - 1.0 / std::sqrt(pi)) <= 1e-10);
            auto bg = evaluate_on_grid(shape_body(r.shape), grid);
            double mean = 0.0;
            for (double h : bg.h) mean += h / static_cast<double>(bg.h.size());
            for (double h : bg.h) CHECK(std::abs(h / mean - 1.0) <= 1e-4);
        }
    }
    SUBCASE("ellipse at p = 0.5")
    {
        auto E = ellipsoid(diag2(1.5, 1.0));
        auto r = minimize(lp_surface_target(E, grid, 0.5), 0.5, random_start(2, opt.degree, 7, grid), opt);
        CHECK(r.converged);
        CHECK(decreasing(r.history));
        CHECK(r.el_residual <= 1e-4);
        CHECK(normalized_distance(shape_body(r.shape), E, grid) <= 1e-3);
    }
    SUBCASE("negative exponent")
    {
        auto E = ellipsoid(diag2(1.3, 1.0));
        auto r = minimize(lp_surface_target(E, grid, -0.5), -0.5, random_start(2, opt.degree, 3, grid), opt);
        CHECK(r.converged);
        CHECK(r.el_residual <= 1e-4);
        CHECK(normalized_distance(shape_body(r.shape), E, grid) <= 1e-3);
    }
}

TEST_CASE("solver contracts")
{
    auto grid = build_grid(2, 32);
    SolverOptions opt;
    opt.degree = 16;
    auto mu = uniform_target(grid);
    auto start = random_start(2, 16, 1, grid);
    CHECK_THROWS_AS(minimize(mu, 1.0, start, opt), ContractError);
    CHECK_THROWS_AS(minimize(mu, -2.5, start, opt), ContractError);
    auto wrong = random_start(2, 8, 1, grid);
    CHECK_THROWS_AS(minimize(mu, 0.0, wrong, opt), ContractError);
    opt.degree = 40;
    CHECK_THROWS_AS(minimize(mu, 0.0, random_start(2, 40, 1, build_grid(2, 40)), opt), ContractError);
    opt.degree = 16;
    auto bad = start;
    bad.coefficients[2] = 3.0 * bad.coefficients[0];
    CHECK_THROWS_AS(minimize(mu, 0.0, bad, opt), NumericalError);
    opt.max_iterations = 1;
    auto r = minimize(mu, 0.0, start, opt);
    CHECK(!r.converged);
    CHECK(r.status == "max iterations");
}

TEST_CASE("uniqueness probe")
{
    auto grid = build_grid(2, 64);
    auto b = uniqueness_probe(ball(1.0, 2), 0.5, 5, 11, grid);
    CHECK(b.clusters == 1);
    CHECK(b.runs.size() == 5);
    auto e = uniqueness_probe(ellipsoid(diag2(1.5, 1.0)), 0.0, 5, 21, grid, {}, 2);
    CHECK(e.clusters == 1);
    for (const auto& r : e.runs) CHECK(r.converged);
    auto serial = uniqueness_probe(ellipsoid(diag2(1.5, 1.0)), 0.0, 5, 21, grid, {}, 1);
    CHECK(serial.distances == e.distances);
}

TEST_CASE("Lp Minkowski inequality")
{
    auto grid = build_grid(2, 64);
    for (auto K : {ball(1.0, 2), ellipsoid(diag2(1.5, 1.0))}) {
        for (double p : {0.0, 0.5}) {
            CHECK(std::abs(lp_minkowski_gap(K, K, p, grid).gap) <= 1e-12);
            CHECK(std::abs(lp_minkowski_gap(K, linear_image(K, 2.0 * Mat::Identity(2, 2)), p, grid).gap) <= 1e-12);
            for (std::uint64_t s = 0; s < 10; ++s) CHECK(lp_minkowski_gap(K, random_even_body(2, 300 + s, 50), p, grid).gap >= -1e-8);
        }
    }
    // Closed form at p = 0 for two balls: both sides equal log(R / r).
    auto g = lp_minkowski_gap(ball(1.0, 2), ball(3.0, 2), 0.0, grid);
    CHECK(g.lhs == doctest::Approx(std::log(3.0)).epsilon(1e-13));
    CHECK(g.rhs == doctest::Approx(std::log(3.0)).epsilon(1e-13));
}
