#include "doctest.h"

#include "calab/spectral.hpp"

#include <cmath>

using namespace calab;

namespace {

Mat diag(std::initializer_list<double> d)
{
    Vec v(static_cast<Eigen::Index>(d.size()));
    Eigen::Index i = 0;
    for (double x : d) v[i++] = x;
    return v.asDiagonal();
}

Body bumpy(int n)
{
    if (n == 2) return perturbed_ball(2, {{3, 1.0}, {8, 0.8}}, 0.1);
    return perturbed_ball(3, {{6, 1.0}, {20, 0.8}}, 0.1);
}

GalerkinSystem system_for(Body b, GridPtr grid, int degree = -1)
{
    return assemble(build_state(evaluate_on_grid(b, grid)), make_basis(grid, degree));
}

Mat rotation(int n)
{
    Mat R = Mat::Identity(n, n);
    const double c = std::cos(0.7), s = std::sin(0.7);
    R(0, 0) = c;
    R(0, 1) = -s;
    R(1, 0) = s;
    R(1, 1) = c;
    if (n == 3) {
        Mat R2 = Mat::Identity(3, 3);
        R2(1, 1) = std::cos(0.4);
        R2(1, 2) = -std::sin(0.4);
        R2(2, 1) = std::sin(0.4);
        R2(2, 2) = std::cos(0.4);
        R = R2 * R;
    }
    return R;
}

} // namespace

TEST_CASE("basis selection")
{
    auto grid = build_grid(3, 8);
    CHECK(make_basis(grid).size() == 81);
    CHECK(make_basis(grid, 4).size() == 25);
    CHECK(make_basis(grid, 4, ParityFilter::even_only).size() == 15);
    CHECK(make_basis(grid, 4, ParityFilter::all, false).size() == 24);
    CHECK_THROWS_AS(make_basis(grid, 9), ContractError);
    CHECK(make_basis(build_grid(2, 10), -1, ParityFilter::even_only).size() == 11);
}

TEST_CASE("ball matrices in closed form")
{
    for (int n : {2, 3}) {
        auto grid = build_grid(n, 12);
        auto sys = system_for(ball(1.0, n), grid, 4);
        const auto m = sys.S.rows();
        CHECK((sys.S - sys.S.transpose()).norm() <= 1e-10 * sys.S.norm());
        CHECK((sys.M - Eigen::MatrixXd::Identity(m, m)).norm() <= 1e-12);
        Eigen::VectorXd expected(m);
        for (Eigen::Index a = 0; a < m; ++a) {
            const double l = sys.basis.degrees[static_cast<std::size_t>(a)];
            expected[a] = n == 2 ? l * l : l * (l + 1.0);
        }
        CHECK((sys.S - Eigen::MatrixXd(expected.asDiagonal())).norm() <= 1e-11);
        CHECK(sys.S.row(0).norm() == 0.0);
        CHECK(sys.H.row(0).norm() == 0.0);
    }
    // A ball of radius r has nu = r^n and the same g.
    auto grid = build_grid(3, 8);
    auto sys = system_for(ball(2.0, 3), grid, 3);
    CHECK((sys.M - 8.0 * Eigen::MatrixXd::Identity(16, 16)).norm() <= 1e-11);
}

TEST_CASE("clustering")
{
    CHECK(cluster_tolerance(0.0) == 1e-6);
    CHECK(cluster_tolerance(10.0) == doctest::Approx(1e-2));
    const std::vector<double> ev{0.0, 2e-7, 2.0, 2.001, 2.0015, 6.0, 6.1};
    const auto c = cluster_eigenvalues(ev);
    REQUIRE(c.size() == 4);
    CHECK(c[0].multiplicity == 2);
    CHECK(c[1].multiplicity == 3);
    CHECK(c[1].first == 2);
    CHECK(c[1].value == doctest::Approx(2.00083333).epsilon(1e-8));
    CHECK(c[2].multiplicity == 1);
    CHECK(cluster_eigenvalues(std::vector<double>{}).empty());
}

TEST_CASE("ball and ellipsoid spectra")
{
    auto grid3 = build_grid(3, 20);
    for (const auto& body : {ball(1.0, 3), ellipsoid(diag({2, 1, 1}))}) {
        auto sys = system_for(body, grid3);
        auto all = solve_spectrum(sys, 12, Subspace::all);
        const std::vector<double> expected{0, 2, 2, 2, 6, 6, 6, 6, 6, 12, 12, 12};
        for (std::size_t i = 0; i < expected.size(); ++i) CHECK(std::abs(all.eigenvalues[i] - expected[i]) <= 1e-3 * std::max(1.0, expected[i]));
        REQUIRE(all.lambda1.has_value());
        CHECK(*all.lambda1 == doctest::Approx(2.0).epsilon(1e-6));
        CHECK(all.lambda1_multiplicity == 3);
        CHECK(all.clusters[2].multiplicity == 5);
        CHECK(all.max_residual() <= 1e-8);
        CHECK(all.eigenvalues.front() >= -1e-8);
        CHECK(first_eigenspace_deficiency(sys, all, body) <= 1e-3);
        auto even = solve_spectrum(sys, 5, Subspace::even_nonconstant);
        CHECK(*even.lambda1_even == doctest::Approx(6.0).epsilon(1e-6));
        CHECK(!even.lambda1.has_value());
        CHECK(even.max_residual() <= 1e-8);
        // Even eigenvectors have no mean against nu.
        const Eigen::VectorXd mean = even.eigenvectors.transpose() * sys.values.transpose() * sys.nu_weight;
        CHECK(mean.norm() <= 1e-10);
    }
    auto grid2 = build_grid(2, 60, 256);
    for (const auto& body : {ball(1.0, 2), ellipsoid(diag({2, 1})), bumpy(2)}) {
        auto sys = system_for(body, grid2);
        auto all = solve_spectrum(sys, 6, Subspace::all);
        CHECK(std::abs(*all.lambda1 - 1.0) <= 1e-6);
        CHECK(all.lambda1_multiplicity == 2);
        auto even = solve_spectrum(sys, 1, Subspace::even_nonconstant);
        if (body->label() != "perturbed_ball(0.1)") CHECK(std::abs(*even.lambda1_even - 4.0) <= 1e-6);
        CHECK(*even.lambda1_even >= 2.0 - 1e-6);
    }
}

TEST_CASE("perturbed ball keeps the first eigenspace")
{
    auto grid = build_grid(3, 20);
    auto body = bumpy(3);
    auto sys = system_for(body, grid);
    auto all = solve_spectrum(sys, 8, Subspace::all);
    CHECK(std::abs(*all.lambda1 - 2.0) <= 1e-3);
    CHECK(all.lambda1_multiplicity == 3);
    CHECK(first_eigenspace_deficiency(sys, all, body) <= 1e-3);
}

TEST_CASE("solve_spectrum contracts")
{
    auto grid = build_grid(3, 6);
    auto sys = system_for(ball(1.0, 3), grid, 2);
    CHECK_THROWS_AS(solve_spectrum(sys, 0, Subspace::all), ContractError);
    CHECK_THROWS_AS(solve_spectrum(sys, 10, Subspace::all), ContractError);
    // Six even functions, one removed with the constant.
    CHECK_THROWS_AS(solve_spectrum(sys, 6, Subspace::even_nonconstant), ContractError);
    CHECK(solve_spectrum(sys, 5, Subspace::even_nonconstant).eigenvalues.size() == 5);
    auto odd_only = system_for(ball(1.0, 3), grid, 1);
    CHECK_THROWS_AS(solve_spectrum(odd_only, 1, Subspace::even_nonconstant), ContractError);
}

TEST_CASE("Bochner identity")
{
    for (int n : {2, 3}) {
        auto grid = build_grid(n, n == 2 ? 80 : 24);
        const double tol = n == 2 ? 1e-6 : 1e-3;
        for (std::uint64_t seed = 1; seed <= 3; ++seed) {
            auto body = random_even_body(n, seed, 50);
            auto state = build_state(evaluate_on_grid(body, grid));
            auto sys = assemble(state, make_basis(grid));
            for (std::uint64_t s = 0; s < 4; ++s) {
                auto f = random_expansion(n, n == 2 ? 12 : 8, 100 * seed + s);
                CHECK(bochner_residual(state, f) <= tol);
                Eigen::VectorXd v = Eigen::VectorXd::Zero(sys.S.rows());
                for (std::size_t a = 0; a < f.coefficients.size(); ++a) v[static_cast<Eigen::Index>(a)] = f.coefficients[a];
                CHECK(discrete_bochner_residual(sys, v) <= tol);
            }
        }
        auto state = build_state(evaluate_on_grid(ball(1.0, n), grid));
        HarmonicExpansion constant{n, 2, std::vector<double>(HarmonicBasis::count(n, 2), 0.0)};
        constant.coefficients[0] = 1.0;
        CHECK(bochner_residual(state, constant) == 0.0);
        auto wrong = random_expansion(n == 2 ? 3 : 2, 4, 1);
        CHECK_THROWS_AS(bochner_residual(state, wrong), ContractError);
    }
}

TEST_CASE("random expansions")
{
    auto a = random_expansion(3, 6, 9);
    auto b = random_expansion(3, 6, 9);
    CHECK(a.coefficients == b.coefficients);
    CHECK(a.coefficients[0] == 0.0);
    auto e = random_expansion(3, 6, 9, true);
    HarmonicBasis hb(3, 6);
    for (std::size_t i = 0; i < hb.size(); ++i) {
        if (hb.degree(i) % 2) CHECK(e.coefficients[i] == 0.0);
        else CHECK(e.coefficients[i] == a.coefficients[i]);
    }
}

TEST_CASE("even Hessian gap")
{
    for (int n : {2, 3}) {
        auto grid = build_grid(n, n == 2 ? 40 : 20);
        CHECK(hessian_gap_even(system_for(ball(1.0, n), grid)) == doctest::Approx(n + 2.0).epsilon(1e-9));
        for (const auto& body : {ellipsoid(n == 2 ? diag({2, 1}) : diag({2, 1, 1})), bumpy(n), random_even_body(n, 7, 50)}) {
            auto sys = system_for(body, grid);
            const double gap = hessian_gap_even(sys);
            const double l1e = *solve_spectrum(sys, 1, Subspace::even_nonconstant).lambda1_even;
            CHECK(gap >= 1.0 - 1e-6);
            CHECK(std::abs(gap - (l1e - n + 2.0)) <= 1e-3 * l1e);
        }
    }
    auto grid = build_grid(3, 6);
    auto no_h = assemble(build_state(evaluate_on_grid(ball(1.0, 3), grid)), make_basis(grid), {.with_hessian_form = false});
    CHECK(no_h.H.size() == 0);
    CHECK_THROWS_AS(hessian_gap_even(no_h), ContractError);
}

TEST_CASE("linear invariance of the spectrum")
{
    for (int n : {2, 3}) {
        auto grid = build_grid(n, n == 2 ? 40 : 24);
        auto body = bumpy(n);
        auto id = invariance_check(body, Mat::Identity(n, n), grid);
        CHECK(id.max_gap == 0.0);
        CHECK(id.gaps.size() == 10);
        // Band-limited body: the assembly is exact and the harmonic space is rotation invariant.
        CHECK(invariance_check(body, rotation(n), grid, n == 2 ? 30 : 16).max_gap <= 1e-8);
        CHECK(invariance_check(body, n == 2 ? diag({2, 1}) : diag({2, 1, 1}), grid).max_gap <= 1e-3);
    }
}

TEST_CASE("threaded assembly matches serial")
{
    auto grid = build_grid(3, 10);
    auto state = build_state(evaluate_on_grid(bumpy(3), grid));
    auto a = assemble(state, make_basis(grid), {.threads = 1});
    auto b = assemble(state, make_basis(grid), {.threads = 3});
    CHECK((a.S - b.S).norm() == 0.0);
    CHECK((a.H - b.H).norm() == 0.0);
    CHECK((a.M - b.M).norm() == 0.0);
}
