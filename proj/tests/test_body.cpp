#include "doctest.h"

#include "calab/body.hpp"

#include <cmath>
#include <numbers>

using namespace calab;
using std::numbers::pi;

namespace {

Mat diag(std::initializer_list<double> d)
{
    Vec v(static_cast<Eigen::Index>(d.size()));
    Eigen::Index i = 0;
    for (double x : d) v[i++] = x;
    return v.asDiagonal();
}

// Independent oracle: plain central differences of value().
void check_jet_against_differences(const SupportFunction& body, const Vec& x, double tol)
{
    const auto n = x.size();
    const Jet j = body.jet(x);
    const double h = 1e-5;
    CHECK(j.value == doctest::Approx(body.value(x)).epsilon(1e-13));
    for (Eigen::Index i = 0; i < n; ++i) {
        Vec xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        CHECK(std::abs(j.grad[i] - (body.value(xp) - body.value(xm)) / (2 * h)) <= tol);
        const Vec col = (body.jet(xp).grad - body.jet(xm).grad) / (2 * h);
        CHECK((j.hess.col(i) - col).norm() <= tol);
    }
}

Body sample_perturbed(int n, double eps)
{
    // Degree-2 and degree-4 terms.
    if (n == 2) return perturbed_ball(2, {{3, 0.5}, {4, -0.3}, {7, 0.2}}, eps);
    return perturbed_ball(3, {{4, 0.4}, {6, -0.2}, {8, 0.3}, {18, 0.1}}, eps);
}

double sup_gap(const SupportFunction& a, const SupportFunction& b, const SphereGrid& grid)
{
    double gap = 0.0;
    for (const Vec& t : grid.nodes) gap = std::max(gap, std::abs(a.value(t) - b.value(t)));
    return gap;
}

} // namespace

TEST_CASE("family examples")
{
    CHECK(ball(2.0, 3)->value(Vec(Eigen::Vector3d(0, 0, 1))) == 2.0);
    auto E = ellipsoid(diag({2, 1}));
    CHECK(E->value(Vec(Eigen::Vector2d(1, 0))) == 2.0);
    CHECK(E->value(Vec(Eigen::Vector2d(0, 1))) == 1.0);
    auto flat = sample_perturbed(3, 0.0);
    auto grid = build_grid(3, 8);
    for (const Vec& t : grid->nodes) CHECK(flat->value(t) == doctest::Approx(1.0).epsilon(1e-15));

    CHECK_THROWS_AS(ball(-1.0, 2), ContractError);
    CHECK_THROWS_AS(ellipsoid(diag({1, -1})), ContractError);
    CHECK_THROWS_AS(perturbed_ball(3, {{2, 0.1}}, 0.1), ContractError); // degree 1
    CHECK_THROWS_AS(perturbed_ball(2, {{1, 0.1}}, 0.1), ContractError);
}

TEST_CASE("closed-form jets agree with finite differences")
{
    for (int n : {2, 3}) {
        const Vec x = n == 2 ? Vec(Eigen::Vector2d(0.7, -1.1)) : Vec(Eigen::Vector3d(0.3, -0.8, 1.2));
        Mat A = n == 2 ? Mat(diag({2, 1})) : Mat(diag({2, 1, 1.5}));
        A(0, 1) = A(1, 0) = 0.3;
        Mat T = Mat::Identity(n, n);
        T(0, n - 1) = 0.7;
        T(1, 0) = -0.4;
        std::vector<Body> bodies = {
            ball(1.5, n),
            ellipsoid(A),
            sample_perturbed(n, 0.1),
            linear_image(sample_perturbed(n, 0.1), T),
            firey_sum(1.0, ellipsoid(A), 2.0, ball(1.0, n), 2.0),
            firey_sum(0.5, ellipsoid(A), 0.7, sample_perturbed(n, 0.1), 0.5),
            firey_sum(0.3, ellipsoid(A), 0.7, sample_perturbed(n, 0.1), 0.0),
            firey_sum(1.0, ellipsoid(A), 1.0, ball(1.0, n), -1.0),
            polar(sample_perturbed(n, 0.1)),
            polar(ellipsoid(A)),
            smoothed_l4_support(n, 0.25),
            smoothed_l4_body(n, 0.25),
        };
        for (const auto& b : bodies) {
            INFO(b->label());
            CHECK(b->has_closed_form_jet());
            check_jet_against_differences(*b, x, 2e-6);
        }
        auto fd = from_function(n, [](const Vec& y) { return y.norm() + 0.1 * std::abs(y[0]); }, true, "fd");
        CHECK_FALSE(fd->has_closed_form_jet());
    }
}

TEST_CASE("homogeneity and evenness")
{
    auto grid = build_grid(3, 8);
    std::vector<Body> bodies = {ellipsoid(diag({2, 1, 1})), sample_perturbed(3, 0.1), smoothed_l4_body(3, 0.25),
                                random_even_body(3, 4, 50)};
    for (const auto& b : bodies) {
        CHECK(b->even());
        for (const Vec& t : grid->nodes) {
            CHECK(b->value(3.7 * t) == doctest::Approx(3.7 * b->value(t)).epsilon(1e-12));
            CHECK(b->value(-t) == doctest::Approx(b->value(t)).epsilon(1e-12));
            CHECK(b->value(t) > 0.0);
        }
    }
}

TEST_CASE("evaluate_on_grid on balls")
{
    for (int n : {2, 3}) {
        const double r = 1.7;
        auto grid = build_grid(n, 8);
        auto bg = evaluate_on_grid(ball(r, n), grid);
        CHECK(bg.valid);
        for (std::size_t k = 0; k < grid->size(); ++k) {
            const Mat P = tangent_projector(grid->nodes[k]);
            CHECK((bg.D2h[k] - r * P).norm() <= 1e-14);
            CHECK((bg.g[k] - P).norm() <= 1e-14);
            CHECK(bg.sk[k] == doctest::Approx(std::pow(r, n - 1)).epsilon(1e-14));
            CHECK(bg.vk[k] == doctest::Approx(std::pow(r, n) / n).epsilon(1e-14));
        }
    }
}

TEST_CASE("evaluate_on_grid errors and validity")
{
    auto grid = build_grid(2, 8);
    auto bg = evaluate_on_grid(ellipsoid(diag({2, 1})), grid);
    CHECK(quadrature(*grid, bg.vk) == doctest::Approx(2.0 * pi).epsilon(1e-12));

    auto wild = perturbed_ball(2, {{3, 2.0}}, 0.5); // h + h'' = 1 - 3 cos 2t / sqrt(pi) dips below zero
    auto bw = evaluate_on_grid(wild, grid);
    CHECK_FALSE(bw.valid);
    CHECK_THROWS_AS(quantities(bw), NumericalError);

    auto negative = from_function(2, [](const Vec& x) { return x[0] > 0.9 ? -1.0 : x.norm(); }, false, "neg");
    CHECK_THROWS_AS(evaluate_on_grid(negative, grid), NumericalError);
    auto nan = from_function(2, [](const Vec& x) { return x[1] > 0.99 ? std::nan("") : x.norm(); }, false, "nan");
    CHECK_THROWS_AS(evaluate_on_grid(nan, grid), NumericalError);
    CHECK_THROWS_AS(evaluate_on_grid(ball(1.0, 3), grid), ContractError);
}

TEST_CASE("Euler identity and radial annihilation")
{
    for (int n : {2, 3}) {
        auto grid = build_grid(n, 12);
        for (const auto& b : {sample_perturbed(n, 0.1), random_even_body(n, 9, 50), smoothed_l4_body(n, 0.25)}) {
            auto bg = evaluate_on_grid(b, grid);
            CHECK(bg.valid);
            CHECK(bg.euler_error <= 1e-10);
            for (std::size_t k = 0; k < grid->size(); ++k) {
                const Jet j = b->jet(grid->nodes[k]);
                CHECK((j.hess * grid->nodes[k]).norm() <= 1e-8 * (1.0 + j.hess.norm()));
            }
        }
    }
}

TEST_CASE("polar examples")
{
    for (int n : {2, 3}) {
        auto grid = build_grid(n, 8);
        CHECK(sup_gap(*polar(ball(2.5, n)), *ball(0.4, n), *grid) <= 1e-14);
        Mat A = n == 2 ? Mat(diag({2, 1})) : Mat(diag({2, 1, 0.7}));
        A(0, 1) = A(1, 0) = 0.4;
        auto P = polar(ellipsoid(A));
        auto Q = ellipsoid(A.inverse());
        CHECK(sup_gap(*P, *Q, *grid) <= 1e-13);
        for (const Vec& t : grid->nodes) {
            const Jet a = P->jet(t), b = Q->jet(t);
            CHECK((a.grad - b.grad).norm() <= 1e-12);
            CHECK((a.hess - b.hess).norm() <= 1e-10);
        }
    }
    auto grid = build_grid(3, 24);
    auto K = sample_perturbed(3, 0.1);
    CHECK(sup_gap(*polar(polar(K)), *K, *grid) <= 1e-4);
}

TEST_CASE("linear images")
{
    for (int n : {2, 3}) {
        auto grid = build_grid(n, 8);
        auto K = sample_perturbed(n, 0.1);
        CHECK(sup_gap(*linear_image(K, Mat::Identity(n, n)), *K, *grid) == 0.0);
        CHECK(sup_gap(*linear_image(ball(1.0, n), 2.0 * Mat::Identity(n, n)), *ball(2.0, n), *grid) <= 1e-15);
        CHECK_THROWS_AS(linear_image(K, Mat::Zero(n, n)), ContractError);
    }
    auto grid = build_grid(2, 8);
    CHECK(sup_gap(*linear_image(ball(1.0, 2), diag({2, 1})), *ellipsoid(diag({2, 1})), *grid) <= 1e-15);
}

TEST_CASE("firey sums")
{
    auto grid = build_grid(3, 8);
    CHECK(sup_gap(*firey_sum(1, ball(1.2, 3), 1, ball(0.5, 3), 2.0), *ball(1.3, 3), *grid) <= 1e-14);
    auto K = sample_perturbed(3, 0.1);
    CHECK(sup_gap(*firey_sum(0.5, K, 0.5, K, 0.0), *K, *grid) <= 1e-14);
    auto E = ellipsoid(diag({2, 1, 1}));
    auto S = firey_sum(1, K, 1, E, 1.0);
    for (const Vec& t : grid->nodes) CHECK(S->value(t) == doctest::Approx(K->value(t) + E->value(t)).epsilon(1e-14));
    CHECK_THROWS_AS(firey_sum(-1, K, 1, E, 1.0), ContractError);
    CHECK_THROWS_AS(firey_sum(0.5, K, 0.6, E, 0.0), ContractError);
    // p < 1 sums are reported as invalid rather than repaired.
    auto thin = ellipsoid(diag({4, 0.25, 1}));
    auto thin2 = ellipsoid(diag({0.25, 4, 1}));
    auto bad = evaluate_on_grid(firey_sum(0.5, thin, 0.5, thin2, -3.0), build_grid(3, 16));
    CHECK_FALSE(bad.valid);
}

TEST_CASE("quantities examples")
{
    auto g3 = build_grid(3, 16);
    auto q = quantities(evaluate_on_grid(ball(1.0, 3), g3));
    CHECK(q.volume == doctest::Approx(4.0 * pi / 3.0).epsilon(1e-12));
    CHECK(q.omega_n == doctest::Approx(4.0 * pi / 3.0).epsilon(1e-12));
    CHECK(q.r_in == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(q.R_out == doctest::Approx(1.0).epsilon(1e-14));
    auto qp = quantities(evaluate_on_grid(polar(ball(1.0, 3)), g3));
    CHECK(std::abs(q.omega_n * q.omega_n - q.volume * qp.volume) <= 1e-9 * q.volume * qp.volume);

    auto g2 = build_grid(2, 16);
    auto qe = quantities(evaluate_on_grid(ellipsoid(diag({2, 1})), g2));
    CHECK(qe.r_in == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(qe.R_out == doctest::Approx(2.0).epsilon(1e-14));

    // sp_total at p = 1 is the surface area; ellipse (2,1) perimeter oracle by midpoint rule.
    const int m = 200000;
    double perimeter = 0.0;
    for (int i = 0; i < m; ++i) {
        const double t = 2.0 * pi * (i + 0.5) / m;
        perimeter += std::hypot(2.0 * std::sin(t), std::cos(t)) * 2.0 * pi / m;
    }
    CHECK(qe.sp_total == doctest::Approx(perimeter).epsilon(1e-9));
}

TEST_CASE("rotated ellipse extrema are refined off the grid")
{
    auto grid = build_grid(2, 4);
    const double a = 0.123;
    Mat R(2, 2);
    R << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
    auto body = linear_image(ellipsoid(diag({2, 1})), R);
    const auto [lo, hi] = support_extrema(*body, *grid);
    CHECK(lo == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(hi == doctest::Approx(2.0).epsilon(1e-13));
}

TEST_CASE("volume of linear images")
{
    auto grid = build_grid(3, 24);
    auto K = sample_perturbed(3, 0.1);
    Mat T(3, 3);
    T << 1.5, 0.2, 0.0, -0.3, 0.8, 0.4, 0.1, 0.0, 1.2;
    const double v = quantities(evaluate_on_grid(K, grid)).volume;
    const double vt = quantities(evaluate_on_grid(linear_image(K, T), grid)).volume;
    CHECK(std::abs(vt - std::abs(T.determinant()) * v) <= 1e-4 * vt);
}

TEST_CASE("self-duality of Omega and volume product bound")
{
    for (int n : {2, 3}) {
        auto grid = build_grid(n, 24);
        for (const auto& K : {ellipsoid(n == 2 ? Mat(diag({2, 1})) : Mat(diag({2, 1, 1}))), sample_perturbed(n, 0.1)}) {
            auto q = quantities(evaluate_on_grid(K, grid));
            auto qp = quantities(evaluate_on_grid(polar(K), grid));
            CHECK(std::abs(q.omega_n - qp.omega_n) <= 1e-3 * q.omega_n);
            CHECK(q.omega_n * q.omega_n <= q.volume * qp.volume * (1.0 + 1e-6));
        }
    }
}

TEST_CASE("Brunn-Minkowski superadditivity for p = 1 sums")
{
    for (int n : {2, 3}) {
        auto grid = build_grid(n, 16);
        for (std::uint64_t s = 0; s < 4; ++s) {
            auto K = random_even_body(n, 100 + s, 50);
            auto L = random_even_body(n, 200 + s, 50);
            const double vk = quantities(evaluate_on_grid(K, grid)).volume;
            const double vl = quantities(evaluate_on_grid(L, grid)).volume;
            const double vs = quantities(evaluate_on_grid(firey_sum(1, K, 1, L, 1.0), grid)).volume;
            CHECK(std::pow(vs, 1.0 / n) >= std::pow(vk, 1.0 / n) + std::pow(vl, 1.0 / n) - 1e-9);
        }
    }
}

TEST_CASE("random bodies")
{
    auto a = random_even_body(3, 42, 50);
    auto b = random_even_body(3, 42, 50);
    auto grid = build_grid(3, 8);
    CHECK(sup_gap(*a, *b, *grid) == 0.0);
    CHECK(sup_gap(*a, *random_even_body(3, 43, 50), *grid) > 1e-3);
    CHECK(evaluate_on_grid(a, build_grid(3, 24)).valid);
    RandomBodyOptions wild;
    wild.perturbation = 40.0;
    CHECK_THROWS_AS(random_even_body(2, 1, 3, wild), NumericalError);
}

TEST_CASE("John position approximation")
{
    auto grid = build_grid(3, 12);
    auto E = ellipsoid(diag({2, 1, 1.4}));
    auto john = john_position(E, grid);
    CHECK(john.T.determinant() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(john.initial_ratio == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(john.ratio <= 1.01);
}
