#include "doctest.h"

#include "calab/pinching.hpp"

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

} // namespace

TEST_CASE("threshold arithmetic")
{
    CHECK(threshold_main(1, 1, 7) == 0.0);
    CHECK(threshold_main(1, 2, 25) == 0.0);
    for (int n : {7, 13, 31}) CHECK(threshold_main(1, std::sqrt((n - 1) / 6.0), n) == doctest::Approx(0.0).scale(1.0).epsilon(1e-14));
    CHECK(threshold_strong(1, 1, 1, 3) == 2.0);
    CHECK(threshold_strong(1, 1, 1, 2) == 2.5);
    CHECK(threshold_strong(2, 4, 1, 3) == doctest::Approx(2.0 - (2.0 - 1.0) / 4.0));
    CHECK_THROWS_AS(threshold_main(0, 1, 3), ContractError);
    CHECK_THROWS_AS(threshold_main(2, 1, 3), ContractError);
    CHECK_THROWS_AS(threshold_main(1, 1, 1), ContractError);
    CHECK_THROWS_AS(threshold_strong(-1, 1, 1, 3), ContractError);
    CHECK_THROWS_AS(threshold_strong(1, 1, 0, 3), ContractError);
    CHECK_THROWS_AS(threshold_strong(2, 1, 1, 3), ContractError);
}

TEST_CASE("ball report")
{
    for (int n : {2, 3}) {
        auto grid = build_grid(n, 16);
        auto rep = measure_pinching(evaluate_on_grid(ball(1.0, n), grid));
        for (double v : {rep.r_curv, rep.R_curv, rep.A, rep.B, rep.r_in, rep.R_out}) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(threshold_strong(1, 1, 1, n) == 3.0 - (n - 1) / 2.0);
        CHECK(std::abs(rep.p_strong - (3.0 - (n - 1) / 2.0)) <= 1e-12);
        CHECK(std::abs(rep.p_main - (3.0 - (n - 1) / 2.0)) <= 1e-12);
        CHECK(!rep.admissible);
        // Orthogonal images of the ball report the same.
        Mat Q = Mat::Identity(n, n);
        Q(0, 0) = Q(1, 1) = std::cos(0.3);
        Q(0, 1) = -std::sin(0.3);
        Q(1, 0) = std::sin(0.3);
        auto rot = measure_pinching(evaluate_on_grid(linear_image(ball(1.0, n), Q), grid));
        CHECK(std::abs(rot.p_strong - rep.p_strong) <= 1e-10);
        CHECK(std::abs(rot.B - rep.B) <= 1e-10);
        CHECK(std::abs(rot.r_curv - rep.r_curv) <= 1e-10);
    }
}

TEST_CASE("ellipse radii in closed form")
{
    // h = sqrt(a^2 u1^2 + b^2 u2^2): h + h'' = a^2 b^2 / h^3, h (h + h'') = a^2 b^2 / h^2.
    const double a = 1.5, b = 1.0;
    auto rep = measure_pinching(evaluate_on_grid(ellipsoid(diag({a, b})), build_grid(2, 16)));
    CHECK(rep.r_curv == doctest::Approx(b * b / a).epsilon(1e-9));
    CHECK(rep.R_curv == doctest::Approx(a * a / b).epsilon(1e-9));
    CHECK(rep.A == doctest::Approx(b * b).epsilon(1e-9));
    CHECK(rep.B == doctest::Approx(a * a).epsilon(1e-9));
    CHECK(rep.r_in == doctest::Approx(b).epsilon(1e-12));
    CHECK(rep.R_out == doctest::Approx(a).epsilon(1e-12));
    CHECK(rep.p_strong == doctest::Approx(2.0 - (b * b / 2.0 - a * a) / (a * a)));
}

TEST_CASE("rolling-ball consistency")
{
    for (int n : {2, 3}) {
        auto grid = build_grid(n, 20);
        std::vector<Body> bodies{ellipsoid(n == 2 ? diag({2, 1}) : diag({2, 1, 1.3})),
                                 perturbed_ball(n, {{n == 2 ? 3u : 6u, 1.0}}, 0.05)};
        for (std::uint64_t s = 0; s < 4; ++s) bodies.push_back(random_even_body(n, s, 50));
        for (const auto& body : bodies) {
            auto rep = measure_pinching(evaluate_on_grid(body, grid));
            CHECK(rep.r_curv <= rep.R_curv);
            CHECK(rep.A <= rep.B);
            CHECK(rep.r_in <= rep.R_out);
            CHECK(rep.r_curv <= rep.r_in + 1e-8);
            CHECK(rep.R_out <= rep.R_curv + 1e-8);
        }
    }
    auto invalid = evaluate_on_grid(perturbed_ball(2, {{3, 2.0}}, 0.5), build_grid(2, 8));
    CHECK_THROWS_AS(measure_pinching(invalid), NumericalError);
}

TEST_CASE("image optimization")
{
    SUBCASE("ellipsoid is mapped to a ball")
    {
        auto grid = build_grid(3, 12);
        const Mat A = [] {
            Mat m = diag({2, 1, 1.3});
            m(0, 1) = m(1, 0) = 0.3;
            return m;
        }();
        auto res = optimize_image(ellipsoid(A), grid);
        const Mat expected = A.inverse() * std::cbrt(A.determinant());
        CHECK((res.T - expected).norm() <= 1e-2);
        CHECK(std::abs(res.T.determinant() - 1.0) <= 1e-12);
        CHECK(res.report.p_strong <= res.initial.p_strong);
        CHECK(std::abs(res.report.p_strong - 2.0) <= 1e-3);
    }
    SUBCASE("ball stays put")
    {
        auto res = optimize_image(ball(1.0, 2), build_grid(2, 12), 50);
        CHECK(res.T == Mat::Identity(2, 2));
        CHECK(res.report.p_strong == res.initial.p_strong);
    }
    SUBCASE("perturbed ball does not get worse")
    {
        auto res = optimize_image(perturbed_ball(3, {{6, 1.0}, {8, -0.5}}, 0.05), build_grid(3, 12), 60);
        CHECK(res.report.p_strong <= res.initial.p_strong);
        CHECK(res.evaluations > 0);
    }
}

TEST_CASE("spectral consistency")
{
    auto grid = build_grid(3, 16);
    auto b = spectral_consistency(ball(1.0, 3), grid, Mat::Identity(3, 3));
    CHECK(b.lambda1_even == doctest::Approx(6.0).epsilon(1e-9));
    CHECK(b.bound == doctest::Approx(1.0));
    CHECK(b.tolerance == doctest::Approx(3e-3));
    CHECK(b.satisfied);
    const Mat A = diag({2, 1, 1});
    auto e = spectral_consistency(ellipsoid(A), grid, A.inverse() * std::cbrt(2.0));
    CHECK(e.p_strong == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(e.satisfied);
    for (std::uint64_t s = 0; s < 2; ++s) CHECK(spectral_consistency(random_even_body(2, s, 50), build_grid(2, 40), Mat::Identity(2, 2)).satisfied);
}
