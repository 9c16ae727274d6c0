#include "calab/pinching.hpp"

#include "calab/optimize.hpp"

#include <cmath>
#include <limits>

namespace calab {

double threshold_main(double r, double R, int n)
{
    require(r > 0.0 && R > 0.0 && r <= R, "threshold_main: need 0 < r <= R");
    require(n >= 2, "threshold_main: n must be at least 2");
    return 3.0 - (n - 1.0) * r * r / (2.0 * R * R);
}

double threshold_strong(double A, double B, double R, int n)
{
    require(A > 0.0 && B > 0.0 && A <= B, "threshold_strong: need 0 < A <= B");
    require(R > 0.0, "threshold_strong: R must be positive");
    require(n >= 2, "threshold_strong: n must be at least 2");
    return 2.0 - ((n - 1.0) * A / 2.0 - R * R) / B;
}

PinchingReport measure_pinching(const BodyOnGrid& bg)
{
    if (!bg.valid) throw NumericalError("measure_pinching: body is not strongly convex on the grid");
    PinchingReport rep;
    rep.n = bg.dimension();
    const double inf = std::numeric_limits<double>::infinity();
    rep.r_curv = rep.A = inf;
    rep.R_curv = rep.B = -inf;
    for (std::size_t k = 0; k < bg.size(); ++k) {
        if (bg.grid->pole_mask[k]) continue;
        Eigen::SelfAdjointEigenSolver<FrameMat> es(bg.D2h_frame[k], Eigen::EigenvaluesOnly);
        const double lo = es.eigenvalues()[0], hi = es.eigenvalues()[es.eigenvalues().size() - 1];
        rep.r_curv = std::min(rep.r_curv, lo);
        rep.R_curv = std::max(rep.R_curv, hi);
        rep.A = std::min(rep.A, bg.h[k] * lo);
        rep.B = std::max(rep.B, bg.h[k] * hi);
    }
    const auto [lo, hi] = support_extrema(*bg.body, *bg.grid);
    rep.r_in = lo;
    rep.R_out = hi;
    rep.p_main = threshold_main(rep.r_curv, rep.R_curv, rep.n);
    rep.p_strong = threshold_strong(rep.A, rep.B, rep.R_out, rep.n);
    rep.admissible = rep.p_strong < 1.0;
    return rep;
}

ImageSearch optimize_image(Body body, GridPtr grid, int iterations)
{
    const int n = body->dimension();
    require(grid->dimension == n, "optimize_image: grid dimension mismatch");
    ImageSearch out;
    out.initial = measure_pinching(evaluate_on_grid(body, grid));
    auto objective = [&](std::span<const double> p) {
        ++out.evaluations;
        const Mat T = symmetric_exp(traceless_symmetric(n, p));
        try {
            const BodyOnGrid bg = evaluate_on_grid(linear_image(body, T), grid);
            if (!bg.valid) return 1e10;
            return measure_pinching(bg).p_strong;
        } catch (const NumericalError&) {
            return 1e10;
        }
    };
    const std::size_t dim = static_cast<std::size_t>(n * (n + 1) / 2 - 1);
    const auto res = nelder_mead(objective, std::vector<double>(dim, 0.0), 0.2, iterations);
    out.T = Mat::Identity(n, n);
    out.report = out.initial;
    if (res.value < out.initial.p_strong) {
        out.T = symmetric_exp(traceless_symmetric(n, res.x));
        out.report = measure_pinching(evaluate_on_grid(linear_image(body, out.T), grid));
    }
    return out;
}

SpectralConsistency spectral_consistency(Body body, GridPtr grid, const Mat& T, int max_degree, double tolerance)
{
    const int n = body->dimension();
    SpectralConsistency out;
    out.p_strong = measure_pinching(evaluate_on_grid(linear_image(body, T), grid)).p_strong;
    const auto state = build_state(evaluate_on_grid(body, grid));
    const auto sys = assemble(state, make_basis(grid, max_degree, ParityFilter::even_only), {.with_hessian_form = false});
    out.lambda1_even = *solve_spectrum(sys, 1, Subspace::even_nonconstant).lambda1_even;
    out.bound = n - out.p_strong;
    out.tolerance = tolerance < 0.0 ? 1e-3 * n : tolerance;
    out.satisfied = out.lambda1_even >= out.bound - out.tolerance;
    return out;
}

} // namespace calab
