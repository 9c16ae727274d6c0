#include "calab/isomorphic.hpp"

#include <cmath>

namespace calab {

IsoParams predicted_params(int n, double alpha, double beta, double D)
{
    require(n >= 2, "predicted_params: n must be at least 2");
    require(alpha > 0.0 && beta > 0.0, "predicted_params: alpha and beta must be positive");
    require(D >= 1.0, "predicted_params: D must be at least 1");
    IsoParams p;
    p.n = n;
    p.alpha = alpha;
    p.beta = beta;
    p.D = D;
    const double q = std::sqrt(1.0 + alpha * alpha / (D * D));
    p.r = beta + 1.0 / q;
    p.R = D / std::sqrt(1.0 + alpha * alpha) + beta;
    p.A = beta * p.r;
    p.B = D * D / (alpha * alpha) * (1.0 + beta * q) + beta * p.R;
    p.dBM = (1.0 + beta) * std::sqrt(1.0 + alpha * alpha);
    return p;
}

Construction construct(Body K, GridPtr grid, double alpha, double beta, SphereFunction gauge)
{
    const int n = K->dimension();
    require(grid->dimension == n, "construct: grid dimension mismatch");
    const auto [lo, hi] = support_extrema(*K, *grid);
    if (!(lo > 0.0) || !std::isfinite(hi)) throw NumericalError("construct: no sandwich certificate for K");
    Construction c;
    c.scale = 1.0 / lo;
    c.params = predicted_params(n, alpha, beta, std::max(1.0, hi / lo));
    c.K = linear_image(K, c.scale * Mat::Identity(n, n));
    const double a = alpha / c.params.D;

    c.smoothed = add_ball(polar(firey_sum(1.0, polar(c.K), 1.0, ball(a, n), 2.0)), beta);

    if (!gauge) {
        Body P = polar(K);
        gauge = [P](const Vec& x) { return P->value(x); };
    }
    const double s = c.scale;
    auto N = [gauge, a, s](const Vec& x) {
        const double G = gauge(x) / s;
        return std::sqrt(G * G + a * a * x.squaredNorm());
    };
    c.smoothed_from_gauge = add_ball(polar(from_function(n, N, true, "gauge_route")), beta);
    return c;
}

double dual_route_gap(const Construction& c, const SphereGrid& grid)
{
    double gap = 0.0;
    for (const Vec& t : grid.nodes) gap = std::max(gap, std::abs(c.smoothed->value(t) - c.smoothed_from_gauge->value(t)));
    return gap;
}

IsoVerification verify(const BodyOnGrid& smoothed, const IsoParams& params, Body K)
{
    const PinchingReport rep = measure_pinching(smoothed);
    const double s = iso_verification_slack;
    IsoVerification v;
    v.bounds = {
        {"r_in", rep.r_in, params.r, rep.r_in >= params.r * (1.0 - s)},
        {"R_out", rep.R_out, params.R, rep.R_out <= params.R * (1.0 + s)},
        {"A", rep.A, params.A, rep.A >= params.A * (1.0 - s)},
        {"B", rep.B, params.B, rep.B <= params.B * (1.0 + s)},
    };
    v.pass = true;
    for (const auto& b : v.bounds) v.pass = v.pass && b.pass;
    v.distance_ok = true;
    if (K) {
        double up = 0.0, down = 0.0;
        for (std::size_t k = 0; k < smoothed.size(); ++k) {
            const double hk = K->value(smoothed.grid->nodes[k]);
            up = std::max(up, smoothed.h[k] / hk);
            down = std::max(down, hk / smoothed.h[k]);
        }
        v.geometric_distance = up * down;
        v.distance_ok = v.geometric_distance <= params.dBM * (1.0 + 1e-3);
        v.pass = v.pass && v.distance_ok;
    }
    return v;
}

double p_gamma_D(int n, double gamma, double D)
{
    require(gamma > 0.0 && D > 0.0, "p_gamma_D: gamma and D must be positive");
    return 7.0 / 3.0 - (n - 1.0) * gamma * gamma / (24.0 * D * D);
}

double isometric_gamma(int n, double D, double C)
{
    require(n >= 1 && D > 0.0, "isometric_gamma: need n >= 1 and D > 0");
    return 1.0 + C * std::sqrt(D) / std::pow(static_cast<double>(n), 0.25);
}

} // namespace calab
