#pragma once

#include "calab/body.hpp"
#include "calab/pinching.hpp"

#include <string>
#include <vector>

namespace calab {

struct IsoParams {
    int n = 0;
    double alpha = 0.0, beta = 0.0, D = 1.0;
    double r = 0.0, R = 0.0, A = 0.0, B = 0.0;
    double dBM = 0.0; // (1 + beta) sqrt(1 + alpha^2)
};

/// r = beta + 1/sqrt(1 + alpha^2/D^2), R = D/sqrt(1 + alpha^2) + beta, A = beta r,
/// B = (D^2/alpha^2)(1 + beta sqrt(1 + alpha^2/D^2)) + beta R.
IsoParams predicted_params(int n, double alpha, double beta, double D);

struct Construction {
    IsoParams params;
    double scale = 1.0; // K is rescaled by 1/r_in so that B ⊂ K ⊂ D B
    Body K;             // the rescaled input
    Body smoothed;      // polar(polar(K) +_2 (alpha/D) B) + beta B
    Body smoothed_from_gauge; // polar of sqrt(|x|_K^2 + (alpha/D)^2 |x|^2), plus beta B
};

/// `gauge` evaluates the gauge |x|_K of the unscaled input when a closed form is known;
/// otherwise the polar support function is used for it.
Construction construct(Body K, GridPtr grid, double alpha, double beta, SphereFunction gauge = {});

/// Sup over the grid nodes of |h - h'| between the two routes.
double dual_route_gap(const Construction& c, const SphereGrid& grid);

constexpr double iso_verification_slack = 0.02;

struct BoundCheck {
    std::string name;
    double measured = 0.0;
    double predicted = 0.0;
    bool pass = false;
};

struct IsoVerification {
    std::vector<BoundCheck> bounds; // r_in, R_out, A, B
    double geometric_distance = 0.0; // max(h_~K / h_K) max(h_K / h_~K) on the grid
    bool distance_ok = false;
    bool pass = false;
};

/// Measured bounds of the smoothed body against the predictions, each with 2% slack.
/// When K is given, also checks d_G(K, ~K) <= dBM (1 + 1e-3).
IsoVerification verify(const BodyOnGrid& smoothed, const IsoParams& params, Body K = nullptr);

/// 7/3 - (n - 1) gamma^2 / (24 D^2).
double p_gamma_D(int n, double gamma, double D);
/// 1 + C sqrt(D) / n^{1/4}. The constant C is not fixed by the theory; 1.0 is a placeholder default.
double isometric_gamma(int n, double D, double C = 1.0);

} // namespace calab
