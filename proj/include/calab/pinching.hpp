#pragma once

#include "calab/body.hpp"
#include "calab/spectral.hpp"

namespace calab {

struct PinchingReport {
    int n = 0;
    double r_curv = 0.0, R_curv = 0.0; // extreme eigenvalues of D2h
    double A = 0.0, B = 0.0;           // extreme eigenvalues of h D2h
    double r_in = 0.0, R_out = 0.0;    // extreme values of h
    double p_main = 0.0;
    double p_strong = 0.0; // uses R = R_out
    bool admissible = false; // p_strong < 1
};

/// 3 - (n - 1) r^2 / (2 R^2).
double threshold_main(double r, double R, int n);
/// 2 - ((n - 1) A / 2 - R^2) / B.
double threshold_strong(double A, double B, double R, int n);

/// Eigenvalue extremes over nodes outside the pole mask; h extremes refined off the grid.
PinchingReport measure_pinching(const BodyOnGrid& bg);

struct ImageSearch {
    Mat T; // unit determinant, symmetric positive-definite
    PinchingReport report;
    PinchingReport initial; // report of K itself
    int evaluations = 0;
};

/// Minimizes p_strong(T(K)) over unit-determinant SPD T by Nelder-Mead in the traceless
/// log chart. Never returns an image worse than the identity.
ImageSearch optimize_image(Body body, GridPtr grid, int iterations = 200);

struct SpectralConsistency {
    double p_strong = 0.0;
    double lambda1_even = 0.0;
    double bound = 0.0; // n - p_strong
    double tolerance = 0.0;
    bool satisfied = false;
};

/// Compares lambda_{1,e}(K) with n - p_strong(T(K)); tolerance defaults to 1e-3 n.
SpectralConsistency spectral_consistency(Body body, GridPtr grid, const Mat& T, int max_degree = -1,
                                         double tolerance = -1.0);

} // namespace calab
