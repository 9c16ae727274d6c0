#pragma once

#include "calab/body.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace calab {

/// mu = density * (round measure), sampled at the grid nodes.
struct TargetMeasure {
    GridPtr grid;
    std::vector<double> density;
};

/// Validates positivity and antipodal symmetry (relative 1e-12).
TargetMeasure make_target(GridPtr grid, std::vector<double> density);
TargetMeasure uniform_target(GridPtr grid);
/// Density of S_p K = h^{1-p} det D2h.
TargetMeasure lp_surface_target(Body K, GridPtr grid, double p);

/// p != 0: (1/p) int h^p dmu / V^{p/n}; p = 0: exp(int log h dmu~) / V^{1/n} with mu~ = mu/|mu|.
double functional(const BodyOnGrid& L, const TargetMeasure& mu, double p);

struct SolverOptions {
    int degree = 32; // even harmonics up to this degree; at most the grid band limit
    int max_iterations = 400;
    double gradient_tolerance = 1e-7;  // on the preconditioned gradient, relative to |F|
    double eig_floor_factor = 1e-6;    // eig_floor = factor * mean(h)
};

/// Support function sum c_a Y_a over the even harmonics, in HarmonicBasis(n, degree) order
/// restricted to even degrees.
struct EvenShape {
    int dimension = 0;
    int degree = 0;
    std::vector<double> coefficients;
};

std::size_t even_basis_size(int n, int degree);
/// Quadrature projection of h_K onto the even harmonics.
EvenShape project_even(Body K, GridPtr grid, int degree);
Body shape_body(const EvenShape& shape);

struct SolveResult {
    EvenShape shape; // normalized to V = 1
    double F = 0.0;
    double el_residual = 0.0; // sup |h^{1-p} det D2h / (c f) - 1|
    double el_constant = 0.0; // least-squares c
    double min_eig = 0.0;     // of D2h over the nodes
    double eig_floor = 0.0;
    double volume = 0.0;
    int iterations = 0;
    bool converged = false;
    std::string status;
    std::vector<double> history; // F after each accepted step, starting with the initial value
};

SolveResult minimize(const TargetMeasure& mu, double p, const EvenShape& init, const SolverOptions& options = {});

/// Random feasible start: ball plus a damped even perturbation.
EvenShape random_start(int n, int degree, std::uint64_t seed, GridPtr grid);

struct UniquenessProbe {
    std::vector<SolveResult> runs;
    std::vector<std::vector<double>> distances; // sup |h_i - h_j| / sup h_i
    std::vector<int> cluster_of;
    int clusters = 0;
};

constexpr double uniqueness_cluster_threshold = 1e-2;

/// mu = S_p K, minimize from n_starts random starts and cluster the minimizers.
UniquenessProbe uniqueness_probe(Body K, double p, int n_starts, std::uint64_t seed, GridPtr grid,
                                 const SolverOptions& options = {}, int threads = 1);

struct InequalityGap {
    double lhs = 0.0;
    double rhs = 0.0;
    double gap = 0.0; // (lhs - rhs) / |rhs| for p != 0, lhs - rhs for p = 0
};

/// p != 0: (1/p) int h_L^p dS_p K >= (n/p) V(K)^{1-p/n} V(L)^{p/n};
/// p = 0: (1/V(K)) int log(h_L/h_K) dV_K >= (1/n) log(V(L)/V(K)).
InequalityGap lp_minkowski_gap(Body K, Body L, double p, GridPtr grid);

} // namespace calab
