#pragma once

#include "calab/centroaffine.hpp"
#include "calab/harmonics.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace calab {

enum class ParityFilter { all, even_only };

/// Harmonic basis functions (Fourier modes for n = 2) up to a degree, restricted to a grid.
struct GalerkinBasis {
    GridPtr grid;
    int max_degree = 0;
    ParityFilter parity = ParityFilter::all;
    bool include_constant = true;
    std::vector<std::size_t> indices; // positions in HarmonicBasis(n, max_degree)
    std::vector<int> degrees;

    std::size_t size() const { return indices.size(); }
};

/// max_degree < 0 selects the grid band limit.
GalerkinBasis make_basis(GridPtr grid, int max_degree = -1, ParityFilter parity = ParityFilter::all,
                         bool include_constant = true);

struct GalerkinSystem {
    GalerkinBasis basis;
    Eigen::MatrixXd S; // Dirichlet form against nu
    Eigen::MatrixXd M; // mass against nu
    Eigen::MatrixXd H; // |Hess* f|_g^2 against nu; empty unless requested
    Eigen::MatrixXd values;    // basis values at the nodes, nodes x basis
    Eigen::VectorXd nu_weight; // quadrature weight times nu at each node
    int dimension = 0;
};

struct AssemblyOptions {
    bool with_hessian_form = true;
    int threads = 1;
};

GalerkinSystem assemble(const CentroAffineState& state, const GalerkinBasis& basis, const AssemblyOptions& options = {});

enum class Subspace { all, even_nonconstant };

struct Cluster {
    double value = 0.0; // mean of the members
    int multiplicity = 0;
    std::size_t first = 0; // index of the smallest member
};

/// Eigenvalues within max(1e-6, 1e-3 * lambda) of their neighbour share a cluster.
double cluster_tolerance(double lambda);
std::vector<Cluster> cluster_eigenvalues(std::span<const double> sorted);

struct SpectrumReport {
    Subspace subspace = Subspace::all;
    std::vector<double> eigenvalues; // ascending, the k smallest
    std::vector<Cluster> clusters;   // clusters among the reported eigenvalues
    std::optional<double> lambda1;   // first cluster above the kernel (subspace all)
    int lambda1_multiplicity = 0;
    std::optional<double> lambda1_even; // smallest eigenvalue (subspace even_nonconstant)
    Eigen::MatrixXd eigenvectors;    // basis coefficients, M-orthonormal columns
    std::vector<double> residuals;   // |S v - lambda M v| / |M v|

    double max_residual() const;
};

/// k smallest generalized eigenpairs of (S, M). even_nonconstant keeps the even basis
/// functions and removes the constant direction by requiring integral f dnu = 0.
SpectrumReport solve_spectrum(const GalerkinSystem& system, std::size_t k, Subspace subspace);

/// Relative distance of the adapted linear functions <theta, xi>/h from the span of the
/// lambda1 eigenvectors, in the nu-weighted norm.
double first_eigenspace_deficiency(const GalerkinSystem& system, const SpectrumReport& report, Body body);

/// A band-limited function on the sphere: coefficients in HarmonicBasis(n, degree) order.
struct HarmonicExpansion {
    int dimension = 0;
    int degree = 0;
    std::vector<double> coefficients;
};

/// Gaussian coefficients damped by 1/(1 + l), constant term removed.
HarmonicExpansion random_expansion(int n, int degree, std::uint64_t seed, bool even_only = false);

/// |int (Delta f)^2 - int |Hess* f|_g^2 - (n - 2) int |grad_g f|^2| (all against nu),
/// relative to the largest of the three terms; 0 when all three vanish.
double bochner_residual(const CentroAffineState& state, const HarmonicExpansion& f);

/// Same identity for a coefficient vector of the system: v'S M^{-1} S v, v'H v, v'S v.
double discrete_bochner_residual(const GalerkinSystem& system, const Eigen::VectorXd& v);

/// Smallest generalized eigenvalue of (H, S) on the even functions orthogonal to constants.
double hessian_gap_even(const GalerkinSystem& system);

struct InvarianceReport {
    std::vector<double> eigenvalues_K;
    std::vector<double> eigenvalues_TK;
    std::vector<double> gaps; // |a - b| / max(1, |a|)
    double max_gap = 0.0;
};

/// Spectra of K and T(K) computed independently on the same grid and compared.
InvarianceReport invariance_check(Body body, const Mat& T, GridPtr grid, int max_degree = -1, std::size_t count = 10);

} // namespace calab
