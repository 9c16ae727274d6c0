#pragma once

#include "calab/body.hpp"
#include "calab/sphere.hpp"

#include <array>
#include <string>
#include <vector>

namespace calab {

using TangentBasis = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, 3, 2>;

struct CentroAffineState {
    BodyOnGrid bg;
    std::vector<double> nu;       // h det D2h
    std::vector<double> nu_star;  // h^{-n}
    std::vector<Vec> log_h_gradient;
    std::vector<TangentBasis> frames;
    std::vector<FrameMat> g_frame;     // g in frame coordinates
    std::vector<FrameMat> g_inv_frame;

    int dimension() const { return bg.dimension(); }
    std::size_t size() const { return bg.size(); }
    const SphereGrid& grid() const { return *bg.grid; }
};

CentroAffineState build_state(BodyOnGrid bg);

struct Diagnostic {
    std::string name;
    double max_error = 0.0;
    std::size_t node = 0;
};

/// Hess* f = grad^2_S f + grad log h (x) grad f + grad f (x) grad log h, ambient form.
Mat conjugate_hessian_at(const CentroAffineState& state, std::size_t node, const Vec& grad_f, const Mat& hess_f);
/// tr(g^{-1} Hess* f) at one node.
double hbm_at(const CentroAffineState& state, std::size_t node, const Vec& grad_f, const Mat& hess_f);

TangentTensorField conjugate_hessian(const CentroAffineState& state, const ScalarField& f);
ScalarField hbm_apply(const CentroAffineState& state, const ScalarField& f);

/// <theta, xi> / h(theta).
SphereFunction adapted_linear(Body body, const Vec& xi);

/// Symbols in coordinates (colatitude, longitude) for n = 3, or the angle for n = 2;
/// index order [k][i][j] for Gamma_{ij}^k.
using Christoffel = std::array<std::array<std::array<double, 2>, 2>, 2>;

/// Coordinates of a unit vector (n = 3): colatitude, longitude.
std::array<double, 2> sphere_coordinates(const Vec& theta);
Vec sphere_point(double colat, double lon);

Christoffel christoffel_star_at(const SupportFunction& body, double colat, double lon);
/// Conjugate Christoffels at a grid node; throws ContractError at pole-masked nodes.
Christoffel conjugate_christoffels(const CentroAffineState& state, std::size_t node);

/// Metric g in coordinates (colatitude, longitude).
FrameMat coordinate_metric(const SupportFunction& body, double colat, double lon);

/// Max over unmasked nodes of |Ric* - (n-2) g| / |g| in an orthonormal frame.
Diagnostic ricci_star_check(const CentroAffineState& state);

/// Max asymmetry of the cubic form (grad*_k g)_{ij} in k, i; zero iff the connection
/// conjugate to grad* is torsion-free.
Diagnostic codazzi_check(const CentroAffineState& state);

/// Per-node |nu nu* - det g| / det g.
Diagnostic measure_conjugacy_check(const CentroAffineState& state);

/// |Hess* lin + lin g| / |g| for adapted linear functions along the coordinate axes.
Diagnostic adapted_linear_check(const CentroAffineState& state);

struct DualityCheck {
    Diagnostic pullback;
    double omega_gap = 0.0; // |Omega(K) - Omega(K°)| / Omega(K)
};

/// theta* -> x(theta*)/|x(theta*)| maps the parametrization of K onto that of K°;
/// compares g_K with the pullback of g_{K°} evaluated exactly at the image directions.
DualityCheck duality_isometry_check(const BodyOnGrid& bgK, const BodyOnGrid& bgKpolar);

/// |∫ F dnu_{T(K)} - |det T| ∫ F o psi dnu_K| relative, psi(theta) = T^{-T} theta / |T^{-T} theta|.
double nu_pushforward_gap(Body body, const Mat& T, GridPtr grid, const SphereFunction& F);

} // namespace calab
