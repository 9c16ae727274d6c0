#pragma once

#include "calab/types.hpp"

#include <functional>
#include <memory>
#include <span>
#include <utility>
#include <vector>

namespace calab {

/// Antipodally symmetric quadrature grid on S^{n-1}, n in {2, 3}.
struct SphereGrid {
    int dimension = 0;
    int band_limit = 0;
    std::vector<Vec> nodes;
    std::vector<double> weights;
    std::vector<std::size_t> antipode;
    // n = 3 only: |cos colatitude| > 0.999. Excluded from pointwise checks.
    std::vector<bool> pole_mask;

    std::size_t size() const { return nodes.size(); }
    double total_measure() const;
};

using GridPtr = std::shared_ptr<const SphereGrid>;

/// n = 2: N = max(4L + 4, 64) equispaced nodes unless `circle_nodes` > 0 overrides N
/// (must be even and at least 2L + 2).
/// n = 3: (L + 2) Gauss-Legendre colatitudes times (2L + 4) longitudes.
GridPtr build_grid(int n, int L, int circle_nodes = 0);

enum class Parity { even, odd, mixed };

using SphereFunction = std::function<double(const Vec&)>;

struct ScalarField {
    GridPtr grid;
    std::vector<double> values;
    Parity parity = Parity::mixed;
    // Pointwise definition on the sphere if known; enables the finite-difference fallback.
    SphereFunction source;
};

/// Samples f at the nodes. Parity is detected from the samples.
ScalarField sample(GridPtr grid, SphereFunction f);
ScalarField make_field(GridPtr grid, std::vector<double> values);

double quadrature(const SphereGrid& grid, std::span<const double> values);
double quadrature(const ScalarField& field);

struct SpectralExpansion {
    std::vector<double> coefficients; // in HarmonicBasis(n, L) order
    double tail_fraction = 0.0;       // energy outside the band, relative to the total
};

SpectralExpansion expand(const ScalarField& field);

constexpr double spectral_tail_tolerance = 1e-8;

struct TangentField {
    GridPtr grid;
    std::vector<Vec> vectors;
    bool tail_warning = false;
    bool used_fallback = false;
};

struct TangentTensorField {
    GridPtr grid;
    std::vector<Mat> tensors;
    bool tail_warning = false;
    bool used_fallback = false;
};

/// Spectral differentiation. If the band-L tail exceeds spectral_tail_tolerance the
/// warning flag is set, and when `field.source` is available the result is taken from
/// finite differences of the homogeneous extension instead.
TangentField tangential_gradient(const ScalarField& field);
TangentTensorField tangential_hessian(const ScalarField& field);

/// Central differences of x -> f(x/|x|), step h, one Richardson level.
Vec fd_tangential_gradient(const SphereFunction& f, const Vec& theta, double step = 1e-5);
/// Second differences of the homogeneous extension (step h, Richardson), projected.
Mat fd_tangential_hessian(const SphereFunction& f, const Vec& theta, double step = 1e-3);

std::pair<ScalarField, ScalarField> parity_split(const ScalarField& field);

Parity detect_parity(const SphereGrid& grid, std::span<const double> values, double tol = 1e-12);

} // namespace calab
