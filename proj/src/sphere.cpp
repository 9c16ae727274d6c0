#include "calab/sphere.hpp"

#include "calab/harmonics.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace calab {

using std::numbers::pi;

Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, 3, 2> tangent_frame(const Vec& theta)
{
    const auto n = theta.size();
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, 3, 2> frame(n, n - 1);
    if (n == 2) {
        frame(0, 0) = -theta[1];
        frame(1, 0) = theta[0];
        return frame;
    }
    const double x = theta[0], y = theta[1], z = theta[2];
    const double s = std::hypot(x, y);
    if (s < 1e-12) {
        const double sign = z >= 0.0 ? 1.0 : -1.0;
        frame.col(0) = Eigen::Vector3d(sign, 0.0, 0.0);
        frame.col(1) = Eigen::Vector3d(0.0, 1.0, 0.0);
        return frame;
    }
    frame.col(0) = Eigen::Vector3d(z * x / s, z * y / s, -s);
    frame.col(1) = Eigen::Vector3d(-y / s, x / s, 0.0);
    return frame;
}

double SphereGrid::total_measure() const
{
    return dimension == 2 ? 2.0 * pi : 4.0 * pi;
}

GridPtr build_grid(int n, int L, int circle_nodes)
{
    require(n == 2 || n == 3, "build_grid: unsupported dimension " + std::to_string(n));
    require(L >= 4, "build_grid: band limit must be at least 4");
    require(L % 2 == 0, "build_grid: band limit must be even");

    auto grid = std::make_shared<SphereGrid>();
    grid->dimension = n;
    grid->band_limit = L;

    if (n == 2) {
        int count = std::max(4 * L + 4, 64);
        if (circle_nodes > 0) {
            require(circle_nodes % 2 == 0, "build_grid: circle node count must be even");
            require(circle_nodes >= 2 * L + 2, "build_grid: circle node count too small for band limit");
            count = circle_nodes;
        }
        grid->nodes.reserve(count);
        for (int k = 0; k < count; ++k) {
            const double t = 2.0 * pi * k / count;
            Vec v(2);
            v << std::cos(t), std::sin(t);
            grid->nodes.push_back(v);
            grid->weights.push_back(2.0 * pi / count);
            grid->antipode.push_back(static_cast<std::size_t>((k + count / 2) % count));
            grid->pole_mask.push_back(false);
        }
        for (int k = count / 2; k < count; ++k) grid->nodes[k] = -grid->nodes[k - count / 2];
        return grid;
    }

    const int n_colat = L + 2;
    const int n_lon = 2 * L + 4;
    gsl_set_error_handler_off();
    gsl_integration_glfixed_table* table = gsl_integration_glfixed_table_alloc(n_colat);
    if (table == nullptr) throw NumericalError("build_grid: Gauss-Legendre table allocation failed");
    std::vector<std::pair<double, double>> gl(n_colat);
    for (int i = 0; i < n_colat; ++i) {
        gsl_integration_glfixed_point(-1.0, 1.0, static_cast<std::size_t>(i), &gl[i].first, &gl[i].second, table);
    }
    gsl_integration_glfixed_table_free(table);
    // Descending cos(colatitude), so index i and n_colat - 1 - i are mirror images.
    std::sort(gl.begin(), gl.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    for (int i = 0; i < n_colat / 2; ++i) {
        // Enforce exact mirror symmetry of the table.
        const double c = 0.5 * (gl[i].first - gl[n_colat - 1 - i].first);
        const double w = 0.5 * (gl[i].second + gl[n_colat - 1 - i].second);
        gl[i] = {c, w};
        gl[n_colat - 1 - i] = {-c, w};
    }

    const double dphi = 2.0 * pi / n_lon;
    grid->nodes.reserve(static_cast<std::size_t>(n_colat) * n_lon);
    for (int i = 0; i < n_colat; ++i) {
        const double c = gl[i].first;
        const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
        for (int j = 0; j < n_lon; ++j) {
            const double phi = dphi * j;
            Vec v(3);
            v << s * std::cos(phi), s * std::sin(phi), c;
            grid->nodes.push_back(v);
            grid->weights.push_back(gl[i].second * dphi);
            const int ia = n_colat - 1 - i;
            const int ja = (j + n_lon / 2) % n_lon;
            grid->antipode.push_back(static_cast<std::size_t>(ia) * n_lon + ja);
            grid->pole_mask.push_back(std::abs(c) > 0.999);
        }
    }
    // cos/sin of antipodal longitudes are computed independently; make the pairs exact.
    for (std::size_t k = 0; k < grid->nodes.size(); ++k) {
        const std::size_t a = grid->antipode[k];
        if (a > k) grid->nodes[a] = -grid->nodes[k];
    }
    return grid;
}

Parity detect_parity(const SphereGrid& grid, std::span<const double> values, double tol)
{
    double scale = 0.0;
    for (double v : values) scale = std::max(scale, std::abs(v));
    const double bound = tol * std::max(1.0, scale);
    bool even = true, odd = true;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double a = values[k], b = values[grid.antipode[k]];
        if (std::abs(a - b) > bound) even = false;
        if (std::abs(a + b) > bound) odd = false;
    }
    if (even) return Parity::even;
    if (odd) return Parity::odd;
    return Parity::mixed;
}

ScalarField sample(GridPtr grid, SphereFunction f)
{
    ScalarField field;
    field.values.reserve(grid->size());
    for (const Vec& v : grid->nodes) field.values.push_back(f(v));
    field.parity = detect_parity(*grid, field.values);
    field.grid = std::move(grid);
    field.source = std::move(f);
    return field;
}

ScalarField make_field(GridPtr grid, std::vector<double> values)
{
    require(values.size() == grid->size(), "make_field: value count does not match grid");
    ScalarField field;
    field.parity = detect_parity(*grid, values);
    field.values = std::move(values);
    field.grid = std::move(grid);
    return field;
}

double quadrature(const SphereGrid& grid, std::span<const double> values)
{
    require(values.size() == grid.size(), "quadrature: value count does not match grid");
    // Pair antipodal nodes first so odd integrands cancel exactly.
    double sum = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const std::size_t a = grid.antipode[k];
        if (a < k) continue;
        if (a == k) {
            sum += grid.weights[k] * values[k];
        } else {
            sum += grid.weights[k] * values[k] + grid.weights[a] * values[a];
        }
    }
    return sum;
}

double quadrature(const ScalarField& field)
{
    return quadrature(*field.grid, field.values);
}

SpectralExpansion expand(const ScalarField& field)
{
    const SphereGrid& grid = *field.grid;
    HarmonicBasis basis(grid.dimension, grid.band_limit);
    SpectralExpansion out;
    out.coefficients.assign(basis.size(), 0.0);
    std::vector<double> phi(basis.size());
    double total = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        basis.values(grid.nodes[k], phi);
        const double wf = grid.weights[k] * field.values[k];
        total += wf * field.values[k];
        for (std::size_t a = 0; a < basis.size(); ++a) out.coefficients[a] += wf * phi[a];
    }
    double captured = 0.0;
    for (double c : out.coefficients) captured += c * c;
    out.tail_fraction = total > 0.0 ? std::max(0.0, total - captured) / total : 0.0;
    return out;
}

namespace {

double homogeneous(const SphereFunction& f, const Vec& x)
{
    return f(x / x.norm());
}

Vec fd_gradient_once(const SphereFunction& f, const Vec& x, double h)
{
    const auto n = x.size();
    Vec g(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        Vec xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        g[i] = (homogeneous(f, xp) - homogeneous(f, xm)) / (2.0 * h);
    }
    return g;
}

Mat fd_hessian_once(const SphereFunction& f, const Vec& x, double h)
{
    const auto n = x.size();
    Mat H(n, n);
    const double f0 = homogeneous(f, x);
    for (Eigen::Index i = 0; i < n; ++i) {
        Vec xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        H(i, i) = (homogeneous(f, xp) - 2.0 * f0 + homogeneous(f, xm)) / (h * h);
        for (Eigen::Index j = i + 1; j < n; ++j) {
            Vec pp = x, pm = x, mp = x, mm = x;
            pp[i] += h; pp[j] += h;
            pm[i] += h; pm[j] -= h;
            mp[i] -= h; mp[j] += h;
            mm[i] -= h; mm[j] -= h;
            H(i, j) = (homogeneous(f, pp) - homogeneous(f, pm) - homogeneous(f, mp) + homogeneous(f, mm)) / (4.0 * h * h);
            H(j, i) = H(i, j);
        }
    }
    return H;
}

} // namespace

Vec fd_tangential_gradient(const SphereFunction& f, const Vec& theta, double step)
{
    const Vec coarse = fd_gradient_once(f, theta, step);
    const Vec fine = fd_gradient_once(f, theta, 0.5 * step);
    const Vec g = (4.0 * fine - coarse) / 3.0;
    return tangent_projector(theta) * g;
}

Mat fd_tangential_hessian(const SphereFunction& f, const Vec& theta, double step)
{
    const Mat coarse = fd_hessian_once(f, theta, step);
    const Mat fine = fd_hessian_once(f, theta, 0.5 * step);
    const Mat H = (4.0 * fine - coarse) / 3.0;
    const Mat P = tangent_projector(theta);
    const Mat out = P * H * P;
    return 0.5 * (out + out.transpose());
}

TangentField tangential_gradient(const ScalarField& field)
{
    const SphereGrid& grid = *field.grid;
    const SpectralExpansion e = expand(field);
    TangentField out;
    out.grid = field.grid;
    out.tail_warning = e.tail_fraction > spectral_tail_tolerance;
    out.vectors.reserve(grid.size());
    if (out.tail_warning && field.source) {
        out.used_fallback = true;
        for (const Vec& v : grid.nodes) out.vectors.push_back(fd_tangential_gradient(field.source, v));
        return out;
    }
    HarmonicBasis basis(grid.dimension, grid.band_limit);
    std::vector<Jet> jets(basis.size());
    for (const Vec& v : grid.nodes) {
        basis.jets(v, jets);
        Vec g = Vec::Zero(grid.dimension);
        for (std::size_t a = 0; a < basis.size(); ++a) g += e.coefficients[a] * jets[a].grad;
        out.vectors.push_back(tangent_projector(v) * g);
    }
    return out;
}

TangentTensorField tangential_hessian(const ScalarField& field)
{
    const SphereGrid& grid = *field.grid;
    const SpectralExpansion e = expand(field);
    TangentTensorField out;
    out.grid = field.grid;
    out.tail_warning = e.tail_fraction > spectral_tail_tolerance;
    out.tensors.reserve(grid.size());
    if (out.tail_warning && field.source) {
        out.used_fallback = true;
        for (const Vec& v : grid.nodes) out.tensors.push_back(fd_tangential_hessian(field.source, v));
        return out;
    }
    HarmonicBasis basis(grid.dimension, grid.band_limit);
    std::vector<Jet> jets(basis.size());
    const int n = grid.dimension;
    for (const Vec& v : grid.nodes) {
        basis.jets(v, jets);
        Mat H = Mat::Zero(n, n);
        for (std::size_t a = 0; a < basis.size(); ++a) H += e.coefficients[a] * jets[a].hess;
        const Mat P = tangent_projector(v);
        const Mat T = P * H * P;
        out.tensors.push_back(0.5 * (T + T.transpose()));
    }
    return out;
}

std::pair<ScalarField, ScalarField> parity_split(const ScalarField& field)
{
    const SphereGrid& grid = *field.grid;
    std::vector<double> even(grid.size()), odd(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double a = field.values[k], b = field.values[grid.antipode[k]];
        even[k] = 0.5 * (a + b);
        odd[k] = a - even[k];
    }
    ScalarField e{field.grid, std::move(even), Parity::even, {}};
    ScalarField o{field.grid, std::move(odd), Parity::odd, {}};
    if (field.source) {
        SphereFunction f = field.source;
        e.source = [f](const Vec& x) { return 0.5 * (f(x) + f(-x)); };
        o.source = [f](const Vec& x) { return 0.5 * (f(x) - f(-x)); };
    }
    return {std::move(e), std::move(o)};
}

} // namespace calab
