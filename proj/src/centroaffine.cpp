#include "calab/centroaffine.hpp"

#include <cmath>
#include <type_traits>

namespace calab {

CentroAffineState build_state(BodyOnGrid bg)
{
    if (!bg.valid) throw NumericalError("build_state: body is not strongly convex on the grid");
    const int n = bg.dimension();
    const std::size_t N = bg.size();
    CentroAffineState s;
    s.nu.resize(N);
    s.nu_star.resize(N);
    s.log_h_gradient.resize(N);
    s.frames.resize(N);
    s.g_frame.resize(N);
    s.g_inv_frame.resize(N);
    for (std::size_t k = 0; k < N; ++k) {
        const Vec& t = bg.grid->nodes[k];
        const double h = bg.h[k];
        s.nu[k] = h * bg.sk[k];
        s.nu_star[k] = std::pow(h, -n);
        s.log_h_gradient[k] = (bg.x[k] - h * t) / h;
        s.frames[k] = tangent_frame(t);
        s.g_frame[k] = bg.D2h_frame[k] / h;
        s.g_inv_frame[k] = s.g_frame[k].inverse();
    }
    s.bg = std::move(bg);
    return s;
}

Mat conjugate_hessian_at(const CentroAffineState& state, std::size_t node, const Vec& grad_f, const Mat& hess_f)
{
    const Vec& l = state.log_h_gradient[node];
    const Mat H = hess_f + l * grad_f.transpose() + grad_f * l.transpose();
    return 0.5 * (H + H.transpose());
}

double hbm_at(const CentroAffineState& state, std::size_t node, const Vec& grad_f, const Mat& hess_f)
{
    const auto& E = state.frames[node];
    const FrameMat Hs = E.transpose() * conjugate_hessian_at(state, node, grad_f, hess_f) * E;
    return (state.g_inv_frame[node] * Hs).trace();
}

TangentTensorField conjugate_hessian(const CentroAffineState& state, const ScalarField& f)
{
    const TangentField grad = tangential_gradient(f);
    const TangentTensorField hess = tangential_hessian(f);
    TangentTensorField out;
    out.grid = f.grid;
    out.tail_warning = grad.tail_warning || hess.tail_warning;
    out.used_fallback = grad.used_fallback || hess.used_fallback;
    out.tensors.reserve(state.size());
    for (std::size_t k = 0; k < state.size(); ++k) {
        out.tensors.push_back(conjugate_hessian_at(state, k, grad.vectors[k], hess.tensors[k]));
    }
    return out;
}

ScalarField hbm_apply(const CentroAffineState& state, const ScalarField& f)
{
    const TangentField grad = tangential_gradient(f);
    const TangentTensorField hess = tangential_hessian(f);
    std::vector<double> values(state.size());
    for (std::size_t k = 0; k < state.size(); ++k) values[k] = hbm_at(state, k, grad.vectors[k], hess.tensors[k]);
    return make_field(f.grid, std::move(values));
}

SphereFunction adapted_linear(Body body, const Vec& xi)
{
    return [body, xi](const Vec& t) { return t.dot(xi) / body->value(t); };
}

std::array<double, 2> sphere_coordinates(const Vec& theta)
{
    return {std::acos(std::clamp(theta[2], -1.0, 1.0)), std::atan2(theta[1], theta[0])};
}

Vec sphere_point(double colat, double lon)
{
    Vec v(3);
    v << std::sin(colat) * std::cos(lon), std::sin(colat) * std::sin(lon), std::cos(colat);
    return v;
}

namespace {

// Coordinate tangent vectors d/dcolat, d/dlon (n = 3) or d/dt (n = 2).
TangentBasis coordinate_vectors(int n, double colat, double lon)
{
    TangentBasis B(n, n - 1);
    if (n == 2) {
        B(0, 0) = -std::sin(lon);
        B(1, 0) = std::cos(lon);
        return B;
    }
    B.col(0) = Eigen::Vector3d(std::cos(colat) * std::cos(lon), std::cos(colat) * std::sin(lon), -std::sin(colat));
    B.col(1) = Eigen::Vector3d(-std::sin(colat) * std::sin(lon), std::sin(colat) * std::cos(lon), 0.0);
    return B;
}

Vec point_of(int n, double colat, double lon)
{
    if (n == 2) {
        Vec v(2);
        v << std::cos(lon), std::sin(lon);
        return v;
    }
    return sphere_point(colat, lon);
}

Christoffel zero_symbols()
{
    Christoffel c{};
    return c;
}

template <typename F>
auto richardson_derivative(const F& f, double step)
{
    using Value = std::decay_t<decltype(f(0.0))>;
    auto central = [&](double s) -> Value { return (f(s) - f(-s)) * (0.5 / s); };
    const Value coarse = central(step);
    const Value fine = central(0.5 * step);
    return Value((4.0 * fine - coarse) / 3.0);
}

constexpr double coordinate_step = 1e-3;

} // namespace

Christoffel christoffel_star_at(const SupportFunction& body, double colat, double lon)
{
    const int n = body.dimension();
    const Vec t = point_of(n, colat, lon);
    const Jet j = body.jet(t);
    const Vec l = (j.grad - j.value * t) / j.value;
    const TangentBasis B = coordinate_vectors(n, colat, lon);
    Christoffel c = zero_symbols();
    if (n == 2) {
        c[0][0][0] = -2.0 * l.dot(B.col(0));
        return c;
    }
    const double lc[2] = {l.dot(B.col(0)), l.dot(B.col(1))};
    const double sn = std::sin(colat), cs = std::cos(colat);
    c[0][1][1] = -sn * cs;
    c[1][0][1] = c[1][1][0] = cs / sn;
    for (int k = 0; k < 2; ++k) {
        for (int i = 0; i < 2; ++i) {
            for (int jj = 0; jj < 2; ++jj) {
                if (i == k) c[k][i][jj] -= lc[jj];
                if (jj == k) c[k][i][jj] -= lc[i];
            }
        }
    }
    return c;
}

Christoffel conjugate_christoffels(const CentroAffineState& state, std::size_t node)
{
    const SphereGrid& grid = state.grid();
    require(node < grid.size(), "conjugate_christoffels: node out of range");
    require(!grid.pole_mask[node], "conjugate_christoffels: node is pole-masked");
    const Vec& t = grid.nodes[node];
    if (grid.dimension == 2) return christoffel_star_at(*state.bg.body, 0.0, std::atan2(t[1], t[0]));
    const auto [colat, lon] = sphere_coordinates(t);
    return christoffel_star_at(*state.bg.body, colat, lon);
}

FrameMat coordinate_metric(const SupportFunction& body, double colat, double lon)
{
    const int n = body.dimension();
    const Vec t = point_of(n, colat, lon);
    const Jet j = body.jet(t);
    const TangentBasis B = coordinate_vectors(n, colat, lon);
    FrameMat g = B.transpose() * j.hess * B / j.value;
    return 0.5 * (g + g.transpose());
}

Diagnostic ricci_star_check(const CentroAffineState& state)
{
    Diagnostic d{"ricci_star", 0.0, 0};
    if (state.dimension() == 2) return d;
    const SupportFunction& body = *state.bg.body;
    const SphereGrid& grid = state.grid();
    for (std::size_t node = 0; node < grid.size(); ++node) {
        if (grid.pole_mask[node]) continue;
        const auto [c0, p0] = sphere_coordinates(grid.nodes[node]);
        const Christoffel G = christoffel_star_at(body, c0, p0);
        // dG[a][k][i][j] = d/dx^a Gamma^k_ij
        std::array<Christoffel, 2> dG;
        for (int a = 0; a < 2; ++a) {
            auto along = [&](double s) {
                const Christoffel c = a == 0 ? christoffel_star_at(body, c0 + s, p0) : christoffel_star_at(body, c0, p0 + s);
                Eigen::Matrix<double, 8, 1> v;
                for (int k = 0; k < 2; ++k)
                    for (int i = 0; i < 2; ++i)
                        for (int j = 0; j < 2; ++j) v[4 * k + 2 * i + j] = c[k][i][j];
                return v;
            };
            const Eigen::Matrix<double, 8, 1> dv = richardson_derivative(along, coordinate_step);
            for (int k = 0; k < 2; ++k)
                for (int i = 0; i < 2; ++i)
                    for (int j = 0; j < 2; ++j) dG[a][k][i][j] = dv[4 * k + 2 * i + j];
        }
        Eigen::Matrix2d ric = Eigen::Matrix2d::Zero();
        for (int j = 0; j < 2; ++j) {
            for (int k = 0; k < 2; ++k) {
                double r = 0.0;
                for (int i = 0; i < 2; ++i) {
                    r += dG[i][i][j][k] - dG[j][i][i][k];
                    for (int m = 0; m < 2; ++m) r += G[m][j][k] * G[i][i][m] - G[m][i][k] * G[i][j][m];
                }
                ric(j, k) = r;
            }
        }
        const FrameMat g = coordinate_metric(body, c0, p0);
        const Eigen::Matrix2d Jinv = Eigen::Vector2d(1.0, 1.0 / std::sin(c0)).asDiagonal();
        const Eigen::Matrix2d ric_f = Jinv * ric * Jinv;
        const Eigen::Matrix2d g_f = Jinv * Eigen::Matrix2d(g) * Jinv;
        const double err = (ric_f - (state.dimension() - 2.0) * g_f).norm() / g_f.norm();
        if (err > d.max_error) {
            d.max_error = err;
            d.node = node;
        }
    }
    return d;
}

Diagnostic codazzi_check(const CentroAffineState& state)
{
    Diagnostic d{"codazzi", 0.0, 0};
    if (state.dimension() == 2) return d;
    const SupportFunction& body = *state.bg.body;
    const SphereGrid& grid = state.grid();
    for (std::size_t node = 0; node < grid.size(); ++node) {
        if (grid.pole_mask[node]) continue;
        const auto [c0, p0] = sphere_coordinates(grid.nodes[node]);
        const Christoffel G = christoffel_star_at(body, c0, p0);
        const Eigen::Matrix2d g = coordinate_metric(body, c0, p0);
        std::array<Eigen::Matrix2d, 2> dg;
        dg[0] = richardson_derivative([&](double s) { return Eigen::Matrix2d(coordinate_metric(body, c0 + s, p0)); }, coordinate_step);
        dg[1] = richardson_derivative([&](double s) { return Eigen::Matrix2d(coordinate_metric(body, c0, p0 + s)); }, coordinate_step);
        double C[2][2][2];
        double scale = g.norm();
        for (int k = 0; k < 2; ++k) {
            for (int i = 0; i < 2; ++i) {
                for (int j = 0; j < 2; ++j) {
                    double v = dg[k](i, j);
                    for (int m = 0; m < 2; ++m) v -= G[m][k][i] * g(m, j) + G[m][k][j] * g(i, m);
                    C[k][i][j] = v;
                    scale = std::max(scale, std::abs(dg[k](i, j)));
                }
            }
        }
        double err = 0.0;
        for (int k = 0; k < 2; ++k)
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) err = std::max(err, std::abs(C[k][i][j] - C[i][k][j]));
        err /= scale;
        if (err > d.max_error) {
            d.max_error = err;
            d.node = node;
        }
    }
    return d;
}

Diagnostic measure_conjugacy_check(const CentroAffineState& state)
{
    Diagnostic d{"measure_conjugacy", 0.0, 0};
    for (std::size_t k = 0; k < state.size(); ++k) {
        const double det_g = state.g_frame[k].determinant();
        const double err = std::abs(state.nu[k] * state.nu_star[k] - det_g) / det_g;
        if (err > d.max_error) {
            d.max_error = err;
            d.node = k;
        }
    }
    return d;
}

Diagnostic adapted_linear_check(const CentroAffineState& state)
{
    Diagnostic d{"adapted_linear_hessian", 0.0, 0};
    const int n = state.dimension();
    const SupportFunction& body = *state.bg.body;
    for (std::size_t k = 0; k < state.size(); ++k) {
        const Vec& t = state.grid().nodes[k];
        const Jet j = body.jet(t);
        const Mat P = tangent_projector(t);
        for (int axis = 0; axis < n; ++axis) {
            const Vec xi = Vec::Unit(n, axis);
            // Ambient derivatives of <x, xi> / h(x).
            const double s = t.dot(xi), h = j.value;
            const double f = s / h;
            const Vec grad = xi / h - s * j.grad / (h * h);
            const Mat hess = -(xi * j.grad.transpose() + j.grad * xi.transpose()) / (h * h)
                           + 2.0 * s * j.grad * j.grad.transpose() / (h * h * h) - s * j.hess / (h * h);
            const Mat hs = conjugate_hessian_at(state, k, P * grad, P * hess * P);
            const Mat g = state.bg.g[k];
            const double err = (hs + f * g).norm() / g.norm();
            if (err > d.max_error) {
                d.max_error = err;
                d.node = k;
            }
        }
    }
    return d;
}

DualityCheck duality_isometry_check(const BodyOnGrid& bgK, const BodyOnGrid& bgKpolar)
{
    require(bgK.grid == bgKpolar.grid || bgK.grid->size() == bgKpolar.grid->size(),
            "duality_isometry_check: bodies must share a grid");
    DualityCheck out;
    out.pullback.name = "duality_pullback";
    const SupportFunction& P = *bgKpolar.body;
    const int n = bgK.dimension();
    for (std::size_t k = 0; k < bgK.size(); ++k) {
        const Vec& t = bgK.grid->nodes[k];
        const Vec& x = bgK.x[k];
        const double r = x.norm();
        const Vec phi = x / r;
        const Mat dphi = (Mat::Identity(n, n) - phi * phi.transpose()) * bgK.D2h[k] / r;
        const Jet jp = P.jet(phi);
        const auto E = tangent_frame(t);
        const auto V = dphi * E;
        const FrameMat pulled = V.transpose() * (jp.hess / jp.value) * V;
        const FrameMat g = bgK.D2h_frame[k] / bgK.h[k];
        const double err = (pulled - g).norm() / g.norm();
        if (err > out.pullback.max_error) {
            out.pullback.max_error = err;
            out.pullback.node = k;
        }
    }
    const double om = quantities(bgK).omega_n;
    const double om_polar = quantities(bgKpolar).omega_n;
    out.omega_gap = std::abs(om - om_polar) / om;
    return out;
}

double nu_pushforward_gap(Body body, const Mat& T, GridPtr grid, const SphereFunction& F)
{
    const BodyOnGrid bk = evaluate_on_grid(body, grid);
    const BodyOnGrid bt = evaluate_on_grid(linear_image(body, T), grid);
    const Mat Tinv_t = T.inverse().transpose();
    const std::size_t N = grid->size();
    std::vector<double> lhs(N), rhs(N);
    for (std::size_t k = 0; k < N; ++k) {
        const Vec& t = grid->nodes[k];
        lhs[k] = bt.h[k] * bt.sk[k] * F(t);
        const Vec psi = (Tinv_t * t).normalized();
        rhs[k] = bk.h[k] * bk.sk[k] * F(psi);
    }
    const double a = quadrature(*grid, lhs);
    const double b = std::abs(T.determinant()) * quadrature(*grid, rhs);
    return std::abs(a - b) / std::max(std::abs(a), std::abs(b));
}

} // namespace calab
