#include "calab/harmonics.hpp"

#include <cmath>
#include <numbers>

namespace calab {

namespace {

// Jet of a polynomial in three ambient variables. The n = 2 basis uses the
// same machinery with z = 0 and keeps the leading 2 x 2 block.
struct Jet3 {
    double v = 0.0;
    Eigen::Vector3d g = Eigen::Vector3d::Zero();
    Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
};

Jet3 mul(const Jet3& a, const Jet3& b)
{
    Jet3 out;
    out.v = a.v * b.v;
    out.g = a.v * b.g + b.v * a.g;
    out.h = a.v * b.h + b.v * a.h + a.g * b.g.transpose() + b.g * a.g.transpose();
    return out;
}

double mul(double a, double b) { return a * b; }

Jet3 axpby(double a, const Jet3& x, double b, const Jet3& y)
{
    Jet3 out;
    out.v = a * x.v + b * y.v;
    out.g = a * x.g + b * y.g;
    out.h = a * x.h + b * y.h;
    return out;
}

double axpby(double a, double x, double b, double y) { return a * x + b * y; }

Jet3 scaled(double a, const Jet3& x) { return axpby(a, x, 0.0, x); }
double scaled(double a, double x) { return a * x; }

template <typename T>
T make_constant(double c);

template <>
Jet3 make_constant<Jet3>(double c)
{
    Jet3 out;
    out.v = c;
    return out;
}

template <>
double make_constant<double>(double c)
{
    return c;
}

template <typename T>
T make_coordinate(const Eigen::Vector3d& x, int i);

template <>
Jet3 make_coordinate<Jet3>(const Eigen::Vector3d& x, int i)
{
    Jet3 out;
    out.v = x[i];
    out.g[i] = 1.0;
    return out;
}

template <>
double make_coordinate<double>(const Eigen::Vector3d& x, int i)
{
    return x[i];
}

template <typename T>
T make_radius_squared(const Eigen::Vector3d& x);

template <>
Jet3 make_radius_squared<Jet3>(const Eigen::Vector3d& x)
{
    Jet3 out;
    out.v = x.squaredNorm();
    out.g = 2.0 * x;
    out.h = 2.0 * Eigen::Matrix3d::Identity();
    return out;
}

template <>
double make_radius_squared<double>(const Eigen::Vector3d& x)
{
    return x.squaredNorm();
}

// |x|^{-l} restricted to the first `dim` coordinates.
template <typename T>
T make_inverse_radius_power(const Eigen::Vector3d& x, int l, int dim);

template <>
Jet3 make_inverse_radius_power<Jet3>(const Eigen::Vector3d& x, int l, int dim)
{
    Eigen::Vector3d y = x;
    if (dim == 2) y[2] = 0.0;
    const double r2 = y.squaredNorm();
    const double r = std::sqrt(r2);
    const double s = std::pow(r, -l);
    Jet3 out;
    out.v = s;
    out.g = -l * s / r2 * y;
    Eigen::Matrix3d id = Eigen::Matrix3d::Identity();
    if (dim == 2) id(2, 2) = 0.0;
    out.h = -l * s / r2 * id + l * (l + 2.0) * s / (r2 * r2) * y * y.transpose();
    return out;
}

template <>
double make_inverse_radius_power<double>(const Eigen::Vector3d& x, int l, int dim)
{
    const double r2 = dim == 2 ? x[0] * x[0] + x[1] * x[1] : x.squaredNorm();
    return std::pow(r2, -0.5 * l);
}

// Harmonic polynomials (before division by |x|^l) of every basis function of degree <= L.
template <typename T>
void harmonic_polynomials(int dim, int L, const Eigen::Vector3d& x, std::span<T> out)
{
    using std::numbers::pi;
    const T X = make_coordinate<T>(x, 0);
    const T Y = make_coordinate<T>(x, 1);

    // A_m + i B_m = (x + i y)^m
    std::vector<T> a(L + 1), b(L + 1);
    a[0] = make_constant<T>(1.0);
    b[0] = make_constant<T>(0.0);
    for (int m = 1; m <= L; ++m) {
        a[m] = axpby(1.0, mul(X, a[m - 1]), -1.0, mul(Y, b[m - 1]));
        b[m] = axpby(1.0, mul(X, b[m - 1]), 1.0, mul(Y, a[m - 1]));
    }

    if (dim == 2) {
        out[0] = make_constant<T>(1.0 / std::sqrt(2.0 * pi));
        const double c = 1.0 / std::sqrt(pi);
        for (int k = 1; k <= L; ++k) {
            out[2 * k - 1] = scaled(c, a[k]);
            out[2 * k] = scaled(c, b[k]);
        }
        return;
    }

    const T Z = make_coordinate<T>(x, 2);
    const T R2 = make_radius_squared<T>(x);

    // q_l^m: normalized associated Legendre functions divided by sin^m,
    // homogenized to degree l - m in (z, r^2).
    double diag = 1.0 / std::sqrt(4.0 * pi);
    std::vector<double> q_diag(L + 1);
    q_diag[0] = diag;
    for (int m = 1; m <= L; ++m) {
        diag *= std::sqrt((2.0 * m + 1.0) / (2.0 * m));
        q_diag[m] = diag;
    }

    // Two rolling rows: q[l % 2] holds degree l - 2 until overwritten in place.
    std::vector<std::vector<T>> q(2, std::vector<T>(L + 1));
    for (int l = 0; l <= L; ++l) {
        std::vector<T>& ql = q[l % 2];
        const std::vector<T>& qlm1 = q[(l + 1) % 2];
        for (int m = 0; m <= l; ++m) {
            if (m == l) {
                ql[m] = make_constant<T>(q_diag[m]);
            } else if (m == l - 1) {
                ql[m] = scaled(std::sqrt(2.0 * m + 3.0), mul(Z, qlm1[m]));
            } else {
                const double lm = static_cast<double>(l);
                const double mm = static_cast<double>(m);
                const double alm = std::sqrt((4.0 * lm * lm - 1.0) / (lm * lm - mm * mm));
                const double blm = std::sqrt(((lm - 1.0) * (lm - 1.0) - mm * mm) / (4.0 * (lm - 1.0) * (lm - 1.0) - 1.0));
                // ql[m] still holds degree l - 2 here.
                ql[m] = scaled(alm, axpby(1.0, mul(Z, qlm1[m]), -blm, mul(R2, ql[m])));
            }
        }
        const std::size_t base = static_cast<std::size_t>(l) * static_cast<std::size_t>(l);
        out[base] = mul(ql[0], a[0]);
        for (int m = 1; m <= l; ++m) {
            out[base + 2 * m - 1] = scaled(std::numbers::sqrt2, mul(ql[m], a[m]));
            out[base + 2 * m] = scaled(std::numbers::sqrt2, mul(ql[m], b[m]));
        }
    }
}

Eigen::Vector3d embed(const Vec& x)
{
    Eigen::Vector3d y = Eigen::Vector3d::Zero();
    y.head(x.size()) = x;
    return y;
}

} // namespace

HarmonicBasis::HarmonicBasis(int dimension, int max_degree)
    : dimension_(dimension), max_degree_(max_degree)
{
    require(dimension == 2 || dimension == 3, "harmonic basis: unsupported dimension");
    require(max_degree >= 0, "harmonic basis: negative degree");
    degrees_.reserve(count(dimension, max_degree));
    for (int l = 0; l <= max_degree; ++l) {
        const int multiplicity = dimension == 2 ? (l == 0 ? 1 : 2) : 2 * l + 1;
        for (int j = 0; j < multiplicity; ++j) degrees_.push_back(l);
    }
}

std::size_t HarmonicBasis::count(int dimension, int max_degree)
{
    if (dimension == 2) return static_cast<std::size_t>(2 * max_degree + 1);
    return static_cast<std::size_t>((max_degree + 1) * (max_degree + 1));
}

void HarmonicBasis::values(const Vec& x, std::span<double> out) const
{
    const Eigen::Vector3d y = embed(x);
    harmonic_polynomials<double>(dimension_, max_degree_, y, out);
    std::vector<double> inv(max_degree_ + 1);
    for (int l = 0; l <= max_degree_; ++l) inv[l] = make_inverse_radius_power<double>(y, l, dimension_);
    for (std::size_t a = 0; a < size(); ++a) out[a] *= inv[degrees_[a]];
}

void HarmonicBasis::jets(const Vec& x, std::span<Jet> out) const
{
    jets(x, max_degree_, out);
}

void HarmonicBasis::jets(const Vec& x, int max_degree, std::span<Jet> out) const
{
    require(max_degree <= max_degree_, "harmonic basis: degree above band limit");
    const Eigen::Vector3d y = embed(x);
    const std::size_t count_here = count(dimension_, max_degree);
    std::vector<Jet3> poly(count_here);
    harmonic_polynomials<Jet3>(dimension_, max_degree, y, std::span<Jet3>(poly));
    std::vector<Jet3> inv(max_degree + 1);
    for (int l = 0; l <= max_degree; ++l) inv[l] = make_inverse_radius_power<Jet3>(y, l, dimension_);
    const int n = dimension_;
    for (std::size_t a = 0; a < count_here; ++a) {
        const Jet3 f = mul(poly[a], inv[degrees_[a]]);
        out[a].value = f.v;
        out[a].grad = f.g.head(n);
        out[a].hess = f.h.topLeftCorner(n, n);
    }
}

} // namespace calab
