#include "calab/body.hpp"

#include "calab/harmonics.hpp"
#include "calab/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace calab {

namespace {

std::string format_number(double v)
{
    std::ostringstream out;
    out << v;
    return out.str();
}

bool finite_jet(const Jet& j)
{
    return std::isfinite(j.value) && j.grad.allFinite() && j.hess.allFinite();
}

} // namespace

SupportFunction::SupportFunction(int dimension, bool even, std::string label)
    : dimension_(dimension), even_(even), label_(std::move(label))
{
    require(dimension >= 2, "support function: dimension must be at least 2");
}

Jet SupportFunction::jet(const Vec& x) const
{
    const auto n = x.size();
    const double h = derivative_step * x.norm();
    Jet out = Jet::zero(static_cast<int>(n));
    out.value = value(x);
    for (Eigen::Index i = 0; i < n; ++i) {
        Vec xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        const double fp = value(xp), fm = value(xm);
        out.grad[i] = (fp - fm) / (2.0 * h);
        out.hess(i, i) = (fp - 2.0 * out.value + fm) / (h * h);
        for (Eigen::Index j = i + 1; j < n; ++j) {
            Vec pp = x, pm = x, mp = x, mm = x;
            pp[i] += h; pp[j] += h;
            pm[i] += h; pm[j] -= h;
            mp[i] -= h; mp[j] += h;
            mm[i] -= h; mm[j] -= h;
            out.hess(i, j) = (value(pp) - value(pm) - value(mp) + value(mm)) / (4.0 * h * h);
            out.hess(j, i) = out.hess(i, j);
        }
    }
    return out;
}

namespace {

class BallSupport final : public SupportFunction {
public:
    BallSupport(double r, int n) : SupportFunction(n, true, "ball(" + format_number(r) + ")"), r_(r) {}

    double value(const Vec& x) const override { return r_ * x.norm(); }

    Jet jet(const Vec& x) const override
    {
        const double norm = x.norm();
        const Vec u = x / norm;
        const auto n = x.size();
        return {r_ * norm, r_ * u, r_ / norm * (Mat::Identity(n, n) - u * u.transpose())};
    }

    bool has_closed_form_jet() const override { return true; }

private:
    double r_;
};

class EllipsoidSupport final : public SupportFunction {
public:
    explicit EllipsoidSupport(const Mat& A) : SupportFunction(static_cast<int>(A.rows()), true, "ellipsoid"), A_(A) {}

    double value(const Vec& x) const override { return (A_ * x).norm(); }

    Jet jet(const Vec& x) const override
    {
        const Vec y = A_ * x;
        const double norm = y.norm();
        const Vec u = y / norm;
        const auto n = x.size();
        const Mat P = Mat::Identity(n, n) - u * u.transpose();
        return {norm, A_.transpose() * u, A_.transpose() * P * A_ / norm};
    }

    bool has_closed_form_jet() const override { return true; }

private:
    Mat A_;
};

class ModulatedSupport final : public SupportFunction {
public:
    ModulatedSupport(Body base, std::vector<HarmonicTerm> terms, std::string label, bool even, int max_degree)
        : SupportFunction(base->dimension(), even, std::move(label)),
          base_(std::move(base)), terms_(std::move(terms)), basis_(base_->dimension(), max_degree)
    {
    }

    double value(const Vec& x) const override
    {
        std::vector<double> phi(basis_.size());
        basis_.values(x, phi);
        double q = 1.0;
        for (const auto& t : terms_) q += t.coefficient * phi[t.index];
        return base_->value(x) * q;
    }

    Jet jet(const Vec& x) const override
    {
        std::vector<Jet> phi(basis_.size());
        basis_.jets(x, phi);
        const auto n = x.size();
        Jet q{1.0, Vec::Zero(n), Mat::Zero(n, n)};
        for (const auto& t : terms_) {
            q.value += t.coefficient * phi[t.index].value;
            q.grad += t.coefficient * phi[t.index].grad;
            q.hess += t.coefficient * phi[t.index].hess;
        }
        const Jet b = base_->jet(x);
        Jet out;
        out.value = b.value * q.value;
        out.grad = q.value * b.grad + b.value * q.grad;
        out.hess = q.value * b.hess + b.value * q.hess + b.grad * q.grad.transpose() + q.grad * b.grad.transpose();
        return out;
    }

    bool has_closed_form_jet() const override { return base_->has_closed_form_jet(); }

private:
    Body base_;
    std::vector<HarmonicTerm> terms_;
    HarmonicBasis basis_;
};

class FunctionSupport final : public SupportFunction {
public:
    FunctionSupport(int n, std::function<double(const Vec&)> h, bool even, std::string label)
        : SupportFunction(n, even, std::move(label)), h_(std::move(h))
    {
    }

    double value(const Vec& x) const override { return h_(x); }

private:
    std::function<double(const Vec&)> h_;
};

class LinearImageSupport final : public SupportFunction {
public:
    LinearImageSupport(Body body, const Mat& T)
        : SupportFunction(body->dimension(), body->even(), "image(" + body->label() + ")"), body_(std::move(body)), T_(T)
    {
    }

    double value(const Vec& x) const override { return body_->value(T_.transpose() * x); }

    Jet jet(const Vec& x) const override
    {
        const Jet j = body_->jet(T_.transpose() * x);
        return {j.value, T_ * j.grad, T_ * j.hess * T_.transpose()};
    }

    bool has_closed_form_jet() const override { return body_->has_closed_form_jet(); }

private:
    Body body_;
    Mat T_;
};

class FireySupport final : public SupportFunction {
public:
    FireySupport(double a, Body K, double b, Body L, double p)
        : SupportFunction(K->dimension(), K->even() && L->even(),
                          "firey(" + K->label() + "," + L->label() + ",p=" + format_number(p) + ")"),
          a_(a), b_(b), p_(p), K_(std::move(K)), L_(std::move(L))
    {
    }

    double value(const Vec& x) const override
    {
        const double hk = K_->value(x), hl = L_->value(x);
        if (p_ == 0.0) return std::pow(hk, a_) * std::pow(hl, b_);
        return std::pow(a_ * std::pow(hk, p_) + b_ * std::pow(hl, p_), 1.0 / p_);
    }

    Jet jet(const Vec& x) const override
    {
        const Jet k = K_->jet(x);
        const Jet l = L_->jet(x);
        if (p_ == 0.0) {
            // Work with log f = a log h_K + b log h_L.
            const Vec gk = k.grad / k.value, gl = l.grad / l.value;
            const Vec glog = a_ * gk + b_ * gl;
            const Mat hlog = a_ * (k.hess / k.value - gk * gk.transpose()) + b_ * (l.hess / l.value - gl * gl.transpose());
            const double f = std::pow(k.value, a_) * std::pow(l.value, b_);
            return {f, f * glog, f * (hlog + glog * glog.transpose())};
        }
        const double p = p_;
        const double kp = std::pow(k.value, p), lp = std::pow(l.value, p);
        const double u = a_ * kp + b_ * lp;
        const Vec du = a_ * p * kp / k.value * k.grad + b_ * p * lp / l.value * l.grad;
        const Mat ddu = a_ * p * (kp / k.value * k.hess + (p - 1.0) * kp / (k.value * k.value) * k.grad * k.grad.transpose())
                      + b_ * p * (lp / l.value * l.hess + (p - 1.0) * lp / (l.value * l.value) * l.grad * l.grad.transpose());
        const double f = std::pow(u, 1.0 / p);
        const double f1 = f / (p * u);
        const double f2 = f1 * (1.0 / p - 1.0) / u;
        return {f, f1 * du, f1 * ddu + f2 * du * du.transpose()};
    }

    bool has_closed_form_jet() const override { return K_->has_closed_form_jet() && L_->has_closed_form_jet(); }

private:
    double a_, b_, p_;
    Body K_, L_;
};

// h_{K°}(u) = 1 / min{ h_K(x) : <u, x> = 1 }. The minimizer is found by damped Newton
// iterations on the affine plane; derivatives follow from the optimality conditions.
class PolarSupport final : public SupportFunction {
public:
    explicit PolarSupport(Body body)
        : SupportFunction(body->dimension(), body->even(), "polar(" + body->label() + ")"), body_(std::move(body))
    {
    }

    double value(const Vec& u) const override { return 1.0 / solve(u).jet.value; }

    Jet jet(const Vec& u) const override
    {
        const Minimizer sol = solve(u);
        const Jet& j = sol.jet;
        const auto n = u.size();
        const double m = j.value;
        const double rho = 1.0 / m;
        const Vec y = sol.x / m;
        const auto Eu = tangent_frame(u.normalized());
        const auto Ey = tangent_frame(y.normalized());
        const Mat Hy = m * j.hess;
        const FrameMat reduced = Ey.transpose() * Hy * Eu;
        const Mat Q = Mat::Identity(n, n) - u * y.transpose() / rho;
        Mat Z = Eu * reduced.inverse() * Ey.transpose() * Q / rho;
        Z = 0.5 * (Z + Z.transpose());
        return {rho, y, Z};
    }

    bool has_closed_form_jet() const override { return body_->has_closed_form_jet(); }

private:
    struct Minimizer {
        Jet jet; // of h_K at the minimizer
        Vec x;
    };

    Minimizer solve(const Vec& u) const
    {
        const double uu = u.squaredNorm();
        const Vec x0 = u / uu;
        const auto E = tangent_frame(u / std::sqrt(uu));
        FrameVec v = FrameVec::Zero(E.cols());
        Vec x = x0;
        Jet j = body_->jet(x);
        for (int it = 0; it < 100; ++it) {
            const FrameVec g = E.transpose() * j.grad;
            const FrameMat H = E.transpose() * j.hess * E;
            Eigen::LDLT<FrameMat> ldlt(H);
            FrameVec step = -g;
            if (ldlt.info() == Eigen::Success && ldlt.isPositive()) step = ldlt.solve(-g);
            const double slope = g.dot(step);
            if (!(slope < 0.0)) break;
            double t = 1.0;
            Vec candidate = x0 + E * (v + step);
            // Close to the minimizer value comparisons are dominated by rounding;
            // take the full Newton step there.
            const bool local = step.norm() <= 1e-6 * x0.norm();
            if (!local) {
                double hc = body_->value(candidate);
                while (!(hc <= j.value + 1e-4 * t * slope) && t > 1e-12) {
                    t *= 0.5;
                    candidate = x0 + E * (v + t * step);
                    hc = body_->value(candidate);
                }
                if (!(hc <= j.value)) break;
            }
            v += t * step;
            x = candidate;
            j = body_->jet(x);
            // Quadratic convergence: after a step this small the error is at rounding level.
            if ((t * step).norm() <= 1e-10 * x0.norm()) break;
        }
        if (!(j.value > 0.0) || !finite_jet(j)) throw NumericalError("polar: support function minimization failed");
        return {j, x};
    }

    Body body_;
};

class SmoothedL4Support final : public SupportFunction {
public:
    SmoothedL4Support(int n, double s) : SupportFunction(n, true, "l4(" + format_number(s) + ")"), s_(s) {}

    double value(const Vec& x) const override
    {
        return std::pow(x.array().pow(4).sum(), 0.25) + s_ * x.norm();
    }

    Jet jet(const Vec& x) const override
    {
        const auto n = x.size();
        const double S = x.array().pow(4).sum();
        const Vec dS = 4.0 * x.array().pow(3).matrix();
        const Mat ddS = (12.0 * x.array().square()).matrix().asDiagonal();
        const double N = std::pow(S, 0.25);
        const double c1 = 0.25 * N / S;
        const double c2 = -0.1875 * N / (S * S);
        const double norm = x.norm();
        const Vec u = x / norm;
        return {N + s_ * norm,
                c1 * dS + s_ * u,
                c1 * ddS + c2 * dS * dS.transpose() + s_ / norm * (Mat::Identity(n, n) - u * u.transpose())};
    }

    bool has_closed_form_jet() const override { return true; }

private:
    double s_;
};

} // namespace

Body ball(double r, int n)
{
    require(r > 0.0, "ball: radius must be positive");
    require(n >= 2, "ball: dimension must be at least 2");
    return std::make_shared<BallSupport>(r, n);
}

Body ellipsoid(const Mat& A)
{
    require(A.rows() == A.cols() && A.rows() >= 2, "ellipsoid: matrix must be square");
    require((A - A.transpose()).norm() <= 1e-12 * A.norm(), "ellipsoid: matrix must be symmetric");
    Eigen::SelfAdjointEigenSolver<Mat> eig(A);
    require(eig.eigenvalues().minCoeff() > 0.0, "ellipsoid: matrix must be positive-definite");
    return std::make_shared<EllipsoidSupport>(A);
}

Body modulated(Body base, std::vector<HarmonicTerm> terms, std::string label)
{
    const int n = base->dimension();
    require(n == 2 || n == 3, "modulated body: dimension must be 2 or 3");
    int max_degree = 0;
    bool even = base->even();
    for (const auto& t : terms) {
        int degree = 0;
        if (n == 2) {
            degree = static_cast<int>((t.index + 1) / 2);
        } else {
            degree = static_cast<int>(std::floor(std::sqrt(static_cast<double>(t.index))));
        }
        max_degree = std::max(max_degree, degree);
        if (degree % 2 != 0 && t.coefficient != 0.0) even = false;
    }
    return std::make_shared<ModulatedSupport>(std::move(base), std::move(terms), std::move(label), even, max_degree);
}

Body perturbed_ball(int n, std::vector<HarmonicTerm> terms, double eps)
{
    require(n == 2 || n == 3, "perturbed_ball: dimension must be 2 or 3");
    int max_index = 0;
    for (const auto& t : terms) max_index = std::max(max_index, static_cast<int>(t.index));
    int L = 0;
    while (HarmonicBasis::count(n, L) <= static_cast<std::size_t>(max_index)) ++L;
    HarmonicBasis basis(n, L);
    for (auto& t : terms) {
        require(basis.is_even(t.index), "perturbed_ball: coefficients must belong to even harmonics");
        t.coefficient *= eps;
    }
    return modulated(ball(1.0, n), std::move(terms), "perturbed_ball(" + format_number(eps) + ")");
}

Body from_function(int n, std::function<double(const Vec&)> h, bool even, std::string label, double step)
{
    auto body = std::make_shared<FunctionSupport>(n, std::move(h), even, std::move(label));
    body->derivative_step = step;
    return body;
}

Body linear_image(Body body, const Mat& T)
{
    const int n = body->dimension();
    require(T.rows() == n && T.cols() == n, "linear_image: matrix size does not match dimension");
    const double det = T.determinant();
    require(std::abs(det) > 1e-12 * std::pow(T.norm(), n), "linear_image: singular matrix");
    return std::make_shared<LinearImageSupport>(std::move(body), T);
}

Body firey_sum(double a, Body K, double b, Body L, double p)
{
    require(a >= 0.0 && b >= 0.0, "firey_sum: weights must be nonnegative");
    require(K->dimension() == L->dimension(), "firey_sum: dimension mismatch");
    if (p == 0.0) require(std::abs(a + b - 1.0) <= 1e-12, "firey_sum: p = 0 requires a + b = 1");
    return std::make_shared<FireySupport>(a, std::move(K), b, std::move(L), p);
}

Body polar(Body body)
{
    return std::make_shared<PolarSupport>(std::move(body));
}

Body add_ball(Body body, double c)
{
    const int n = body->dimension();
    return firey_sum(1.0, std::move(body), 1.0, ball(c, n), 1.0);
}

Body smoothed_l4_support(int n, double s)
{
    require(s > 0.0, "smoothed_l4: smoothing weight must be positive");
    return std::make_shared<SmoothedL4Support>(n, s);
}

Body smoothed_l4_body(int n, double s)
{
    return polar(smoothed_l4_support(n, s));
}

Mat symmetric_exp(const Mat& S)
{
    Eigen::SelfAdjointEigenSolver<Mat> eig(S);
    return eig.eigenvectors() * eig.eigenvalues().array().exp().matrix().asDiagonal() * eig.eigenvectors().transpose();
}

Mat traceless_symmetric(int n, std::span<const double> params)
{
    require(params.size() == static_cast<std::size_t>(n * (n + 1) / 2 - 1), "traceless_symmetric: wrong parameter count");
    Mat S = Mat::Zero(n, n);
    std::size_t k = 0;
    double trace = 0.0;
    for (int i = 0; i + 1 < n; ++i) {
        S(i, i) = params[k++];
        trace += S(i, i);
    }
    S(n - 1, n - 1) = -trace;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            S(i, j) = S(j, i) = params[k++];
        }
    }
    return S;
}

BodyOnGrid evaluate_on_grid(Body body, GridPtr grid, const Tolerances& tol)
{
    require(body->dimension() == grid->dimension, "evaluate_on_grid: body and grid dimensions differ");
    const int n = grid->dimension;
    const std::size_t N = grid->size();
    BodyOnGrid bg;
    bg.body = body;
    bg.grid = grid;
    bg.h.resize(N);
    bg.x.resize(N);
    bg.D2h.resize(N);
    bg.g.resize(N);
    bg.D2h_frame.resize(N);
    bg.sk.resize(N);
    bg.vk.resize(N);
    bg.node_min_eig.resize(N);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < N; ++k) {
        const Vec& t = grid->nodes[k];
        const Jet j = body->jet(t);
        if (!finite_jet(j)) throw NumericalError("evaluate_on_grid: non-finite derivative at node " + std::to_string(k));
        if (!(j.value > 0.0)) throw NumericalError("evaluate_on_grid: non-positive support function at node " + std::to_string(k));
        const Mat P = tangent_projector(t);
        Mat D = P * j.hess * P;
        D = 0.5 * (D + D.transpose());
        const auto E = tangent_frame(t);
        FrameMat F = E.transpose() * j.hess * E;
        F = 0.5 * (F + F.transpose());
        Eigen::SelfAdjointEigenSolver<FrameMat> eig(F, Eigen::EigenvaluesOnly);
        bg.h[k] = j.value;
        bg.x[k] = j.grad;
        bg.D2h[k] = D;
        bg.g[k] = D / j.value;
        bg.D2h_frame[k] = F;
        bg.sk[k] = F.determinant();
        bg.vk[k] = j.value * bg.sk[k] / n;
        bg.node_min_eig[k] = eig.eigenvalues().minCoeff();
        lo = std::min(lo, eig.eigenvalues().minCoeff());
        hi = std::max(hi, eig.eigenvalues().maxCoeff());
        bg.euler_error = std::max(bg.euler_error, std::abs(t.dot(j.grad) - j.value) / j.value);
    }
    bg.min_eig_D2h = lo;
    bg.max_eig_D2h = hi;
    bg.valid = lo > tol.eig_tol;
    return bg;
}

std::pair<double, double> support_extrema(const SupportFunction& body, const SphereGrid& grid)
{
    std::size_t imin = 0, imax = 0;
    std::vector<double> values(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) {
        values[k] = body.value(grid.nodes[k]);
        if (values[k] < values[imin]) imin = k;
        if (values[k] > values[imax]) imax = k;
    }
    // Newton iterations for a critical point of h on the sphere, kept only if they improve.
    auto refine = [&](std::size_t start, double sign) {
        Vec t = grid.nodes[start];
        double best = values[start];
        for (int it = 0; it < 30; ++it) {
            const Jet j = body.jet(t);
            const auto E = tangent_frame(t);
            const FrameVec g = E.transpose() * j.grad;
            FrameMat H = E.transpose() * j.hess * E - j.value * FrameMat::Identity(E.cols(), E.cols());
            H *= sign;
            Eigen::LDLT<FrameMat> ldlt(H);
            if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) break;
            const FrameVec step = ldlt.solve(-sign * g);
            if (step.norm() > 0.2) break;
            const Vec next = (t + E * step).normalized();
            const double v = body.value(next);
            if (sign * v > sign * best + 1e-15 * best) break;
            t = next;
            best = sign > 0 ? std::min(best, v) : std::max(best, v);
            if (step.norm() < 1e-13) break;
        }
        return best;
    };
    return {refine(imin, 1.0), refine(imax, -1.0)};
}

BodyQuantities quantities(const BodyOnGrid& bg, double p)
{
    if (!bg.valid) throw NumericalError("quantities: body is not strongly convex on the grid");
    const int n = bg.dimension();
    const std::size_t N = bg.size();
    std::vector<double> sp(N), om(N);
    for (std::size_t k = 0; k < N; ++k) {
        sp[k] = std::pow(bg.h[k], 1.0 - p) * bg.sk[k];
        om[k] = std::sqrt(bg.sk[k] / std::pow(bg.h[k], n - 1)) / n;
    }
    BodyQuantities q;
    q.volume = quadrature(*bg.grid, bg.vk);
    q.sp_total = quadrature(*bg.grid, sp);
    q.omega_n = quadrature(*bg.grid, om);
    const auto [lo, hi] = support_extrema(*bg.body, *bg.grid);
    q.r_in = lo;
    q.R_out = hi;
    return q;
}

Body random_even_body(int n, std::uint64_t seed, int budget, const RandomBodyOptions& options)
{
    require(n == 2 || n == 3, "random_even_body: dimension must be 2 or 3");
    require(budget > 0, "random_even_body: budget must be positive");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    const int max_degree = n == 2 ? 6 : 4;
    HarmonicBasis basis(n, max_degree);
    auto grid = build_grid(n, options.validation_band);

    for (int attempt = 0; attempt < budget; ++attempt) {
        Eigen::MatrixXd G(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) G(i, j) = normal(rng);
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(G);
        Mat Q = qr.householderQ();
        Vec axes(n);
        for (int i = 0; i < n; ++i) axes[i] = 1.0 + (options.max_axis_ratio - 1.0) * uniform(rng);
        const Mat A = Q * axes.asDiagonal() * Q.transpose();
        const Mat As = 0.5 * (A + A.transpose());

        std::vector<HarmonicTerm> terms;
        for (std::size_t a = 0; a < basis.size(); ++a) {
            const int l = basis.degree(a);
            if (l == 0 || l % 2 != 0) continue;
            const double c = options.perturbation * normal(rng) / (static_cast<double>(l) * l);
            terms.push_back({a, c});
        }
        Body candidate = modulated(ellipsoid(As), std::move(terms), "random(" + std::to_string(seed) + ")");
        try {
            const BodyOnGrid bg = evaluate_on_grid(candidate, grid);
            double hmax = 0.0;
            for (double v : bg.h) hmax = std::max(hmax, v);
            // Margin so that validity persists off the validation grid.
            if (bg.valid && bg.min_eig_D2h > 0.05 * hmax) return candidate;
        } catch (const NumericalError&) {
        }
    }
    throw NumericalError("random_even_body: rejection budget exhausted");
}

JohnApproximation john_position(Body body, GridPtr grid, int iterations)
{
    const int n = body->dimension();
    auto ratio_of = [&](const Mat& T) {
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
        for (const Vec& t : grid->nodes) {
            const double v = body->value(T * t);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        return hi / lo;
    };
    const std::size_t dim = static_cast<std::size_t>(n * (n + 1) / 2 - 1);
    auto objective = [&](std::span<const double> p) {
        return std::log(ratio_of(symmetric_exp(traceless_symmetric(n, p))));
    };
    const auto res = nelder_mead(objective, std::vector<double>(dim, 0.0), 0.1, iterations);
    JohnApproximation out;
    out.T = symmetric_exp(traceless_symmetric(n, res.x));
    const auto [lo0, hi0] = support_extrema(*body, *grid);
    out.initial_ratio = hi0 / lo0;
    Body image = linear_image(body, out.T);
    const auto [lo, hi] = support_extrema(*image, *grid);
    out.ratio = hi / lo;
    return out;
}

} // namespace calab
