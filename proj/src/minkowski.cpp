#include "calab/minkowski.hpp"

#include "calab/harmonics.hpp"
#include "calab/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace calab {

namespace {

void require_exponent(double p, int n, const char* where)
{
    require(p > -n && p < 1.0, std::string(where) + ": p must lie in (-n, 1)");
}

std::vector<std::size_t> even_indices(const HarmonicBasis& hb)
{
    std::vector<std::size_t> out;
    for (std::size_t a = 0; a < hb.size(); ++a)
        if (hb.is_even(a)) out.push_back(a);
    return out;
}

// Nodal values of h and of the tangential D2h for each even basis function.
struct Discretization {
    GridPtr grid;
    int n = 0;
    int degree = 0;
    std::vector<std::size_t> index;
    std::vector<int> degrees;
    Eigen::MatrixXd values;          // nodes x basis
    std::vector<Eigen::MatrixXd> d2; // frame entries (00) or (00, 11, 01), nodes x basis

    Discretization(GridPtr g, int deg) : grid(std::move(g)), n(grid->dimension), degree(deg)
    {
        require(deg >= 0 && deg <= grid->band_limit, "minkowski: basis degree exceeds the grid band limit");
        const HarmonicBasis hb(n, deg);
        index = even_indices(hb);
        for (std::size_t a : index) degrees.push_back(hb.degree(a));
        const auto N = static_cast<Eigen::Index>(grid->size());
        const auto m = static_cast<Eigen::Index>(index.size());
        values.resize(N, m);
        d2.assign(n == 2 ? 1 : 3, Eigen::MatrixXd(N, m));
        std::vector<Jet> jets(hb.size());
        for (Eigen::Index k = 0; k < N; ++k) {
            const Vec& t = grid->nodes[static_cast<std::size_t>(k)];
            hb.jets(t, jets);
            const auto E = tangent_frame(t);
            for (Eigen::Index a = 0; a < m; ++a) {
                const Jet& j = jets[index[static_cast<std::size_t>(a)]];
                values(k, a) = j.value;
                // D2 of the 1-homogeneous extension on the tangent space.
                FrameMat D = E.transpose() * j.hess * E;
                D += j.value * FrameMat::Identity(n - 1, n - 1);
                d2[0](k, a) = D(0, 0);
                if (n == 3) {
                    d2[1](k, a) = D(1, 1);
                    d2[2](k, a) = 0.5 * (D(0, 1) + D(1, 0));
                }
            }
        }
    }

    std::size_t size() const { return index.size(); }
};

struct Evaluation {
    bool feasible = false;
    Eigen::VectorXd h;
    Eigen::VectorXd sk;
    double min_eig = 0.0;
    double mean_h = 0.0;
    double volume = 0.0;
    double F = 0.0;
    Eigen::VectorXd grad;
};

class Problem {
public:
    Problem(const Discretization& disc, const TargetMeasure& mu, double p, double eig_floor_factor)
        : disc_(disc), p_(p), floor_factor_(eig_floor_factor)
    {
        const auto N = static_cast<Eigen::Index>(disc.grid->size());
        w_.resize(N);
        f_.resize(N);
        for (Eigen::Index k = 0; k < N; ++k) {
            w_[k] = disc.grid->weights[static_cast<std::size_t>(k)];
            f_[k] = mu.density[static_cast<std::size_t>(k)];
        }
        wf_ = w_.cwiseProduct(f_);
        mass_ = wf_.sum();
    }

    Evaluation evaluate(const Eigen::VectorXd& c, bool with_gradient = true) const
    {
        const int n = disc_.n;
        Evaluation e;
        e.h = disc_.values * c;
        const auto N = e.h.size();
        e.sk.resize(N);
        e.mean_h = w_.dot(e.h) / w_.sum();
        e.min_eig = std::numeric_limits<double>::infinity();
        const Eigen::VectorXd a = disc_.d2[0] * c;
        Eigen::VectorXd b, o;
        if (n == 3) {
            b = disc_.d2[1] * c;
            o = disc_.d2[2] * c;
        }
        for (Eigen::Index k = 0; k < N; ++k) {
            if (n == 2) {
                e.sk[k] = a[k];
                e.min_eig = std::min(e.min_eig, a[k]);
            } else {
                e.sk[k] = a[k] * b[k] - o[k] * o[k];
                const double mid = 0.5 * (a[k] + b[k]), rad = std::hypot(0.5 * (a[k] - b[k]), o[k]);
                e.min_eig = std::min(e.min_eig, mid - rad);
            }
        }
        if (!(e.h.minCoeff() > 0.0) || !(e.min_eig > floor_factor_ * e.mean_h)) return e;
        e.feasible = true;
        e.volume = w_.dot(e.h.cwiseProduct(e.sk)) / n;
        const double V = e.volume;
        const Eigen::VectorXd dV = disc_.values.transpose() * w_.cwiseProduct(e.sk);
        if (p_ == 0.0) {
            const double logmean = wf_.dot(e.h.array().log().matrix()) / mass_;
            e.F = std::exp(logmean) * std::pow(V, -1.0 / n);
            if (with_gradient) {
                const Eigen::VectorXd dlog = disc_.values.transpose() * wf_.cwiseQuotient(e.h) / mass_;
                e.grad = e.F * (dlog - dV / (n * V));
            }
        } else {
            const Eigen::VectorXd hp = e.h.array().pow(p_).matrix();
            const double J = wf_.dot(hp);
            const double Vp = std::pow(V, -p_ / n);
            e.F = J * Vp / p_;
            if (with_gradient) {
                const Eigen::VectorXd dJ = disc_.values.transpose() * wf_.cwiseProduct(hp.cwiseQuotient(e.h));
                e.grad = Vp * (dJ - J / (n * V) * dV);
            }
        }
        return e;
    }

    double eig_floor(const Evaluation& e) const { return floor_factor_ * e.mean_h; }

    // sup |h^{1-p} sk / (c f) - 1| with c fitted by least squares.
    std::pair<double, double> el_residual(const Evaluation& e) const
    {
        const Eigen::VectorXd g = (e.h.array().pow(1.0 - p_) * e.sk.array()).matrix();
        const double c = g.dot(f_) / f_.squaredNorm();
        double r = 0.0;
        for (Eigen::Index k = 0; k < g.size(); ++k) r = std::max(r, std::abs(g[k] / (c * f_[k]) - 1.0));
        return {r, c};
    }

private:
    const Discretization& disc_;
    double p_;
    double floor_factor_;
    Eigen::VectorXd w_, f_, wf_;
    double mass_ = 0.0;
};

double basis_constant(int n)
{
    return n == 2 ? 1.0 / std::sqrt(2.0 * std::acos(-1.0)) : 1.0 / std::sqrt(4.0 * std::acos(-1.0));
}

} // namespace

TargetMeasure make_target(GridPtr grid, std::vector<double> density)
{
    require(grid != nullptr, "make_target: null grid");
    require(density.size() == grid->size(), "make_target: density size does not match the grid");
    for (std::size_t k = 0; k < density.size(); ++k) {
        require(std::isfinite(density[k]) && density[k] > 0.0, "make_target: density must be positive");
        const double other = density[grid->antipode[k]];
        require(std::abs(density[k] - other) <= 1e-12 * std::max(std::abs(density[k]), std::abs(other)),
                "make_target: density must be even");
    }
    return {std::move(grid), std::move(density)};
}

TargetMeasure uniform_target(GridPtr grid)
{
    std::vector<double> d(grid->size(), 1.0);
    return make_target(std::move(grid), std::move(d));
}

TargetMeasure lp_surface_target(Body K, GridPtr grid, double p)
{
    const BodyOnGrid bg = evaluate_on_grid(K, grid);
    if (!bg.valid) throw NumericalError("lp_surface_target: body is not strongly convex on the grid");
    std::vector<double> d(grid->size());
    for (std::size_t k = 0; k < d.size(); ++k) d[k] = std::pow(bg.h[k], 1.0 - p) * bg.sk[k];
    // Exact antipodal symmetry; the evaluation is even only up to rounding.
    for (std::size_t k = 0; k < d.size(); ++k) {
        const std::size_t j = grid->antipode[k];
        if (j > k) d[k] = d[j] = 0.5 * (d[k] + d[j]);
    }
    return make_target(std::move(grid), std::move(d));
}

double functional(const BodyOnGrid& L, const TargetMeasure& mu, double p)
{
    const int n = L.dimension();
    require_exponent(p, n, "functional");
    require(mu.grid->size() == L.size(), "functional: measure and body live on different grids");
    if (!L.valid) throw NumericalError("functional: body is not strongly convex on the grid");
    const SphereGrid& g = *L.grid;
    const double V = quadrature(g, L.vk);
    double integral = 0.0, mass = 0.0;
    for (std::size_t k = 0; k < L.size(); ++k) {
        const double wf = g.weights[k] * mu.density[k];
        mass += wf;
        integral += wf * (p == 0.0 ? std::log(L.h[k]) : std::pow(L.h[k], p));
    }
    if (p == 0.0) return std::exp(integral / mass) / std::pow(V, 1.0 / n);
    return integral / p / std::pow(V, p / n);
}

std::size_t even_basis_size(int n, int degree)
{
    return even_indices(HarmonicBasis(n, degree)).size();
}

EvenShape project_even(Body K, GridPtr grid, int degree)
{
    const int n = grid->dimension;
    require(K->dimension() == n, "project_even: dimension mismatch");
    require(degree <= grid->band_limit, "project_even: degree exceeds the grid band limit");
    const HarmonicBasis hb(n, degree);
    const auto idx = even_indices(hb);
    EvenShape s{n, degree, std::vector<double>(idx.size(), 0.0)};
    std::vector<double> phi(hb.size());
    for (std::size_t k = 0; k < grid->size(); ++k) {
        const double hk = K->value(grid->nodes[k]) * grid->weights[k];
        hb.values(grid->nodes[k], phi);
        for (std::size_t i = 0; i < idx.size(); ++i) s.coefficients[i] += hk * phi[idx[i]];
    }
    return s;
}

Body shape_body(const EvenShape& shape)
{
    const HarmonicBasis hb(shape.dimension, shape.degree);
    const auto idx = even_indices(hb);
    require(shape.coefficients.size() == idx.size(), "shape_body: coefficient count mismatch");
    const double mean = shape.coefficients[0] * basis_constant(shape.dimension);
    require(mean > 0.0, "shape_body: the constant coefficient must be positive");
    std::vector<HarmonicTerm> terms;
    for (std::size_t i = 1; i < idx.size(); ++i)
        if (shape.coefficients[i] != 0.0) terms.push_back({idx[i], shape.coefficients[i] / mean});
    return modulated(ball(mean, shape.dimension), std::move(terms), "even_shape");
}

EvenShape random_start(int n, int degree, std::uint64_t seed, GridPtr grid)
{
    const HarmonicBasis hb(n, degree);
    const auto idx = even_indices(hb);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    std::vector<double> pert(idx.size(), 0.0);
    for (std::size_t i = 1; i < idx.size(); ++i) {
        const double l = hb.degree(idx[i]);
        pert[i] = 0.3 * normal(rng) / (l * l);
    }
    EvenShape s{n, degree, std::vector<double>(idx.size(), 0.0)};
    for (double amp = 1.0; amp > 1e-3; amp *= 0.5) {
        s.coefficients[0] = 1.0 / basis_constant(n);
        for (std::size_t i = 1; i < idx.size(); ++i) s.coefficients[i] = amp * pert[i] / basis_constant(n);
        const BodyOnGrid bg = evaluate_on_grid(shape_body(s), grid);
        const double hmax = *std::max_element(bg.h.begin(), bg.h.end());
        if (bg.valid && bg.min_eig_D2h > 0.05 * hmax) return s;
    }
    return s;
}

SolveResult minimize(const TargetMeasure& mu, double p, const EvenShape& init, const SolverOptions& options)
{
    const GridPtr grid = mu.grid;
    const int n = grid->dimension;
    require_exponent(p, n, "minimize");
    require(init.dimension == n && init.degree == options.degree, "minimize: initial shape does not match the options");
    require(options.max_iterations >= 0, "minimize: max_iterations must be nonnegative");
    const Discretization disc(grid, options.degree);
    require(init.coefficients.size() == disc.size(), "minimize: coefficient count mismatch");
    const Problem problem(disc, mu, p, options.eig_floor_factor);

    const auto m = static_cast<Eigen::Index>(disc.size());
    Eigen::VectorXd c = Eigen::Map<const Eigen::VectorXd>(init.coefficients.data(), m);
    Evaluation cur = problem.evaluate(c);
    if (!cur.feasible) throw NumericalError("minimize: initial shape is not feasible");
    auto normalize = [&](Eigen::VectorXd& coeffs, Evaluation& e) {
        const double s = std::pow(e.volume, -1.0 / n);
        coeffs *= s;
        e = problem.evaluate(coeffs);
        return s;
    };
    normalize(c, cur);

    // Initial inverse Hessian: the round Laplacian scaling of each mode.
    Eigen::VectorXd precond(m);
    for (Eigen::Index a = 0; a < m; ++a) {
        const double l = disc.degrees[static_cast<std::size_t>(a)];
        precond[a] = 1.0 / (1.0 + l * (l + n - 2.0));
    }
    const Eigen::MatrixXd H0 = Eigen::MatrixXd(precond.asDiagonal());
    Eigen::MatrixXd Hinv = H0;

    SolveResult res;
    res.history.push_back(cur.F);
    res.status = "max iterations";
    for (int it = 0; it < options.max_iterations; ++it) {
        const double pg = std::sqrt(cur.grad.dot(precond.cwiseProduct(cur.grad)));
        if (pg <= options.gradient_tolerance * std::abs(cur.F)) {
            res.converged = true;
            res.status = "gradient tolerance";
            break;
        }
        Eigen::VectorXd d = -Hinv * cur.grad;
        double slope = cur.grad.dot(d);
        if (!(slope < 0.0)) {
            Hinv = H0;
            d = -Hinv * cur.grad;
            slope = cur.grad.dot(d);
        }
        double step = 1.0;
        bool accepted = false;
        Evaluation next;
        Eigen::VectorXd cn;
        for (int ls = 0; ls < 60; ++ls, step *= 0.5) {
            cn = c + step * d;
            next = problem.evaluate(cn);
            if (!next.feasible || !(next.F <= cur.F + 1e-4 * step * slope)) continue;
            // Volume renormalization moves F only by rounding; the history must still decrease.
            Eigen::VectorXd scaled = cn * std::pow(next.volume, -1.0 / n);
            Evaluation normalized = problem.evaluate(scaled);
            if (normalized.feasible && normalized.F < cur.F) {
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            res.status = "line search stall";
            break;
        }
        const Eigen::VectorXd s = cn - c;
        const Eigen::VectorXd y = next.grad - cur.grad;
        const double sy = s.dot(y);
        if (sy > 1e-14 * s.norm() * y.norm()) {
            const double rho = 1.0 / sy;
            const Eigen::VectorXd Hy = Hinv * y;
            Hinv += (rho * rho * y.dot(Hy) + rho) * s * s.transpose() - rho * (Hy * s.transpose() + s * Hy.transpose());
        }
        c = cn;
        cur = next;
        const double scale = normalize(c, cur);
        Hinv *= scale * scale;
        res.history.push_back(cur.F);
        res.iterations = it + 1;
    }

    res.shape = {n, options.degree, std::vector<double>(c.data(), c.data() + m)};
    res.F = cur.F;
    res.volume = cur.volume;
    res.min_eig = cur.min_eig;
    res.eig_floor = problem.eig_floor(cur);
    std::tie(res.el_residual, res.el_constant) = problem.el_residual(cur);
    return res;
}

UniquenessProbe uniqueness_probe(Body K, double p, int n_starts, std::uint64_t seed, GridPtr grid,
                                 const SolverOptions& options, int threads)
{
    require(n_starts >= 1, "uniqueness_probe: need at least one start");
    require_exponent(p, grid->dimension, "uniqueness_probe");
    const TargetMeasure mu = lp_surface_target(K, grid, p);
    UniquenessProbe out;
    out.runs.resize(static_cast<std::size_t>(n_starts));
    parallel_for(out.runs.size(), threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            out.runs[i] = minimize(mu, p, random_start(grid->dimension, options.degree, seed + i, grid), options);
        }
    });
    const Discretization disc(grid, options.degree);
    std::vector<Eigen::VectorXd> h;
    for (const auto& r : out.runs) h.push_back(disc.values * Eigen::Map<const Eigen::VectorXd>(r.shape.coefficients.data(), static_cast<Eigen::Index>(r.shape.coefficients.size())));
    const std::size_t S = h.size();
    out.distances.assign(S, std::vector<double>(S, 0.0));
    for (std::size_t i = 0; i < S; ++i)
        for (std::size_t j = 0; j < S; ++j) out.distances[i][j] = (h[i] - h[j]).cwiseAbs().maxCoeff() / h[i].maxCoeff();
    // Single linkage.
    out.cluster_of.assign(S, -1);
    for (std::size_t i = 0; i < S; ++i) {
        if (out.cluster_of[i] >= 0) continue;
        out.cluster_of[i] = out.clusters++;
        std::vector<std::size_t> stack{i};
        while (!stack.empty()) {
            const std::size_t a = stack.back();
            stack.pop_back();
            for (std::size_t b = 0; b < S; ++b) {
                if (out.cluster_of[b] < 0 && std::max(out.distances[a][b], out.distances[b][a]) <= uniqueness_cluster_threshold) {
                    out.cluster_of[b] = out.cluster_of[i];
                    stack.push_back(b);
                }
            }
        }
    }
    return out;
}

InequalityGap lp_minkowski_gap(Body K, Body L, double p, GridPtr grid)
{
    const int n = grid->dimension;
    require_exponent(p, n, "lp_minkowski_gap");
    const BodyOnGrid bk = evaluate_on_grid(K, grid);
    const BodyOnGrid bl = evaluate_on_grid(L, grid);
    if (!bk.valid || !bl.valid) throw NumericalError("lp_minkowski_gap: body is not strongly convex on the grid");
    const double VK = quadrature(*grid, bk.vk), VL = quadrature(*grid, bl.vk);
    InequalityGap g;
    double integral = 0.0;
    for (std::size_t k = 0; k < grid->size(); ++k) {
        const double w = grid->weights[k];
        if (p == 0.0) integral += w * std::log(bl.h[k] / bk.h[k]) * bk.vk[k];
        else integral += w * std::pow(bl.h[k], p) * std::pow(bk.h[k], 1.0 - p) * bk.sk[k];
    }
    if (p == 0.0) {
        g.lhs = integral / VK;
        g.rhs = std::log(VL / VK) / n;
        g.gap = g.lhs - g.rhs;
    } else {
        g.lhs = integral / p;
        g.rhs = n / p * std::pow(VK, 1.0 - p / n) * std::pow(VL, p / n);
        g.gap = (g.lhs - g.rhs) / std::abs(g.rhs);
    }
    return g;
}

} // namespace calab
