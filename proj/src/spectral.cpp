#include "calab/spectral.hpp"

#include "calab/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace calab {

GalerkinBasis make_basis(GridPtr grid, int max_degree, ParityFilter parity, bool include_constant)
{
    require(grid != nullptr, "make_basis: null grid");
    if (max_degree < 0) max_degree = grid->band_limit;
    require(max_degree <= grid->band_limit, "make_basis: basis degree exceeds the grid band limit");
    GalerkinBasis b;
    b.grid = grid;
    b.max_degree = max_degree;
    b.parity = parity;
    b.include_constant = include_constant;
    HarmonicBasis hb(grid->dimension, max_degree);
    for (std::size_t a = 0; a < hb.size(); ++a) {
        const int l = hb.degree(a);
        if (l == 0 && !include_constant) continue;
        if (parity == ParityFilter::even_only && l % 2 != 0) continue;
        b.indices.push_back(a);
        b.degrees.push_back(l);
    }
    return b;
}

namespace {

// Symmetric square root of a 1x1 or 2x2 positive-definite matrix.
FrameMat sqrt_spd(const FrameMat& A)
{
    Eigen::SelfAdjointEigenSolver<FrameMat> es(A);
    return es.eigenvectors() * es.eigenvalues().cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
}

int hessian_features(int n) { return n == 2 ? 1 : 3; }

} // namespace

GalerkinSystem assemble(const CentroAffineState& state, const GalerkinBasis& basis, const AssemblyOptions& options)
{
    require(basis.grid != nullptr && basis.grid->size() == state.size() && basis.grid->dimension == state.dimension(),
            "assemble: basis and state live on different grids");
    const int n = state.dimension();
    const int d = n - 1;
    const int hf = hessian_features(n);
    const std::size_t N = state.size();
    const std::size_t m = basis.size();
    require(m > 0, "assemble: empty basis");

    GalerkinSystem sys;
    sys.basis = basis;
    sys.dimension = n;
    sys.values.resize(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(m));
    sys.nu_weight.resize(static_cast<Eigen::Index>(N));
    // Row-scaled features: S = FS' FS, M = FM' FM, H = FH' FH.
    Eigen::MatrixXd FS(static_cast<Eigen::Index>(N * d), static_cast<Eigen::Index>(m));
    Eigen::MatrixXd FH;
    if (options.with_hessian_form) FH.resize(static_cast<Eigen::Index>(N * hf), static_cast<Eigen::Index>(m));

    const HarmonicBasis hb(n, basis.max_degree);
    parallel_for(N, options.threads, [&](std::size_t begin, std::size_t end) {
        std::vector<Jet> jets(hb.size());
        for (std::size_t k = begin; k < end; ++k) {
            const auto row = static_cast<Eigen::Index>(k);
            const Vec& t = state.grid().nodes[k];
            hb.jets(t, jets);
            const double wnu = state.grid().weights[k] * state.nu[k];
            if (!(wnu > 0.0)) throw NumericalError("assemble: non-positive density");
            const double s = std::sqrt(wnu);
            sys.nu_weight[row] = wnu;
            const auto& E = state.frames[k];
            const FrameMat W = sqrt_spd(state.g_inv_frame[k]);
            const FrameVec lf = E.transpose() * state.log_h_gradient[k];
            for (std::size_t a = 0; a < m; ++a) {
                const auto col = static_cast<Eigen::Index>(a);
                const Jet& j = jets[basis.indices[a]];
                sys.values(row, col) = j.value;
                const FrameVec gf = E.transpose() * j.grad;
                const FrameVec wg = s * (W * gf);
                for (int i = 0; i < d; ++i) FS(row * d + i, col) = wg[i];
                if (!options.with_hessian_form) continue;
                FrameMat Hs = E.transpose() * j.hess * E;
                Hs += lf * gf.transpose() + gf * lf.transpose();
                const FrameMat A = W * Hs * W;
                if (n == 2) {
                    FH(row, col) = s * A(0, 0);
                } else {
                    FH(row * 3, col) = s * A(0, 0);
                    FH(row * 3 + 1, col) = s * A(1, 1);
                    FH(row * 3 + 2, col) = s * std::sqrt(2.0) * 0.5 * (A(0, 1) + A(1, 0));
                }
            }
        }
    });

    auto gram = [m](const Eigen::MatrixXd& F) {
        Eigen::MatrixXd G = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
        G.selfadjointView<Eigen::Lower>().rankUpdate(F.transpose());
        return Eigen::MatrixXd(G.selfadjointView<Eigen::Lower>());
    };
    const Eigen::MatrixXd FM = sys.nu_weight.cwiseSqrt().asDiagonal() * sys.values;
    sys.M = gram(FM);
    sys.S = gram(FS);
    if (options.with_hessian_form) sys.H = gram(FH);
    return sys;
}

double cluster_tolerance(double lambda) { return std::max(1e-6, 1e-3 * std::abs(lambda)); }

std::vector<Cluster> cluster_eigenvalues(std::span<const double> sorted)
{
    std::vector<Cluster> out;
    double sum = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const bool join = i > 0 && sorted[i] - sorted[i - 1] <= cluster_tolerance(std::max(std::abs(sorted[i]), std::abs(sorted[i - 1])));
        if (!join) {
            if (!out.empty()) out.back().value = sum / out.back().multiplicity;
            out.push_back({0.0, 0, i});
            sum = 0.0;
        }
        out.back().multiplicity += 1;
        sum += sorted[i];
    }
    if (!out.empty()) out.back().value = sum / out.back().multiplicity;
    return out;
}

double SpectrumReport::max_residual() const
{
    double r = 0.0;
    for (double v : residuals) r = std::max(r, v);
    return r;
}

namespace {

// Columns span the requested subspace in full coefficient space.
Eigen::MatrixXd subspace_basis(const GalerkinSystem& sys, Subspace subspace)
{
    const auto m = static_cast<Eigen::Index>(sys.basis.size());
    if (subspace == Subspace::all) return Eigen::MatrixXd::Identity(m, m);
    std::vector<Eigen::Index> even;
    for (Eigen::Index a = 0; a < m; ++a)
        if (sys.basis.degrees[static_cast<std::size_t>(a)] % 2 == 0) even.push_back(a);
    const auto me = static_cast<Eigen::Index>(even.size());
    if (me < 2) throw ContractError("solve_spectrum: even non-constant subspace is empty");
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(m, me);
    for (Eigen::Index i = 0; i < me; ++i) P(even[static_cast<std::size_t>(i)], i) = 1.0;
    // Integrals against nu; the complement of this direction is M-orthogonal to constants.
    const Eigen::VectorXd r = P.transpose() * (sys.values.transpose() * sys.nu_weight);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(r);
    const Eigen::MatrixXd Q = qr.householderQ();
    return P * Q.rightCols(me - 1);
}

} // namespace

SpectrumReport solve_spectrum(const GalerkinSystem& sys, std::size_t k, Subspace subspace)
{
    require(k >= 1 && k <= sys.basis.size(), "solve_spectrum: k must lie in [1, basis size]");
    const Eigen::MatrixXd Q = subspace_basis(sys, subspace);
    require(k <= static_cast<std::size_t>(Q.cols()), "solve_spectrum: k exceeds the subspace dimension");
    const Eigen::MatrixXd Sq = Q.transpose() * sys.S * Q;
    const Eigen::MatrixXd Mq = Q.transpose() * sys.M * Q;
    Eigen::LLT<Eigen::MatrixXd> chol(Mq);
    if (chol.info() != Eigen::Success) throw NumericalError("solve_spectrum: mass matrix is numerically singular");
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(Sq, Mq, Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
    if (es.info() != Eigen::Success) throw NumericalError("solve_spectrum: eigensolver failed");

    SpectrumReport rep;
    rep.subspace = subspace;
    const Eigen::VectorXd& lam = es.eigenvalues();
    const std::vector<double> all(lam.data(), lam.data() + lam.size());
    const auto clusters = cluster_eigenvalues(all);
    const auto kk = static_cast<Eigen::Index>(k);
    rep.eigenvalues.assign(all.begin(), all.begin() + kk);
    for (const Cluster& c : clusters)
        if (c.first < k) rep.clusters.push_back(c);
    rep.eigenvectors = Q * es.eigenvectors().leftCols(kk);
    for (Eigen::Index j = 0; j < kk; ++j) {
        const Eigen::VectorXd x = es.eigenvectors().col(j);
        const Eigen::VectorXd Mx = Mq * x;
        rep.residuals.push_back((Sq * x - lam[j] * Mx).norm() / Mx.norm());
    }
    if (subspace == Subspace::all) {
        std::size_t c = 0;
        if (sys.basis.include_constant && !clusters.empty() && std::abs(clusters[0].value) <= 1e-6) c = 1;
        if (c < clusters.size()) {
            rep.lambda1 = all[clusters[c].first];
            rep.lambda1_multiplicity = clusters[c].multiplicity;
        }
    } else {
        rep.lambda1_even = all.front();
    }
    return rep;
}

double first_eigenspace_deficiency(const GalerkinSystem& sys, const SpectrumReport& rep, Body body)
{
    require(rep.subspace == Subspace::all && rep.lambda1.has_value(), "first_eigenspace_deficiency: needs a full spectrum");
    const int n = sys.dimension;
    std::size_t first = 0, count = 0;
    for (const Cluster& c : rep.clusters) {
        if (c.first < rep.eigenvalues.size() && rep.eigenvalues[c.first] == *rep.lambda1) {
            first = c.first;
            count = static_cast<std::size_t>(c.multiplicity);
        }
    }
    require(count > 0 && first + count <= static_cast<std::size_t>(rep.eigenvectors.cols()),
            "first_eigenspace_deficiency: lambda1 cluster not contained in the report");
    const Eigen::MatrixXd U = sys.values * rep.eigenvectors.middleCols(static_cast<Eigen::Index>(first), static_cast<Eigen::Index>(count));
    const auto& grid = *sys.basis.grid;
    double worst = 0.0;
    for (int axis = 0; axis < n; ++axis) {
        const auto lin = adapted_linear(body, Vec::Unit(n, axis));
        Eigen::VectorXd f(static_cast<Eigen::Index>(grid.size()));
        for (std::size_t k = 0; k < grid.size(); ++k) f[static_cast<Eigen::Index>(k)] = lin(grid.nodes[k]);
        const Eigen::VectorXd wf = sys.nu_weight.cwiseProduct(f);
        const double norm2 = f.dot(wf);
        const Eigen::VectorXd c = U.transpose() * wf;
        worst = std::max(worst, std::sqrt(std::max(0.0, norm2 - c.squaredNorm()) / norm2));
    }
    return worst;
}

HarmonicExpansion random_expansion(int n, int degree, std::uint64_t seed, bool even_only)
{
    require(n == 2 || n == 3, "random_expansion: dimension must be 2 or 3");
    require(degree >= 1, "random_expansion: degree must be positive");
    HarmonicBasis hb(n, degree);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    HarmonicExpansion f{n, degree, std::vector<double>(hb.size(), 0.0)};
    for (std::size_t a = 0; a < hb.size(); ++a) {
        const double c = normal(rng) / (1.0 + hb.degree(a));
        if (hb.degree(a) == 0 || (even_only && hb.degree(a) % 2 != 0)) continue;
        f.coefficients[a] = c;
    }
    return f;
}

double bochner_residual(const CentroAffineState& state, const HarmonicExpansion& f)
{
    const int n = state.dimension();
    require(f.dimension == n, "bochner_residual: dimension mismatch");
    const HarmonicBasis hb(n, f.degree);
    require(f.coefficients.size() == hb.size(), "bochner_residual: coefficient count mismatch");
    std::vector<Jet> jets(hb.size());
    double laplace2 = 0.0, hess2 = 0.0, grad2 = 0.0;
    for (std::size_t k = 0; k < state.size(); ++k) {
        const Vec& t = state.grid().nodes[k];
        hb.jets(t, jets);
        Vec grad = Vec::Zero(n);
        Mat hess = Mat::Zero(n, n);
        for (std::size_t a = 0; a < hb.size(); ++a) {
            if (f.coefficients[a] == 0.0) continue;
            grad += f.coefficients[a] * jets[a].grad;
            hess += f.coefficients[a] * jets[a].hess;
        }
        const auto& E = state.frames[k];
        const FrameMat& gi = state.g_inv_frame[k];
        const FrameVec gf = E.transpose() * grad;
        const FrameMat Hs = E.transpose() * conjugate_hessian_at(state, k, grad, hess) * E;
        const FrameMat GH = gi * Hs;
        const double wnu = state.grid().weights[k] * state.nu[k];
        laplace2 += wnu * GH.trace() * GH.trace();
        hess2 += wnu * (GH * GH).trace();
        grad2 += wnu * gf.dot(gi * gf);
    }
    const double scale = std::max({std::abs(laplace2), std::abs(hess2), std::abs(grad2)});
    if (scale == 0.0) return 0.0;
    return std::abs(laplace2 - hess2 - (n - 2.0) * grad2) / scale;
}

double discrete_bochner_residual(const GalerkinSystem& sys, const Eigen::VectorXd& v)
{
    require(sys.H.size() > 0, "discrete_bochner_residual: hessian form not assembled");
    require(v.size() == sys.S.rows(), "discrete_bochner_residual: coefficient count mismatch");
    Eigen::LLT<Eigen::MatrixXd> chol(sys.M);
    if (chol.info() != Eigen::Success) throw NumericalError("discrete_bochner_residual: singular mass matrix");
    const Eigen::VectorXd Sv = sys.S * v;
    const double a = Sv.dot(chol.solve(Sv));
    const double b = v.dot(sys.H * v);
    const double c = v.dot(Sv);
    const double scale = std::max({std::abs(a), std::abs(b), std::abs(c)});
    if (scale == 0.0) return 0.0;
    return std::abs(a - b - (sys.dimension - 2.0) * c) / scale;
}

double hessian_gap_even(const GalerkinSystem& sys)
{
    require(sys.H.size() > 0, "hessian_gap_even: hessian form not assembled");
    const Eigen::MatrixXd Q = subspace_basis(sys, Subspace::even_nonconstant);
    const Eigen::MatrixXd Hq = Q.transpose() * sys.H * Q;
    const Eigen::MatrixXd Sq = Q.transpose() * sys.S * Q;
    Eigen::LLT<Eigen::MatrixXd> chol(Sq);
    if (chol.info() != Eigen::Success) throw NumericalError("hessian_gap_even: stiffness is singular on the subspace");
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(Hq, Sq, Eigen::EigenvaluesOnly | Eigen::Ax_lBx);
    if (es.info() != Eigen::Success) throw NumericalError("hessian_gap_even: eigensolver failed");
    return es.eigenvalues()[0];
}

InvarianceReport invariance_check(Body body, const Mat& T, GridPtr grid, int max_degree, std::size_t count)
{
    auto spectrum = [&](Body b) {
        const auto state = build_state(evaluate_on_grid(b, grid));
        const auto sys = assemble(state, make_basis(grid, max_degree), {.with_hessian_form = false});
        return solve_spectrum(sys, std::min(count, sys.basis.size()), Subspace::all).eigenvalues;
    };
    InvarianceReport out;
    out.eigenvalues_K = spectrum(body);
    out.eigenvalues_TK = spectrum(linear_image(body, T));
    for (std::size_t i = 0; i < out.eigenvalues_K.size(); ++i) {
        const double a = out.eigenvalues_K[i], b = out.eigenvalues_TK[i];
        out.gaps.push_back(std::abs(a - b) / std::max(1.0, std::abs(a)));
        out.max_gap = std::max(out.max_gap, out.gaps.back());
    }
    return out;
}

} // namespace calab
