#pragma once

#include "calab/sphere.hpp"
#include "calab/types.hpp"

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace calab {

/// A positive 1-homogeneous support function on ambient space, with derivatives.
class SupportFunction {
public:
    SupportFunction(int dimension, bool even, std::string label);
    virtual ~SupportFunction() = default;

    int dimension() const { return dimension_; }
    bool even() const { return even_; }
    const std::string& label() const { return label_; }

    virtual double value(const Vec& x) const = 0;
    /// Ambient value, gradient and Hessian. The default differentiates value()
    /// by central differences with the given step (relative to |x|).
    virtual Jet jet(const Vec& x) const;
    virtual bool has_closed_form_jet() const { return false; }

    double derivative_step = 1e-4;

private:
    int dimension_;
    bool even_;
    std::string label_;
};

using Body = std::shared_ptr<const SupportFunction>;

struct HarmonicTerm {
    std::size_t index; // position in HarmonicBasis order
    double coefficient;
};

Body ball(double r, int n);
/// h(x) = |A x|; A symmetric positive-definite.
Body ellipsoid(const Mat& A);
/// h(x) = |x| (1 + eps * sum c_a Y_a(x/|x|)); every term must have even degree.
Body perturbed_ball(int n, std::vector<HarmonicTerm> terms, double eps);
/// h(x) = base(x) * (1 + sum c_a Y_a(x/|x|)).
Body modulated(Body base, std::vector<HarmonicTerm> terms, std::string label);
/// Support function given only by values; derivatives by finite differences.
Body from_function(int n, std::function<double(const Vec&)> h, bool even, std::string label, double step = 1e-4);
/// h'(u) = h(T^T u).
Body linear_image(Body body, const Mat& T);
/// p != 0: (a h_K^p + b h_L^p)^{1/p}; p = 0: h_K^a h_L^b with a + b = 1.
Body firey_sum(double a, Body K, double b, Body L, double p);
/// Support function of the polar body, h_{K°}(u) = sup <u, x> / h_K(x).
Body polar(Body body);
/// Support function (h_K + c |x|), i.e. K + cB.
Body add_ball(Body body, double c);
/// Body whose gauge is (sum x_i^4)^{1/4} + s |x|, i.e. the polar of that support function.
Body smoothed_l4_body(int n, double s);
/// Support function (sum x_i^4)^{1/4} + s |x| itself.
Body smoothed_l4_support(int n, double s);

struct RandomBodyOptions {
    int validation_band = 16;
    double perturbation = 0.3;
    double max_axis_ratio = 2.0;
};

/// Random smooth even body |Ax| (1 + even harmonic perturbation). Candidates that fail
/// evaluate_on_grid validity are rejected; throws NumericalError after `budget` failures.
Body random_even_body(int n, std::uint64_t seed, int budget, const RandomBodyOptions& options = {});

struct Tolerances {
    double derivative_step = 1e-4;
    double eig_tol = 0.0;
    double quad_tol = 1e-10;
};

struct BodyOnGrid {
    Body body;
    GridPtr grid;
    std::vector<double> h;
    std::vector<Vec> x;          // boundary points, gradient of h
    std::vector<Mat> D2h;        // ambient, annihilates the node direction
    std::vector<Mat> g;          // D2h / h
    std::vector<FrameMat> D2h_frame; // D2h in tangent_frame coordinates
    std::vector<double> sk;      // det of D2h on the tangent space
    std::vector<double> vk;      // h * sk / n
    std::vector<double> node_min_eig;
    double min_eig_D2h = 0.0;
    double max_eig_D2h = 0.0;
    double euler_error = 0.0;    // max |<theta, x> - h| / h
    bool valid = false;

    int dimension() const { return grid->dimension; }
    std::size_t size() const { return grid->size(); }
};

BodyOnGrid evaluate_on_grid(Body body, GridPtr grid, const Tolerances& tol = {});

struct BodyQuantities {
    double volume = 0.0;
    double sp_total = 0.0;
    double omega_n = 0.0;
    double r_in = 0.0;
    double R_out = 0.0;
};

BodyQuantities quantities(const BodyOnGrid& bg, double p = 1.0);

/// min and max of h over the sphere: best grid node refined by Newton's method on the sphere.
std::pair<double, double> support_extrema(const SupportFunction& body, const SphereGrid& grid);

struct JohnApproximation {
    Mat T;        // unit determinant, symmetric positive-definite
    double ratio; // R_out / r_in of T(K)
    double initial_ratio;
};

/// Minimizes R_out / r_in of T(K) over unit-determinant SPD T (Nelder-Mead).
JohnApproximation john_position(Body body, GridPtr grid, int iterations = 200);

/// exp of a symmetric matrix.
Mat symmetric_exp(const Mat& S);
/// Symmetric traceless matrix from its n(n+1)/2 - 1 chart coordinates.
Mat traceless_symmetric(int n, std::span<const double> params);

} // namespace calab
