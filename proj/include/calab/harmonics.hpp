#pragma once

#include "calab/types.hpp"

#include <span>
#include <vector>

namespace calab {

/// Real orthonormal harmonic basis on S^{n-1}, n in {2, 3}, up to degree L.
///
/// n = 2: 1/sqrt(2 pi), cos(k t)/sqrt(pi), sin(k t)/sqrt(pi) for 1 <= k <= L.
/// n = 3: real spherical harmonics Y_lm, 0 <= l <= L, ordered by degree with
///        m = 0 first and then the (cos, sin) pairs m = 1..l.
///
/// Every basis function is evaluated through its 0-homogeneous extension
/// f(x) = P(x) / |x|^l, where P is the corresponding harmonic polynomial, so the
/// returned jets are ambient derivatives. Tangential derivatives on the sphere
/// follow by projection (see sphere.hpp).
class HarmonicBasis {
public:
    HarmonicBasis(int dimension, int max_degree);

    int dimension() const { return dimension_; }
    int max_degree() const { return max_degree_; }
    std::size_t size() const { return degrees_.size(); }

    int degree(std::size_t index) const { return degrees_[index]; }
    bool is_even(std::size_t index) const { return degrees_[index] % 2 == 0; }

    /// Number of basis functions of degree <= L.
    static std::size_t count(int dimension, int max_degree);

    /// Values of all basis functions at x (0-homogeneous extension).
    void values(const Vec& x, std::span<double> out) const;

    /// Jets of all basis functions at x (0-homogeneous extension).
    void jets(const Vec& x, std::span<Jet> out) const;

    /// Jets restricted to basis functions of degree <= max_degree.
    void jets(const Vec& x, int max_degree, std::span<Jet> out) const;

private:
    int dimension_;
    int max_degree_;
    std::vector<int> degrees_;
};

} // namespace calab
