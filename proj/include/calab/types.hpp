#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace calab {

// Ambient vectors and matrices for n in {2, 3}. Fixed maximum size keeps them on the stack.
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, 3, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, 3, 3>;

// Coordinates in an orthonormal tangent frame, dimension n - 1.
using FrameVec = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, 2, 1>;
using FrameMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, 2, 2>;

/// Value, gradient and Hessian of a function on ambient space at one point.
struct Jet {
    double value = 0.0;
    Vec grad;
    Mat hess;

    static Jet zero(int n)
    {
        return {0.0, Vec::Zero(n), Mat::Zero(n, n)};
    }
};

/// Raised for violated preconditions (bad parameters, unsupported dimension).
class ContractError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised when a computation cannot produce a meaningful value
/// (non-positive support function, singular system, exhausted budget).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline void require(bool condition, const std::string& message)
{
    if (!condition) throw ContractError(message);
}

/// Orthogonal projector onto the tangent space at the unit vector `theta`.
inline Mat tangent_projector(const Vec& theta)
{
    const auto n = theta.size();
    return Mat::Identity(n, n) - theta * theta.transpose();
}

/// Orthonormal basis of theta^perp as the columns of an n x (n-1) matrix.
/// For n = 3 the columns are the spherical-coordinate frame (e_colat, e_lon)
/// away from the z-axis; near the axis a fixed fallback frame is used.
Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, 3, 2> tangent_frame(const Vec& theta);

} // namespace calab
