#pragma once

#include <functional>
#include <span>
#include <vector>

namespace calab {

struct NelderMeadResult {
    std::vector<double> x;
    double value = 0.0;
    int iterations = 0;
};

/// Derivative-free minimization (simplex method) for a fixed number of iterations,
/// stopping early only when the simplex size drops below `size_tol`.
NelderMeadResult nelder_mead(const std::function<double(std::span<const double>)>& f,
                             std::vector<double> x0, double initial_step, int iterations,
                             double size_tol = 1e-10);

} // namespace calab
