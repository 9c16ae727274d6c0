#include "calab/optimize.hpp"

#include "calab/types.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <cmath>
#include <limits>

namespace calab {

namespace {

struct Objective {
    const std::function<double(std::span<const double>)>* f;
};

double trampoline(const gsl_vector* v, void* params)
{
    const auto* obj = static_cast<const Objective*>(params);
    const std::span<const double> x(v->data, v->size);
    const double value = (*obj->f)(x);
    return std::isfinite(value) ? value : std::numeric_limits<double>::max();
}

} // namespace

NelderMeadResult nelder_mead(const std::function<double(std::span<const double>)>& f,
                             std::vector<double> x0, double initial_step, int iterations,
                             double size_tol)
{
    NelderMeadResult result;
    if (x0.empty()) {
        result.value = f(x0);
        result.x = std::move(x0);
        return result;
    }
    gsl_set_error_handler_off();
    const std::size_t dim = x0.size();
    Objective obj{&f};
    gsl_multimin_function fn{&trampoline, dim, &obj};

    gsl_vector* x = gsl_vector_alloc(dim);
    gsl_vector* step = gsl_vector_alloc(dim);
    for (std::size_t i = 0; i < dim; ++i) {
        gsl_vector_set(x, i, x0[i]);
        gsl_vector_set(step, i, initial_step);
    }
    gsl_multimin_fminimizer* s = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, dim);
    gsl_multimin_fminimizer_set(s, &fn, x, step);

    int it = 0;
    for (; it < iterations; ++it) {
        if (gsl_multimin_fminimizer_iterate(s) != GSL_SUCCESS) break;
        if (gsl_multimin_fminimizer_size(s) < size_tol) {
            ++it;
            break;
        }
    }
    result.iterations = it;
    result.value = gsl_multimin_fminimizer_minimum(s);
    const gsl_vector* best = gsl_multimin_fminimizer_x(s);
    result.x.assign(best->data, best->data + dim);

    gsl_multimin_fminimizer_free(s);
    gsl_vector_free(step);
    gsl_vector_free(x);
    return result;
}

} // namespace calab
