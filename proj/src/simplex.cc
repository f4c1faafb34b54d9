#include "hdrvqa/simplex.h"

#include <algorithm>
#include <cmath>
#include <memory>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include "hdrvqa/error.h"

namespace hdrvqa {

namespace {

using Objective = std::function<double(std::span<const double>)>;

double trampoline(const gsl_vector* v, void* params) {
  const auto& f = *static_cast<const Objective*>(params);
  const double y = f(std::span<const double>(v->data, v->size));
  // The simplex treats non-finite values as "very bad" rather than aborting.
  return std::isfinite(y) ? y : std::numeric_limits<double>::max();
}

struct VectorDeleter {
  void operator()(gsl_vector* v) const { gsl_vector_free(v); }
};
struct MinimizerDeleter {
  void operator()(gsl_multimin_fminimizer* m) const { gsl_multimin_fminimizer_free(m); }
};

std::unique_ptr<gsl_vector, VectorDeleter> to_gsl(std::span<const double> x) {
  std::unique_ptr<gsl_vector, VectorDeleter> v(gsl_vector_alloc(x.size()));
  std::copy(x.begin(), x.end(), v->data);
  return v;
}

}  // namespace

SimplexResult nelder_mead(const Objective& f, std::span<const double> x0,
                          std::span<const double> step, const SimplexOptions& opts) {
  const std::size_t n = x0.size();
  if (n == 0 || step.size() != n) throw UsageError("nelder_mead: bad dimensions");
  gsl_set_error_handler_off();

  auto x = to_gsl(x0);
  auto ss = to_gsl(step);
  gsl_multimin_function fn{&trampoline, n, const_cast<Objective*>(&f)};
  std::unique_ptr<gsl_multimin_fminimizer, MinimizerDeleter> m(
      gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, n));
  if (gsl_multimin_fminimizer_set(m.get(), &fn, x.get(), ss.get()) != GSL_SUCCESS) {
    throw Error("nelder_mead: initialisation failed");
  }

  SimplexResult r;
  for (r.iterations = 1; r.iterations <= opts.max_iterations; ++r.iterations) {
    if (gsl_multimin_fminimizer_iterate(m.get()) != GSL_SUCCESS) break;
    const gsl_vector* best = gsl_multimin_fminimizer_x(m.get());
    double norm = 0;
    for (std::size_t k = 0; k < n; ++k) norm += best->data[k] * best->data[k];
    const double size = gsl_multimin_fminimizer_size(m.get());
    if (size < opts.rel_tol * std::max(1.0, std::sqrt(norm))) {
      r.converged = true;
      break;
    }
  }
  r.iterations = std::min(r.iterations, opts.max_iterations);
  const gsl_vector* best = gsl_multimin_fminimizer_x(m.get());
  r.x.assign(best->data, best->data + n);
  r.f = m->fval;
  return r;
}

}  // namespace hdrvqa
