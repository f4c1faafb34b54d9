#ifndef HDRVQA_SIMPLEX_H_
#define HDRVQA_SIMPLEX_H_

#include <functional>
#include <span>
#include <vector>

namespace hdrvqa {

struct SimplexOptions {
  int max_iterations = 2000;
  // Stop when the simplex characteristic size falls below
  // rel_tol * max(1, |x|).
  double rel_tol = 1e-8;
};

struct SimplexResult {
  std::vector<double> x;
  double f = 0;
  int iterations = 0;
  bool converged = false;
};

// Derivative-free Nelder-Mead minimization (GSL nmsimplex2).
SimplexResult nelder_mead(const std::function<double(std::span<const double>)>& f,
                          std::span<const double> x0, std::span<const double> step,
                          const SimplexOptions& opts = {});

}  // namespace hdrvqa

#endif  // HDRVQA_SIMPLEX_H_
