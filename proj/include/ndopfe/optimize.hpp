#pragma once

#include <functional>
#include <span>
#include <vector>

namespace ndopfe {

struct NelderMeadOptions {
  int max_evals = 500;
  double xtol = 1e-9;   ///< simplex diameter in scaled units
  double ftol = 1e-14;  ///< absolute spread of simplex values
  double init_step = 0.2;  ///< initial simplex edge in scaled units
  int max_inner_restarts = 4;  ///< reseed a shrunken simplex around the best point
};

struct NelderMeadResult {
  std::vector<double> x;
  double f = 0.0;
  int evals = 0;
  bool converged = false;  ///< tolerance hit before the budget ran out
  int improvements = 0;    ///< accepted points strictly better than f(x0)
};

/// Derivative-free simplex search with box constraints enforced by
/// clamping trial points. Deterministic. After the simplex collapses the
/// search reseeds around the incumbent with a smaller step until no
/// further improvement or the budget is exhausted.
NelderMeadResult nelder_mead_box(const std::function<double(std::span<const double>)>& fn,
                                 std::span<const double> lower, std::span<const double> upper,
                                 std::span<const double> x0, const NelderMeadOptions& opt);

}  // namespace ndopfe
