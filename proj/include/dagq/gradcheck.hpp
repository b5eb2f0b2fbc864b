#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace dagq {

// Central-difference check of an analytic gradient against a scalar function
// of a flat parameter vector. Returns the maximum relative error over all
// coordinates, with denominator max(|analytic|, |numeric|, 1e-8).
//
// The function is evaluated twice per coordinate; callers are responsible for
// keeping inputs away from non-differentiable points (ReLU kinks at exactly 0).
inline double finite_diff_check(const std::function<double(const std::vector<double>&)>& f,
                                std::vector<double> params,
                                const std::vector<double>& analytic_grad,
                                double eps = 1e-5) {
  if (params.size() != analytic_grad.size())
    throw std::invalid_argument("finite_diff_check: gradient size " +
                                std::to_string(analytic_grad.size()) +
                                " does not match parameter count " +
                                std::to_string(params.size()));
  double worst = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double saved = params[i];
    params[i] = saved + eps;
    const double up = f(params);
    params[i] = saved - eps;
    const double down = f(params);
    params[i] = saved;
    const double numeric = (up - down) / (2.0 * eps);
    const double denom = std::max({std::abs(analytic_grad[i]), std::abs(numeric), 1e-8});
    worst = std::max(worst, std::abs(analytic_grad[i] - numeric) / denom);
  }
  return worst;
}

}  // namespace dagq
