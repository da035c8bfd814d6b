#pragma once

// Levenberg-Marquardt for small weighted least-squares problems with box
// projection. Internal to the fitting code.

#include <functional>
#include <span>
#include <vector>

namespace coinclab::detail {

struct LsqProblem {
  std::size_t n_params = 0;
  std::span<const double> x;
  std::span<const double> data;
  std::span<const double> weights;  // 1 / sigma^2 per point
  /// Model value and its gradient w.r.t. the parameters at one point.
  std::function<double(std::span<const double> p, std::size_t i, std::span<double> grad)> eval;
  /// Maps a trial point back into the feasible region.
  std::function<void(std::span<double> p)> project;
};

struct LsqOptions {
  int max_iterations = 500;
  double param_tolerance = 1e-8;
  double cost_tolerance = 1e-10;
  std::vector<bool> fixed;
};

struct LsqResult {
  std::vector<double> params;
  std::vector<double> errors;
  double chi2 = 0.0;
  int iterations = 0;
  bool converged = false;
};

LsqResult levenberg_marquardt(const LsqProblem& problem, std::vector<double> init,
                              const LsqOptions& options);

}  // namespace coinclab::detail
