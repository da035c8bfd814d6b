#include "least_squares.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

namespace coinclab::detail {

namespace {

struct Linearization {
  Eigen::MatrixXd jtj;
  Eigen::VectorXd jtr;
  double cost = 0.0;
};

double cost_at(const LsqProblem& pb, std::span<const double> p, std::vector<double>& grad) {
  double cost = 0.0;
  for (std::size_t i = 0; i < pb.data.size(); ++i) {
    const double r = pb.data[i] - pb.eval(p, i, grad);
    cost += pb.weights[i] * r * r;
  }
  return cost;
}

Linearization linearize(const LsqProblem& pb, std::span<const double> p,
                        const std::vector<std::size_t>& free) {
  const std::size_t m = free.size();
  Linearization lin{Eigen::MatrixXd::Zero(m, m), Eigen::VectorXd::Zero(m), 0.0};
  std::vector<double> grad(pb.n_params);
  Eigen::VectorXd row(m);
  for (std::size_t i = 0; i < pb.data.size(); ++i) {
    const double r = pb.data[i] - pb.eval(p, i, grad);
    const double w = pb.weights[i];
    for (std::size_t k = 0; k < m; ++k) row[k] = grad[free[k]];
    lin.jtj.selfadjointView<Eigen::Lower>().rankUpdate(row, w);
    lin.jtr += w * r * row;
    lin.cost += w * r * r;
  }
  lin.jtj = lin.jtj.selfadjointView<Eigen::Lower>();
  return lin;
}

}  // namespace

LsqResult levenberg_marquardt(const LsqProblem& pb, std::vector<double> init,
                              const LsqOptions& options) {
  std::vector<std::size_t> free;
  for (std::size_t k = 0; k < pb.n_params; ++k) {
    if (k >= options.fixed.size() || !options.fixed[k]) free.push_back(k);
  }
  const std::size_t m = free.size();

  LsqResult result;
  std::vector<double> p = std::move(init);
  if (pb.project) pb.project(p);
  std::vector<double> grad(pb.n_params);

  double lambda = 1e-3;
  Linearization lin = linearize(pb, p, free);
  int iter = 0;
  bool converged = m == 0;
  while (!converged && iter < options.max_iterations) {
    ++iter;
    Eigen::MatrixXd damped = lin.jtj;
    for (std::size_t k = 0; k < m; ++k) {
      damped(k, k) += lambda * std::max(lin.jtj(k, k), 1e-12);
    }
    const Eigen::VectorXd step = damped.ldlt().solve(lin.jtr);
    if (!step.allFinite()) {
      lambda *= 10.0;
      continue;
    }

    std::vector<double> trial = p;
    for (std::size_t k = 0; k < m; ++k) trial[free[k]] += step[k];
    if (pb.project) pb.project(trial);
    const double trial_cost = cost_at(pb, trial, grad);

    if (std::isfinite(trial_cost) && trial_cost < lin.cost) {
      double dp = 0.0;
      double pn = 0.0;
      for (std::size_t k : free) {
        dp += (trial[k] - p[k]) * (trial[k] - p[k]);
        pn += p[k] * p[k];
      }
      const double rel_cost = (lin.cost - trial_cost) / std::max(lin.cost, 1e-300);
      p = std::move(trial);
      lin = linearize(pb, p, free);
      lambda = std::max(lambda / 10.0, 1e-12);
      if (std::sqrt(dp) <= options.param_tolerance * (std::sqrt(pn) + options.param_tolerance) ||
          rel_cost < options.cost_tolerance) {
        converged = true;
      }
    } else {
      lambda *= 10.0;
      // No descent direction left at any damping: p is stationary.
      if (lambda > 1e16) converged = true;
    }
  }

  result.params = p;
  result.chi2 = lin.cost;
  result.iterations = iter;
  result.converged = converged;
  result.errors.assign(pb.n_params, 0.0);
  if (m > 0) {
    const Eigen::MatrixXd cov = lin.jtj.completeOrthogonalDecomposition().pseudoInverse();
    for (std::size_t k = 0; k < m; ++k) {
      result.errors[free[k]] = std::sqrt(std::max(cov(k, k), 0.0));
    }
  }
  return result;
}

}  // namespace coinclab::detail
