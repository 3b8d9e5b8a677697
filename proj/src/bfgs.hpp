#pragma once

// Dense BFGS minimizer with a strong-Wolfe line search. Internal to the
// optimizer module.

#include <Eigen/Dense>
#include <functional>

namespace hhnet::detail {

// Writes the gradient into its second argument and returns the value.
using ValueAndGradient = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>;

struct BfgsOptions {
  double gradient_tolerance = 1e-8;   // sup-norm
  double objective_tolerance = 1e-12; // |f_k - f_{k+1}|
  int max_iterations = 5000;
};

enum class BfgsStop { gradient, objective_change, max_iterations, line_search, non_finite };

struct BfgsResult {
  Eigen::VectorXd x;
  double value = 0.0;
  double gradient_norm = 0.0;
  int iterations = 0;
  BfgsStop stop = BfgsStop::max_iterations;
};

BfgsResult bfgs_minimize(const ValueAndGradient& fn, Eigen::VectorXd x0, const BfgsOptions& opts);

}  // namespace hhnet::detail
