#pragma once

// Maximization of the penalized objective over the open 64-simplex.
//
// The simplex is parameterized by 63 log-ratios against network 0:
//   p_0 = 1 / (1 + sum_m exp(theta_m)),  p_k = exp(theta_k) * p_0  (k >= 1),
// which keeps every iterate strictly interior. BFGS runs in theta and is
// restarted from several initial points; the best objective wins.

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "hhnet/likelihood.hpp"
#include "hhnet/probability.hpp"

namespace hhnet {

inline constexpr int kFreeParameters = kNetworks - 1;

struct OptimizerOptions {
  double gradient_tolerance = 1e-8;
  double objective_tolerance = 1e-12;
  int max_iterations = 5000;
  int restarts = 5;
  std::uint64_t seed = 20240101;
};

enum class StopReason { gradient, objective_change, max_iterations, line_search };

std::string_view stop_reason_name(StopReason r);

struct FitResult {
  ProbabilityVector p_hat;
  std::array<double, kFreeParameters> theta{};
  double objective_value = 0.0;
  bool converged = false;
  StopReason stop = StopReason::max_iterations;
  int iterations = 0;
  double gradient_norm = 0.0;
  int best_start = 0;
  double lambda = 0.0;
  Penalty penalty;
};

ProbabilityVector theta_to_p(const std::array<double, kFreeParameters>& theta);
// log p_k from theta, finite even where p_k underflows to zero.
std::array<double, kNetworks> theta_to_log_p(const std::array<double, kFreeParameters>& theta);

// Requires every p_k > 0.
std::array<double, kFreeParameters> p_to_theta(const ProbabilityVector& p);

// Throws NumericalError when the objective is not finite at any start or
// every start fails.
FitResult maximize(const PenalizedObjectiveSpec& spec, const ProbabilityVector& init,
                   const OptimizerOptions& opts = {});
FitResult maximize(const PenalizedObjective& objective, const ProbabilityVector& init,
                   const OptimizerOptions& opts = {});

// Start points tried by maximize, in order: the caller's init, the
// independence fit of the data (when every dyad is observed), the uniform
// vector, then Dirichlet(1) draws seeded from opts.seed.
std::vector<ProbabilityVector> start_points(const PenalizedObjective& objective,
                                            const ProbabilityVector& init,
                                            const OptimizerOptions& opts);

// Observed information in theta coordinates: minus the Hessian of the
// objective, by central differences (step 1e-5) of the analytic gradient.
Eigen::MatrixXd observed_information(const FitResult& fit, const PenalizedObjectiveSpec& spec);

struct UncertaintyResult {
  std::array<std::optional<double>, kNetworks> standard_errors{};
  int info_matrix_rank = 0;
  bool invertible = false;
};

// Throws std::invalid_argument for a fit that did not converge.
UncertaintyResult fisher_standard_errors(const FitResult& fit, const PenalizedObjectiveSpec& spec);

// Count of singular values of the observed information above tol * largest.
int hessian_rank(const FitResult& fit, const PenalizedObjectiveSpec& spec, double tol = 1e-8);

}  // namespace hhnet
