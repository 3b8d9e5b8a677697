#include "hhnet/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "bfgs.hpp"
#include "hhnet/errors.hpp"
#include "hhnet/independence.hpp"
#include "hhnet/rng.hpp"

namespace hhnet {

namespace {

constexpr double kHessianStep = 1e-5;
constexpr double kKktTolerance = 1e-7;
constexpr int kPolishRounds = 20;
constexpr double kMoveWeight = 0.05;

ProbabilityVector p_from(const Eigen::VectorXd& theta) {
  std::array<double, kFreeParameters> t{};
  for (int j = 0; j < kFreeParameters; ++j) t[j] = theta[j];
  return theta_to_p(t);
}

// Gradient of PL in theta from the scaled p-gradient w_k = p_k dPL/dp_k:
// dPL/dtheta_j = w_j - p_j * sum_m w_m.
Eigen::VectorXd theta_gradient(const PenalizedObjective& objective, const ProbabilityVector& p) {
  const auto w = objective.scaled_gradient(p);
  double total = 0.0;
  for (double v : w) total += v;
  Eigen::VectorXd g(kFreeParameters);
  for (int j = 0; j < kFreeParameters; ++j) g[j] = w[j + 1] - p[j + 1] * total;
  return g;
}

bool near_stationary(const detail::BfgsResult& r) {
  return r.gradient_norm <= 1e-5 * std::max(1.0, std::abs(r.value));
}

StopReason to_stop_reason(detail::BfgsStop s) {
  switch (s) {
    case detail::BfgsStop::gradient: return StopReason::gradient;
    case detail::BfgsStop::objective_change: return StopReason::objective_change;
    case detail::BfgsStop::line_search: return StopReason::line_search;
    default: return StopReason::max_iterations;
  }
}

}  // namespace

std::string_view stop_reason_name(StopReason r) {
  switch (r) {
    case StopReason::gradient: return "gradient";
    case StopReason::objective_change: return "objective_change";
    case StopReason::max_iterations: return "max_iterations";
    case StopReason::line_search: return "line_search";
  }
  return "unknown";
}

ProbabilityVector theta_to_p(const std::array<double, kFreeParameters>& theta) {
  double top = 0.0;
  for (double t : theta) top = std::max(top, t);
  ProbabilityVector p;
  p.p[0] = std::exp(-top);
  double total = p.p[0];
  for (int j = 0; j < kFreeParameters; ++j) {
    p.p[j + 1] = std::exp(theta[j] - top);
    total += p.p[j + 1];
  }
  for (double& x : p.p) x /= total;
  return p;
}

std::array<double, kNetworks> theta_to_log_p(const std::array<double, kFreeParameters>& theta) {
  double top = 0.0;
  for (double t : theta) top = std::max(top, t);
  double total = std::exp(-top);
  for (double t : theta) total += std::exp(t - top);
  const double log_norm = top + std::log(total);
  std::array<double, kNetworks> out;
  out[0] = -log_norm;
  for (int j = 0; j < kFreeParameters; ++j) out[j + 1] = theta[j] - log_norm;
  return out;
}

std::array<double, kFreeParameters> p_to_theta(const ProbabilityVector& p) {
  for (int k = 0; k < kNetworks; ++k)
    if (!(p[k] > 0.0)) throw std::domain_error("log-ratio coordinates need every p_k > 0");
  std::array<double, kFreeParameters> theta{};
  const double log_p0 = std::log(p[0]);
  for (int j = 0; j < kFreeParameters; ++j) theta[j] = std::log(p[j + 1]) - log_p0;
  return theta;
}

std::vector<ProbabilityVector> start_points(const PenalizedObjective& objective,
                                            const ProbabilityVector& init,
                                            const OptimizerOptions& opts) {
  const int wanted = std::max(1, opts.restarts);
  std::vector<ProbabilityVector> starts;
  auto add = [&](const ProbabilityVector& p) {
    if (static_cast<int>(starts.size()) >= wanted) return;
    const auto interior = p.floored(kInteriorFloor);
    if (std::find(starts.begin(), starts.end(), interior) == starts.end()) starts.push_back(interior);
  };
  add(init);
  try {
    add(product_distribution(independence_mle(objective.counts())));
  } catch (const InputError&) {
    // Some dyad is never reported; no independence start.
  }
  add(ProbabilityVector::uniform());

  Rng rng(derive_seed(opts.seed, {0x5eed}));
  std::exponential_distribution<double> unit_exp(1.0);
  while (static_cast<int>(starts.size()) < wanted) {
    ProbabilityVector draw;
    double total = 0.0;
    for (double& x : draw.p) total += (x = unit_exp(rng));
    for (double& x : draw.p) x /= total;
    add(draw);
  }
  return starts;
}

FitResult maximize(const PenalizedObjective& objective, const ProbabilityVector& init,
                   const OptimizerOptions& opts) {
  if (objective.counts().total() == 0)
    throw std::invalid_argument("maximize needs at least one observation");

  const detail::ValueAndGradient minus_objective = [&](const Eigen::VectorXd& theta,
                                                       Eigen::VectorXd& grad) {
    const auto p = p_from(theta);
    const double value = objective.value(p);
    if (!std::isfinite(value)) return std::numeric_limits<double>::infinity();
    grad = -theta_gradient(objective, p);
    return -value;
  };
  const detail::BfgsOptions bfgs{opts.gradient_tolerance, opts.objective_tolerance,
                                 opts.max_iterations};

  const auto starts = start_points(objective, init, opts);
  std::optional<detail::BfgsResult> best;
  int best_start = -1;
  int total_iterations = 0;
  for (std::size_t s = 0; s < starts.size(); ++s) {
    const auto theta0 = p_to_theta(starts[s]);
    Eigen::VectorXd x0(kFreeParameters);
    for (int j = 0; j < kFreeParameters; ++j) x0[j] = theta0[j];
    auto run = detail::bfgs_minimize(minus_objective, x0, bfgs);
    total_iterations += run.iterations;
    if (run.stop == detail::BfgsStop::non_finite || !std::isfinite(run.value)) {
      if (s == 0) throw NumericalError("penalized objective is not finite at the initial point");
      continue;
    }
    if (!best || run.value < best->value) {
      best = std::move(run);
      best_start = static_cast<int>(s);
    }
  }
  if (!best) throw NumericalError("every optimizer start diverged");

  // The log-ratio gradient vanishes as a coordinate approaches zero, so BFGS
  // can stall on a face of the simplex that some network should leave.
  // Detect that from the p-space optimality conditions and restart with mass
  // moved onto the offending networks.
  const double kkt_tolerance = kKktTolerance * std::max(1.0, double(objective.counts().total()));
  for (int round = 0; round < kPolishRounds; ++round) {
    const auto p = p_from(best->x);
    const auto violators = objective.kkt_violators(p, kkt_tolerance);
    if (violators.empty()) break;
    ProbabilityVector moved;
    for (int k = 0; k < kNetworks; ++k) moved.p[k] = (1.0 - kMoveWeight) * p[k];
    for (int k : violators) moved.p[k] += kMoveWeight / violators.size();
    const auto theta0 = p_to_theta(moved.floored(kInteriorFloor));
    Eigen::VectorXd x0(kFreeParameters);
    for (int j = 0; j < kFreeParameters; ++j) x0[j] = theta0[j];
    auto run = detail::bfgs_minimize(minus_objective, x0, bfgs);
    total_iterations += run.iterations;
    if (!std::isfinite(run.value) || run.value >= best->value) break;
    best = std::move(run);
  }

  FitResult fit;
  for (int j = 0; j < kFreeParameters; ++j) fit.theta[j] = best->x[j];
  fit.p_hat = theta_to_p(fit.theta);
  fit.objective_value = -best->value;
  fit.stop = to_stop_reason(best->stop);
  fit.converged = fit.stop == StopReason::gradient || fit.stop == StopReason::objective_change ||
                  (fit.stop == StopReason::line_search && near_stationary(*best));
  fit.iterations = total_iterations;
  fit.gradient_norm = best->gradient_norm;
  fit.best_start = best_start;
  fit.lambda = objective.lambda();
  fit.penalty = objective.penalty();
  return fit;
}

FitResult maximize(const PenalizedObjectiveSpec& spec, const ProbabilityVector& init,
                   const OptimizerOptions& opts) {
  spec.validate();
  return maximize(PenalizedObjective(spec), init, opts);
}

Eigen::MatrixXd observed_information(const FitResult& fit, const PenalizedObjectiveSpec& spec) {
  spec.validate();
  const PenalizedObjective objective(spec);
  Eigen::MatrixXd hessian(kFreeParameters, kFreeParameters);
  auto theta = fit.theta;
  for (int j = 0; j < kFreeParameters; ++j) {
    const double base = theta[j];
    theta[j] = base + kHessianStep;
    const Eigen::VectorXd up = theta_gradient(objective, theta_to_p(theta));
    theta[j] = base - kHessianStep;
    const Eigen::VectorXd down = theta_gradient(objective, theta_to_p(theta));
    theta[j] = base;
    hessian.col(j) = (up - down) / (2.0 * kHessianStep);
  }
  const Eigen::MatrixXd info = -hessian;
  return 0.5 * (info + info.transpose());
}

namespace {

void require_converged(const FitResult& fit) {
  if (!fit.converged)
    throw std::invalid_argument("uncertainty needs a converged fit (stopped on " +
                                std::string(stop_reason_name(fit.stop)) + ")");
}

}  // namespace

int hessian_rank(const FitResult& fit, const PenalizedObjectiveSpec& spec, double tol) {
  require_converged(fit);
  const Eigen::MatrixXd info = observed_information(fit, spec);
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(info);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv[0] <= 0.0) return 0;
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv[i] > tol * sv[0]) ++rank;
  return rank;
}

UncertaintyResult fisher_standard_errors(const FitResult& fit, const PenalizedObjectiveSpec& spec) {
  require_converged(fit);
  const Eigen::MatrixXd info = observed_information(fit, spec);

  UncertaintyResult out;
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(info);
  if (eig.info() != Eigen::Success) throw NumericalError("eigendecomposition of the information failed");
  const Eigen::VectorXd& ev = eig.eigenvalues();  // ascending
  const double largest = ev.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    if (std::abs(ev[i]) > 1e-8 * largest) ++out.info_matrix_rank;
  out.invertible = largest > 0.0 && ev[0] > 1e-8 * largest;
  if (!out.invertible) return out;

  const Eigen::MatrixXd cov_theta =
      eig.eigenvectors() * ev.cwiseInverse().asDiagonal() * eig.eigenvectors().transpose();

  // dp_k/dtheta_j = p_k (delta_{k,j+1} - p_{j+1})
  const auto& p = fit.p_hat;
  Eigen::MatrixXd jac(kNetworks, kFreeParameters);
  for (int k = 0; k < kNetworks; ++k)
    for (int j = 0; j < kFreeParameters; ++j)
      jac(k, j) = p[k] * ((k == j + 1 ? 1.0 : 0.0) - p[j + 1]);
  const Eigen::MatrixXd cov_p = jac * cov_theta * jac.transpose();
  for (int k = 0; k < kNetworks; ++k) out.standard_errors[k] = std::sqrt(std::max(0.0, cov_p(k, k)));
  return out;
}

}  // namespace hhnet
