#include "hhnet/likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace hhnet {

namespace {

using ConsistencyTable = std::array<std::array<int, 8>, kConfigurations>;

const ConsistencyTable& consistency_table() {
  static const ConsistencyTable table = [] {
    ConsistencyTable t{};
    for (int c = 0; c < kConfigurations; ++c)
      t[c] = consistent_networks(PartialObservation::from_configuration(c));
    return t;
  }();
  return table;
}

double config_mass(const ProbabilityVector& p, int configuration) {
  double m = 0.0;
  for (int k : consistency_table()[configuration]) m += p[k];
  return m;
}

double quadratic_penalty(const ProbabilityVector& p, const std::vector<std::array<int, 2>>& pairs) {
  double total = 0.0;
  for (const auto& [i, j] : pairs) {
    const double d = p[i] - p[j];
    total += d * d;
  }
  return total;
}

}  // namespace

std::string_view penalty_name(PenaltyType t) {
  switch (t) {
    case PenaltyType::independence: return "independence";
    case PenaltyType::adjacency: return "adjacency";
    case PenaltyType::exchangeability: return "exchangeability";
  }
  return "unknown";
}

std::optional<PenaltyType> parse_penalty(std::string_view name) {
  for (auto t : {PenaltyType::independence, PenaltyType::adjacency, PenaltyType::exchangeability})
    if (penalty_name(t) == name) return t;
  return std::nullopt;
}

const std::vector<std::array<int, 2>>& penalty_pairs(PenaltyType t) {
  static const auto adjacent = adjacent_pairs();
  static const auto exchangeable = exchangeable_pairs();
  static const std::vector<std::array<int, 2>> none;
  switch (t) {
    case PenaltyType::adjacency: return adjacent;
    case PenaltyType::exchangeability: return exchangeable;
    case PenaltyType::independence: break;
  }
  return none;
}

void PenalizedObjectiveSpec::validate() const {
  if (data.empty()) throw std::invalid_argument("penalized objective needs at least one observation");
  if (!std::isfinite(lambda) || lambda < 0.0)
    throw std::invalid_argument("lambda must be finite and nonnegative");
  if (penalty.type == PenaltyType::independence && !penalty.target.is_valid())
    throw std::invalid_argument("independence penalty target is not a probability vector");
}

double log_likelihood(const ProbabilityVector& p, const ConfigurationCounts& counts) {
  double total = 0.0;
  for (int c = 0; c < kConfigurations; ++c) {
    if (counts.count[c] == 0) continue;
    const double m = config_mass(p, c);
    if (!(m > 0.0)) return kNegInf;
    total += counts.count[c] * std::log(m);
  }
  return total;
}

double log_likelihood(const ProbabilityVector& p, std::span<const PartialObservation> data) {
  return log_likelihood(p, ConfigurationCounts::from(data));
}

double hellinger_penalty(const ProbabilityVector& p, const ProbabilityVector& q) {
  double total = 0.0;
  for (int k = 0; k < kNetworks; ++k) {
    const double d = std::sqrt(q[k]) - std::sqrt(p[k]);
    total += d * d;
  }
  return 0.5 * total;
}

double adjacency_penalty(const ProbabilityVector& p) {
  return quadratic_penalty(p, penalty_pairs(PenaltyType::adjacency));
}

double exchangeability_penalty(const ProbabilityVector& p) {
  return quadratic_penalty(p, penalty_pairs(PenaltyType::exchangeability));
}

double penalty_value(const ProbabilityVector& p, const Penalty& penalty) {
  switch (penalty.type) {
    case PenaltyType::independence: return hellinger_penalty(p, penalty.target);
    case PenaltyType::adjacency: return adjacency_penalty(p);
    case PenaltyType::exchangeability: return exchangeability_penalty(p);
  }
  return 0.0;
}

double penalized_objective(const ProbabilityVector& p, const PenalizedObjectiveSpec& spec) {
  spec.validate();
  return PenalizedObjective(spec).value(p);
}

std::array<double, kNetworks> objective_gradient(const ProbabilityVector& p,
                                                 const PenalizedObjectiveSpec& spec) {
  spec.validate();
  return PenalizedObjective(spec).gradient(p);
}

PenalizedObjective::PenalizedObjective(const PenalizedObjectiveSpec& spec)
    : PenalizedObjective(ConfigurationCounts::from(spec.data), spec.lambda, spec.penalty) {}

PenalizedObjective::PenalizedObjective(const ConfigurationCounts& counts, double lambda,
                                       Penalty penalty)
    : counts_(counts), lambda_(lambda), penalty_(std::move(penalty)) {
  for (int c = 0; c < kConfigurations; ++c)
    if (counts_.count[c] > 0) active_.push_back(c);
  for (int k = 0; k < kNetworks; ++k) sqrt_target_[k] = std::sqrt(penalty_.target[k]);
}

double PenalizedObjective::log_likelihood(const ProbabilityVector& p) const {
  double total = 0.0;
  for (int c : active_) {
    const double m = config_mass(p, c);
    if (!(m > 0.0)) return kNegInf;
    total += counts_.count[c] * std::log(m);
  }
  return total;
}

double PenalizedObjective::penalty_value(const ProbabilityVector& p) const {
  if (penalty_.type == PenaltyType::independence) {
    double total = 0.0;
    for (int k = 0; k < kNetworks; ++k) {
      const double d = sqrt_target_[k] - std::sqrt(p[k]);
      total += d * d;
    }
    return 0.5 * total;
  }
  return hhnet::penalty_value(p, penalty_);
}

double PenalizedObjective::value(const ProbabilityVector& p) const {
  const double ll = log_likelihood(p);
  if (lambda_ == 0.0 || ll == kNegInf) return ll;
  return ll - lambda_ * penalty_value(p);
}

std::array<double, kNetworks> PenalizedObjective::scaled_gradient(const ProbabilityVector& p) const {
  std::array<double, kNetworks> g{};
  std::array<double, kNetworks> ll{};
  for (int c : active_) {
    const double m = config_mass(p, c);
    const double w = counts_.count[c] / m;
    for (int k : consistency_table()[c]) ll[k] += w;
  }
  for (int k = 0; k < kNetworks; ++k) g[k] = p[k] * ll[k];
  if (lambda_ == 0.0) return g;

  if (penalty_.type == PenaltyType::independence) {
    // p_k * d/dp_k of (1/2)(sqrt q_k - sqrt p_k)^2 = -(sqrt(q_k p_k) - p_k) / 2
    for (int k = 0; k < kNetworks; ++k)
      g[k] += lambda_ * 0.5 * (sqrt_target_[k] * std::sqrt(p[k]) - p[k]);
  } else {
    std::array<double, kNetworks> d{};
    for (const auto& [i, j] : penalty_pairs(penalty_.type)) {
      const double diff = 2.0 * (p[i] - p[j]);
      d[i] += diff;
      d[j] -= diff;
    }
    for (int k = 0; k < kNetworks; ++k) g[k] -= lambda_ * p[k] * d[k];
  }
  return g;
}

std::array<double, kNetworks> PenalizedObjective::gradient(const ProbabilityVector& p) const {
  for (int k = 0; k < kNetworks; ++k)
    if (!(p[k] >= kInteriorFloor))
      throw std::domain_error("objective gradient needs an interior point; p_" + std::to_string(k) +
                              " is below the floor");
  return raw_gradient(p);
}

double PenalizedObjective::kkt_violation(const ProbabilityVector& p) const {
  const auto g = raw_gradient(p);
  double mean = 0.0;
  for (int k = 0; k < kNetworks; ++k) mean += p[k] * g[k];
  double worst = 0.0;
  for (int k = 0; k < kNetworks; ++k) worst = std::max(worst, g[k] - mean);
  return worst;
}

std::vector<int> PenalizedObjective::kkt_violators(const ProbabilityVector& p, double tol) const {
  const auto g = raw_gradient(p);
  double mean = 0.0;
  for (int k = 0; k < kNetworks; ++k) mean += p[k] * g[k];
  std::vector<int> out;
  for (int k = 0; k < kNetworks; ++k)
    if (g[k] - mean > tol) out.push_back(k);
  return out;
}

std::array<double, kNetworks> PenalizedObjective::raw_gradient(const ProbabilityVector& p) const {
  std::array<double, kNetworks> g{};
  for (int c : active_) {
    const double w = counts_.count[c] / config_mass(p, c);
    for (int k : consistency_table()[c]) g[k] += w;
  }
  if (lambda_ == 0.0) return g;
  if (penalty_.type == PenaltyType::independence) {
    for (int k = 0; k < kNetworks; ++k) {
      const double sp = std::sqrt(p[k]);
      g[k] += lambda_ * (sqrt_target_[k] - sp) / (2.0 * sp);
    }
  } else {
    for (const auto& [i, j] : penalty_pairs(penalty_.type)) {
      const double diff = 2.0 * lambda_ * (p[i] - p[j]);
      g[i] -= diff;
      g[j] += diff;
    }
  }
  return g;
}

}  // namespace hhnet
