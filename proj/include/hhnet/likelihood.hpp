#pragma once

// Observed-data log-likelihood over the 64-simplex, the three smoothing
// penalties, and the penalized objective
//
//   PL(p, lambda) = sum_i log( sum_{k consistent with obs i} p_k ) - lambda * penalty(p).
//
// A log-likelihood of -infinity is a regular return value: it means some
// observation's consistency set carries no mass under p.

#include <array>
#include <limits>
#include <span>
#include <string_view>
#include <optional>
#include <vector>

#include "hhnet/network.hpp"
#include "hhnet/probability.hpp"

namespace hhnet {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Smallest entry allowed where a gradient in p-coordinates is requested.
inline constexpr double kInteriorFloor = 1e-10;

enum class PenaltyType { independence, adjacency, exchangeability };

std::string_view penalty_name(PenaltyType t);
std::optional<PenaltyType> parse_penalty(std::string_view name);

struct Penalty {
  PenaltyType type = PenaltyType::independence;
  // Only read for the independence penalty.
  ProbabilityVector target = ProbabilityVector::uniform();

  static Penalty independence(const ProbabilityVector& target) {
    return {PenaltyType::independence, target};
  }
  static Penalty adjacency() { return {PenaltyType::adjacency, ProbabilityVector::uniform()}; }
  static Penalty exchangeability() {
    return {PenaltyType::exchangeability, ProbabilityVector::uniform()};
  }
};

struct PenalizedObjectiveSpec {
  std::vector<PartialObservation> data;
  double lambda = 0.0;
  Penalty penalty;

  // Throws std::invalid_argument on empty data, negative or non-finite
  // lambda, or an invalid independence target.
  void validate() const;
};

double log_likelihood(const ProbabilityVector& p, std::span<const PartialObservation> data);
double log_likelihood(const ProbabilityVector& p, const ConfigurationCounts& counts);

// Squared Hellinger distance, (1/2) sum_k (sqrt q_k - sqrt p_k)^2.
double hellinger_penalty(const ProbabilityVector& p, const ProbabilityVector& q);

// Sum over unordered Hamming-1 network pairs of (p_i - p_j)^2.
double adjacency_penalty(const ProbabilityVector& p);

// Sum over unordered pairs of distinct networks in the same exchangeability
// orbit of (p_i - p_j)^2.
double exchangeability_penalty(const ProbabilityVector& p);

double penalty_value(const ProbabilityVector& p, const Penalty& penalty);

double penalized_objective(const ProbabilityVector& p, const PenalizedObjectiveSpec& spec);

// Gradient of PL with respect to p. Requires every p_k >= kInteriorFloor and
// throws std::domain_error otherwise.
std::array<double, kNetworks> objective_gradient(const ProbabilityVector& p,
                                                 const PenalizedObjectiveSpec& spec);

// Precomputed evaluator used in the optimizer's inner loop. The data enter
// only through their configuration counts.
class PenalizedObjective {
 public:
  explicit PenalizedObjective(const PenalizedObjectiveSpec& spec);
  PenalizedObjective(const ConfigurationCounts& counts, double lambda, Penalty penalty);

  double lambda() const { return lambda_; }
  const Penalty& penalty() const { return penalty_; }
  const ConfigurationCounts& counts() const { return counts_; }

  double log_likelihood(const ProbabilityVector& p) const;
  double penalty_value(const ProbabilityVector& p) const;
  double value(const ProbabilityVector& p) const;

  // p_k * dPL/dp_k for every k. Finite for every strictly positive p, which
  // is what the log-ratio chain rule needs.
  std::array<double, kNetworks> scaled_gradient(const ProbabilityVector& p) const;

  std::array<double, kNetworks> gradient(const ProbabilityVector& p) const;

  // Largest amount by which some dPL/dp_k exceeds the p-weighted mean
  // gradient. Zero at a maximizer over the closed simplex; positive when a
  // network with (near) zero mass would raise the objective if given mass.
  double kkt_violation(const ProbabilityVector& p) const;

  // Networks whose gradient exceeds the mean by more than `tol`.
  std::vector<int> kkt_violators(const ProbabilityVector& p, double tol) const;

 private:
  std::array<double, kNetworks> raw_gradient(const ProbabilityVector& p) const;

  ConfigurationCounts counts_;
  std::vector<int> active_;  // configurations with nonzero count
  double lambda_;
  Penalty penalty_;
  std::array<double, kNetworks> sqrt_target_{};
};

// Neighbour lists used by the quadratic penalties.
const std::vector<std::array<int, 2>>& penalty_pairs(PenaltyType t);

}  // namespace hhnet
