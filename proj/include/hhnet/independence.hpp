#pragma once

// Dyad-independence baseline: each of the six dyads carries a contact
// independently with its own probability.

#include <array>
#include <span>
#include <utility>

#include "hhnet/network.hpp"
#include "hhnet/probability.hpp"

namespace hhnet {

struct DyadCount {
  int successes = 0;
  int trials = 0;
};

struct DyadProbabilities {
  std::array<double, kDyads> eta{};
  std::array<DyadCount, kDyads> counts{};
};

// Per-dyad binomial MLE. Throws InputError naming the dyad when a dyad has
// no reports at all.
DyadProbabilities independence_mle(std::span<const PartialObservation> data);
DyadProbabilities independence_mle(const ConfigurationCounts& counts);

ProbabilityVector product_distribution(const std::array<double, kDyads>& eta);
inline ProbabilityVector product_distribution(const DyadProbabilities& d) {
  return product_distribution(d.eta);
}

struct Interval {
  double low = 0.0;
  double high = 1.0;
};

// Clopper-Pearson interval for a binomial proportion at confidence `level`.
// The lower end is exactly 0 when successes == 0 and the upper end exactly 1
// when successes == trials.
Interval exact_binomial_ci(int successes, int trials, double level = 0.95);

// Bounds on a network probability from per-dyad bounds: the low end takes
// the low bound on present dyads and the high bound on absent ones, and
// conversely for the high end.
Interval conservative_network_ci(const std::array<double, kDyads>& eta_low,
                                 const std::array<double, kDyads>& eta_high, const DyadVector& z);

struct IndependenceIntervals {
  std::array<Interval, kDyads> dyad{};
  std::array<Interval, kNetworks> network{};
};

IndependenceIntervals independence_intervals(const DyadProbabilities& fit, double level = 0.95);

}  // namespace hhnet
