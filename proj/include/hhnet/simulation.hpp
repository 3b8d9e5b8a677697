#pragma once

// Monte-Carlo study of estimator accuracy: draw egocentric samples from a
// known network distribution, refit across a lambda grid, and decompose the
// mean squared error into squared bias and variance.

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "hhnet/likelihood.hpp"
#include "hhnet/optimizer.hpp"
#include "hhnet/rng.hpp"

namespace hhnet {

struct RespondentFrequency {
  std::array<int, kRoles> count{};  // indexed by Role
  int total() const;
};

// Draws n networks from p_true, gives each household one respondent by a
// random permutation of the role multiset in `freq` (so freq.total() must
// equal n), and keeps only the respondent's three dyads.
std::vector<PartialObservation> simulate_sample(const ProbabilityVector& p_true, int n,
                                                const RespondentFrequency& freq, Rng& rng);

struct StudyConfig {
  ProbabilityVector p_true;
  int n = 30;
  RespondentFrequency freq{{6, 17, 4, 3}};
  int samples = 200;
  std::vector<double> grid;
  PenaltyType penalty = PenaltyType::independence;
  std::uint64_t seed = 1;
  OptimizerOptions optimizer;
  int jobs = 1;

  void validate() const;
};

struct StudyPoint {
  double lambda = 0.0;
  double mse = 0.0;
  double mean_sq_bias = 0.0;
  // (1/64) sum_k (mean_k - true_k); zero up to rounding since both sum to one.
  double signed_bias = 0.0;
  double variance = 0.0;
  ProbabilityVector mean_estimate;
  int failures = 0;
};

struct StudyMetrics {
  std::vector<StudyPoint> points;  // one per grid value
  // Average over samples of the sample's own independence fit (the product
  // distribution of its dyad MLEs); the large-lambda limit of the
  // independence-penalized estimator.
  ProbabilityVector mean_independence;
  int independence_failures = 0;
};

// Returns p-hat for one simulated sample at one lambda. Used to swap in a
// stub estimator in tests.
using StudyFitter = std::function<ProbabilityVector(std::span<const PartialObservation> sample,
                                                    double lambda, const StudyConfig& config)>;

StudyMetrics run_study(const StudyConfig& config);
StudyMetrics run_study(const StudyConfig& config, const StudyFitter& fitter);

// A distribution shaped like a small-child household with strong
// dependence: the complete network carries 0.65, the network where the
// older child has no contacts carries 0.12, and the remaining 0.23 is spread
// over the other networks in proportion to an independence model.
ProbabilityVector dependent_scenario();

// The elder-child isolate network: every C2 dyad empty, every other dyad present.
inline constexpr int kElderChildIsolate = 0b100110;

}  // namespace hhnet
