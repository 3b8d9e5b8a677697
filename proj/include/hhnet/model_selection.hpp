#pragma once

// Tuning-parameter selection by leave-one-out cross-validation, and
// nonparametric bootstrap standard errors.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "hhnet/likelihood.hpp"
#include "hhnet/optimizer.hpp"

namespace hhnet {

// Evenly spaced grid start, start+step, ..., up to stop (inclusive when stop
// lies on the grid up to rounding).
std::vector<double> make_grid(double start, double stop, double step);

// Penalty for fitting `counts`; the independence target is the product
// distribution of the counts' own dyad MLEs. At lambda == 0 the target is
// irrelevant and an unobserved dyad is tolerated.
Penalty penalty_for(const ConfigurationCounts& counts, double lambda, PenaltyType type);

// Maximizes PL on `counts` with the penalty built by penalty_for.
FitResult fit_penalized(const ConfigurationCounts& counts, double lambda, PenaltyType type,
                        const OptimizerOptions& opts = {});

enum class CvScoring {
  log_likelihood,  // mean held-out log-likelihood
  likelihood,      // mean held-out likelihood, on the raw scale
};

struct CvOptions {
  OptimizerOptions optimizer;
  CvScoring scoring = CvScoring::log_likelihood;
  int jobs = 1;
};

struct CvCurve {
  std::vector<double> grid;
  std::vector<double> mean_heldout;             // per grid point
  std::vector<std::vector<double>> per_fold;    // [observation][grid point]; NaN where the fit failed
  std::vector<int> failed_folds;                // per grid point
  CvScoring scoring = CvScoring::log_likelihood;

  bool complete(std::size_t g) const { return failed_folds[g] == 0; }
};

// Leaves out each observation in turn, refits on the rest at every grid
// value, and scores the held-out observation. Observations with the same
// configuration share one refit. Throws std::invalid_argument for fewer than
// two observations or a grid that is empty, negative, or not strictly
// increasing.
CvCurve loo_cross_validate(std::span<const PartialObservation> data, std::span<const double> grid,
                           PenaltyType penalty, const CvOptions& opts = {});

// Grid value with the largest finite mean over complete grid points; ties go
// to the smaller lambda. Throws NumericalError when no grid point qualifies.
double select_lambda(const CvCurve& curve);

struct BootstrapOptions {
  OptimizerOptions optimizer;
  int jobs = 1;
  std::uint64_t seed = 1;
};

inline constexpr int kDefaultBootstrapResamples = 150;

struct BootstrapResult {
  int resamples = 0;
  std::vector<ProbabilityVector> estimates;  // successful resamples, in resample order
  std::vector<int> failed;                   // indices of resamples whose fit failed
  std::array<double, kNetworks> standard_errors{};
  ProbabilityVector mean;
};

// Resamples the observations with replacement B times and refits each. Fails
// with NumericalError when more than 10% of the refits fail.
BootstrapResult bootstrap(std::span<const PartialObservation> data, int resamples, double lambda,
                          PenaltyType penalty, const BootstrapOptions& opts = {});

}  // namespace hhnet
