#include "hhnet/model_selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "hhnet/errors.hpp"
#include "hhnet/independence.hpp"
#include "hhnet/parallel.hpp"
#include "hhnet/rng.hpp"

namespace hhnet {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void validate_grid(std::span<const double> grid) {
  if (grid.empty()) throw std::invalid_argument("lambda grid is empty");
  for (std::size_t g = 0; g < grid.size(); ++g) {
    if (!std::isfinite(grid[g]) || grid[g] < 0.0)
      throw std::invalid_argument("lambda grid values must be finite and nonnegative");
    if (g > 0 && !(grid[g] > grid[g - 1]))
      throw std::invalid_argument("lambda grid must be strictly increasing");
  }
}

// Log of the mass a fit gives to a configuration, computed from theta so
// that masses below the smallest double stay finite.
double config_log_mass(const FitResult& fit, int configuration) {
  const auto log_p = theta_to_log_p(fit.theta);
  const auto members = consistent_networks(PartialObservation::from_configuration(configuration));
  double top = -std::numeric_limits<double>::infinity();
  for (int k : members) top = std::max(top, log_p[k]);
  double total = 0.0;
  for (int k : members) total += std::exp(log_p[k] - top);
  return top + std::log(total);
}

}  // namespace

std::vector<double> make_grid(double start, double stop, double step) {
  if (!(step > 0.0) || !std::isfinite(start) || !std::isfinite(stop) || stop < start)
    throw std::invalid_argument("grid needs start <= stop and a positive step");
  const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
  std::vector<double> grid(count);
  for (std::size_t i = 0; i < count; ++i) grid[i] = start + static_cast<double>(i) * step;
  return grid;
}

Penalty penalty_for(const ConfigurationCounts& counts, double lambda, PenaltyType type) {
  switch (type) {
    case PenaltyType::adjacency: return Penalty::adjacency();
    case PenaltyType::exchangeability: return Penalty::exchangeability();
    case PenaltyType::independence: break;
  }
  try {
    return Penalty::independence(product_distribution(independence_mle(counts)));
  } catch (const InputError&) {
    if (lambda == 0.0) return Penalty::independence(ProbabilityVector::uniform());
    throw;
  }
}

FitResult fit_penalized(const ConfigurationCounts& counts, double lambda, PenaltyType type,
                        const OptimizerOptions& opts) {
  const Penalty penalty = penalty_for(counts, lambda, type);
  const PenalizedObjective objective(counts, lambda, penalty);
  const ProbabilityVector init =
      type == PenaltyType::independence ? penalty.target : ProbabilityVector::uniform();
  return maximize(objective, init, opts);
}

CvCurve loo_cross_validate(std::span<const PartialObservation> data, std::span<const double> grid,
                           PenaltyType penalty, const CvOptions& opts) {
  if (data.size() < 2) throw std::invalid_argument("cross-validation needs at least two observations");
  validate_grid(grid);

  const auto counts = ConfigurationCounts::from(data);
  std::vector<int> present;
  for (int c = 0; c < kConfigurations; ++c)
    if (counts.count[c] > 0) present.push_back(c);

  // One refit per (held-out configuration, grid point).
  const std::size_t n_grid = grid.size();
  std::vector<double> score(present.size() * n_grid, kNaN);
  parallel_for(score.size(), opts.jobs, [&](std::size_t job) {
    const std::size_t ci = job / n_grid;
    const std::size_t g = job % n_grid;
    const int held_out = present[ci];
    ConfigurationCounts rest = counts;
    --rest.count[held_out];
    try {
      const auto fit = fit_penalized(rest, grid[g], penalty, opts.optimizer);
      const double log_m = config_log_mass(fit, held_out);
      score[job] = opts.scoring == CvScoring::likelihood ? std::exp(log_m) : log_m;
    } catch (const std::exception&) {
      score[job] = kNaN;
    }
  });

  CvCurve curve;
  curve.grid.assign(grid.begin(), grid.end());
  curve.scoring = opts.scoring;
  curve.per_fold.assign(data.size(), std::vector<double>(n_grid, kNaN));
  curve.mean_heldout.assign(n_grid, 0.0);
  curve.failed_folds.assign(n_grid, 0);

  std::array<int, kConfigurations> slot{};
  for (std::size_t ci = 0; ci < present.size(); ++ci) slot[present[ci]] = static_cast<int>(ci);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto ci = static_cast<std::size_t>(slot[data[i].configuration()]);
    for (std::size_t g = 0; g < n_grid; ++g) curve.per_fold[i][g] = score[ci * n_grid + g];
  }
  // Sum per configuration times its count, so the mean does not depend on
  // the order of the data.
  for (std::size_t g = 0; g < n_grid; ++g) {
    double total = 0.0;
    for (std::size_t ci = 0; ci < present.size(); ++ci) {
      const double s = score[ci * n_grid + g];
      if (std::isnan(s)) {
        curve.failed_folds[g] += counts.count[present[ci]];
        continue;
      }
      total += counts.count[present[ci]] * s;
    }
    curve.mean_heldout[g] = curve.failed_folds[g] > 0 ? kNaN : total / static_cast<double>(data.size());
  }
  return curve;
}

double select_lambda(const CvCurve& curve) {
  std::optional<std::size_t> best;
  for (std::size_t g = 0; g < curve.grid.size(); ++g) {
    if (!curve.complete(g) || !std::isfinite(curve.mean_heldout[g])) continue;
    if (!best || curve.mean_heldout[g] > curve.mean_heldout[*best]) best = g;
  }
  if (!best) throw NumericalError("no complete grid point with a finite cross-validation score");
  return curve.grid[*best];
}

BootstrapResult bootstrap(std::span<const PartialObservation> data, int resamples, double lambda,
                          PenaltyType penalty, const BootstrapOptions& opts) {
  if (data.size() < 2) throw std::invalid_argument("bootstrap needs at least two observations");
  if (resamples < 1) throw std::invalid_argument("bootstrap needs at least one resample");
  if (!std::isfinite(lambda) || lambda < 0.0)
    throw std::invalid_argument("lambda must be finite and nonnegative");

  const std::size_t n = data.size();
  std::vector<std::optional<ProbabilityVector>> fits(static_cast<std::size_t>(resamples));
  parallel_for(fits.size(), opts.jobs, [&](std::size_t b) {
    Rng rng(derive_seed(opts.seed, {0xb007, b}));
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    ConfigurationCounts counts;
    for (std::size_t i = 0; i < n; ++i) ++counts.count[data[pick(rng)].configuration()];
    try {
      fits[b] = fit_penalized(counts, lambda, penalty, opts.optimizer).p_hat;
    } catch (const std::exception&) {
      fits[b].reset();
    }
  });

  BootstrapResult out;
  out.resamples = resamples;
  for (std::size_t b = 0; b < fits.size(); ++b) {
    if (fits[b])
      out.estimates.push_back(*fits[b]);
    else
      out.failed.push_back(static_cast<int>(b));
  }
  if (10 * out.failed.size() > fits.size())
    throw NumericalError(std::to_string(out.failed.size()) + " of " + std::to_string(resamples) +
                         " bootstrap refits failed");

  const auto b_ok = static_cast<double>(out.estimates.size());
  out.mean.p.fill(0.0);
  for (const auto& est : out.estimates)
    for (int k = 0; k < kNetworks; ++k) out.mean.p[k] += est[k] / b_ok;
  if (out.estimates.size() > 1) {
    for (int k = 0; k < kNetworks; ++k) {
      double ss = 0.0;
      for (const auto& est : out.estimates) ss += (est[k] - out.mean[k]) * (est[k] - out.mean[k]);
      out.standard_errors[k] = std::sqrt(ss / (b_ok - 1.0));
    }
  }
  return out;
}

}  // namespace hhnet
