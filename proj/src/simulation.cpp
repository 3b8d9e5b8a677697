#include "hhnet/simulation.hpp"

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <string>

#include "hhnet/errors.hpp"
#include "hhnet/independence.hpp"
#include "hhnet/model_selection.hpp"
#include "hhnet/parallel.hpp"

namespace hhnet {

int RespondentFrequency::total() const {
  int n = 0;
  for (int c : count) n += c;
  return n;
}

std::vector<PartialObservation> simulate_sample(const ProbabilityVector& p_true, int n,
                                                const RespondentFrequency& freq, Rng& rng) {
  if (!p_true.is_valid()) throw std::invalid_argument("p_true is not a probability vector");
  for (int c : freq.count)
    if (c < 0) throw std::invalid_argument("respondent frequencies must be nonnegative");
  if (freq.total() != n)
    throw std::invalid_argument("respondent frequencies sum to " + std::to_string(freq.total()) +
                                " but the sample size is " + std::to_string(n));

  std::discrete_distribution<int> network(p_true.p.begin(), p_true.p.end());
  std::vector<Role> roles;
  roles.reserve(static_cast<std::size_t>(n));
  for (Role r : kAllRoles) roles.insert(roles.end(), static_cast<std::size_t>(freq.count[to_int(r)]), r);
  std::shuffle(roles.begin(), roles.end(), rng);

  std::vector<PartialObservation> sample;
  sample.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const int k = network(rng);
    const Role r = roles[static_cast<std::size_t>(i)];
    std::array<PartialObservation::Report, 3> reports{};
    const auto dyads = incident_dyads(r);
    for (int j = 0; j < 3; ++j) reports[j] = {dyads[j], ((k >> to_int(dyads[j])) & 1) != 0};
    sample.emplace_back(r, reports);
  }
  return sample;
}

void StudyConfig::validate() const {
  if (!p_true.is_valid()) throw std::invalid_argument("p_true is not a probability vector");
  if (samples < 1) throw std::invalid_argument("a study needs at least one sample");
  if (n < 1) throw std::invalid_argument("sample size must be positive");
  if (freq.total() != n)
    throw std::invalid_argument("respondent frequencies must sum to the sample size");
  if (grid.empty()) throw std::invalid_argument("lambda grid is empty");
  for (std::size_t g = 0; g < grid.size(); ++g)
    if (!(grid[g] >= 0.0) || (g > 0 && !(grid[g] > grid[g - 1])))
      throw std::invalid_argument("lambda grid must be nonnegative and strictly increasing");
}

StudyMetrics run_study(const StudyConfig& config) {
  return run_study(config, [](std::span<const PartialObservation> sample, double lambda,
                              const StudyConfig& cfg) {
    return fit_penalized(ConfigurationCounts::from(sample), lambda, cfg.penalty, cfg.optimizer).p_hat;
  });
}

StudyMetrics run_study(const StudyConfig& config, const StudyFitter& fitter) {
  config.validate();
  const auto n_samples = static_cast<std::size_t>(config.samples);
  const std::size_t n_grid = config.grid.size();

  std::vector<std::vector<PartialObservation>> samples(n_samples);
  for (std::size_t s = 0; s < n_samples; ++s) {
    Rng rng(derive_seed(config.seed, {0x5a3b1e, s}));
    samples[s] = simulate_sample(config.p_true, config.n, config.freq, rng);
  }

  std::vector<std::optional<ProbabilityVector>> fits(n_samples * n_grid);
  parallel_for(fits.size(), config.jobs, [&](std::size_t job) {
    const std::size_t s = job / n_grid;
    const std::size_t g = job % n_grid;
    try {
      fits[job] = fitter(samples[s], config.grid[g], config);
    } catch (const std::exception&) {
      fits[job].reset();
    }
  });

  StudyMetrics metrics;
  metrics.mean_independence.p.fill(0.0);
  int independence_ok = 0;
  for (const auto& sample : samples) {
    try {
      const auto ind = product_distribution(independence_mle(sample));
      for (int k = 0; k < kNetworks; ++k) metrics.mean_independence.p[k] += ind[k];
      ++independence_ok;
    } catch (const InputError&) {
      ++metrics.independence_failures;
    }
  }
  if (independence_ok > 0)
    for (double& x : metrics.mean_independence.p) x /= independence_ok;

  const auto& truth = config.p_true;
  for (std::size_t g = 0; g < n_grid; ++g) {
    StudyPoint point;
    point.lambda = config.grid[g];
    point.mean_estimate.p.fill(0.0);
    std::vector<const ProbabilityVector*> ok;
    for (std::size_t s = 0; s < n_samples; ++s) {
      if (fits[s * n_grid + g])
        ok.push_back(&*fits[s * n_grid + g]);
      else
        ++point.failures;
    }
    if (!ok.empty()) {
      const auto count = static_cast<double>(ok.size());
      // Mean as first estimate plus mean offset, so identical estimates
      // average to themselves exactly.
      const auto& first = *ok.front();
      for (int k = 0; k < kNetworks; ++k) {
        double offset = 0.0;
        for (const auto* est : ok) offset += (*est)[k] - first[k];
        point.mean_estimate.p[k] = first[k] + offset / count;
      }

      double sq_err = 0.0;
      double var = 0.0;
      for (const auto* est : ok)
        for (int k = 0; k < kNetworks; ++k) {
          const double e = (*est)[k] - truth[k];
          const double v = (*est)[k] - point.mean_estimate[k];
          sq_err += e * e;
          var += v * v;
        }
      double bias2 = 0.0;
      double bias = 0.0;
      for (int k = 0; k < kNetworks; ++k) {
        const double b = point.mean_estimate[k] - truth[k];
        bias2 += b * b;
        bias += b;
      }
      point.mse = sq_err / (count * kNetworks);
      point.variance = var / (count * kNetworks);
      point.mean_sq_bias = bias2 / kNetworks;
      point.signed_bias = bias / kNetworks;
    }
    metrics.points.push_back(point);
  }
  return metrics;
}

ProbabilityVector dependent_scenario() {
  constexpr std::array<double, kDyads> eta{0.85, 0.9, 0.9, 0.8, 0.8, 0.9};
  const auto background = product_distribution(eta);
  double rest = 0.0;
  for (int k = 0; k < kNetworks; ++k)
    if (k != kNetworks - 1 && k != kElderChildIsolate) rest += background[k];
  ProbabilityVector p;
  for (int k = 0; k < kNetworks; ++k) p.p[k] = 0.23 * background[k] / rest;
  p.p[kNetworks - 1] = 0.65;
  p.p[kElderChildIsolate] = 0.12;
  return p;
}

}  // namespace hhnet
