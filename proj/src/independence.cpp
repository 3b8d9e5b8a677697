#include "hhnet/independence.hpp"

#include <boost/math/special_functions/beta.hpp>
#include <cmath>
#include <string>

#include "hhnet/errors.hpp"

namespace hhnet {

DyadProbabilities independence_mle(const ConfigurationCounts& counts) {
  DyadProbabilities out;
  for (int c = 0; c < kConfigurations; ++c) {
    const int n = counts.count[c];
    if (n == 0) continue;
    const auto obs = PartialObservation::from_configuration(c);
    for (Dyad d : incident_dyads(obs.respondent())) {
      auto& tally = out.counts[to_int(d)];
      tally.trials += n;
      if (*obs.report(d)) tally.successes += n;
    }
  }
  for (Dyad d : kAllDyads) {
    const auto& tally = out.counts[to_int(d)];
    if (tally.trials == 0)
      throw InputError("unobserved dyad " + std::string(dyad_name(d)) +
                       ": no respondent reported on it, so its contact probability "
                       "cannot be estimated");
    out.eta[to_int(d)] = static_cast<double>(tally.successes) / tally.trials;
  }
  return out;
}

DyadProbabilities independence_mle(std::span<const PartialObservation> data) {
  return independence_mle(ConfigurationCounts::from(data));
}

ProbabilityVector product_distribution(const std::array<double, kDyads>& eta) {
  ProbabilityVector v;
  for (int k = 0; k < kNetworks; ++k) {
    double prob = 1.0;
    for (int j = 0; j < kDyads; ++j) prob *= ((k >> j) & 1) ? eta[j] : 1.0 - eta[j];
    v.p[k] = prob;
  }
  return v;
}

Interval exact_binomial_ci(int successes, int trials, double level) {
  if (trials < 1) throw std::invalid_argument("exact_binomial_ci: trials must be at least 1");
  if (successes < 0 || successes > trials)
    throw std::invalid_argument("exact_binomial_ci: successes must lie in 0..trials");
  if (!(level > 0.0 && level < 1.0))
    throw std::invalid_argument("exact_binomial_ci: level must lie strictly between 0 and 1");
  const double alpha = 1.0 - level;
  const double s = successes;
  const double t = trials;
  Interval ci;
  ci.low = successes == 0 ? 0.0 : boost::math::ibeta_inv(s, t - s + 1.0, alpha / 2.0);
  ci.high = successes == trials ? 1.0 : boost::math::ibeta_inv(s + 1.0, t - s, 1.0 - alpha / 2.0);
  return ci;
}

Interval conservative_network_ci(const std::array<double, kDyads>& eta_low,
                                 const std::array<double, kDyads>& eta_high, const DyadVector& z) {
  Interval ci{1.0, 1.0};
  for (int j = 0; j < kDyads; ++j) {
    const double lo = eta_low[j];
    const double hi = eta_high[j];
    if (!(0.0 <= lo && lo <= hi && hi <= 1.0))
      throw std::invalid_argument("conservative_network_ci: dyad bounds must satisfy "
                                  "0 <= low <= high <= 1 (dyad " + std::to_string(j) + ")");
    if (z[j]) {
      ci.low *= lo;
      ci.high *= hi;
    } else {
      ci.low *= 1.0 - hi;
      ci.high *= 1.0 - lo;
    }
  }
  return ci;
}

IndependenceIntervals independence_intervals(const DyadProbabilities& fit, double level) {
  IndependenceIntervals out;
  std::array<double, kDyads> lo{};
  std::array<double, kDyads> hi{};
  for (int j = 0; j < kDyads; ++j) {
    out.dyad[j] = exact_binomial_ci(fit.counts[j].successes, fit.counts[j].trials, level);
    lo[j] = out.dyad[j].low;
    hi[j] = out.dyad[j].high;
  }
  for (int k = 0; k < kNetworks; ++k)
    out.network[k] = conservative_network_ci(lo, hi, index_to_vector(NetworkIndex{k}));
  return out;
}

}  // namespace hhnet
