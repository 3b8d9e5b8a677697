#include "hhnet/probability.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace hhnet {

ProbabilityVector ProbabilityVector::uniform() {
  ProbabilityVector v;
  v.p.fill(1.0 / kNetworks);
  return v;
}

ProbabilityVector ProbabilityVector::point_mass(int network) {
  ProbabilityVector v;
  v.p[NetworkIndex{network}.value()] = 1.0;
  return v;
}

ProbabilityVector ProbabilityVector::from(std::span<const double> values, double tol) {
  if (values.size() != kNetworks)
    throw std::invalid_argument("expected 64 probabilities, got " + std::to_string(values.size()));
  ProbabilityVector v;
  std::copy(values.begin(), values.end(), v.p.begin());
  if (!v.is_valid(tol)) throw std::invalid_argument("values do not form a probability vector");
  return v;
}

double ProbabilityVector::sum() const { return std::accumulate(p.begin(), p.end(), 0.0); }

bool ProbabilityVector::is_valid(double tol) const {
  for (double x : p)
    if (!std::isfinite(x) || x < -tol) return false;
  return std::abs(sum() - 1.0) <= tol;
}

ProbabilityVector ProbabilityVector::floored(double floor) const {
  ProbabilityVector v = *this;
  for (double& x : v.p) x = std::max(x, floor);
  const double total = v.sum();
  for (double& x : v.p) x /= total;
  return v;
}

double max_abs_difference(const ProbabilityVector& a, const ProbabilityVector& b) {
  double m = 0.0;
  for (int k = 0; k < kNetworks; ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

}  // namespace hhnet
