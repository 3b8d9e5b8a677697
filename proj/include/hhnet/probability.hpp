#pragma once

#include <array>
#include <span>

#include "hhnet/network.hpp"

namespace hhnet {

// A distribution over the 64 household networks.
struct ProbabilityVector {
  std::array<double, kNetworks> p{};

  static ProbabilityVector uniform();
  static ProbabilityVector point_mass(int network);
  // Copies 64 values, throwing std::invalid_argument if they are not a
  // distribution within `tol`.
  static ProbabilityVector from(std::span<const double> values, double tol = 1e-10);

  double operator[](int k) const { return p[k]; }
  double& operator[](int k) { return p[k]; }

  double sum() const;
  bool is_valid(double tol = 1e-10) const;

  // Raises every entry to at least `floor` and renormalizes.
  ProbabilityVector floored(double floor) const;

  friend bool operator==(const ProbabilityVector&, const ProbabilityVector&) = default;
};

double max_abs_difference(const ProbabilityVector& a, const ProbabilityVector& b);

}  // namespace hhnet
