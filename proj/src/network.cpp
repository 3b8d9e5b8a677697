#include "hhnet/network.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace hhnet {

namespace {

constexpr std::array<std::array<Role, 2>, kDyads> kEndpoints{{
    {Role::C1, Role::C2},
    {Role::C1, Role::A1},
    {Role::C1, Role::A2},
    {Role::C2, Role::A1},
    {Role::C2, Role::A2},
    {Role::A1, Role::A2},
}};

constexpr std::array<std::string_view, kRoles> kRoleNames{"C1", "C2", "A1", "A2"};
constexpr std::array<std::string_view, kDyads> kDyadNames{"C1C2", "C1A1", "C1A2",
                                                         "C2A1", "C2A2", "A1A2"};
constexpr std::array<std::string_view, kDyads> kDyadLabels{"c1-c2", "c1-m", "c1-d",
                                                          "c2-m",  "c2-d", "m-d"};

Role permute(Relabeling g, Role r) {
  const bool swap_c = g == Relabeling::swap_children || g == Relabeling::swap_both;
  const bool swap_a = g == Relabeling::swap_adults || g == Relabeling::swap_both;
  switch (r) {
    case Role::C1: return swap_c ? Role::C2 : Role::C1;
    case Role::C2: return swap_c ? Role::C1 : Role::C2;
    case Role::A1: return swap_a ? Role::A2 : Role::A1;
    case Role::A2: return swap_a ? Role::A1 : Role::A2;
  }
  return r;
}

}  // namespace

std::string_view role_name(Role r) { return kRoleNames[to_int(r)]; }

std::optional<Role> parse_role(std::string_view name) {
  for (Role r : kAllRoles)
    if (kRoleNames[to_int(r)] == name) return r;
  return std::nullopt;
}

std::string_view dyad_label(Dyad d) { return kDyadLabels[to_int(d)]; }
std::string_view dyad_name(Dyad d) { return kDyadNames[to_int(d)]; }

Dyad dyad_between(Role a, Role b) {
  if (a == b) throw std::invalid_argument("dyad_between: a role has no dyad with itself");
  if (to_int(a) > to_int(b)) std::swap(a, b);
  for (Dyad d : kAllDyads)
    if (kEndpoints[to_int(d)][0] == a && kEndpoints[to_int(d)][1] == b) return d;
  throw std::logic_error("dyad_between: unreachable");
}

std::array<Role, 2> dyad_endpoints(Dyad d) { return kEndpoints[to_int(d)]; }

NetworkIndex::NetworkIndex(int k) : k_(k) {
  if (k < 0 || k >= kNetworks)
    throw std::out_of_range("network index " + std::to_string(k) + " outside 0..63");
}

DyadVector index_to_vector(NetworkIndex k) {
  DyadVector z{};
  for (int j = 0; j < kDyads; ++j) z[j] = static_cast<std::uint8_t>((k.value() >> j) & 1);
  return z;
}

NetworkIndex vector_to_index(const DyadVector& z) {
  int k = 0;
  for (int j = 0; j < kDyads; ++j) {
    if (z[j] > 1) throw std::invalid_argument("dyad vector entries must be 0 or 1");
    k |= z[j] << j;
  }
  return NetworkIndex{k};
}

std::array<Dyad, 3> incident_dyads(Role r) {
  std::array<Dyad, 3> out{};
  int n = 0;
  for (Dyad d : kAllDyads) {
    const auto& e = kEndpoints[to_int(d)];
    if (e[0] == r || e[1] == r) out[n++] = d;
  }
  return out;
}

PartialObservation::PartialObservation(Role respondent, std::span<const Report> reports)
    : respondent_(respondent) {
  std::uint8_t required = 0;
  for (Dyad d : incident_dyads(respondent)) required |= std::uint8_t(1u << to_int(d));
  for (const Report& rep : reports) {
    const auto bit = std::uint8_t(1u << to_int(rep.dyad));
    if (!(required & bit))
      throw std::invalid_argument(std::string("dyad ") + std::string(dyad_name(rep.dyad)) +
                                  " is not incident to respondent " +
                                  std::string(role_name(respondent)));
    if (mask_ & bit)
      throw std::invalid_argument(std::string("duplicate report on dyad ") +
                                  std::string(dyad_name(rep.dyad)));
    mask_ |= bit;
    if (rep.contact) bits_ |= bit;
  }
  if (mask_ != required)
    throw std::invalid_argument("a report must cover exactly the three incident dyads of " +
                                std::string(role_name(respondent)));
}

PartialObservation::PartialObservation(Role respondent, std::initializer_list<Report> reports)
    : PartialObservation(respondent, std::span<const Report>(reports.begin(), reports.size())) {}

PartialObservation PartialObservation::from_pattern(Role respondent, int pattern) {
  if (pattern < 0 || pattern >= kPatternsPerRole)
    throw std::out_of_range("report pattern outside 0..7");
  const auto dyads = incident_dyads(respondent);
  std::array<Report, 3> reports{};
  for (int i = 0; i < 3; ++i) reports[i] = {dyads[i], ((pattern >> i) & 1) != 0};
  return PartialObservation(respondent, reports);
}

PartialObservation PartialObservation::from_configuration(int configuration) {
  if (configuration < 0 || configuration >= kConfigurations)
    throw std::out_of_range("configuration id outside 0..31");
  return from_pattern(static_cast<Role>(configuration / kPatternsPerRole),
                      configuration % kPatternsPerRole);
}

std::optional<bool> PartialObservation::report(Dyad d) const {
  const auto bit = std::uint8_t(1u << to_int(d));
  if (!(mask_ & bit)) return std::nullopt;
  return (bits_ & bit) != 0;
}

int PartialObservation::pattern() const {
  const auto dyads = incident_dyads(respondent_);
  int pattern = 0;
  for (int i = 0; i < 3; ++i)
    if (bits_ & (1u << to_int(dyads[i]))) pattern |= 1 << i;
  return pattern;
}

bool is_consistent(NetworkIndex k, const PartialObservation& obs) {
  return (k.value() & obs.observed_mask()) == obs.observed_bits();
}

std::array<int, 8> consistent_networks(const PartialObservation& obs) {
  std::array<int, 8> out{};
  int n = 0;
  for (int k = 0; k < kNetworks; ++k)
    if ((k & obs.observed_mask()) == obs.observed_bits()) out[n++] = k;
  return out;
}

int distinct_configurations() { return kRoles * (1 << 3); }

std::vector<PartialObservation> all_configurations() {
  std::vector<PartialObservation> out;
  out.reserve(kConfigurations);
  for (int c = 0; c < kConfigurations; ++c) out.push_back(PartialObservation::from_configuration(c));
  return out;
}

int apply_relabeling(Relabeling g, int network) {
  int out = 0;
  for (Dyad d : kAllDyads) {
    if (!((network >> to_int(d)) & 1)) continue;
    const auto& e = kEndpoints[to_int(d)];
    out |= 1 << to_int(dyad_between(permute(g, e[0]), permute(g, e[1])));
  }
  return out;
}

std::vector<std::vector<int>> exchangeability_orbits() {
  constexpr std::array<Relabeling, 4> group{Relabeling::identity, Relabeling::swap_children,
                                            Relabeling::swap_adults, Relabeling::swap_both};
  std::array<bool, kNetworks> seen{};
  std::vector<std::vector<int>> orbits;
  for (int k = 0; k < kNetworks; ++k) {
    if (seen[k]) continue;
    std::vector<int> orbit;
    for (Relabeling g : group) {
      const int image = apply_relabeling(g, k);
      if (!seen[image]) {
        seen[image] = true;
        orbit.push_back(image);
      }
    }
    std::sort(orbit.begin(), orbit.end());
    orbits.push_back(std::move(orbit));
  }
  return orbits;
}

std::array<int, kNetworks> orbit_ids() {
  std::array<int, kNetworks> ids{};
  const auto orbits = exchangeability_orbits();
  for (std::size_t o = 0; o < orbits.size(); ++o)
    for (int k : orbits[o]) ids[k] = static_cast<int>(o);
  return ids;
}

std::vector<std::array<int, 2>> adjacent_pairs() {
  std::vector<std::array<int, 2>> pairs;
  for (int i = 0; i < kNetworks; ++i)
    for (int j = 0; j < kDyads; ++j) {
      const int other = i ^ (1 << j);
      if (other > i) pairs.push_back({i, other});
    }
  std::sort(pairs.begin(), pairs.end());
  return pairs;
}

std::vector<std::array<int, 2>> exchangeable_pairs() {
  std::vector<std::array<int, 2>> pairs;
  for (const auto& orbit : exchangeability_orbits())
    for (std::size_t a = 0; a < orbit.size(); ++a)
      for (std::size_t b = a + 1; b < orbit.size(); ++b) pairs.push_back({orbit[a], orbit[b]});
  std::sort(pairs.begin(), pairs.end());
  return pairs;
}

int ConfigurationCounts::total() const {
  int n = 0;
  for (int c : count) n += c;
  return n;
}

ConfigurationCounts ConfigurationCounts::from(std::span<const PartialObservation> data) {
  ConfigurationCounts out;
  for (const auto& obs : data) ++out.count[obs.configuration()];
  return out;
}

}  // namespace hhnet
