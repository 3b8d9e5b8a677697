#pragma once

// Encoding of four-person household contact networks.
//
// A network is six binary dyads in the fixed order
//   C1C2, C1A1, C1A2, C2A1, C2A2, A1A2
// (younger child, older child, female adult, male adult). The integer code
// of a network sets bit j when dyad j carries a contact, so network 5 is
// C1C2 + C1A2 and network 63 is the complete network.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hhnet {

inline constexpr int kRoles = 4;
inline constexpr int kDyads = 6;
inline constexpr int kNetworks = 64;
inline constexpr int kPatternsPerRole = 8;
inline constexpr int kConfigurations = kRoles * kPatternsPerRole;

enum class Role : std::uint8_t { C1 = 0, C2 = 1, A1 = 2, A2 = 3 };

enum class Dyad : std::uint8_t { C1C2 = 0, C1A1 = 1, C1A2 = 2, C2A1 = 3, C2A2 = 4, A1A2 = 5 };

inline constexpr std::array<Role, kRoles> kAllRoles{Role::C1, Role::C2, Role::A1, Role::A2};
inline constexpr std::array<Dyad, kDyads> kAllDyads{Dyad::C1C2, Dyad::C1A1, Dyad::C1A2,
                                                   Dyad::C2A1, Dyad::C2A2, Dyad::A1A2};

constexpr int to_int(Role r) { return static_cast<int>(r); }
constexpr int to_int(Dyad d) { return static_cast<int>(d); }

std::string_view role_name(Role r);
std::optional<Role> parse_role(std::string_view name);

// Column label used in reports, e.g. "c1-m" for C1A1.
std::string_view dyad_label(Dyad d);
std::string_view dyad_name(Dyad d);

Dyad dyad_between(Role a, Role b);
std::array<Role, 2> dyad_endpoints(Dyad d);

// Network code 0..63. Construction validates the range.
class NetworkIndex {
 public:
  explicit NetworkIndex(int k);
  int value() const { return k_; }
  friend bool operator==(NetworkIndex, NetworkIndex) = default;

 private:
  int k_;
};

using DyadVector = std::array<std::uint8_t, kDyads>;

DyadVector index_to_vector(NetworkIndex k);
NetworkIndex vector_to_index(const DyadVector& z);

// Dyads touching the respondent, in increasing dyad order.
std::array<Dyad, 3> incident_dyads(Role r);

// One respondent's report on the three dyads it is incident to.
class PartialObservation {
 public:
  struct Report {
    Dyad dyad;
    bool contact;
  };

  // Throws std::invalid_argument unless `reports` covers exactly the three
  // incident dyads of `respondent`, each once.
  PartialObservation(Role respondent, std::span<const Report> reports);
  PartialObservation(Role respondent, std::initializer_list<Report> reports);

  // Pattern bit i holds the report on incident_dyads(respondent)[i].
  static PartialObservation from_pattern(Role respondent, int pattern);
  static PartialObservation from_configuration(int configuration);

  Role respondent() const { return respondent_; }
  std::optional<bool> report(Dyad d) const;
  int pattern() const;
  // role * 8 + pattern, in 0..31.
  int configuration() const { return to_int(respondent_) * kPatternsPerRole + pattern(); }

  // Bit masks over the network code: which dyads are observed and their values.
  std::uint8_t observed_mask() const { return mask_; }
  std::uint8_t observed_bits() const { return bits_; }

  friend bool operator==(const PartialObservation&, const PartialObservation&) = default;

 private:
  PartialObservation() = default;
  Role respondent_{Role::C1};
  std::uint8_t mask_{0};
  std::uint8_t bits_{0};
};

bool is_consistent(NetworkIndex k, const PartialObservation& obs);

// Networks agreeing with every report of `obs`; always 8 of them, ascending.
std::array<int, 8> consistent_networks(const PartialObservation& obs);

// Number of (respondent role, report pattern) pairs.
int distinct_configurations();

// Every distinct PartialObservation, ordered by configuration id.
std::vector<PartialObservation> all_configurations();

// Relabelings of the household that keep role types: swap the children,
// swap the adults, or both.
enum class Relabeling : std::uint8_t { identity, swap_children, swap_adults, swap_both };

int apply_relabeling(Relabeling g, int network);

// Orbits of networks under the relabeling group, each sorted, ordered by
// smallest member.
std::vector<std::vector<int>> exchangeability_orbits();

// orbit_id[k] is the position of k's orbit in exchangeability_orbits().
std::array<int, kNetworks> orbit_ids();

// Unordered pairs of networks whose dyad vectors differ in exactly one place.
std::vector<std::array<int, 2>> adjacent_pairs();

// Unordered pairs of distinct networks lying in the same exchangeability orbit.
std::vector<std::array<int, 2>> exchangeable_pairs();

// Per-configuration tallies of a data list. The likelihood depends on the
// data only through these counts.
struct ConfigurationCounts {
  std::array<int, kConfigurations> count{};
  int total() const;
  static ConfigurationCounts from(std::span<const PartialObservation> data);
};

}  // namespace hhnet
