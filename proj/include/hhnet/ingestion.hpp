#pragma once

// Survey ingestion: turns a contacts diary file and a household roster file
// into egocentric observations for one household composition.
//
// A diary contact counts as a household contact when it happened at home,
// is reported as daily, and its age matches a not-yet-matched co-member of
// the roster. Only each respondent's first diary day is used.

#include <array>
#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hhnet/network.hpp"

namespace hhnet {

enum class AgeCategory { age_0_5, age_6_11, age_12_18, age_19_35, age_36_plus };

// Throws std::invalid_argument for a negative age.
AgeCategory age_category(int age);
std::string_view age_category_label(AgeCategory c);

enum class Location { home, work, school, leisure, transport, other };
enum class ContactFrequency { daily, weekly, monthly, rarely, first_time };
enum class Sex { female, male, unknown };

std::optional<Location> parse_location(std::string_view s);
std::optional<ContactFrequency> parse_frequency(std::string_view s);
std::optional<Sex> parse_sex(std::string_view s);

struct DiaryRecord {
  std::string respondent_id;
  int day_index = 0;
  std::optional<int> contact_age;
  Sex contact_sex = Sex::unknown;
  Location location = Location::other;
  ContactFrequency frequency = ContactFrequency::first_time;
  bool physical = false;
};

struct HouseholdRoster {
  std::string respondent_id;
  int respondent_age = 0;
  Sex respondent_sex = Sex::unknown;
  std::vector<int> member_ages;  // includes the respondent
  std::string survey_date;
};

// The six household compositions. Ages are matched after sorting the four
// members from youngest to oldest.
enum class CompositionType { type1 = 1, type2, type3, type4, type5, type6 };

struct AgeRange {
  int low = 0;
  int high = 0;  // inclusive; kNoUpperAge for open-ended
};
inline constexpr int kNoUpperAge = 1000;

// Age ranges for child 1, child 2, parent 1, parent 2.
std::array<AgeRange, 4> composition_ranges(CompositionType t);
std::optional<CompositionType> parse_composition(std::string_view s);
std::string composition_label(CompositionType t);

struct MatchWarning {
  std::size_t record;  // index into the diary records passed in
  std::string detail;
};

struct ContactMatch {
  // matched[m] is true when roster member m (index into member_ages) was
  // contacted. The respondent's own slot is never matched.
  std::vector<bool> matched;
  // Diary record that produced each match, or -1.
  std::vector<int> matched_record;
  std::size_t respondent_slot = 0;
  std::vector<MatchWarning> warnings;
};

// Assigns qualifying diary records to roster members greedily, smallest age
// gap first, ties to the younger member. Records that look like duplicates
// of one member (same age, sex, location and frequency) collapse to one.
// Throws std::invalid_argument when the respondent's age is not on the roster.
ContactMatch classify_household_contacts(const std::vector<DiaryRecord>& diary,
                                         const HouseholdRoster& roster, int tolerance = 0);

struct Survey {
  std::vector<HouseholdRoster> households;
  std::vector<DiaryRecord> contacts;

  struct RowError {
    std::string file;  // "households" or "contacts"
    int line = 0;
    std::string respondent_id;
    std::string detail;
  };
  std::vector<RowError> row_errors;
  // Household rows, including unparseable ones.
  std::size_t household_rows = 0;
};

// Parses delimited text with a header row. Required columns:
//   contacts:   respondent_id, day_index, contact_age, contact_sex, location, frequency, physical
//   households: respondent_id, respondent_age, respondent_sex, member_ages, weight, survey_date
// member_ages is semicolon-separated. Unparseable rows become row errors;
// a missing column throws InputError.
Survey parse_survey(std::istream& contacts, std::istream& households);
Survey load_survey(const std::filesystem::path& contacts, const std::filesystem::path& households);

struct IngestOptions {
  CompositionType composition = CompositionType::type1;
  int age_tolerance = 0;
};

struct ReportEntry {
  std::string respondent_id;
  std::string reason;
  std::string detail;
};

struct IngestResult {
  std::vector<PartialObservation> observations;
  std::vector<std::string> respondent_ids;  // parallel to observations
  // One per household row that produced no observation.
  std::vector<ReportEntry> exclusions;
  // Informational rows: role fallbacks, ambiguous matches, contact row errors.
  std::vector<ReportEntry> notes;
};

IngestResult build_observations(const Survey& survey, const IngestOptions& options);

}  // namespace hhnet
