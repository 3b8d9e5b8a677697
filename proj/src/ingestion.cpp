#include "hhnet/ingestion.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "hhnet/errors.hpp"

namespace hhnet {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::optional<int> parse_int(std::string_view s) {
  s = trim(s);
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

bool is_missing(std::string_view s) {
  const auto l = lower(trim(s));
  return l.empty() || l == "na" || l == "nan" || l == ".";
}

class Table {
 public:
  Table(std::istream& in, std::string name, std::vector<std::string> required) : name_(std::move(name)) {
    std::string header;
    while (std::getline(in, header)) {
      if (!trim(header).empty() && trim(header).front() != '#') break;
      header.clear();
    }
    if (trim(header).empty()) return;
    const auto cols = split(header, ',');
    for (std::size_t i = 0; i < cols.size(); ++i) index_[lower(cols[i])] = i;
    for (const auto& col : required)
      if (!index_.count(col))
        throw InputError(name_ + " file is missing required column '" + col + "'");
    int line_no = 1;
    std::string line;
    while (std::getline(in, line)) {
      ++line_no;
      if (trim(line).empty() || trim(line).front() == '#') continue;
      rows_.push_back({line_no, line});
    }
  }

  struct Row {
    int line;
    std::string text;
  };
  const std::vector<Row>& rows() const { return rows_; }
  std::size_t column(const std::string& name) const { return index_.at(name); }

 private:
  std::string name_;
  std::map<std::string, std::size_t> index_;
  std::vector<Row> rows_;
};

std::string field(const std::vector<std::string_view>& cells, std::size_t col) {
  if (col >= cells.size()) throw std::invalid_argument("row has too few fields");
  return std::string(cells[col]);
}

DiaryRecord parse_contact(const std::vector<std::string_view>& cells, const Table& t) {
  DiaryRecord rec;
  rec.respondent_id = field(cells, t.column("respondent_id"));
  if (rec.respondent_id.empty()) throw std::invalid_argument("empty respondent_id");
  const auto day = parse_int(field(cells, t.column("day_index")));
  if (!day) throw std::invalid_argument("day_index is not an integer");
  rec.day_index = *day;
  const auto age_text = field(cells, t.column("contact_age"));
  if (!is_missing(age_text)) {
    const auto age = parse_int(age_text);
    if (!age || *age < 0) throw std::invalid_argument("contact_age must be a nonnegative integer");
    rec.contact_age = age;
  }
  const auto sex = parse_sex(field(cells, t.column("contact_sex")));
  if (!sex) throw std::invalid_argument("unrecognised contact_sex");
  rec.contact_sex = *sex;
  const auto loc = parse_location(field(cells, t.column("location")));
  if (!loc) throw std::invalid_argument("unrecognised location");
  rec.location = *loc;
  const auto freq = parse_frequency(field(cells, t.column("frequency")));
  if (!freq) throw std::invalid_argument("unrecognised frequency");
  rec.frequency = *freq;
  const auto phys = lower(field(cells, t.column("physical")));
  if (phys == "1" || phys == "true" || phys == "yes" || phys == "y")
    rec.physical = true;
  else if (phys == "0" || phys == "false" || phys == "no" || phys == "n" || is_missing(phys))
    rec.physical = false;
  else
    throw std::invalid_argument("unrecognised physical flag");
  return rec;
}

HouseholdRoster parse_household(const std::vector<std::string_view>& cells, const Table& t) {
  HouseholdRoster h;
  h.respondent_id = field(cells, t.column("respondent_id"));
  if (h.respondent_id.empty()) throw std::invalid_argument("empty respondent_id");
  const auto age = parse_int(field(cells, t.column("respondent_age")));
  if (!age || *age < 0) throw std::invalid_argument("respondent_age must be a nonnegative integer");
  h.respondent_age = *age;
  const auto sex = parse_sex(field(cells, t.column("respondent_sex")));
  if (!sex) throw std::invalid_argument("unrecognised respondent_sex");
  h.respondent_sex = *sex;
  const auto members = field(cells, t.column("member_ages"));
  if (trim(members).empty()) throw std::invalid_argument("member_ages is empty");
  for (auto part : split(members, ';')) {
    const auto a = parse_int(part);
    if (!a || *a < 0) throw std::invalid_argument("member_ages entries must be nonnegative integers");
    h.member_ages.push_back(*a);
  }
  h.survey_date = field(cells, t.column("survey_date"));
  return h;
}

bool in_range(int age, AgeRange r) { return age >= r.low && age <= r.high; }

}  // namespace

AgeCategory age_category(int age) {
  if (age < 0) throw std::invalid_argument("age must be nonnegative");
  if (age <= 5) return AgeCategory::age_0_5;
  if (age <= 11) return AgeCategory::age_6_11;
  if (age <= 18) return AgeCategory::age_12_18;
  if (age <= 35) return AgeCategory::age_19_35;
  return AgeCategory::age_36_plus;
}

std::string_view age_category_label(AgeCategory c) {
  switch (c) {
    case AgeCategory::age_0_5: return "0-5";
    case AgeCategory::age_6_11: return "6-11";
    case AgeCategory::age_12_18: return "12-18";
    case AgeCategory::age_19_35: return "19-35";
    case AgeCategory::age_36_plus: return "36+";
  }
  return "?";
}

std::optional<Location> parse_location(std::string_view s) {
  const auto l = lower(trim(s));
  if (l == "home" || l == "1") return Location::home;
  if (l == "work" || l == "2") return Location::work;
  if (l == "school" || l == "3") return Location::school;
  if (l == "leisure" || l == "4") return Location::leisure;
  if (l == "transport" || l == "5") return Location::transport;
  if (l == "other" || l == "6") return Location::other;
  return std::nullopt;
}

std::optional<ContactFrequency> parse_frequency(std::string_view s) {
  const auto l = lower(trim(s));
  if (l == "daily" || l == "1") return ContactFrequency::daily;
  if (l == "weekly" || l == "2") return ContactFrequency::weekly;
  if (l == "monthly" || l == "3") return ContactFrequency::monthly;
  if (l == "rarely" || l == "4") return ContactFrequency::rarely;
  if (l == "first_time" || l == "5") return ContactFrequency::first_time;
  return std::nullopt;
}

std::optional<Sex> parse_sex(std::string_view s) {
  const auto l = lower(trim(s));
  if (l == "f" || l == "female") return Sex::female;
  if (l == "m" || l == "male") return Sex::male;
  if (is_missing(l) || l == "u" || l == "unknown") return Sex::unknown;
  return std::nullopt;
}

std::array<AgeRange, 4> composition_ranges(CompositionType t) {
  constexpr AgeRange young{0, 5}, school{6, 11}, teen{12, 18}, young_adult{19, 35};
  constexpr AgeRange adult{19, kNoUpperAge}, older{36, kNoUpperAge};
  switch (t) {
    case CompositionType::type1: return {young, young, adult, adult};
    case CompositionType::type2: return {young, school, adult, adult};
    case CompositionType::type3: return {school, school, adult, adult};
    case CompositionType::type4: return {teen, teen, older, older};
    case CompositionType::type5: return {teen, young_adult, older, older};
    case CompositionType::type6: return {young_adult, young_adult, older, older};
  }
  throw std::invalid_argument("unknown composition type");
}

std::optional<CompositionType> parse_composition(std::string_view s) {
  auto l = lower(trim(s));
  if (l.rfind("type", 0) == 0) l = l.substr(4);
  const auto v = parse_int(l);
  if (!v || *v < 1 || *v > 6) return std::nullopt;
  return static_cast<CompositionType>(*v);
}

std::string composition_label(CompositionType t) {
  return "type" + std::to_string(static_cast<int>(t));
}

ContactMatch classify_household_contacts(const std::vector<DiaryRecord>& diary,
                                         const HouseholdRoster& roster, int tolerance) {
  if (tolerance < 0) throw std::invalid_argument("age tolerance must be nonnegative");
  const auto& ages = roster.member_ages;
  const auto self = std::find(ages.begin(), ages.end(), roster.respondent_age);
  if (self == ages.end())
    throw std::invalid_argument("respondent age " + std::to_string(roster.respondent_age) +
                                " is not among the household member ages");

  ContactMatch out;
  out.respondent_slot = static_cast<std::size_t>(self - ages.begin());
  out.matched.assign(ages.size(), false);
  out.matched_record.assign(ages.size(), -1);

  // Qualifying records, with repeats of the same apparent member collapsed.
  std::vector<std::size_t> records;
  std::set<std::tuple<int, Sex>> seen;
  for (std::size_t r = 0; r < diary.size(); ++r) {
    const auto& rec = diary[r];
    if (rec.location != Location::home || rec.frequency != ContactFrequency::daily || !rec.contact_age)
      continue;
    if (!seen.insert({*rec.contact_age, rec.contact_sex}).second) {
      out.warnings.push_back({r, "duplicate of an earlier home/daily contact aged " +
                                     std::to_string(*rec.contact_age) + "; collapsed"});
      continue;
    }
    records.push_back(r);
  }

  struct Candidate {
    int gap;
    int member_age;
    std::size_t member;
    std::size_t record;
  };
  std::vector<Candidate> candidates;
  for (std::size_t r : records)
    for (std::size_t m = 0; m < ages.size(); ++m) {
      if (m == out.respondent_slot) continue;
      const int gap = std::abs(*diary[r].contact_age - ages[m]);
      if (gap <= tolerance) candidates.push_back({gap, ages[m], m, r});
    }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    return std::tie(a.gap, a.member_age, a.member, a.record) <
           std::tie(b.gap, b.member_age, b.member, b.record);
  });

  std::vector<bool> record_used(diary.size(), false);
  for (const auto& c : candidates) {
    if (record_used[c.record] || out.matched[c.member]) continue;
    for (const auto& other : candidates)
      if (other.record == c.record && other.member != c.member && other.gap == c.gap &&
          !out.matched[other.member]) {
        out.warnings.push_back({c.record, "contact aged " + std::to_string(*diary[c.record].contact_age) +
                                              " matches several members equally; took the younger"});
        break;
      }
    record_used[c.record] = true;
    out.matched[c.member] = true;
    out.matched_record[c.member] = static_cast<int>(c.record);
  }
  return out;
}

Survey parse_survey(std::istream& contacts, std::istream& households) {
  Survey survey;
  const Table ct(contacts, "contacts",
                 {"respondent_id", "day_index", "contact_age", "contact_sex", "location", "frequency",
                  "physical"});
  const Table ht(households, "households",
                 {"respondent_id", "respondent_age", "respondent_sex", "member_ages", "weight",
                  "survey_date"});
  for (const auto& row : ct.rows()) {
    const auto cells = split(row.text, ',');
    try {
      survey.contacts.push_back(parse_contact(cells, ct));
    } catch (const std::invalid_argument& e) {
      survey.row_errors.push_back({"contacts", row.line, cells.empty() ? "" : std::string(cells[0]), e.what()});
    }
  }
  for (const auto& row : ht.rows()) {
    ++survey.household_rows;
    const auto cells = split(row.text, ',');
    try {
      survey.households.push_back(parse_household(cells, ht));
    } catch (const std::invalid_argument& e) {
      survey.row_errors.push_back({"households", row.line, cells.empty() ? "" : std::string(cells[0]), e.what()});
    }
  }
  return survey;
}

Survey load_survey(const std::filesystem::path& contacts, const std::filesystem::path& households) {
  std::ifstream c(contacts);
  if (!c) throw InputError("cannot read contacts file " + contacts.string());
  std::ifstream h(households);
  if (!h) throw InputError("cannot read households file " + households.string());
  return parse_survey(c, h);
}

IngestResult build_observations(const Survey& survey, const IngestOptions& options) {
  IngestResult out;
  for (const auto& err : survey.row_errors) {
    const std::string where = err.file + " line " + std::to_string(err.line) + ": " + err.detail;
    if (err.file == "households")
      out.exclusions.push_back({err.respondent_id, "parse", where});
    else
      out.notes.push_back({err.respondent_id, "contact_parse", where});
  }

  std::map<std::string, std::vector<const DiaryRecord*>> diaries;
  for (const auto& rec : survey.contacts) diaries[rec.respondent_id].push_back(&rec);

  const auto ranges = composition_ranges(options.composition);
  std::set<std::string> seen_ids;
  for (const auto& hh : survey.households) {
    const auto& id = hh.respondent_id;
    if (!seen_ids.insert(id).second) {
      out.exclusions.push_back({id, "duplicate_respondent", "respondent_id appears more than once in the households file"});
      continue;
    }
    if (hh.member_ages.size() != 4) {
      out.exclusions.push_back({id, "size", "household has " + std::to_string(hh.member_ages.size()) + " members"});
      continue;
    }
    if (std::find(hh.member_ages.begin(), hh.member_ages.end(), hh.respondent_age) == hh.member_ages.end()) {
      out.exclusions.push_back({id, "respondent_age", "respondent age " + std::to_string(hh.respondent_age) +
                                                          " not among member ages"});
      continue;
    }

    // Members youngest first; equal ages keep their listed order.
    std::array<std::size_t, 4> order{0, 1, 2, 3};
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return hh.member_ages[a] < hh.member_ages[b]; });
    bool fits = true;
    for (int s = 0; s < 4; ++s) fits = fits && in_range(hh.member_ages[order[s]], ranges[s]);
    if (!fits) {
      out.exclusions.push_back({id, "composition", "ages do not match " + composition_label(options.composition)});
      continue;
    }

    // First diary day only.
    std::vector<DiaryRecord> diary;
    if (auto it = diaries.find(id); it != diaries.end()) {
      int first = it->second.front()->day_index;
      for (const auto* rec : it->second) first = std::min(first, rec->day_index);
      for (const auto* rec : it->second)
        if (rec->day_index == first) diary.push_back(*rec);
    }
    const auto match = classify_household_contacts(diary, hh, options.age_tolerance);
    for (const auto& w : match.warnings) out.notes.push_back({id, "ambiguous_match", w.detail});

    // Slot -> role. Children by age; adults by sex where known.
    std::array<Role, 4> role_of{};
    role_of[order[0]] = Role::C1;
    role_of[order[1]] = Role::C2;
    const std::array<std::size_t, 2> adults{order[2], order[3]};
    std::array<Sex, 2> adult_sex{Sex::unknown, Sex::unknown};
    for (int a = 0; a < 2; ++a) {
      const auto m = adults[a];
      if (m == match.respondent_slot)
        adult_sex[a] = hh.respondent_sex;
      else if (match.matched_record[m] >= 0)
        adult_sex[a] = diary[static_cast<std::size_t>(match.matched_record[m])].contact_sex;
    }
    const auto s0 = adult_sex[0];
    const auto s1 = adult_sex[1];
    bool first_female = true;
    if (s0 == Sex::female && s1 != Sex::female)
      first_female = true;
    else if (s1 == Sex::female && s0 != Sex::female)
      first_female = false;
    else if (s0 == Sex::male && s1 != Sex::male)
      first_female = false;
    else if (s1 == Sex::male && s0 != Sex::male)
      first_female = true;
    else
      out.notes.push_back({id, "role_fallback",
                           s0 == Sex::unknown ? "adult sexes unknown; younger adult taken as A1"
                                              : "both adults have the same sex; younger adult taken as A1"});
    role_of[adults[0]] = first_female ? Role::A1 : Role::A2;
    role_of[adults[1]] = first_female ? Role::A2 : Role::A1;

    const Role respondent = role_of[match.respondent_slot];
    std::vector<PartialObservation::Report> reports;
    for (std::size_t m = 0; m < 4; ++m) {
      if (m == match.respondent_slot) continue;
      reports.push_back({dyad_between(respondent, role_of[m]), static_cast<bool>(match.matched[m])});
    }
    out.observations.emplace_back(respondent, reports);
    out.respondent_ids.push_back(id);
  }
  return out;
}

}  // namespace hhnet
