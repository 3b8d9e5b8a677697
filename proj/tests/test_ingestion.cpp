#include <doctest.h>

#include <sstream>

#include "hhnet/errors.hpp"
#include "hhnet/ingestion.hpp"

using namespace hhnet;

namespace {

DiaryRecord contact(int age, Location loc = Location::home, ContactFrequency f = ContactFrequency::daily,
                    Sex sex = Sex::unknown) {
  DiaryRecord r;
  r.respondent_id = "r";
  r.contact_age = age;
  r.location = loc;
  r.frequency = f;
  r.contact_sex = sex;
  return r;
}

HouseholdRoster roster(int respondent_age, std::vector<int> ages, Sex sex = Sex::unknown) {
  HouseholdRoster h;
  h.respondent_id = "r";
  h.respondent_age = respondent_age;
  h.respondent_sex = sex;
  h.member_ages = std::move(ages);
  return h;
}

const char* kContactsHeader = "respondent_id,day_index,contact_age,contact_sex,location,frequency,physical\n";
const char* kHouseholdsHeader = "respondent_id,respondent_age,respondent_sex,member_ages,weight,survey_date\n";

IngestResult ingest(const std::string& contacts, const std::string& households,
                    CompositionType type = CompositionType::type1, int tolerance = 0) {
  std::istringstream c(kContactsHeader + contacts);
  std::istringstream h(kHouseholdsHeader + households);
  return build_observations(parse_survey(c, h), {type, tolerance});
}

}  // namespace

TEST_CASE("age categories") {
  CHECK(age_category(5) == AgeCategory::age_0_5);
  CHECK(age_category(6) == AgeCategory::age_6_11);
  CHECK(age_category(0) == AgeCategory::age_0_5);
  CHECK(age_category(11) == AgeCategory::age_6_11);
  CHECK(age_category(12) == AgeCategory::age_12_18);
  CHECK(age_category(18) == AgeCategory::age_12_18);
  CHECK(age_category(19) == AgeCategory::age_19_35);
  CHECK(age_category(35) == AgeCategory::age_19_35);
  CHECK(age_category(36) == AgeCategory::age_36_plus);
  CHECK(age_category(99) == AgeCategory::age_36_plus);
  CHECK_THROWS_AS(age_category(-1), std::invalid_argument);
  CHECK(age_category_label(AgeCategory::age_36_plus) == "36+");
}

TEST_CASE("composition table") {
  const auto t1 = composition_ranges(CompositionType::type1);
  CHECK(t1[0].low == 0);
  CHECK(t1[0].high == 5);
  CHECK(t1[2].low == 19);
  CHECK(t1[3].high == kNoUpperAge);
  const auto t5 = composition_ranges(CompositionType::type5);
  CHECK(t5[0].low == 12);
  CHECK(t5[1].low == 19);
  CHECK(t5[1].high == 35);
  CHECK(t5[2].low == 36);
  CHECK(parse_composition("type4") == CompositionType::type4);
  CHECK(parse_composition("6") == CompositionType::type6);
  CHECK_FALSE(parse_composition("type7").has_value());
  CHECK(composition_label(CompositionType::type2) == "type2");
}

TEST_CASE("household contact classification") {
  SUBCASE("exact age match") {
    const auto m = classify_household_contacts({contact(4)}, roster(34, {4, 7, 34, 36}));
    CHECK(m.matched == std::vector<bool>{true, false, false, false});
    CHECK(m.matched_record[0] == 0);
    CHECK(m.respondent_slot == 2);
  }
  SUBCASE("only home, daily contacts count") {
    const auto m = classify_household_contacts(
        {contact(34, Location::work), contact(4, Location::home, ContactFrequency::weekly)},
        roster(36, {4, 7, 34, 36}));
    CHECK(m.matched == std::vector<bool>(4, false));
  }
  SUBCASE("greedy by smallest gap") {
    const auto m = classify_household_contacts({contact(35), contact(36)}, roster(2, {2, 4, 34, 36}), 1);
    CHECK(m.matched == std::vector<bool>{false, false, true, true});
    CHECK(m.matched_record[3] == 1);  // 36 -> 36
    CHECK(m.matched_record[2] == 0);  // 35 -> 34
  }
  SUBCASE("without tolerance an off-by-one age does not match") {
    const auto m = classify_household_contacts({contact(35)}, roster(2, {2, 4, 34, 36}));
    CHECK(m.matched == std::vector<bool>(4, false));
  }
  SUBCASE("ties go to the younger member with a warning") {
    const auto m = classify_household_contacts({contact(31)}, roster(2, {2, 4, 30, 32}), 1);
    CHECK(m.matched == std::vector<bool>{false, false, true, false});
    CHECK(m.warnings.size() == 1);
  }
  SUBCASE("the respondent never matches itself") {
    const auto m = classify_household_contacts({contact(34), contact(34)}, roster(34, {4, 7, 34, 36}));
    CHECK(m.matched == std::vector<bool>(4, false));
  }
  SUBCASE("two members of the respondent's age") {
    const auto m = classify_household_contacts({contact(3)}, roster(3, {3, 3, 30, 31}));
    CHECK(m.respondent_slot == 0);
    CHECK(m.matched == std::vector<bool>{false, true, false, false});
  }
  SUBCASE("repeated rows for one member collapse") {
    const auto m = classify_household_contacts({contact(4), contact(4)}, roster(34, {4, 4, 34, 36}));
    CHECK(m.matched == std::vector<bool>{true, false, false, false});
    // One warning for the collapsed row, one for the tie between the twins.
    CHECK(m.warnings.size() == 2);
  }
  SUBCASE("at most members minus one matches") {
    std::vector<DiaryRecord> many;
    for (int a : {1, 2, 3, 4, 30, 31, 32, 33}) many.push_back(contact(a));
    const auto m = classify_household_contacts(many, roster(30, {1, 2, 30, 33}), 3);
    CHECK(std::count(m.matched.begin(), m.matched.end(), true) == 3);
  }
  SUBCASE("missing ages never match") {
    auto r = contact(0);
    r.contact_age.reset();
    const auto m = classify_household_contacts({r}, roster(30, {0, 2, 30, 33}));
    CHECK(m.matched == std::vector<bool>(4, false));
  }
  CHECK_THROWS_AS(classify_household_contacts({}, roster(50, {1, 2, 30, 33})), std::invalid_argument);
}

TEST_CASE("building observations from survey files") {
  SUBCASE("thirty qualifying households") {
    std::string contacts, households;
    for (int i = 0; i < 30; ++i) {
      const std::string id = "h" + std::to_string(i);
      households += id + ",30,F,1;3;30;32,1.0,2006-03-01\n";
      if (i % 2 == 0) contacts += id + ",1,3,M,home,daily,1\n";
      if (i % 3 == 0) contacts += id + ",1,32,M,home,daily,0\n";
    }
    households += "small,30,F,1;30;32,1.0,2006-03-01\n";
    households += "teen,40,F,13;15;40;42,1.0,2006-03-01\n";
    const auto res = ingest(contacts, households);
    CHECK(res.observations.size() == 30);
    REQUIRE(res.exclusions.size() == 2);
    CHECK(res.exclusions[0].respondent_id == "small");
    CHECK(res.exclusions[0].reason == "size");
    CHECK(res.exclusions[1].reason == "composition");
    for (const auto& obs : res.observations) CHECK(obs.respondent() == Role::A1);
    // h0: contacts with the 3-year-old (C2) and the 32-year-old (A2).
    CHECK(res.observations[0].report(Dyad::C1A1) == false);
    CHECK(res.observations[0].report(Dyad::C2A1) == true);
    CHECK(res.observations[0].report(Dyad::A1A2) == true);
    // h1: nothing reported.
    CHECK(res.observations[1].pattern() == 0);
    // Same input, same output.
    const auto again = ingest(contacts, households);
    CHECK(again.observations == res.observations);
    CHECK(again.respondent_ids == res.respondent_ids);
  }
  SUBCASE("only the first diary day is used") {
    const auto res = ingest("a,2,3,F,home,daily,1\na,1,1,F,home,daily,1\n", "a,30,F,1;3;30;32,1,x\n");
    REQUIRE(res.observations.size() == 1);
    CHECK(res.observations[0].report(Dyad::C1A1) == true);
    CHECK(res.observations[0].report(Dyad::C2A1) == false);
  }
  SUBCASE("adult roles follow sex") {
    // Respondent is the younger adult but male, so the older adult is A1.
    auto res = ingest("", "a,30,M,1;3;30;32,1,x\n");
    CHECK(res.observations[0].respondent() == Role::A2);
    CHECK(res.notes.empty());
    // A matched female contact fixes the other adult as A2.
    res = ingest("a,1,32,F,home,daily,1\n", "a,1,U,1;3;30;32,1,x\n");
    CHECK(res.observations[0].respondent() == Role::C1);
    CHECK(res.observations[0].report(Dyad::C1A1) == true);
    CHECK(res.observations[0].report(Dyad::C1A2) == false);
    // Nothing known: younger adult is A1, and the fallback is noted.
    res = ingest("", "a,32,U,1;3;30;32,1,x\n");
    CHECK(res.observations[0].respondent() == Role::A2);
    REQUIRE(res.notes.size() == 1);
    CHECK(res.notes[0].reason == "role_fallback");
  }
  SUBCASE("children take the two youngest slots") {
    const auto res = ingest("a,1,5,U,home,daily,1\n", "a,1,U,5;1;40;38,1,x\n");
    CHECK(res.observations[0].respondent() == Role::C1);
    CHECK(res.observations[0].report(Dyad::C1C2) == true);
  }
  SUBCASE("bad rows are reported, not fatal") {
    const auto res = ingest("a,1,abc,F,home,daily,1\nb,1,3,F,moon,daily,1\n",
                            "a,30,F,1;3;30;32,1,x\nb,30,F,1;3;30;32,1,x\nc,x,F,1;3;30;32,1,x\n"
                            "a,30,F,1;3;30;32,1,x\nd,50,F,1;3;30;32,1,x\n");
    CHECK(res.observations.size() == 2);
    std::vector<std::string> reasons;
    for (const auto& e : res.exclusions) reasons.push_back(e.reason);
    CHECK(reasons == std::vector<std::string>{"parse", "duplicate_respondent", "respondent_age"});
    int contact_errors = 0;
    for (const auto& n : res.notes) contact_errors += n.reason == "contact_parse";
    CHECK(contact_errors == 2);
    CHECK(res.observations.size() + res.exclusions.size() == 5);
  }
  SUBCASE("numeric codes are accepted") {
    const auto res = ingest("a,1,3,M,1,1,1\n", "a,30,F,1;3;30;32,1,x\n");
    CHECK(res.observations[0].report(Dyad::C2A1) == true);
  }
  SUBCASE("composition type six") {
    const auto res = ingest("", "a,20,F,20;22;40;45,1,x\nb,20,F,20;22;30;45,1,x\n", CompositionType::type6);
    CHECK(res.observations.size() == 1);
    CHECK(res.exclusions.size() == 1);
  }
}

TEST_CASE("missing columns are input errors") {
  std::istringstream c("respondent_id,day_index\n");
  std::istringstream h(kHouseholdsHeader);
  CHECK_THROWS_AS(parse_survey(c, h), InputError);
}

TEST_CASE("empty files yield nothing") {
  std::istringstream c(""), h("");
  const auto survey = parse_survey(c, h);
  CHECK(survey.household_rows == 0);
  CHECK(build_observations(survey, {}).observations.empty());
}
