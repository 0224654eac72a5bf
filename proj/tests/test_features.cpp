#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "wifico/error.hpp"
#include "wifico/features.hpp"

using namespace wifico;
using fixture::dwell;
using fixture::span;

namespace {

struct Campus {
  ApRegistry registry = fixture::registry({{"ACAD", "A1", BuildingCategory::Academic},
                                           {"ACAD", "A2", BuildingCategory::Academic},
                                           {"DORM", "R1", BuildingCategory::Residential},
                                           {"GYM", "G1", BuildingCategory::Recreation}});
  Roster roster;
  Schedule schedule;

  Campus() {
    for (auto u : {"u1", "u2"}) roster.add(u, "g1", "s1", "i1");
    schedule.meetings.push_back({"g1", span(17 * 3600, 19 * 3600), std::vector<std::string>{"ACAD"}});
    schedule.lectures.push_back({"s1", span(10 * 3600, 11 * 3600), {"ACAD", "A1"}});
  }
};

CollocationEpisode episode(RoomId room, std::int64_t a, std::int64_t b) {
  return {{"u1", "u2"}, room, span(a, b), {}, Context::Other};
}

}  // namespace

TEST_CASE("column names and counts") {
  CHECK(individual_raw_names().size() == 5);
  CHECK(collocation_raw_names().size() == 18);
  CHECK(individual_feature_columns().size() == 20);
  CHECK(collocation_feature_columns().size() == 72);
  CHECK(all_feature_columns().size() == 92);
  CHECK(collocation_raw_names().front() == "scheduled_any_abs");
  CHECK(individual_feature_columns().front() == "indiv_academic_attendance_mean");
}

TEST_CASE("context precedence") {
  Campus c;
  CHECK(classify_context(episode(RoomId{1}, 17 * 3600 + 60, 18 * 3600), c.schedule, c.roster, c.registry) ==
        Context::Scheduled);
  // Meeting restricted to ACAD; the gym does not qualify.
  CHECK(classify_context(episode(RoomId{3}, 17 * 3600 + 60, 18 * 3600), c.schedule, c.roster, c.registry) ==
        Context::Other);
  // Lecture hours outside the lecture room.
  CHECK(classify_context(episode(RoomId{2}, 10 * 3600 + 60, 10 * 3600 + 600), c.schedule, c.roster,
                         c.registry) == Context::Class);
  CHECK(classify_context(episode(RoomId{0}, 5 * 86400, 5 * 86400 + 3600), c.schedule, c.roster, c.registry) ==
        Context::Other);
}

TEST_CASE("full participation gives relative value one") {
  Campus c;
  DwellTable d;
  d["u1"] = {dwell("u1", RoomId{0}, 0, 5000)};
  d["u2"] = {dwell("u2", RoomId{0}, 1000, 4000)};
  std::vector<CollocationEpisode> eps{episode(RoomId{0}, 1000, 4000)};
  auto wf = weekly_features("u1", d, eps, 0, c.registry, span(0, 7 * 86400), 0);
  CHECK(wf.collocation[10] == 3000);  // other_any_abs
  CHECK(wf.collocation[11] == 1.0);
  CHECK(wf.collocation[12] == 3000);  // other_academic_abs
  CHECK(wf.individual[1] == 5000);
  CHECK(wf.individual[2] == 5000);
  CHECK(wf.individual[1] >= wf.individual[3]);
}

TEST_CASE("a group without episodes has zero collocation values") {
  Campus c;
  DwellTable d;
  d["u1"] = {dwell("u1", RoomId{2}, 0, 5000)};
  auto wf = weekly_features("u1", d, {}, 3, c.registry, span(0, 7 * 86400), 2);
  for (double v : wf.collocation) CHECK(v == 0.0);
  CHECK(wf.individual[0] == 3);
  CHECK(wf.individual[3] == 5000);
  CHECK(wf.week == 2);
}

TEST_CASE("weekly features are clipped to the week") {
  Campus c;
  DwellTable d;
  d["u1"] = {dwell("u1", RoomId{0}, -500, 500)};
  std::vector<CollocationEpisode> eps{episode(RoomId{0}, -500, 500)};
  auto wf = weekly_features("u1", d, eps, 0, c.registry, span(0, 7 * 86400), 0);
  CHECK(wf.individual[1] == 500);
  CHECK(wf.collocation[10] == 500);
}

TEST_CASE("features are translation invariant") {
  Campus c;
  DwellTable d, shifted;
  d["u1"] = {dwell("u1", RoomId{0}, 100, 900), dwell("u1", RoomId{3}, 2000, 2600)};
  for (const auto& s : d["u1"]) {
    auto t = s;
    t.interval.start += Duration{3600};
    t.interval.end += Duration{3600};
    shifted["u1"].push_back(t);
  }
  auto a = weekly_features("u1", d, {}, 0, c.registry, span(0, 86400), 0);
  auto b = weekly_features("u1", shifted, {}, 0, c.registry, span(3600, 86400 + 3600), 0);
  CHECK(a.individual == b.individual);
}

TEST_CASE("approximate entropy matches the direct definition") {
  std::mt19937_64 rng(50);
  std::normal_distribution<double> normal;
  for (int k = 0; k < 20; ++k) {
    std::vector<double> x(50);
    for (auto& v : x) v = normal(rng);
    const double r = 0.2 * population_std(x);
    CHECK(std::abs(approx_entropy(x, 2, r) - oracle::apen_direct(x, 2, r)) <= 1e-12);
  }
  std::vector<double> constant(14, 2.0);
  CHECK(approx_entropy(constant, 2, 0.5) == 0.0);
  CHECK_THROWS_AS(approx_entropy(std::vector<double>{1, 2}, 2, 0.1), Error);
  CHECK_THROWS_AS(approx_entropy(constant, 2, 0.0), Error);
}

TEST_CASE("periodic series are more regular than shuffled ones") {
  std::vector<double> periodic;
  for (int i = 0; i < 60; ++i) periodic.push_back(i % 2 ? 1.0 : 0.0);
  auto shuffled = periodic;
  std::mt19937_64 rng(2);
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  CHECK(approx_entropy(periodic, 2, 0.1) < approx_entropy(shuffled, 2, 0.1));
}

TEST_CASE("semester summary statistics") {
  std::vector<WeeklyFeatures> weeks(14);
  for (std::size_t w = 0; w < 14; ++w) {
    weeks[w].week = w;
    weeks[w].individual[1] = static_cast<double>(w + 1);
  }
  auto fv = semester_summary("u", weeks, 2, 0.2);
  REQUIRE(fv.individual.size() == 20);
  REQUIRE(fv.collocation.size() == 72);
  // indiv_any_dwell is raw feature 1: columns 4..7.
  CHECK(fv.individual[4] == 7.5);
  CHECK(fv.individual[5] == 7.5);
  CHECK(fv.individual[6] == doctest::Approx(std::sqrt((14.0 * 14.0 - 1.0) / 12.0)));
  std::vector<double> series;
  for (int i = 1; i <= 14; ++i) series.push_back(i);
  CHECK(fv.individual[7] == doctest::Approx(oracle::apen_direct(series, 2, 0.2 * fv.individual[6])));
  for (std::size_t i = 0; i < 4; ++i) CHECK(fv.individual[i] == 0.0);
  for (double v : fv.collocation) CHECK(v == 0.0);
}

TEST_CASE("mean and population std") {
  std::vector<double> v{2, 4, 4, 4, 5, 5, 7, 9};
  CHECK(mean_of(v) == 5.0);
  CHECK(population_std(v) == 2.0);
}

TEST_CASE("feature table round-trip") {
  FeatureVector fv;
  fv.user_id = "u1";
  fv.individual.assign(20, 1.5);
  fv.collocation.assign(72, 0.25);
  std::vector<FeatureVector> vs{fv};
  auto table = to_table(vs);
  CHECK(table.columns.size() == 92);
  auto back = from_table(table);
  REQUIRE(back.size() == 1);
  CHECK(back[0].all() == fv.all());
}

TEST_CASE("short series report a missing approximate entropy") {
  std::vector<WeeklyFeatures> weeks(2);
  weeks[1].individual[1] = 100;
  auto fv = semester_summary("u", weeks, 2, 0.2);
  CHECK(fv.individual[4] == 50);
  CHECK(std::isnan(fv.individual[7]));
  CHECK(fv.individual[3] == 0.0);
}
