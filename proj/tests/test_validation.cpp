#include <doctest.h>

#include "fixtures.hpp"
#include "wifico/error.hpp"
#include "wifico/validation.hpp"

using namespace wifico;
using fixture::at;
using fixture::dwell;
using fixture::span;

namespace {

struct Setup {
  ApRegistry registry = fixture::registry({{"ACAD", "L1", BuildingCategory::Academic},
                                           {"ACAD", "L2", BuildingCategory::Academic}});
  Roster roster;
  Schedule schedule;
  DwellTable dwells;
  EventTimes events;

  Setup() {
    for (auto u : {"present", "elsewhere", "silent"}) roster.add(u, "g1", "s1", "i1");
    schedule.lectures.push_back({"s1", span(10000, 13000), {"ACAD", "L1"}});
    dwells["present"] = {dwell("present", RoomId{0}, 10300, 13100)};
    dwells["elsewhere"] = {dwell("elsewhere", RoomId{1}, 10000, 13000)};
    events["present"] = {at(10300), at(13100)};
    events["elsewhere"] = {at(10000), at(13000)};
    events["silent"] = {at(1000)};
  }
};

}  // namespace

TEST_CASE("attendance inference statuses") {
  Setup s;
  auto inf = infer_attendance(s.dwells, s.schedule, s.registry, s.roster, s.events, Duration{1800});
  CHECK(inf.status.at({"present", 0}) == AttendanceStatus::Present);
  CHECK(inf.status.at({"elsewhere", 0}) == AttendanceStatus::Absent);
  CHECK(inf.status.at({"silent", 0}) == AttendanceStatus::Unobserved);
  CHECK(inf.count(AttendanceStatus::Present) == 1);
}

TEST_CASE("an event inside the margin counts as observed") {
  Setup s;
  s.events["silent"] = {at(10000 - 1800)};
  auto inf = infer_attendance(s.dwells, s.schedule, s.registry, s.roster, s.events, Duration{1800});
  CHECK(inf.status.at({"silent", 0}) == AttendanceStatus::Absent);
}

TEST_CASE("scoring excludes unobserved entries") {
  AttendanceInference inf;
  inf.status[{"a", 0}] = AttendanceStatus::Present;
  inf.status[{"b", 0}] = AttendanceStatus::Present;
  inf.status[{"c", 0}] = AttendanceStatus::Absent;
  inf.status[{"d", 0}] = AttendanceStatus::Absent;
  inf.status[{"e", 0}] = AttendanceStatus::Unobserved;
  AttendanceRecord truth;
  truth.present = {{{"a", 0}, true}, {{"b", 0}, false}, {{"c", 0}, true},
                   {{"d", 0}, false}, {{"e", 0}, true}};
  auto r = score(inf, truth);
  CHECK(r.true_positives == 1);
  CHECK(r.false_positives == 1);
  CHECK(r.false_negatives == 1);
  CHECK(r.true_negatives == 1);
  CHECK(r.precision == 0.5);
  CHECK(r.recall == 0.5);
  CHECK(r.f1 == 0.5);
  CHECK(r.unobserved_count == 1);
  CHECK(r.unobserved_actually_present_fraction == 1.0);

  AttendanceInference blind;
  blind.status[{"e", 0}] = AttendanceStatus::Unobserved;
  CHECK_THROWS_AS(score(blind, truth), Error);
}

TEST_CASE("metric identities from counts") {
  auto r = report_from_counts(89, 11, 60, 30);
  CHECK(r.precision == 0.89);
  CHECK(r.false_discovery_rate == 1.0 - r.precision);
  CHECK(r.false_negative_rate == 1.0 - r.recall);
  CHECK(r.specificity == 60.0 / 71.0);
  CHECK(r.f1 == 2.0 * r.precision * r.recall / (r.precision + r.recall));
  auto zero = report_from_counts(0, 0, 0, 0);
  CHECK(zero.precision == 0.0);
  CHECK(zero.f1 == 0.0);
}

TEST_CASE("inference csv round-trips") {
  AttendanceInference inf;
  inf.status[{"a", 0}] = AttendanceStatus::Present;
  inf.status[{"a", 3}] = AttendanceStatus::Absent;
  inf.status[{"b", 1}] = AttendanceStatus::Unobserved;
  fixture::TempDir dir("inference");
  write_inference_csv(dir.file("inference.csv"), inf);
  CHECK(load_inference_csv(dir.file("inference.csv")).status == inf.status);
  write_report_json(dir.file("report.json"), report_from_counts(1, 2, 3, 4));
  CHECK(std::filesystem::file_size(dir.file("report.json")) > 0);
}
