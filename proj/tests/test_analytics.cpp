#include <doctest.h>

#include "fixtures.hpp"
#include "wifico/analytics.hpp"
#include "wifico/csv.hpp"
#include "wifico/error.hpp"

using namespace wifico;
using fixture::dwell;
using fixture::span;

namespace {

struct Setup {
  ApRegistry registry = fixture::registry({{"ACAD", "L1", BuildingCategory::Academic},
                                           {"ACAD", "S1", BuildingCategory::Academic},
                                           {"GYM", "G1", BuildingCategory::Recreation}});
  Roster roster;
  Schedule schedule;
  PipelineConfig config;

  Setup() {
    for (auto u : {"a", "b", "c"}) roster.add(u, "g1", "s1", "i1");
    roster.add("d", "g2", "s2", "i1");
    schedule.lectures.push_back({"s1", span(36000, 39000), {"ACAD", "L1"}});
    schedule.lectures.push_back({"s2", span(86400 + 36000, 86400 + 39000), {"ACAD", "L1"}});
  }
};

CollocationEpisode ep(std::vector<std::string> members, std::uint32_t room, std::int64_t a, std::int64_t b) {
  return {std::move(members), RoomId{room}, span(a, b), {}, Context::Other};
}

}  // namespace

TEST_CASE("a two hour meeting gives a clique") {
  Setup s;
  std::vector<CollocationEpisode> eps{ep({"a", "b", "c"}, 1, 50000, 50000 + 7200)};
  auto graphs = weekly_graphs(eps, s.roster, s.schedule, s.config);
  REQUIRE(graphs.size() == s.config.week_count());
  const auto& g = graphs[0];
  CHECK(g.period == "week-0");
  CHECK(g.nodes.size() == 4);
  CHECK(g.nodes.at("d") == "g2");
  CHECK(g.edges.size() == 3);
  CHECK(pair_duration(g.edges, "a", "c") == Duration{7200});
  CHECK(pair_duration(g.edges, "b", "c") == Duration{7200});
  for (std::size_t w = 1; w < graphs.size(); ++w) CHECK(graphs[w].edges.empty());
}

TEST_CASE("lecture collocation is excluded") {
  Setup s;
  std::vector<CollocationEpisode> eps{ep({"a", "b"}, 0, 36000, 39000), ep({"a", "d"}, 0, 86400 + 36000, 86400 + 39000)};
  auto graphs = weekly_graphs(eps, s.roster, s.schedule, s.config);
  for (const auto& g : graphs) CHECK(g.edges.empty());
  std::vector<CollocationEpisode> partial{ep({"a", "b"}, 0, 35000, 39000)};
  CHECK(pair_duration(weekly_graphs(partial, s.roster, s.schedule, s.config)[0].edges, "a", "b") ==
        Duration{1000});
}

TEST_CASE("semester aggregate sums the weekly weights") {
  Setup s;
  std::vector<CollocationEpisode> eps{ep({"a", "b"}, 1, 50000, 51000), ep({"a", "b"}, 1, 7 * 86400 + 100, 7 * 86400 + 400),
                                      ep({"b", "d"}, 2, 3 * 7 * 86400, 3 * 7 * 86400 + 60)};
  auto graphs = weekly_graphs(eps, s.roster, s.schedule, s.config);
  auto sem = aggregate_graph(graphs);
  CHECK(sem.period == "semester");
  CHECK(pair_duration(sem.edges, "a", "b") == Duration{1300});
  CHECK(pair_duration(sem.edges, "b", "d") == Duration{60});
  auto whole = pairwise_durations(eps, span(0, static_cast<std::int64_t>(s.config.week_count()) * 7 * 86400),
                                  section_lecture_exclusion(s.roster, s.schedule));
  CHECK(sem.edges == whole);
  CHECK(aggregate_graph(std::span(graphs.data(), 1)).period == "week-0");
}

TEST_CASE("graph export") {
  InteractionGraph g;
  g.period = "week-3";
  g.nodes = {{"a", "g1"}, {"b", "g1"}, {"c", "g2"}};
  g.edges[make_pair_key("b", "a")] = Duration{120};
  g.edges[make_pair_key("a", "c")] = Duration{5};
  fixture::TempDir dir("graph");
  write_graph_csv(dir.file("g.csv"), g);
  CHECK(load_graph_csv(dir.file("g.csv")) == g);
  auto dot = to_dot(g);
  CHECK(dot.find("\"a\" -- \"b\" [weight=120]") != std::string::npos);
  CHECK(dot.rfind("graph \"week-3\"", 0) == 0);

  {
    auto out = open_output(dir.file("bad.csv"));
    out << "kind,source,target,value\nedge,a,a,5\n";
  }
  CHECK_THROWS_AS(load_graph_csv(dir.file("bad.csv")), ParseError);
}

TEST_CASE("midterm phases") {
  CHECK(phase_of(0, 7) == Phase::Before);
  CHECK(phase_of(7, 7) == Phase::During);
  CHECK(phase_of(13, 7) == Phase::After);
  CHECK(to_string(Phase::During) == "during");
}

TEST_CASE("space usage per category") {
  Setup s;
  std::vector<CollocationEpisode> eps{ep({"a", "b"}, 1, 1000, 2000), ep({"a", "b", "c"}, 1, 1500, 2500),
                                      ep({"c", "d"}, 2, 8 * 7 * 86400, 8 * 7 * 86400 + 400)};
  auto u = space_usage(eps, s.registry, s.roster, s.config);
  REQUIRE(u.weekly.size() == s.config.week_count());
  // a: 1500 s, b: 1500 s, c: 1000 s over four participants.
  CHECK(u.weekly[0][0] == 4000.0 / 4);
  CHECK(u.weekly[0][3] == 0.0);
  CHECK(u.weekly[8][3] == 800.0 / 4);
  auto phases = u.by_phase(7);
  CHECK(phases.at(Phase::Before)[0] == doctest::Approx(1000.0 / 7));
  CHECK(phases.at(Phase::During)[0] == 0.0);
  CHECK(phases.at(Phase::After)[3] == doctest::Approx(200.0 / 6));
}

TEST_CASE("punctuality of present attendees") {
  Setup s;
  DwellTable d;
  d["a"] = {dwell("a", RoomId{0}, 36000, 39000)};
  d["b"] = {dwell("b", RoomId{0}, 35800, 37000), dwell("b", RoomId{1}, 37000, 37500),
            dwell("b", RoomId{0}, 37500, 39120)};
  d["c"] = {dwell("c", RoomId{0}, 36000, 39000)};
  AttendanceInference inf;
  inf.status[{"a", 0}] = AttendanceStatus::Present;
  inf.status[{"b", 0}] = AttendanceStatus::Present;
  inf.status[{"c", 0}] = AttendanceStatus::Absent;
  auto p = punctuality(d, s.schedule, s.registry, inf);
  REQUIRE(p.records.size() == 2);
  CHECK(p.records[0].entry == Duration{0});
  CHECK(p.records[0].exit == Duration{0});
  CHECK(p.records[1].entry == Duration{-200});
  CHECK(p.records[1].exit == Duration{120});
  CHECK(p.median_entry_seconds == -100);
  CHECK(p.median_exit_seconds == 60);
}
