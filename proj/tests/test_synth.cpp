#include <doctest.h>

#include <filesystem>
#include <set>

#include "fixtures.hpp"
#include "wifico/error.hpp"
#include "wifico/synth.hpp"

using namespace wifico;

namespace {

SimConfig small(std::uint64_t seed) {
  SimConfig c;
  c.seed = seed;
  c.users = 24;
  c.section_size = 24;
  c.group_min = c.group_max = 4;
  c.weeks = 2;
  return c;
}

}  // namespace

TEST_CASE("simulation is deterministic per seed") {
  auto a = simulate(small(3));
  auto b = simulate(small(3));
  CHECK(a.timeline == b.timeline);
  CHECK(a.attendance.present == b.attendance.present);
  CHECK(a.corpus.size() == b.corpus.size());
  CHECK(a.scores.rows == b.scores.rows);
  auto c = simulate(small(4));
  CHECK(c.timeline != a.timeline);
}

TEST_CASE("timelines are sorted and non-overlapping") {
  auto sc = simulate(small(5));
  CHECK(sc.roster.users.size() == 24);
  CHECK(sc.roster.groups().size() == 6);
  for (const auto& [user, stays] : sc.timeline) {
    for (std::size_t i = 0; i < stays.size(); ++i) {
      CHECK(stays[i].interval.start <= stays[i].interval.end);
      if (i) CHECK(stays[i - 1].interval.end <= stays[i].interval.start);
    }
  }
  for (const auto& [a, b] : sc.roommates) CHECK(a < b);
  CHECK(sc.scores.columns == std::vector<std::string>{"score"});
  CHECK(sc.scores.rows.size() == 24);
}

TEST_CASE("noiseless simulation records every lecture") {
  auto cfg = SimConfig::noiseless();
  cfg.users = 12;
  cfg.section_size = 12;
  cfg.group_min = cfg.group_max = 4;
  cfg.weeks = 1;
  auto sc = simulate(cfg);
  for (const auto& [key, present] : sc.attendance.present) {
    CHECK(present);
    CHECK(sc.physical.at(key));
  }
  CHECK_FALSE(sc.attendance.present.empty());
}

TEST_CASE("configuration keys and validation") {
  auto kv = KeyValueConfig::parse("users = 60\np_step_out = 0.5\npoll_period = 20m\nunknown_key = 1\n");
  SimConfig c;
  apply(kv, c);
  CHECK(c.users == 60);
  CHECK(c.p_step_out == 0.5);
  CHECK(c.poll_period == Duration{1200});
  CHECK(kv.unconsumed() == std::set<std::string>{"unknown_key"});

  auto bad = [](auto mutate) {
    SimConfig s;
    mutate(s);
    CHECK_THROWS_AS(s.validate(), ConfigError);
  };
  bad([](SimConfig& s) { s.p_absent = 1.5; });
  bad([](SimConfig& s) { s.group_min = 1; });
  bad([](SimConfig& s) { s.group_max = 3; });
  bad([](SimConfig& s) { s.poll_period = Duration{60}; });
  bad([](SimConfig& s) { s.poll_jitter = Duration{450}; });
  bad([](SimConfig& s) { s.planted_silence = Duration{3600}; });
  bad([](SimConfig& s) { s.weeks = 0; });
  CHECK_NOTHROW(SimConfig{}.validate());
}

TEST_CASE("pipeline settings follow the simulation") {
  auto c = small(1);
  auto p = c.pipeline_config();
  CHECK(p.week_count() == 2);
  CHECK(p.utc_offset == c.utc_offset);
  CHECK(p.margin_before_after == c.margin);
}

TEST_CASE("rng streams are independent") {
  auto a = sim_rng(1, 2, 3), b = sim_rng(1, 2, 3), c = sim_rng(1, 2, 4), d = sim_rng(1, 3, 3);
  auto x = a();
  CHECK(x == b());
  CHECK(x != c());
  CHECK(x != d());
}

TEST_CASE("null scores ignore peer evaluation") {
  auto cfg = small(6);
  cfg.null_scores = true;
  auto sc = simulate(cfg);
  CHECK(sc.peer_evaluations.rows.size() <= 24);
  CHECK(sc.scores.rows.size() == 24);
}

TEST_CASE("planted silence leaves one quiet attended lecture") {
  auto cfg = SimConfig::noiseless();
  cfg.users = 8;
  cfg.section_size = 8;
  cfg.group_min = cfg.group_max = 4;
  cfg.weeks = 1;
  cfg.planted_silence = Duration{2400};
  auto sc = simulate(cfg);
  std::int64_t longest = 0;
  for (const auto& lec : sc.schedule.lectures) {
    for (const auto& rows : sc.corpus.per_user_index()) {
      for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto a = sc.corpus.entries()[rows[i - 1]].timestamp, b = sc.corpus.entries()[rows[i]].timestamp;
        if (a >= lec.interval.start && b <= lec.interval.end) longest = std::max(longest, (b - a).count());
      }
    }
  }
  CHECK(longest == 2400);
}

TEST_CASE("scenario files are written") {
  auto sc = simulate(small(7));
  fixture::TempDir dir("scenario");
  write_scenario(dir.path(), sc);
  for (auto name : {"logs.csv", "aps.csv", "roster.csv", "lectures.csv", "meetings.csv", "attendance.csv",
                    "scores.csv", "pe.csv", "truth/timeline.csv", "truth/physical.csv"}) {
    CHECK_MESSAGE(std::filesystem::exists(dir.file(name)), name);
  }
}

TEST_CASE("oracle episodes on a hand-made timeline") {
  Timeline t;
  t["a"] = {{RoomId{0}, fixture::span(0, 100)}, {RoomId{1}, fixture::span(200, 300)}};
  t["b"] = {{RoomId{0}, fixture::span(50, 250)}};
  t["c"] = {{RoomId{1}, fixture::span(220, 280)}};
  std::vector<std::string> users{"a", "b", "c"};
  auto eps = oracle_episodes(t, users, fixture::span(0, 1000));
  REQUIRE(eps.size() == 2);
  CHECK(eps[0].members == std::vector<std::string>{"a", "b"});
  CHECK(eps[0].interval == fixture::span(50, 100));
  CHECK(eps[1].members == std::vector<std::string>{"a", "c"});
  CHECK(eps[1].interval == fixture::span(220, 280));
}
