#include <doctest.h>

#include "fixtures.hpp"
#include "wifico/collocation.hpp"
#include "wifico/error.hpp"

using namespace wifico;
using fixture::dwell;
using fixture::span;

namespace {

const ApRegistry& rooms() {
  static const auto reg = fixture::registry({{"B", "R0", BuildingCategory::Academic},
                                             {"B", "R1", BuildingCategory::Academic}});
  return reg;
}

constexpr RoomId R0{0}, R1{1};
const std::vector<std::string> kUsers{"a", "b", "c"};

}  // namespace

TEST_CASE("two users sharing a room") {
  DwellTable t;
  t["a"] = {dwell("a", R0, 0, 100)};
  t["b"] = {dwell("b", R0, 40, 200)};
  auto eps = raw_overlaps(t, kUsers);
  REQUIRE(eps.size() == 1);
  CHECK(eps[0].members == std::vector<std::string>{"a", "b"});
  CHECK(eps[0].interval == span(40, 100));
  CHECK(person_seconds(eps) == 120);
}

TEST_CASE("membership changes split episodes") {
  DwellTable t;
  t["a"] = {dwell("a", R0, 0, 300)};
  t["b"] = {dwell("b", R0, 0, 300)};
  t["c"] = {dwell("c", R0, 100, 200)};
  auto eps = raw_overlaps(t, kUsers);
  REQUIRE(eps.size() == 3);
  CHECK(eps[0].interval == span(0, 100));
  CHECK(eps[1].members.size() == 3);
  CHECK(eps[1].interval == span(100, 200));
  CHECK(eps[2].interval == span(200, 300));
}

TEST_CASE("touching and disconnected segments do not collocate") {
  DwellTable t;
  t["a"] = {dwell("a", R0, 0, 100)};
  t["b"] = {dwell("b", R0, 100, 200), dwell("b", R0, 200, 300, DwellStatus::Disconnected)};
  t["c"] = {dwell("c", R1, 0, 300)};
  t["a"].push_back(dwell("a", R0, 200, 300));
  CHECK(raw_overlaps(t, kUsers).empty());
}

TEST_CASE("users outside the set are ignored") {
  DwellTable t;
  t["a"] = {dwell("a", R0, 0, 100)};
  t["z"] = {dwell("z", R0, 0, 100)};
  CHECK(raw_overlaps(t, kUsers).empty());
}

TEST_CASE("a covered short absence is bridged") {
  DwellTable t;
  t["a"] = {dwell("a", R0, 0, 1000)};
  t["b"] = {dwell("b", R0, 0, 400), dwell("b", R0, 600, 1000)};
  auto raw = raw_overlaps(t, kUsers);
  REQUIRE(raw.size() == 2);
  CHECK(qualifying_gaps(raw, t) == std::vector<TimeInterval>{span(400, 600)});
  auto bridged = bridge_gaps(raw, t, Duration{667});
  REQUIRE(bridged.size() == 1);
  CHECK(bridged[0].interval == span(0, 1000));
  CHECK(bridged[0].bridged_gaps == std::vector<TimeInterval>{span(400, 600)});
  CHECK(person_seconds(bridged) - person_seconds(raw) == 400);
  CHECK(bridge_gaps(raw, t, Duration{200}) == raw);
  CHECK(bridge_gaps(raw, t, Duration{0}) == raw);
}

TEST_CASE("an uncovered absence is not bridged") {
  DwellTable t;
  t["a"] = {dwell("a", R0, 0, 400), dwell("a", R0, 600, 1000)};
  t["b"] = {dwell("b", R0, 0, 400), dwell("b", R0, 600, 1000)};
  auto raw = raw_overlaps(t, kUsers);
  CHECK(qualifying_gaps(raw, t).empty());
  CHECK(bridge_gaps(raw, t, Duration{667}) == raw);
  CHECK_THROWS_AS(learn_gap_threshold(raw, t), Error);
}

TEST_CASE("a gap crossing a room change is not bridged") {
  DwellTable t;
  t["a"] = {dwell("a", R0, 0, 400), dwell("a", R1, 400, 600), dwell("a", R0, 600, 1000)};
  t["b"] = {dwell("b", R0, 0, 1000)};
  auto raw = raw_overlaps(t, kUsers);
  CHECK(qualifying_gaps(raw, t) == std::vector<TimeInterval>{span(400, 600)});
  t["b"] = {dwell("b", R0, 0, 400), dwell("b", R1, 400, 600), dwell("b", R0, 600, 1000)};
  raw = raw_overlaps(t, kUsers);
  REQUIRE(raw.size() == 3);
  CHECK(qualifying_gaps(raw, t).empty());
}

TEST_CASE("chains of gaps merge transitively") {
  DwellTable t;
  t["a"] = {dwell("a", R0, 0, 2000)};
  t["b"] = {dwell("b", R0, 0, 300), dwell("b", R0, 400, 700), dwell("b", R0, 900, 2000)};
  auto raw = raw_overlaps(t, kUsers);
  auto bridged = bridge_gaps(raw, t, Duration{250});
  REQUIRE(bridged.size() == 1);
  CHECK(bridged[0].bridged_gaps.size() == 2);
  auto partial = bridge_gaps(raw, t, Duration{150});
  REQUIRE(partial.size() == 2);
  CHECK(partial[0].interval == span(0, 700));
}

TEST_CASE("learned gap threshold is the median qualifying gap") {
  DwellTable t;
  t["a"] = {dwell("a", R0, 0, 5000)};
  t["b"] = {dwell("b", R0, 0, 100), dwell("b", R0, 200, 300), dwell("b", R0, 600, 700),
            dwell("b", R0, 1700, 1800)};
  auto raw = raw_overlaps(t, kUsers);
  auto learned = learn_gap_threshold(raw, t);
  CHECK(learned.samples == 3);
  CHECK(learned.value == Duration{300});
}

TEST_CASE("pairwise durations with exclusions") {
  CollocationEpisode e1{{"a", "b", "c"}, R0, span(0, 100), {}, Context::Other};
  CollocationEpisode e2{{"a", "b"}, R1, span(50, 150), {}, Context::Other};
  std::vector<CollocationEpisode> eps{e1, e2};
  std::vector<TimeInterval> none;
  auto d = pairwise_durations(eps, span(0, 1000), none);
  CHECK(pair_duration(d, "a", "b") == Duration{150});
  CHECK(pair_duration(d, "b", "a") == Duration{150});
  CHECK(pair_duration(d, "a", "c") == Duration{100});
  CHECK(pair_duration(d, "c", "z") == Duration{0});
  CHECK(row_sum(d, "a") == Duration{250});
  std::vector<TimeInterval> lecture{span(80, 120)};
  auto ex = pairwise_durations(eps, span(0, 1000), lecture);
  CHECK(pair_duration(ex, "a", "b") == Duration{110});
  auto clipped = pairwise_durations(eps, span(0, 60), none);
  CHECK(pair_duration(clipped, "a", "b") == Duration{60});
  CHECK(make_pair_key("z", "a") == PairKey{"a", "z"});
}

TEST_CASE("episode ordering and export") {
  CollocationEpisode late{{"a", "b"}, R0, span(100, 200), {}, Context::Other};
  CollocationEpisode early{{"b", "c"}, R1, span(0, 50), {span(10, 20)}, Context::Other};
  CHECK(episode_less(early, late));
  CHECK_FALSE(episode_less(late, early));
  PipelineConfig pc;
  fixture::TempDir dir("episodes");
  std::vector<CollocationEpisode> eps{early, late};
  write_episodes(dir.file("episodes.csv"), eps, rooms(), pc);
  auto back = load_episodes(dir.file("episodes.csv"), rooms(), pc);
  REQUIRE(back.size() == 2);
  CHECK(back[0].members == early.members);
  CHECK(back[0].room == early.room);
  CHECK(back[0].interval == early.interval);
  CHECK(back[1].interval == late.interval);
}
