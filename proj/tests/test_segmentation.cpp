#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "wifico/error.hpp"
#include "wifico/segmentation.hpp"

using namespace wifico;
using fixture::at;
using fixture::span;

namespace {

const ApRegistry& rooms() {
  static const auto reg = fixture::registry({{"B", "A", BuildingCategory::Academic},
                                             {"B", "B", BuildingCategory::Academic},
                                             {"C", "C", BuildingCategory::Residential}});
  return reg;
}

constexpr RoomId A{0}, B{1}, C{2};

UserEvent ev(std::int64_t t, RoomId room, std::uint32_t device = 0) {
  return {at(t), room, room.value, device};
}

std::int64_t moving_seconds(const std::vector<UserEvent>& events, Duration mobility) {
  auto segs = classify_and_segment("u", events, mobility, rooms());
  std::int64_t covered = 0;
  for (const auto& s : segs) covered += s.interval.duration().count();
  return (events.back().timestamp - events.front().timestamp).count() - covered;
}

}  // namespace

TEST_CASE("same room events form one dwell") {
  std::vector<UserEvent> e{ev(0, A), ev(300, A)};
  auto segs = classify_and_segment("u", e, Duration{233}, rooms());
  REQUIRE(segs.size() == 1);
  CHECK(segs[0].room == A);
  CHECK(segs[0].interval == span(0, 300));
  CHECK(segs[0].status == DwellStatus::Dwelling);
  CHECK(segs[0].supporting_event_count == 2);
}

TEST_CASE("quick room changes are movement") {
  std::vector<UserEvent> e{ev(0, A), ev(100, B)};
  CHECK(classify_and_segment("u", e, Duration{233}, rooms()).empty());
  CHECK(classify_and_segment("u", {}, Duration{233}, rooms()).empty());
}

TEST_CASE("a long gap is a dwell at the earlier room") {
  std::vector<UserEvent> e{ev(0, A), ev(100, A), ev(1000, B), ev(1100, C)};
  auto segs = classify_and_segment("u", e, Duration{233}, rooms());
  REQUIRE(segs.size() == 1);
  CHECK(segs[0].interval == span(0, 1000));
  CHECK(segs[0].room == A);
}

TEST_CASE("contiguous stationary stretches merge") {
  std::vector<UserEvent> e{ev(0, A), ev(100, A), ev(500, B), ev(600, B), ev(2000, B)};
  auto segs = classify_and_segment("u", e, Duration{233}, rooms());
  REQUIRE(segs.size() == 2);
  CHECK(segs[0].interval == span(0, 500));
  CHECK(segs[1].interval == span(500, 2000));
  CHECK(segs[1].supporting_event_count == 3);
}

TEST_CASE("internal silence splits out a disconnected period") {
  std::vector<UserEvent> e{ev(0, A), ev(600, A), ev(600 + 120 * 60, A), ev(600 + 121 * 60, A)};
  auto segs = filter_disconnections(classify_and_segment("u", e, Duration{233}, rooms()),
                                    Duration{76 * 60});
  REQUIRE(segs.size() == 3);
  CHECK(segs[0].status == DwellStatus::Dwelling);
  CHECK(segs[0].interval == span(0, 600));
  CHECK(segs[1].status == DwellStatus::Disconnected);
  CHECK(segs[1].interval == span(600, 600 + 120 * 60));
  CHECK(segs[2].status == DwellStatus::Dwelling);
  CHECK(segs[2].interval.duration() == Duration{60});
}

TEST_CASE("no gap above the threshold leaves segments alone") {
  std::vector<UserEvent> e{ev(0, A), ev(600, A), ev(1200, A)};
  auto segs = classify_and_segment("u", e, Duration{233}, rooms());
  auto filtered = filter_disconnections(segs, Duration{76 * 60});
  CHECK(filtered == segs);
}

TEST_CASE("an isolated event gives a zero-length dwell before the disconnection") {
  std::vector<UserEvent> e{ev(0, A), ev(6000, B)};
  auto segs = filter_disconnections(classify_and_segment("u", e, Duration{233}, rooms()),
                                    Duration{76 * 60});
  REQUIRE(segs.size() == 2);
  CHECK(segs[0].status == DwellStatus::Dwelling);
  CHECK(segs[0].interval == span(0, 0));
  CHECK(segs[0].supporting_event_count == 1);
  CHECK(segs[1].status == DwellStatus::Disconnected);
  CHECK(segs[1].interval == span(0, 6000));
}

TEST_CASE("concurrent events keep the busier room") {
  std::vector<UserEvent> e{ev(0, B, 0), ev(50, B, 0), ev(100, A, 1), ev(100, B, 0), ev(150, A, 1)};
  auto kept = resolve_concurrent_events(e, Duration{233}, rooms());
  REQUIRE(kept.size() == 4);
  CHECK(kept[2].room == B);

  std::vector<UserEvent> tie{ev(100, B, 0), ev(100, A, 1)};
  auto t = resolve_concurrent_events(tie, Duration{233}, rooms());
  REQUIRE(t.size() == 1);
  CHECK(t[0].room == A);
}

TEST_CASE("segmentation ignores which device produced an event") {
  std::mt19937_64 rng(4);
  for (int k = 0; k < 200; ++k) {
    std::vector<UserEvent> one, two;
    std::int64_t t = 0;
    for (int i = 0; i < 12; ++i) {
      t += std::uniform_int_distribution<std::int64_t>(1, 900)(rng);
      auto room = RoomId{static_cast<std::uint32_t>(std::uniform_int_distribution<int>(0, 2)(rng))};
      one.push_back(ev(t, room, 0));
      two.push_back(ev(t, room, static_cast<std::uint32_t>(i % 2)));
    }
    CHECK(classify_and_segment("u", one, Duration{233}, rooms()) ==
          classify_and_segment("u", two, Duration{233}, rooms()));
  }
}

TEST_CASE("raising the mobility threshold never removes movement") {
  std::mt19937_64 rng(12);
  for (int k = 0; k < 300; ++k) {
    std::vector<UserEvent> e;
    std::int64_t t = 0;
    for (int i = 0; i < 10; ++i) {
      t += std::uniform_int_distribution<std::int64_t>(1, 600)(rng);
      e.push_back(ev(t, RoomId{static_cast<std::uint32_t>(std::uniform_int_distribution<int>(0, 2)(rng))}));
    }
    std::int64_t prev = moving_seconds(e, Duration{1});
    for (std::int64_t m : {60, 120, 233, 400, 700}) {
      auto cur = moving_seconds(e, Duration{m});
      CHECK(cur >= prev);
      prev = cur;
    }
  }
}

TEST_CASE("partition of the observed span") {
  std::mt19937_64 rng(21);
  for (int k = 0; k < 300; ++k) {
    std::vector<UserEvent> e;
    std::vector<oracle::Event> o;
    std::int64_t t = 0;
    for (int i = 0; i < 8; ++i) {
      t += std::uniform_int_distribution<std::int64_t>(1, 3000)(rng);
      auto r = static_cast<std::uint32_t>(std::uniform_int_distribution<int>(0, 2)(rng));
      e.push_back(ev(t, RoomId{r}));
      o.push_back({t, r});
    }
    auto segs = filter_disconnections(classify_and_segment("u", e, Duration{233}, rooms()),
                                      Duration{1800});
    std::int64_t labelled = 0;
    for (const auto& s : segs) labelled += s.interval.duration().count();
    auto labels = oracle::label_seconds(o, 233, 1800);
    auto moving = std::count_if(labels.begin(), labels.end(),
                                [](const oracle::Label& l) { return l.kind == oracle::Kind::Moving; });
    CHECK(labelled + moving == static_cast<std::int64_t>(labels.size()));
  }
}

TEST_CASE("quantiles interpolate between order statistics") {
  CHECK(quantile_linear({1, 2, 3, 4}, 0.5) == 2.5);
  CHECK(quantile_linear({5}, 0.9) == 5);
  CHECK(quantile_linear({10, 0, 20}, 0.9) == doctest::Approx(18));
  CHECK(median_of({3, 1, 2}) == 2);
  CHECK_THROWS_AS(quantile_linear({}, 0.5), Error);
}

namespace {

struct LectureCorpus {
  LogCorpus corpus;
  Schedule schedule;
  Roster roster;
  AttendanceRecord attendance;
};

// One lecture; each user alternates between two access points with the given gaps.
LectureCorpus lecture_corpus(const std::vector<std::vector<std::int64_t>>& gaps_per_user) {
  LectureCorpus out;
  out.schedule.lectures.push_back({"s1", span(36000, 36000 + 3000), {"B", "A"}});
  LogCorpusBuilder b;
  for (std::size_t u = 0; u < gaps_per_user.size(); ++u) {
    auto user = "u" + std::to_string(u);
    out.roster.add(user, "g1", "s1", "i1");
    out.attendance.present[{user, 0}] = true;
    std::int64_t t = 36000 + 10;
    b.add(at(t), UpdateType::SnmpUpdate, user, fixture::mac(500), fixture::mac(0), "B-A");
    for (std::size_t i = 0; i < gaps_per_user[u].size(); ++i) {
      t += gaps_per_user[u][i];
      auto ap = static_cast<unsigned>((i + 1) % 2);
      b.add(at(t), UpdateType::SnmpPoll, user, fixture::mac(500), fixture::mac(ap), ap ? "B-B" : "B-A");
    }
  }
  out.corpus = std::move(b).build();
  return out;
}

}  // namespace

TEST_CASE("learned mobility threshold of a constant distribution") {
  auto lc = lecture_corpus({{10, 10, 10}, {10, 10}});
  auto learned = learn_mobility_threshold(lc.corpus, lc.schedule, lc.roster, Duration{1800});
  CHECK(learned.value == Duration{10});
  CHECK(learned.samples == 5);
}

TEST_CASE("mobility learning needs a different-AP pair") {
  auto lc = lecture_corpus({{}});
  CHECK_THROWS_AS(learn_mobility_threshold(lc.corpus, lc.schedule, lc.roster, Duration{1800}), Error);
}

TEST_CASE("learned disconnection threshold is the longest attended gap") {
  auto lc = lecture_corpus({{30, 60, 45}, {20, 20}});
  auto learned = learn_disconnection_threshold(lc.corpus, lc.attendance, lc.schedule);
  CHECK(learned.value == Duration{60});
  AttendanceRecord none;
  CHECK_THROWS_AS(learn_disconnection_threshold(lc.corpus, none, lc.schedule), Error);
}

TEST_CASE("segment_corpus skips unregistered access points") {
  LogCorpusBuilder b;
  b.add(at(0), UpdateType::SnmpUpdate, "u", fixture::mac(900), fixture::mac(0), "B-A");
  b.add(at(300), UpdateType::SnmpUpdate, "u", fixture::mac(900), fixture::mac(0), "B-A");
  b.add(at(400), UpdateType::SnmpUpdate, "u", fixture::mac(900), fixture::mac(77), "Z-9");
  auto corpus = std::move(b).build();
  auto r = segment_corpus(corpus, rooms(), Duration{233}, Duration{4560});
  CHECK(r.unregistered_events == 1);
  REQUIRE(r.dwells.at("u").size() == 1);
  CHECK(r.dwells.at("u")[0].interval == span(0, 300));
}

TEST_CASE("dwells.csv round-trips") {
  DwellTable t;
  t["u1"] = {fixture::dwell("u1", A, 0, 100), fixture::dwell("u1", A, 100, 5000, DwellStatus::Disconnected)};
  t["u2"] = {fixture::dwell("u2", C, 50, 60)};
  PipelineConfig pc;
  fixture::TempDir dir("dwells");
  write_dwells(dir.file("dwells.csv"), t, rooms(), pc);
  auto back = load_dwells(dir.file("dwells.csv"), rooms(), pc);
  CHECK(back == t);
}
