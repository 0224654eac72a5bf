#include <doctest.h>

#include <fstream>

#include "fixtures.hpp"
#include "wifico/config.hpp"
#include "wifico/csv.hpp"
#include "wifico/error.hpp"
#include "wifico/interval.hpp"
#include "wifico/manifest.hpp"
#include "wifico/model.hpp"
#include "wifico/time.hpp"

using namespace wifico;
using fixture::at;
using fixture::span;

TEST_CASE("local datetimes convert with a fixed offset") {
  const Duration est{-5 * 3600};
  auto t = parse_local_datetime("2019-04-05 10:10:00", est);
  CHECK(seconds_of(t) == 1554477000);
  CHECK(format_local_datetime(t, est) == "2019-04-05 10:10:00");
  CHECK(parse_local_datetime("2019-04-05T10:10:00", est) == t);
  CHECK_THROWS_AS(parse_local_datetime("2019-13-05 10:10:00", est), Error);
}

TEST_CASE("syslog timestamps take an explicit year") {
  const Duration est{-5 * 3600};
  auto t = parse_syslog_timestamp("Apr 1 00:10:51", 2019, est);
  CHECK(format_local_datetime(t, est) == "2019-04-01 00:10:51");
  CHECK(format_syslog_timestamp(t, est) == "Apr 1 00:10:51");
  CHECK(syslog_month("Dec 31 23:59:59") == 12);
}

TEST_CASE("durations and offsets parse") {
  CHECK(parse_duration("233") == Duration{233});
  CHECK(parse_duration("233s") == Duration{233});
  CHECK(parse_duration("76m") == Duration{4560});
  CHECK(parse_duration("11m7s") == Duration{667});
  CHECK(parse_duration("1h30m") == Duration{5400});
  CHECK(parse_duration("2d") == Duration{172800});
  CHECK_THROWS_AS(parse_duration("soon"), Error);
  CHECK(format_duration(Duration{667}) == "667s");
  CHECK(parse_utc_offset("-05:00") == Duration{-18000});
  CHECK(parse_utc_offset("UTC") == Duration{0});
  CHECK(format_utc_offset(Duration{19800}) == "+05:30");
  CHECK_THROWS_AS(parse_utc_offset("5"), Error);
}

TEST_CASE("week anchors fall on local midnight") {
  const Duration est{-5 * 3600};
  auto wed = parse_local_datetime("2019-01-09 15:00:00", est);
  auto mon = week_anchor_at_or_before(wed, 1, est);
  CHECK(format_local_datetime(mon, est) == "2019-01-07 00:00:00");
  CHECK(week_anchor_at_or_before(mon, 1, est) == mon);
  CHECK(local_weekday(wed, est) == 3);
  CHECK(local_time_of_day(wed, est) == Duration{15 * 3600});
}

TEST_CASE("intervals are half-open") {
  auto a = span(0, 10), b = span(10, 20), c = span(5, 15);
  CHECK_FALSE(interval_overlap(a, b));
  CHECK(interval_overlap(a, c) == span(5, 10));
  CHECK(overlap_duration(b, c) == Duration{5});
  CHECK(a.contains(at(0)));
  CHECK_FALSE(a.contains(at(10)));
  CHECK(span(3, 3).empty());
  CHECK_THROWS_AS(make_interval(at(5), at(4)), Error);
}

TEST_CASE("interval set algebra") {
  auto merged = merge_intervals({span(10, 20), span(0, 5), span(5, 7), span(15, 30), span(40, 40)});
  REQUIRE(merged.size() == 2);
  CHECK(merged[0] == span(0, 7));
  CHECK(merged[1] == span(10, 30));
  CHECK(total_duration(merged) == Duration{27});
  CHECK(covered_duration(span(5, 12), merged) == Duration{4});
  CHECK(fully_covered(span(11, 29), merged));
  CHECK_FALSE(fully_covered(span(6, 11), merged));
  std::vector<TimeInterval> hole{span(2, 4), span(12, 14)};
  auto diff = subtract_intervals(merged, hole);
  CHECK(diff == std::vector<TimeInterval>{span(0, 2), span(4, 7), span(10, 12), span(14, 30)});
  CHECK(clip_intervals(merged, span(3, 11)) == std::vector<TimeInterval>{span(3, 7), span(10, 11)});
}

TEST_CASE("registry maps access points to rooms") {
  ApRegistry r;
  r.add({"40:cd:14:b2:02:c0", "122S", "209", BuildingCategory::Academic});
  r.add({"40:cd:14:b2:02:c1", "122S", "209", BuildingCategory::Academic});
  r.add({"40:cd:14:b2:02:c2", "122S", "210", BuildingCategory::Academic});
  CHECK(r.room_count() == 2);
  CHECK(r.room_id_of_ap("40:cd:14:b2:02:c0") == r.room_id_of_ap("40:cd:14:b2:02:c1"));
  CHECK(r.room_key("40:cd:14:b2:02:c2").label() == "122S-210");
  CHECK(r.aps_in_room(r.room_id({"122S", "209"})).size() == 2);
  CHECK_THROWS_AS(r.at("00:00:00:00:00:00"), RegistryMissError);
  CHECK_THROWS_AS(r.add({"40:cd:14:b2:02:c0", "X", "1", BuildingCategory::Academic}), Error);
  CHECK_THROWS_AS(r.add({"40:cd:14:b2:02:c9", "122S", "1", BuildingCategory::Dining}), Error);
  CHECK(parse_ap_label("122S-209") == RoomKey{"122S", "209"});
  CHECK(parse_category("residential") == BuildingCategory::Residential);
}

TEST_CASE("roster lookups") {
  Roster r;
  r.add("u1", "g1", "s1", "i1");
  r.add("u2", "g1", "s1", "i1");
  r.add("u3", "g2", "s2", "i2");
  CHECK(r.members("g1") == std::vector<std::string>{"u1", "u2"});
  CHECK(r.instructor("u3") == "i2");
  CHECK(r.groups() == std::vector<std::string>{"g1", "g2"});
  CHECK_THROWS_AS(r.add("u1", "g2", "s2", "i2"), Error);
  CHECK_THROWS_AS(r.add("u4", "g2", "s2", "i9"), Error);
}

TEST_CASE("key-value config tracks consumed keys") {
  auto kv = KeyValueConfig::parse("# comment\nmobility_threshold = learn\nmargin = 20m  # trailing\nbogus = 1\n");
  PipelineConfig c;
  apply(kv, c);
  CHECK_FALSE(c.mobility_threshold.has_value());
  CHECK(c.margin_before_after == Duration{1200});
  CHECK(kv.unconsumed() == std::set<std::string>{"bogus"});
  CHECK_THROWS_AS(kv.require_all_consumed(), ConfigError);
  CHECK_THROWS_AS(KeyValueConfig::parse("no equals sign"), ConfigError);
}

TEST_CASE("pipeline config defaults and validation") {
  PipelineConfig c;
  CHECK(c.mobility_threshold == Duration{233});
  CHECK(c.disconnection_threshold == Duration{4560});
  CHECK(c.gap_threshold == Duration{667});
  CHECK(c.week_count() == 14);
  CHECK(c.week_of(c.first_week_start()) == 0u);
  CHECK(c.week_of(c.first_week_start() + kWeek * 13 + Duration{5}) == 13u);
  CHECK_FALSE(c.week_of(c.first_week_start() - Duration{1}).has_value());
  CHECK(parse_threshold("learn") == std::nullopt);
  CHECK(format_threshold(Duration{233}) == "233s");
  c.apen_r_factor = -1;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  PipelineConfig d;
  CHECK(d.canonical_text() == PipelineConfig{}.canonical_text());
  d.gap_threshold = std::nullopt;
  CHECK(d.canonical_text() != PipelineConfig{}.canonical_text());
}

TEST_CASE("csv helpers") {
  CHECK(split_fields(" a , b,,c ", ',') == std::vector<std::string>{"a", "b", "", "c"});
  CHECK(join_fields({"x", "y"}, ';') == "x;y");
  fixture::TempDir dir("csv");
  auto path = dir.file("sub/t.csv");
  open_output(path) << "a,b\n1,2\n\n3,4\n";
  CsvReader reader(path, {"a", "b"});
  std::vector<std::string> f;
  REQUIRE(reader.next(f));
  CHECK(f == std::vector<std::string>{"1", "2"});
  REQUIRE(reader.next(f));
  CHECK(f[1] == "4");
  CHECK_FALSE(reader.next(f));
  CHECK_THROWS_AS(CsvReader(path, {"a", "c"}), Error);
}

TEST_CASE("sha256 and manifests") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  fixture::TempDir dir("manifest");
  {
    std::ofstream(dir.file("x.txt")) << "abc";
  }
  CHECK(sha256_file(dir.file("x.txt")) == sha256_hex("abc"));
  RunManifest m;
  m.stage = "segment";
  m.tool_version = "0.1.0";
  m.seed = 42;
  m.config_hash = sha256_hex("cfg");
  m.settings = {{"jobs", "1"}};
  m.inputs = {{"ingest/logs.csv", sha256_hex("a")}};
  m.outputs = {{"dwells.csv", sha256_hex("b")}};
  m.timings_ms = {{"segment", 12.5}};
  write_manifest(dir.file("manifest.json"), m);
  auto back = load_manifest(dir.file("manifest.json"));
  CHECK(back.stage == m.stage);
  CHECK(back.seed == 42);
  CHECK(back.config_hash == m.config_hash);
  CHECK(back.settings == m.settings);
  CHECK(back.inputs == m.inputs);
  CHECK(back.outputs == m.outputs);
  CHECK(back.timings_ms == m.timings_ms);
}
