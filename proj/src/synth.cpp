#include "wifico/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <numeric>
#include <set>

#include "wifico/csv.hpp"
#include "wifico/error.hpp"

namespace wifico {

SimConfig SimConfig::noiseless() {
  SimConfig c;
  c.poll_jitter = Duration{0};
  c.p_unlogged_attendance = 0.0;
  c.p_ap_snap = 0.0;
  c.p_signin_miss = 0.0;
  c.p_absent = 0.0;
  c.p_absent_offcampus = 0.0;
  c.planted_silence = Duration{0};
  return c;
}

void SimConfig::validate() const {
  auto prob = [](const char* name, double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError(std::string(name) + " must be in [0, 1]");
  };
  prob("dorm_fraction", dorm_fraction);
  prob("p_second_device", p_second_device);
  prob("p_unlogged_attendance", p_unlogged_attendance);
  prob("p_ap_snap", p_ap_snap);
  prob("p_signin_miss", p_signin_miss);
  prob("p_absent", p_absent);
  prob("p_absent_offcampus", p_absent_offcampus);
  prob("p_adhoc", p_adhoc);
  prob("p_lunch", p_lunch);
  prob("p_recreation", p_recreation);
  prob("p_step_out", p_step_out);
  prob("pe_missing", pe_missing);
  if (p_absent + p_absent_offcampus > 1.0) throw ConfigError("p_absent + p_absent_offcampus must be <= 1");
  if (group_min < 2 || group_max < group_min) throw ConfigError("need 2 <= group_min <= group_max");
  if (users < group_min) throw ConfigError("group sizes exceed the cohort size");
  if (section_size < group_min) throw ConfigError("section_size must be >= group_min");
  if (instructors == 0) throw ConfigError("instructors must be > 0");
  if (weeks == 0) throw ConfigError("weeks must be > 0");
  if (poll_period.count() < 120 || poll_period.count() > 3600) throw ConfigError("poll_period must be in [120s, 3600s]");
  if (poll_jitter.count() < 0 || poll_jitter * 2 >= poll_period) throw ConfigError("poll_jitter must be in [0, poll_period / 2)");
  if (planted_silence.count() < 0 || planted_silence + poll_period + poll_jitter >= Duration{76 * 60}) {
    throw ConfigError("planted_silence + poll_period + poll_jitter must stay below 76m");
  }
  if (regularity_min < 0 || regularity_max > 1 || regularity_min > regularity_max) throw ConfigError("invalid regularity range");
  if (collab_min < 0 || collab_max > 1 || collab_min > collab_max) throw ConfigError("invalid collab range");
  if (entry_spread_seconds < 0 || exit_spread_seconds < 0) throw ConfigError("offset spreads must be >= 0");
  if (std::abs(entry_median_seconds) > 1200 || std::abs(exit_median_seconds) > 600) {
    throw ConfigError("entry/exit medians out of range");
  }
}

PipelineConfig SimConfig::pipeline_config() const {
  PipelineConfig p;
  p.utc_offset = utc_offset;
  p.study_window = {study_start, study_start + kWeek * static_cast<std::int64_t>(weeks)};
  p.margin_before_after = margin;
  p.reference_year = local_year(study_start, utc_offset);
  return p;
}

namespace {

template <class F>
auto convert(const std::string& key, const std::string& value, F f) {
  try {
    return f(value);
  } catch (const std::exception& e) {
    throw ConfigError("invalid value for " + key + ": '" + value + "' (" + e.what() + ")");
  }
}

std::size_t to_size(const std::string& s) {
  std::size_t pos = 0;
  auto v = std::stoull(s, &pos);
  if (pos != s.size()) throw Error("trailing characters");
  return static_cast<std::size_t>(v);
}

double to_double(const std::string& s) {
  std::size_t pos = 0;
  auto v = std::stod(s, &pos);
  if (pos != s.size()) throw Error("trailing characters");
  return v;
}

}  // namespace

void apply(KeyValueConfig& kv, SimConfig& c) {
  auto sz = [&](const char* key, std::size_t& field) {
    if (auto v = kv.take(key)) field = convert(key, *v, to_size);
  };
  auto dbl = [&](const char* key, double& field) {
    if (auto v = kv.take(key)) field = convert(key, *v, to_double);
  };
  auto dur = [&](const char* key, Duration& field) {
    if (auto v = kv.take(key)) field = convert(key, *v, [](const std::string& s) { return parse_duration(s); });
  };
  if (auto v = kv.take("seed")) c.seed = convert("seed", *v, [](const std::string& s) { return std::stoull(s); });
  sz("users", c.users);
  sz("group_min", c.group_min);
  sz("group_max", c.group_max);
  sz("section_size", c.section_size);
  sz("instructors", c.instructors);
  sz("weeks", c.weeks);
  dbl("dorm_fraction", c.dorm_fraction);
  dur("poll_period", c.poll_period);
  dur("poll_jitter", c.poll_jitter);
  dbl("p_second_device", c.p_second_device);
  dbl("p_unlogged_attendance", c.p_unlogged_attendance);
  dbl("p_ap_snap", c.p_ap_snap);
  dbl("p_signin_miss", c.p_signin_miss);
  dbl("p_absent", c.p_absent);
  dbl("p_absent_offcampus", c.p_absent_offcampus);
  dur("planted_silence", c.planted_silence);
  dbl("entry_median_seconds", c.entry_median_seconds);
  dbl("exit_median_seconds", c.exit_median_seconds);
  dbl("entry_spread_seconds", c.entry_spread_seconds);
  dbl("exit_spread_seconds", c.exit_spread_seconds);
  dbl("regularity_min", c.regularity_min);
  dbl("regularity_max", c.regularity_max);
  dbl("collab_min", c.collab_min);
  dbl("collab_max", c.collab_max);
  dbl("p_adhoc", c.p_adhoc);
  dbl("p_lunch", c.p_lunch);
  dbl("p_recreation", c.p_recreation);
  sz("midterm_week", c.midterm_week);
  dbl("midterm_adhoc_factor", c.midterm_adhoc_factor);
  dbl("score_participation", c.score_participation);
  dbl("score_consistency", c.score_consistency);
  dbl("score_noise", c.score_noise);
  dbl("pe_loading", c.pe_loading);
  dbl("p_step_out", c.p_step_out);
  dbl("pe_missing", c.pe_missing);
  if (auto v = kv.take("null_scores")) c.null_scores = (*v == "true" || *v == "1");
  if (auto v = kv.take("noiseless"); v && (*v == "true" || *v == "1")) {
    c.poll_jitter = Duration{0};
    c.p_unlogged_attendance = c.p_ap_snap = c.p_signin_miss = c.p_absent = c.p_absent_offcampus = 0.0;
    c.planted_silence = Duration{0};
  }
  dur("margin", c.margin);
  if (auto v = kv.take("utc_offset")) c.utc_offset = convert("utc_offset", *v, [](const std::string& s) { return parse_utc_offset(s); });
  if (auto v = kv.take("study_start")) {
    c.study_start = convert("study_start", *v, [&](const std::string& s) { return parse_local_datetime(s, c.utc_offset); });
  }
  c.validate();
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::mt19937_64 sim_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t key) {
  std::uint64_t s = splitmix64(seed);
  s = splitmix64(s ^ (stream * 0xd1b54a32d192ed03ULL));
  s = splitmix64(s ^ (key * 0x8cb92ba72f3d8dd7ULL));
  return std::mt19937_64(s);
}

namespace {

enum : std::uint64_t {
  kStreamStructure = 1,
  kStreamGroup = 2,
  kStreamUser = 3,
  kStreamEmit = 4,
  kStreamScore = 5,
  kStreamPe = 6,
};

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

std::int64_t uniform_int(std::mt19937_64& rng, std::int64_t lo, std::int64_t hi) {
  return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng);
}

bool chance(std::mt19937_64& rng, double p) {
  return p > 0.0 && std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p;
}

template <class T>
const T& pick(std::mt19937_64& rng, const std::vector<T>& v) {
  return v[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<std::int64_t>(v.size()) - 1))];
}

std::string numbered(const char* prefix, std::size_t i, int width) {
  auto digits = std::to_string(i);
  if (digits.size() < static_cast<std::size_t>(width)) digits.insert(0, static_cast<std::size_t>(width) - digits.size(), '0');
  return prefix + digits;
}

std::string mac(std::uint8_t kind, std::uint64_t n) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%02x:%02x:%02x:%02x:%02x:%02x", kind, unsigned((n >> 32) & 0xff),
                unsigned((n >> 24) & 0xff), unsigned((n >> 16) & 0xff), unsigned((n >> 8) & 0xff),
                unsigned(n & 0xff));
  return buf;
}

struct Campus {
  ApRegistry registry;
  std::vector<RoomId> lecture_rooms;
  std::vector<RoomId> neighbor_rooms;  // parallel to lecture_rooms
  std::vector<RoomId> study_rooms;
  std::vector<RoomId> dorm_rooms;
  std::vector<RoomId> dorm_commons;
  std::vector<RoomId> rec_rooms;
  std::vector<RoomId> dining_rooms;
  std::vector<RoomId> union_rooms;
  std::map<std::string, RoomId> hallway;
  std::vector<std::vector<std::size_t>> room_aps;  // RoomId -> indices into ap_ids
  std::vector<std::string> ap_ids;
  std::vector<std::string> ap_labels;

  const std::string& building(RoomId r) const { return registry.room(r).building; }
};

Campus build_campus(std::size_t sections, std::size_t dorm_room_count) {
  struct Pending {
    RoomKey key;
    BuildingCategory category;
    int aps;
  };
  std::vector<Pending> rooms;
  auto add = [&](const std::string& b, const std::string& r, BuildingCategory c, int aps) {
    rooms.push_back({{b, r}, c, aps});
  };
  using BC = BuildingCategory;
  for (std::size_t i = 0; i < sections; ++i) {
    add("ACAD", numbered("L", i + 1, 2), BC::Academic, 1 + static_cast<int>(i % 3));
    add("ACAD", numbered("N", i + 1, 2), BC::Academic, 1);
  }
  for (std::size_t i = 0; i < 8; ++i) add("ACAD", numbered("S", i + 1, 2), BC::Academic, 1);
  add("ACAD", "HALL", BC::Academic, 2);
  for (std::size_t i = 0; i < 12; ++i) add("LIB", numbered("R", i + 1, 2), BC::Academic, 1);
  add("LIB", "HALL", BC::Academic, 1);
  const char* dorms[] = {"DORMA", "DORMB", "DORMC", "DORMD"};
  for (std::size_t i = 0; i < dorm_room_count; ++i) {
    add(dorms[i % 4], numbered("", 100 + i / 4, 3), BC::Residential, 1);
  }
  for (const char* d : dorms) {
    add(d, "C1", BC::Residential, 1);
    add(d, "C2", BC::Residential, 1);
    add(d, "HALL", BC::Residential, 1);
  }
  for (const char* r : {"GYM", "POOL", "COURT1", "COURT2"}) add("REC", r, BC::Recreation, r[0] == 'G' ? 2 : 1);
  add("REC", "HALL", BC::Recreation, 1);
  for (std::size_t i = 0; i < 8; ++i) add("DINE", numbered("D", i + 1, 2), BC::Dining, 1);
  add("DINE", "HALL", BC::Dining, 1);
  add("UNION", "LOUNGE", BC::Other, 2);
  add("UNION", "CAFE", BC::Other, 1);
  add("UNION", "HALL", BC::Other, 1);

  Campus c;
  std::uint64_t ap_counter = 1;
  std::vector<std::vector<std::string>> room_ap_names;
  for (const auto& p : rooms) {
    std::vector<std::string> names;
    for (int a = 0; a < p.aps; ++a) {
      AccessPoint ap{mac(0x0a, ap_counter++), p.key.building, p.key.room, p.category};
      names.push_back(ap.ap_id);
      c.registry.add(ap);
    }
    room_ap_names.push_back(std::move(names));
  }
  c.room_aps.resize(c.registry.room_count());
  for (std::size_t i = 0; i < rooms.size(); ++i) {
    auto id = c.registry.room_id(rooms[i].key);
    for (const auto& name : room_ap_names[i]) {
      c.room_aps[id.value].push_back(c.ap_ids.size());
      c.ap_ids.push_back(name);
      c.ap_labels.push_back(rooms[i].key.label());
    }
    const auto& room = rooms[i].key.room;
    const auto& b = rooms[i].key.building;
    if (room == "HALL") c.hallway[b] = id;
    else if (b == "ACAD" && room[0] == 'L') c.lecture_rooms.push_back(id);
    else if (b == "ACAD" && room[0] == 'N') c.neighbor_rooms.push_back(id);
    else if (b == "ACAD" || b == "LIB") c.study_rooms.push_back(id);
    else if (b.rfind("DORM", 0) == 0 && room[0] == 'C') c.dorm_commons.push_back(id);
    else if (b.rfind("DORM", 0) == 0) c.dorm_rooms.push_back(id);
    else if (b == "REC") c.rec_rooms.push_back(id);
    else if (b == "DINE") c.dining_rooms.push_back(id);
    else c.union_rooms.push_back(id);
  }
  return c;
}

enum class Kind { Lecture, Meeting, Solo, Adhoc, Lunch, Recreation, Study, OffCampus };

int priority_of(Kind k) {
  switch (k) {
    case Kind::Lecture:
    case Kind::OffCampus: return 0;
    case Kind::Meeting:
    case Kind::Solo: return 1;
    case Kind::Adhoc: return 2;
    case Kind::Lunch: return 3;
    case Kind::Recreation: return 4;
    case Kind::Study: return 5;
  }
  return 9;
}

struct Activity {
  TimeInterval interval;
  RoomId room;
  Kind kind = Kind::Study;
  RoomId emit_room;  // equals room unless the device snaps elsewhere
  std::optional<std::size_t> lecture;
};

struct PlannedStay {
  RoomId room;
  RoomId emit_room;
  TimeInterval interval;
  bool fixed = false;
  std::optional<std::size_t> lecture;
  bool breakable = false;
};

struct UserInfo {
  std::string id;
  std::size_t section = 0;
  std::size_t group = 0;
  bool resident = false;
  RoomId home;
  bool second_device = false;
  double collab = 0.0;
  std::vector<Activity> activities;
  std::vector<TimeInterval> suppressed;
};

struct Window {
  int weekday;  // 0 = Monday
  Duration start;
  Duration length;
};

struct GroupInfo {
  std::string id;
  std::vector<std::size_t> members;
  double regularity = 0.0;
  std::vector<Window> windows;
  RoomId room;
  std::optional<std::vector<std::string>> buildings;
};

constexpr Duration kBuffer{600};
constexpr Duration kMinFiller{1200};
constexpr Duration kMaxTravel{240};

std::vector<std::size_t> balanced_sizes(std::size_t n, std::size_t lo, std::size_t hi) {
  std::size_t min_groups = (n + hi - 1) / hi;
  std::size_t max_groups = n / lo;
  if (min_groups > max_groups) {
    throw ConfigError("cannot split " + std::to_string(n) + " users into groups of " + std::to_string(lo) +
                      "-" + std::to_string(hi));
  }
  std::size_t target = static_cast<std::size_t>(std::llround(static_cast<double>(n) / ((lo + hi) / 2.0)));
  std::size_t g = std::clamp(target, min_groups, max_groups);
  std::vector<std::size_t> sizes(g, n / g);
  for (std::size_t i = 0; i < n % g; ++i) ++sizes[i];
  return sizes;
}

RoomId solo_room(std::mt19937_64& rng, const Campus& campus, RoomId group_room, RoomId home) {
  auto cat = campus.registry.room_category(group_room);
  const std::vector<RoomId>* pool = &campus.study_rooms;
  if (cat == BuildingCategory::Residential) pool = &campus.dorm_commons;
  else if (cat == BuildingCategory::Recreation) pool = &campus.rec_rooms;
  else if (cat == BuildingCategory::Other) pool = &campus.union_rooms;
  std::vector<RoomId> options;
  for (auto r : *pool) {
    if (r != group_room) options.push_back(r);
  }
  if (options.empty()) return cat == BuildingCategory::Residential ? home : group_room;
  return pick(rng, options);
}

// Interval overlap with every member's planned meeting stays except `self`.
Duration shared_time(const TimeInterval& mine, const std::vector<TimeInterval>& others) {
  auto merged = merge_intervals(others);
  return covered_duration(mine, merged);
}


double mean_value(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double std_value(const std::vector<double>& v) {
  double m = mean_value(v), ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return v.empty() ? 0.0 : std::sqrt(ss / static_cast<double>(v.size()));
}

std::vector<double> zscores(const std::vector<double>& v) {
  double m = mean_value(v), sd = std_value(v);
  std::vector<double> out;
  for (double x : v) out.push_back(sd > 0 ? (x - m) / sd : 0.0);
  return out;
}

std::vector<Activity> place(std::vector<Activity> activities, Instant lo, Instant hi) {
  std::stable_sort(activities.begin(), activities.end(), [](const Activity& a, const Activity& b) {
    auto pa = priority_of(a.kind), pb = priority_of(b.kind);
    return std::tie(pa, a.interval.start) < std::tie(pb, b.interval.start);
  });
  std::vector<Activity> placed;
  std::vector<TimeInterval> taken;  // sorted, disjoint
  for (const auto& a : activities) {
    if (a.interval.start < lo || a.interval.end > hi || a.interval.empty()) continue;
    TimeInterval padded{a.interval.start - kBuffer, a.interval.end + kBuffer};
    auto it = std::lower_bound(taken.begin(), taken.end(), padded.start,
                               [](const TimeInterval& x, Instant t) { return x.end <= t; });
    if (it != taken.end() && it->start < padded.end) continue;
    taken.insert(it, a.interval);
    placed.push_back(a);
  }
  std::sort(placed.begin(), placed.end(),
            [](const Activity& a, const Activity& b) { return a.interval.start < b.interval.start; });
  return placed;
}

std::vector<PlannedStay> build_stays(const UserInfo& u, const std::vector<Activity>& placed,
                                     const Campus& campus, Instant start, Instant horizon,
                                     Duration utc_offset, double p_step_out, std::mt19937_64& rng) {
  auto travel = [&] { return Duration{uniform_int(rng, 60, kMaxTravel.count())}; };
  auto filler_room = [&](RoomId a, RoomId b) {
    if (u.resident) return u.home;
    for (int tries = 0; tries < 32; ++tries) {
      auto r = pick(rng, campus.study_rooms);
      if (r != a && r != b) return r;
    }
    return campus.study_rooms.front();
  };
  auto home = [&](Instant a, Instant b, std::vector<PlannedStay>& out) {
    if (b > a) out.push_back({u.home, u.home, {a, b}, false, std::nullopt});
  };

  std::vector<PlannedStay> stays;
  bool adjacent = false;  // the last stay connects to `cursor` without leaving campus
  Instant cursor = start;
  for (const auto& x : placed) {
    if (x.kind == Kind::OffCampus) {
      if (u.resident) {
        if (adjacent) {
          auto t = travel();
          if (x.interval.start - cursor >= kMinFiller + t) home(cursor + t, x.interval.start, stays);
          else stays.back().interval.end = x.interval.start;
        } else {
          home(cursor, x.interval.start, stays);
        }
      }
      cursor = x.interval.end;
      adjacent = false;
      continue;
    }
    PlannedStay stay{x.room, x.emit_room, x.interval, x.kind == Kind::Lecture, x.lecture,
                     x.kind == Kind::Meeting || x.kind == Kind::Adhoc};
    if (adjacent) {
      auto& last = stays.back();
      auto gap = stay.interval.start - last.interval.end;
      bool same_day = local_midnight(last.interval.end, utc_offset) == local_midnight(stay.interval.start, utc_offset);
      bool may_fill = u.resident || (same_day && gap <= Duration{4 * 3600});
      if (may_fill) {
        auto tl = travel(), tr = travel();
        if (gap - tl - tr >= kMinFiller) {
          auto room = filler_room(last.room, stay.room);
          PlannedStay f{room, room, {last.interval.end + tl, stay.interval.start - tr}, false, std::nullopt};
          stays.push_back(f);
        } else {
          auto t = travel();
          if (stay.fixed) last.interval.end = stay.interval.start - t;
          else stay.interval.start = last.interval.end + t;
        }
      }
    } else if (u.resident) {
      auto t = travel();
      home(cursor, stay.interval.start - t, stays);
    }
    stays.push_back(stay);
    cursor = stay.interval.end;
    adjacent = true;
  }
  if (u.resident) {
    if (adjacent) {
      auto t = travel();
      if (horizon - cursor > t) home(cursor + t, horizon, stays);
    } else {
      home(cursor, horizon, stays);
    }
  }

  // Same room on both sides of a short transit: the user never left.
  std::vector<PlannedStay> merged;
  for (auto& s : stays) {
    if (!merged.empty()) {
      auto& m = merged.back();
      if (m.room == s.room && m.emit_room == s.emit_room && !m.fixed && !s.fixed &&
          s.interval.start - m.interval.end <= kMaxTravel) {
        m.interval.end = s.interval.end;
        continue;
      }
    }
    merged.push_back(s);
  }

  // Short visits to the hallway in the middle of long shared stays.
  std::vector<PlannedStay> out;
  for (auto& s : merged) {
    if (!s.breakable || s.interval.duration() < Duration{3600} || !chance(rng, p_step_out)) {
      out.push_back(s);
      continue;
    }
    const Duration away{uniform_int(rng, 180, 900)};
    const Duration hop{60};
    const auto latest = s.interval.end - Duration{900} - away - 2 * hop;
    const auto earliest = s.interval.start + Duration{900};
    const Instant leave = earliest + Duration{uniform_int(rng, 0, (latest - earliest).count())};
    const RoomId hall = campus.hallway.at(campus.building(s.room));
    PlannedStay before = s, visit = s, after = s;
    before.interval.end = leave;
    visit.room = visit.emit_room = hall;
    visit.interval = {leave + hop, leave + hop + away};
    after.interval.start = visit.interval.end + hop;
    out.push_back(before);
    out.push_back(visit);
    out.push_back(after);
  }
  return out;
}

struct Emitter {
  const Campus& campus;
  LogCorpusBuilder& builder;
  const std::string& user;
  const std::string& device1;
  const std::string& device2;
  const std::vector<TimeInterval>& suppressed;
  std::mt19937_64& rng;

  void emit(Instant t, RoomId room, UpdateType type, bool second) {
    for (const auto& w : suppressed) {
      if (w.start <= t && t <= w.end) return;
    }
    const auto& aps = campus.room_aps[room.value];
    auto ap = aps.size() == 1 ? aps[0] : aps[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<std::int64_t>(aps.size()) - 1))];
    builder.add(t, type, user, second ? device2 : device1, campus.ap_ids[ap], campus.ap_labels[ap]);
  }
};

Duration poll_step(std::mt19937_64& rng, const SimConfig& c) {
  auto j = c.poll_jitter.count();
  return c.poll_period + Duration{j ? uniform_int(rng, -j, j) : 0};
}

}  // namespace

SimScenario simulate(const SimConfig& config) {
  config.validate();
  SimScenario sc;
  sc.config = config;
  const auto pipeline = config.pipeline_config();
  const Instant start = config.study_start;
  const Instant end = pipeline.study_window.end;
  const auto days = static_cast<std::int64_t>(config.weeks) * 7;
  const auto margin = config.margin;
  auto day_start = [&](std::int64_t d) { return start + kDay * d; };

  auto srng = sim_rng(config.seed, kStreamStructure, 0);
  const std::size_t n = config.users;
  const std::size_t n_sections = (n + config.section_size - 1) / config.section_size;
  const int width = std::max(3, static_cast<int>(std::to_string(n).size()));

  std::vector<UserInfo> users(n);
  for (std::size_t i = 0; i < n; ++i) users[i].id = numbered("u", i, width);

  // Sections and groups.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), srng);
  std::vector<GroupInfo> groups;
  {
    std::size_t pos = 0;
    for (std::size_t s = 0; s < n_sections; ++s) {
      std::size_t size = n / n_sections + (s < n % n_sections ? 1 : 0);
      auto sizes = balanced_sizes(size, config.group_min, config.group_max);
      for (auto gs : sizes) {
        GroupInfo g;
        g.id = numbered("g", groups.size(), 3);
        for (std::size_t k = 0; k < gs; ++k) {
          auto u = order[pos++];
          users[u].section = s;
          users[u].group = groups.size();
          g.members.push_back(u);
        }
        std::sort(g.members.begin(), g.members.end());
        groups.push_back(std::move(g));
      }
    }
  }

  // Housing.
  std::shuffle(order.begin(), order.end(), srng);
  const auto residents = static_cast<std::size_t>(std::llround(config.dorm_fraction * static_cast<double>(n)));
  Campus campus = build_campus(n_sections, (residents + 1) / 2);
  for (std::size_t k = 0; k < residents; ++k) {
    auto& u = users[order[k]];
    u.resident = true;
    u.home = campus.dorm_rooms[k / 2];
    if (k % 2 == 1) {
      auto a = users[order[k - 1]].id, b = u.id;
      sc.roommates.push_back(a < b ? std::make_pair(a, b) : std::make_pair(b, a));
    }
  }
  std::sort(sc.roommates.begin(), sc.roommates.end());
  for (auto& u : users) {
    u.second_device = chance(srng, config.p_second_device);
    u.collab = uniform(srng, config.collab_min, config.collab_max);
  }

  for (const auto& u : users) {
    sc.roster.add(u.id, groups[u.group].id, numbered("s", u.section, 2),
                  numbered("i", u.section % config.instructors, 2));
  }
  sc.registry = campus.registry;

  // Lectures: Monday, Wednesday, Friday.
  const Duration slots[] = {Duration{10 * 3600 + 600}, Duration{11 * 3600 + 900}, Duration{13 * 3600 + 1800},
                            Duration{14 * 3600 + 2100}, Duration{9 * 3600 + 300}, Duration{15 * 3600 + 2400}};
  const Duration lecture_length{50 * 60};
  std::vector<std::vector<std::size_t>> lectures_by_section(n_sections);
  for (std::int64_t d = 0; d < days; ++d) {
    auto wd = d % 7;
    if (wd != 0 && wd != 2 && wd != 4) continue;
    for (std::size_t s = 0; s < n_sections; ++s) {
      auto t = day_start(d) + slots[s % std::size(slots)];
      lectures_by_section[s].push_back(sc.schedule.lectures.size());
      sc.schedule.lectures.push_back({numbered("s", s, 2), {t, t + lecture_length},
                                      campus.registry.room(campus.lecture_rooms[s])});
    }
  }

  // Group meeting windows and rooms.
  const Window window_options[] = {{0, Duration{16 * 3600 + 1800}, Duration{90 * 60}},
                                   {0, Duration{17 * 3600}, Duration{120 * 60}},
                                   {0, Duration{19 * 3600}, Duration{90 * 60}}};
  const int day_options[] = {0, 1, 2, 3, 6};
  std::vector<std::string> all_buildings;
  for (const auto& ap : campus.registry.access_points()) all_buildings.push_back(ap.building_id);
  std::sort(all_buildings.begin(), all_buildings.end());
  all_buildings.erase(std::unique(all_buildings.begin(), all_buildings.end()), all_buildings.end());

  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    auto& g = groups[gi];
    auto grng = sim_rng(config.seed, kStreamGroup, gi);
    g.regularity = uniform(grng, config.regularity_min, config.regularity_max);
    std::size_t count = chance(grng, 0.5) ? 2 : 1;
    std::vector<int> ds(std::begin(day_options), std::end(day_options));
    std::shuffle(ds.begin(), ds.end(), grng);
    for (std::size_t w = 0; w < count; ++w) {
      auto win = window_options[uniform_int(grng, 0, 2)];
      win.weekday = ds[w];
      g.windows.push_back(win);
    }
    double r = uniform(grng, 0.0, 1.0);
    if (r < 0.45) g.room = pick(grng, campus.study_rooms);
    else if (r < 0.8) g.room = pick(grng, campus.dorm_commons);
    else if (r < 0.9) g.room = pick(grng, campus.union_rooms);
    else g.room = pick(grng, campus.rec_rooms);
    if (chance(grng, 0.5)) {
      std::vector<std::string> b{campus.building(g.room)};
      if (chance(grng, 0.3)) {
        auto other = pick(grng, all_buildings);
        if (other != b.front()) b.push_back(other);
      }
      std::sort(b.begin(), b.end());
      g.buildings = b;
    }
  }

  // Meetings, solo stays and ad-hoc sessions.
  std::map<std::string, std::vector<double>> weekly_hours;
  for (const auto& u : users) weekly_hours[u.id].assign(config.weeks, 0.0);
  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    auto& g = groups[gi];
    auto grng = sim_rng(config.seed, kStreamGroup, 1000000 + gi);
    for (std::int64_t d = 0; d < days; ++d) {
      const auto week = static_cast<std::size_t>(d / 7);
      const int wd = static_cast<int>(d % 7);
      bool meeting_day = false;
      for (const auto& win : g.windows) {
        if (win.weekday != wd) continue;
        meeting_day = true;
        TimeInterval reported{day_start(d) + win.start, day_start(d) + win.start + win.length};
        sc.schedule.meetings.push_back({g.id, reported, g.buildings});
        if (!chance(grng, g.regularity)) continue;
        std::vector<std::pair<std::size_t, TimeInterval>> attended;
        for (auto m : g.members) {
          bool joins = chance(grng, users[m].collab);
          TimeInterval iv{reported.start + Duration{uniform_int(grng, 0, 300)},
                          reported.end - Duration{uniform_int(grng, 0, 300)}};
          if (joins) {
            users[m].activities.push_back({iv, g.room, Kind::Meeting, g.room, std::nullopt});
            attended.emplace_back(m, iv);
          } else {
            auto room = solo_room(grng, campus, g.room, users[m].resident ? users[m].home : g.room);
            users[m].activities.push_back({iv, room, Kind::Solo, room, std::nullopt});
          }
        }
        for (const auto& [m, iv] : attended) {
          std::vector<TimeInterval> others;
          for (const auto& [o, oiv] : attended) {
            if (o != m) others.push_back(oiv);
          }
          weekly_hours[users[m].id][week] += static_cast<double>(shared_time(iv, others).count()) / 3600.0;
        }
      }
      if (meeting_day) continue;
      double p = config.p_adhoc * (week == config.midterm_week ? config.midterm_adhoc_factor : 1.0);
      if (!chance(grng, std::min(1.0, p))) continue;
      RoomId room = week == config.midterm_week ? pick(grng, campus.dorm_commons) : g.room;
      auto s = day_start(d) + Duration{19 * 3600 + 2700 + uniform_int(grng, 0, 2700)};
      TimeInterval iv{s, s + Duration{uniform_int(grng, 60, 100) * 60}};
      for (auto m : g.members) {
        if (!chance(grng, users[m].collab)) continue;
        TimeInterval mine{iv.start + Duration{uniform_int(grng, 0, 300)}, iv.end - Duration{uniform_int(grng, 0, 300)}};
        users[m].activities.push_back({mine, room, Kind::Adhoc, room, std::nullopt});
      }
    }
  }

  // Per-user days: lectures, meals, recreation, study.
  for (std::size_t ui = 0; ui < n; ++ui) {
    auto& u = users[ui];
    auto urng = sim_rng(config.seed, kStreamUser, ui);
    std::normal_distribution<double> entry_noise(0.0, config.entry_spread_seconds);
    std::normal_distribution<double> exit_noise(0.0, config.exit_spread_seconds);
    for (auto li : lectures_by_section[u.section]) {
      const auto& lec = sc.schedule.lectures[li];
      AttendanceKey key{u.id, li};
      double r = uniform(urng, 0.0, 1.0);
      double entry = config.entry_median_seconds +
                     std::clamp(entry_noise(urng), -3 * config.entry_spread_seconds, 3 * config.entry_spread_seconds);
      double exit = config.exit_median_seconds +
                    std::clamp(exit_noise(urng), -3 * config.exit_spread_seconds, 3 * config.exit_spread_seconds);
      bool unlogged = chance(urng, config.p_unlogged_attendance);
      bool snap = chance(urng, config.p_ap_snap);
      bool miss = chance(urng, config.p_signin_miss);
      bool present = false;
      if (r < config.p_absent_offcampus) {
        TimeInterval block{lec.interval.start - margin - Duration{900}, lec.interval.end + margin + Duration{900}};
        u.activities.push_back({block, RoomId{}, Kind::OffCampus, RoomId{}, li});
      } else if (r < config.p_absent_offcampus + config.p_absent) {
        if (!u.resident) {
          auto room = pick(urng, campus.study_rooms);
          u.activities.push_back({lec.interval, room, Kind::Study, room, std::nullopt});
        }
      } else {
        present = true;
        TimeInterval stay{lec.interval.start + Duration{std::llround(entry)},
                          lec.interval.end + Duration{std::llround(exit)}};
        auto room = campus.lecture_rooms[u.section];
        auto emit = snap ? campus.neighbor_rooms[u.section] : room;
        u.activities.push_back({stay, room, Kind::Lecture, emit, li});
        if (unlogged) {
          u.suppressed.push_back({lec.interval.start - margin - Duration{60}, lec.interval.end + margin + Duration{60}});
        }
      }
      sc.physical[key] = present;
      sc.attendance.present[key] = present && !miss;
    }
    for (std::int64_t d = 0; d < days; ++d) {
      const int wd = static_cast<int>(d % 7);
      const bool weekday = wd < 5;
      if ((weekday || u.resident) && chance(urng, config.p_lunch)) {
        auto s = day_start(d) + Duration{12 * 3600 + uniform_int(urng, 0, 2400)};
        auto room = pick(urng, campus.dining_rooms);
        u.activities.push_back({{s, s + Duration{uniform_int(urng, 25, 45) * 60}}, room, Kind::Lunch, room, std::nullopt});
      }
      if (chance(urng, config.p_recreation)) {
        auto s = day_start(d) + Duration{(weekday ? 15 * 3600 + 2700 : 14 * 3600) + uniform_int(urng, 0, 1800)};
        auto room = pick(urng, campus.rec_rooms);
        u.activities.push_back({{s, s + Duration{uniform_int(urng, 45, 75) * 60}}, room, Kind::Recreation, room, std::nullopt});
      }
      if (weekday && !u.resident) {
        auto s = day_start(d) + Duration{8 * 3600 + 1800 + uniform_int(urng, 0, 3600)};
        auto room = pick(urng, campus.study_rooms);
        u.activities.push_back({{s, s + Duration{uniform_int(urng, 60, 120) * 60}}, room, Kind::Study, room, std::nullopt});
        auto a = day_start(d) + Duration{15 * 3600 + 2700 + uniform_int(urng, 0, 1800)};
        auto room2 = pick(urng, campus.study_rooms);
        u.activities.push_back({{a, a + Duration{uniform_int(urng, 45, 90) * 60}}, room2, Kind::Study, room2, std::nullopt});
      }
    }
  }

  // Placement, filling, emission.
  LogCorpusBuilder builder;
  const Instant horizon = end - Duration{60};
  bool silence_planted = config.planted_silence.count() == 0;
  for (std::size_t ui = 0; ui < n; ++ui) {
    auto& u = users[ui];
    auto prng = sim_rng(config.seed, kStreamUser, 1000000 + ui);
    auto placed = place(u.activities, start + Duration{3600}, horizon - Duration{3600});
    auto stays = build_stays(u, placed, campus, start, horizon, config.utc_offset, config.p_step_out, prng);

    std::optional<std::pair<TimeInterval, RoomId>> silence;
    if (!silence_planted) {
      for (const auto& s : stays) {
        if (!s.fixed || !s.lecture || s.emit_room != s.room) continue;
        auto rec = sc.attendance.present.find({u.id, *s.lecture});
        if (rec == sc.attendance.present.end() || !rec->second) continue;
        const auto& lec = sc.schedule.lectures[*s.lecture].interval;
        auto a = std::max(s.interval.start, lec.start) + Duration{60};
        auto b = a + config.planted_silence;
        if (b + Duration{60} > std::min(s.interval.end, lec.end)) continue;
        bool quiet = std::any_of(u.suppressed.begin(), u.suppressed.end(),
                                 [&](const TimeInterval& w) { return interval_overlap(w, s.interval).has_value(); });
        if (quiet) continue;
        u.suppressed.push_back({a + Duration{1}, b - Duration{1}});
        silence = {{a, b}, s.emit_room};
        silence_planted = true;
        break;
      }
    }

    auto& truth = sc.timeline[u.id];
    for (const auto& s : stays) truth.push_back({s.room, s.interval});

    const auto device1 = mac(0x02, ui * 2 + 1);
    const auto device2 = mac(0x02, ui * 2 + 2);
    auto erng = sim_rng(config.seed, kStreamEmit, ui);
    Emitter em{campus, builder, u.id, device1, device2, u.suppressed, erng};
    for (std::size_t k = 0; k < stays.size(); ++k) {
      const auto& s = stays[k];
      const auto a = s.interval.start, b = s.interval.end;
      em.emit(a, s.emit_room, UpdateType::SnmpUpdate, false);
      for (auto t = a + poll_step(erng, config); t < b; t += poll_step(erng, config)) {
        em.emit(t, s.emit_room, UpdateType::SnmpPoll, false);
      }
      em.emit(b, s.emit_room, UpdateType::SnmpUpdate, false);
      if (u.second_device) {
        for (auto t = a + Duration{37}; t < b; t += poll_step(erng, config)) {
          em.emit(t, s.emit_room, UpdateType::SnmpPoll, true);
        }
      }
      if (k + 1 < stays.size()) {
        const auto& next = stays[k + 1];
        auto gap = next.interval.start - b;
        if (gap > Duration{0} && gap <= kMaxTravel) {
          const auto& from = campus.building(s.room);
          const auto& to = campus.building(next.room);
          auto hop = [&](Instant t, RoomId hall) {
            if (hall != s.emit_room && hall != next.emit_room) em.emit(t, hall, UpdateType::SnmpUpdate, false);
          };
          if (from == to) {
            hop(b + gap / 2, campus.hallway.at(from));
          } else {
            hop(b + gap / 3, campus.hallway.at(from));
            hop(b + gap * 2 / 3, campus.hallway.at(to));
          }
        }
      }
    }
    if (silence) {
      em.emit(silence->first.start, silence->second, UpdateType::SnmpPoll, false);
      em.emit(silence->first.end, silence->second, UpdateType::SnmpPoll, false);
    }
  }
  sc.corpus = std::move(builder).build();

  // Scores and peer evaluations.
  auto score_rng = sim_rng(config.seed, kStreamScore, 0);
  std::vector<double> means(n), stds(n);
  for (std::size_t ui = 0; ui < n; ++ui) {
    const auto& h = weekly_hours[users[ui].id];
    means[ui] = mean_value(h);
    stds[ui] = std_value(h);
    sc.meeting_hours_mean[users[ui].id] = means[ui];
    sc.meeting_hours_std[users[ui].id] = stds[ui];
  }
  auto zm = zscores(means), zs = zscores(stds);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> latent(n);
  for (std::size_t ui = 0; ui < n; ++ui) {
    double noise = normal(score_rng);
    latent[ui] = config.null_scores
                     ? noise
                     : config.score_participation * zm[ui] - config.score_consistency * zs[ui] +
                           config.score_noise * noise;
  }
  sc.scores.columns = {"score"};
  for (std::size_t ui = 0; ui < n; ++ui) {
    auto inst = users[ui].section % config.instructors;
    double mean = 75.0 + 5.0 * static_cast<double>(inst);
    double scale = 8.0 + 2.0 * static_cast<double>(inst);
    sc.scores.rows[users[ui].id] = {std::round((mean + scale * latent[ui]) * 100.0) / 100.0};
  }
  auto pe_rng = sim_rng(config.seed, kStreamPe, 0);
  sc.peer_evaluations.columns = {"member_effectiveness", "team_satisfaction", "psychological_safety",
                                 "task_conflict", "relationship_conflict", "process_conflict"};
  for (std::size_t ui = 0; ui < n; ++ui) {
    std::vector<double> row;
    for (std::size_t c = 0; c < sc.peer_evaluations.columns.size(); ++c) {
      double sign = c < 3 ? 1.0 : -1.0;
      double loading = config.null_scores ? 0.0 : config.pe_loading;
      double v = 3.0 + 0.8 * (sign * loading * latent[ui] + normal(pe_rng));
      double rounded = std::round(v * 100.0) / 100.0;
      row.push_back(chance(pe_rng, config.pe_missing) ? std::numeric_limits<double>::quiet_NaN() : rounded);
    }
    sc.peer_evaluations.rows[users[ui].id] = std::move(row);
  }
  return sc;
}

std::vector<CollocationEpisode> oracle_episodes(const Timeline& timeline,
                                                std::span<const std::string> users,
                                                const TimeInterval& window) {
  std::vector<std::string> names(users.begin(), users.end());
  std::sort(names.begin(), names.end());
  names.erase(std::unique(names.begin(), names.end()), names.end());
  std::vector<const std::vector<Stay>*> stays;
  for (const auto& u : names) {
    auto it = timeline.find(u);
    stays.push_back(it == timeline.end() ? nullptr : &it->second);
  }
  std::vector<std::size_t> cursor(names.size(), 0);
  std::map<RoomId, CollocationEpisode> open;
  std::vector<CollocationEpisode> out;
  std::map<RoomId, std::vector<std::string>> here;
  for (auto t = window.start; t < window.end;) {
    here.clear();
    auto next = window.end;
    for (std::size_t i = 0; i < names.size(); ++i) {
      if (!stays[i]) continue;
      const auto& v = *stays[i];
      auto& c = cursor[i];
      while (c < v.size() && v[c].interval.end <= t) ++c;
      if (c == v.size()) continue;
      if (v[c].interval.contains(t)) {
        here[v[c].room].push_back(names[i]);
        next = std::min(next, v[c].interval.end);
      } else {
        next = std::min(next, v[c].interval.start);
      }
    }
    for (auto it = open.begin(); it != open.end();) {
      auto h = here.find(it->first);
      if (h == here.end() || h->second != it->second.members) {
        it->second.interval.end = t;
        out.push_back(std::move(it->second));
        it = open.erase(it);
      } else {
        ++it;
      }
    }
    for (auto& [room, members] : here) {
      if (members.size() < 2 || open.contains(room)) continue;
      CollocationEpisode e;
      e.members = members;
      e.room = room;
      e.interval = {t, t};
      open.emplace(room, std::move(e));
    }
    t = next;
  }
  for (auto& [room, e] : open) {
    e.interval.end = window.end;
    out.push_back(std::move(e));
  }
  std::sort(out.begin(), out.end(), episode_less);
  return out;
}

void write_scenario(const std::string& dir, const SimScenario& sc) {
  namespace fs = std::filesystem;
  auto path = [&](const std::string& name) { return (fs::path(dir) / name).string(); };
  auto pipeline = sc.config.pipeline_config();
  write_corpus(path("logs.csv"), sc.corpus, pipeline);
  write_registry(path("aps.csv"), sc.registry);
  write_roster(path("roster.csv"), sc.roster);
  write_lectures(path("lectures.csv"), sc.schedule, pipeline);
  write_meetings(path("meetings.csv"), sc.schedule, pipeline);
  write_attendance(path("attendance.csv"), sc.attendance);
  write_user_table(path("scores.csv"), sc.scores);
  write_user_table(path("pe.csv"), sc.peer_evaluations);
  {
    auto out = open_output(path("truth/timeline.csv"));
    out << "user_id,building,room,start,end\n";
    for (const auto& [user, stays] : sc.timeline) {
      for (const auto& s : stays) {
        const auto& key = sc.registry.room(s.room);
        out << user << ',' << key.building << ',' << key.room << ','
            << format_local_datetime(s.interval.start, pipeline.utc_offset) << ','
            << format_local_datetime(s.interval.end, pipeline.utc_offset) << '\n';
      }
    }
  }
  {
    auto out = open_output(path("truth/physical.csv"));
    out << "user_id,lecture_index,present\n";
    for (const auto& [key, present] : sc.physical) {
      out << key.first << ',' << key.second << ',' << (present ? 1 : 0) << '\n';
    }
  }
  {
    auto out = open_output(path("truth/roommates.csv"));
    out << "user_a,user_b\n";
    for (const auto& [a, b] : sc.roommates) out << a << ',' << b << '\n';
  }
}

}  // namespace wifico
