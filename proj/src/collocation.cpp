#include "wifico/collocation.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <tuple>

#include "wifico/csv.hpp"
#include "wifico/error.hpp"

namespace wifico {

std::string_view to_string(Context c) {
  switch (c) {
    case Context::Scheduled: return "scheduled";
    case Context::Class: return "class";
    case Context::Other: return "other";
  }
  return "other";
}

bool episode_less(const CollocationEpisode& a, const CollocationEpisode& b) {
  return std::tie(a.interval.start, a.room, a.members, a.interval.end) <
         std::tie(b.interval.start, b.room, b.members, b.interval.end);
}

std::int64_t person_seconds(std::span<const CollocationEpisode> episodes) {
  std::int64_t total = 0;
  for (const auto& e : episodes) {
    total += e.interval.duration().count() * static_cast<std::int64_t>(e.members.size());
  }
  return total;
}

std::vector<CollocationEpisode> raw_overlaps(const DwellTable& dwells,
                                             std::span<const std::string> users) {
  std::vector<std::string> names(users.begin(), users.end());
  std::sort(names.begin(), names.end());
  names.erase(std::unique(names.begin(), names.end()), names.end());

  struct Boundary {
    Instant t;
    int delta;
    std::uint32_t user;
  };
  std::map<RoomId, std::vector<Boundary>> by_room;
  for (std::uint32_t u = 0; u < names.size(); ++u) {
    auto it = dwells.find(names[u]);
    if (it == dwells.end()) continue;
    for (const auto& s : it->second) {
      if (s.status != DwellStatus::Dwelling || s.interval.empty()) continue;
      auto& b = by_room[s.room];
      b.push_back({s.interval.start, +1, u});
      b.push_back({s.interval.end, -1, u});
    }
  }

  std::vector<CollocationEpisode> out;
  std::vector<int> active(names.size(), 0);
  for (auto& [room, bounds] : by_room) {
    std::sort(bounds.begin(), bounds.end(), [](const Boundary& a, const Boundary& b) {
      return std::tie(a.t, a.delta, a.user) < std::tie(b.t, b.delta, b.user);
    });
    std::fill(active.begin(), active.end(), 0);
    std::vector<std::uint32_t> current;  // members of the open episode
    std::optional<CollocationEpisode> open;
    std::size_t i = 0;
    while (i < bounds.size()) {
      auto t = bounds[i].t;
      while (i < bounds.size() && bounds[i].t == t) {
        active[bounds[i].user] += bounds[i].delta;
        ++i;
      }
      std::vector<std::uint32_t> present;
      for (std::uint32_t u = 0; u < active.size(); ++u) {
        if (active[u] > 0) present.push_back(u);
      }
      if (open && present == current) continue;
      if (open) {
        open->interval.end = t;
        out.push_back(std::move(*open));
        open.reset();
      }
      current = present;
      if (present.size() >= 2) {
        CollocationEpisode e;
        for (auto u : present) e.members.push_back(names[u]);
        e.room = room;
        e.interval = {t, t};
        open = std::move(e);
      }
    }
  }
  std::sort(out.begin(), out.end(), episode_less);
  return out;
}

namespace {

using RoomDwells = std::map<std::pair<std::string, RoomId>, std::vector<TimeInterval>>;

RoomDwells index_dwells(const DwellTable& dwells) {
  RoomDwells out;
  for (const auto& [user, segments] : dwells) {
    for (const auto& s : segments) {
      if (s.status == DwellStatus::Dwelling && !s.interval.empty()) {
        out[{user, s.room}].push_back(s.interval);
      }
    }
  }
  for (auto& [key, v] : out) v = merge_intervals(std::move(v));
  return out;
}

// Someone stays throughout the gap, and the full set is never together
// during it (otherwise nobody was absent).
bool gap_covered(const TimeInterval& gap, const std::vector<std::string>& members, RoomId room,
                 const RoomDwells& index) {
  std::vector<TimeInterval> pieces;
  std::vector<TimeInterval> together{gap};
  for (const auto& m : members) {
    auto it = index.find({m, room});
    auto clipped = it == index.end() ? std::vector<TimeInterval>{} : clip_intervals(it->second, gap);
    together = subtract_intervals(together, subtract_intervals(std::vector<TimeInterval>{gap}, clipped));
    pieces.insert(pieces.end(), clipped.begin(), clipped.end());
  }
  return together.empty() && fully_covered(gap, merge_intervals(std::move(pieces)));
}

// Raw episodes grouped by (room, member set), each list in start order.
std::map<std::pair<RoomId, std::vector<std::string>>, std::vector<const CollocationEpisode*>>
chains(std::span<const CollocationEpisode> raw) {
  std::map<std::pair<RoomId, std::vector<std::string>>, std::vector<const CollocationEpisode*>> out;
  for (const auto& e : raw) out[{e.room, e.members}].push_back(&e);
  for (auto& [key, list] : out) {
    std::sort(list.begin(), list.end(),
              [](auto* a, auto* b) { return a->interval.start < b->interval.start; });
  }
  return out;
}

}  // namespace

std::vector<TimeInterval> qualifying_gaps(std::span<const CollocationEpisode> raw,
                                          const DwellTable& dwells) {
  auto index = index_dwells(dwells);
  std::vector<TimeInterval> out;
  for (const auto& [key, list] : chains(raw)) {
    for (std::size_t i = 0; i + 1 < list.size(); ++i) {
      TimeInterval gap{list[i]->interval.end, list[i + 1]->interval.start};
      if (gap.empty()) continue;
      if (gap_covered(gap, key.second, key.first, index)) out.push_back(gap);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

LearnedThreshold learn_gap_threshold(std::span<const CollocationEpisode> raw,
                                     const DwellTable& dwells) {
  auto gaps = qualifying_gaps(raw, dwells);
  if (gaps.empty()) {
    throw Error("cannot learn gap threshold: no qualifying gaps; set gap_threshold explicitly (default 667s)");
  }
  std::vector<double> seconds;
  for (const auto& g : gaps) seconds.push_back(static_cast<double>(g.duration().count()));
  double m = median_of(seconds);
  return {Duration{static_cast<std::int64_t>(std::llround(m))}, m, seconds.size()};
}

std::vector<CollocationEpisode> bridge_gaps(std::span<const CollocationEpisode> raw,
                                            const DwellTable& dwells, Duration gap_threshold) {
  auto index = index_dwells(dwells);
  std::vector<CollocationEpisode> out;
  for (const auto& [key, list] : chains(raw)) {
    CollocationEpisode open = *list.front();
    for (std::size_t i = 1; i < list.size(); ++i) {
      const auto& next = *list[i];
      TimeInterval gap{open.interval.end, next.interval.start};
      bool merge = !gap.empty() && gap.duration() < gap_threshold &&
                   gap_covered(gap, key.second, key.first, index);
      if (merge) {
        open.interval.end = next.interval.end;
        open.bridged_gaps.push_back(gap);
        open.bridged_gaps.insert(open.bridged_gaps.end(), next.bridged_gaps.begin(),
                                 next.bridged_gaps.end());
      } else {
        out.push_back(std::move(open));
        open = next;
      }
    }
    out.push_back(std::move(open));
  }
  std::sort(out.begin(), out.end(), episode_less);
  return out;
}

PairKey make_pair_key(const std::string& a, const std::string& b) {
  return a < b ? PairKey{a, b} : PairKey{b, a};
}

Duration pair_duration(const PairDurations& d, const std::string& a, const std::string& b) {
  auto it = d.find(make_pair_key(a, b));
  return it == d.end() ? Duration{0} : it->second;
}

Duration row_sum(const PairDurations& d, const std::string& user) {
  Duration total{0};
  for (const auto& [key, value] : d) {
    if (key.first == user || key.second == user) total += value;
  }
  return total;
}

PairDurations pairwise_durations(std::span<const CollocationEpisode> episodes,
                                 const TimeInterval& period, const PairExclusion& exclude) {
  std::map<PairKey, std::vector<TimeInterval>> pieces;
  for (const auto& e : episodes) {
    auto clipped = interval_overlap(e.interval, period);
    if (!clipped) continue;
    for (std::size_t i = 0; i < e.members.size(); ++i) {
      for (std::size_t j = i + 1; j < e.members.size(); ++j) {
        pieces[make_pair_key(e.members[i], e.members[j])].push_back(*clipped);
      }
    }
  }
  PairDurations out;
  for (auto& [key, list] : pieces) {
    auto merged = merge_intervals(std::move(list));
    auto excluded = exclude(key.first, key.second);
    Duration total = total_duration(merged);
    for (const auto& m : merged) total -= covered_duration(m, excluded);
    if (total.count() > 0) out.emplace(key, total);
  }
  return out;
}

PairDurations pairwise_durations(std::span<const CollocationEpisode> episodes,
                                 const TimeInterval& period,
                                 std::span<const TimeInterval> exclude) {
  auto merged = merge_intervals({exclude.begin(), exclude.end()});
  return pairwise_durations(episodes, period,
                            [&](const std::string&, const std::string&) {
                              return std::span<const TimeInterval>(merged);
                            });
}

void write_episodes(const std::string& path, std::span<const CollocationEpisode> episodes,
                    const ApRegistry& registry, const PipelineConfig& config) {
  auto out = open_output(path);
  out << "members,building,room,start,end,bridged_seconds\n";
  for (const auto& e : episodes) {
    const auto& key = registry.room(e.room);
    std::int64_t bridged = 0;
    for (const auto& g : e.bridged_gaps) bridged += g.duration().count();
    out << join_fields(e.members, ';') << ',' << key.building << ',' << key.room << ','
        << format_local_datetime(e.interval.start, config.utc_offset) << ','
        << format_local_datetime(e.interval.end, config.utc_offset) << ',' << bridged << '\n';
  }
}

std::vector<CollocationEpisode> load_episodes(const std::string& path, const ApRegistry& registry,
                                              const PipelineConfig& config) {
  CsvReader reader(path, {"members", "building", "room", "start", "end", "bridged_seconds"});
  std::vector<CollocationEpisode> out;
  std::vector<std::string> f;
  while (reader.next(f)) {
    auto line = reader.line_number();
    if (f.size() != 6) throw ParseError(line, path + ": expected 6 fields");
    try {
      CollocationEpisode e;
      e.members = split_fields(f[0], ';');
      if (e.members.size() < 2) throw Error("episode needs at least two members");
      e.room = registry.room_id({f[1], f[2]});
      e.interval = make_interval(parse_local_datetime(f[3], config.utc_offset),
                                 parse_local_datetime(f[4], config.utc_offset));
      out.push_back(std::move(e));
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception& ex) {
      throw ParseError(line, ex.what());
    }
  }
  return out;
}

}  // namespace wifico
