#include "wifico/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "wifico/csv.hpp"
#include "wifico/error.hpp"

namespace wifico {

std::string_view to_string(DwellStatus s) {
  return s == DwellStatus::Dwelling ? "dwelling" : "disconnected";
}

std::vector<UserStream> build_user_streams(const LogCorpus& corpus, const ApRegistry& registry,
                                           std::size_t* unregistered) {
  // Resolve each AP symbol once.
  std::vector<std::optional<RoomId>> ap_rooms(corpus.aps().size());
  for (std::uint32_t a = 0; a < corpus.aps().size(); ++a) {
    if (registry.contains(corpus.aps().name(a))) ap_rooms[a] = registry.room_id_of_ap(corpus.aps().name(a));
  }
  std::size_t missing = 0;
  std::vector<UserStream> streams;
  streams.reserve(corpus.users().size());
  for (std::uint32_t u = 0; u < corpus.users().size(); ++u) {
    UserStream s;
    s.user_id = corpus.users().name(u);
    auto idx = corpus.user_events(u);
    s.events.reserve(idx.size());
    for (auto i : idx) {
      const auto& e = corpus.entries()[i];
      if (!ap_rooms[e.ap]) {
        ++missing;
        continue;
      }
      s.events.push_back({e.timestamp, *ap_rooms[e.ap], e.ap, e.device});
    }
    streams.push_back(std::move(s));
  }
  if (unregistered) *unregistered = missing;
  return streams;
}

std::vector<UserEvent> resolve_concurrent_events(std::span<const UserEvent> events, Duration window,
                                                 const ApRegistry& registry) {
  std::vector<UserEvent> out;
  out.reserve(events.size());
  std::size_t i = 0;
  while (i < events.size()) {
    std::size_t j = i;
    bool mixed = false;
    while (j < events.size() && events[j].timestamp == events[i].timestamp) {
      mixed = mixed || events[j].room != events[i].room;
      ++j;
    }
    if (!mixed) {
      out.insert(out.end(), events.begin() + i, events.begin() + j);
      i = j;
      continue;
    }
    auto t = events[i].timestamp;
    auto lo = std::lower_bound(events.begin(), events.end(), t - window,
                               [](const UserEvent& e, Instant x) { return e.timestamp < x; });
    auto hi = std::upper_bound(events.begin(), events.end(), t + window,
                               [](Instant x, const UserEvent& e) { return x < e.timestamp; });
    std::optional<RoomId> best;
    std::size_t best_count = 0;
    for (std::size_t k = i; k < j; ++k) {
      auto room = events[k].room;
      auto count = static_cast<std::size_t>(
          std::count_if(lo, hi, [&](const UserEvent& e) { return e.room == room; }));
      bool better = !best || count > best_count ||
                    (count == best_count && registry.room(room) < registry.room(*best));
      if (better) {
        best = room;
        best_count = count;
      }
    }
    for (std::size_t k = i; k < j; ++k) {
      if (events[k].room == *best) out.push_back(events[k]);
    }
    i = j;
  }
  return out;
}

std::vector<DwellSegment> classify_and_segment(const std::string& user_id,
                                               std::span<const UserEvent> raw,
                                               Duration mobility_threshold,
                                               const ApRegistry& registry) {
  auto events = resolve_concurrent_events(raw, mobility_threshold, registry);
  std::vector<DwellSegment> out;
  std::optional<DwellSegment> open;
  auto close = [&] {
    if (open) {
      open->supporting_event_count = open->support.size();
      out.push_back(std::move(*open));
      open.reset();
    }
  };
  for (std::size_t i = 0; i + 1 < events.size(); ++i) {
    const auto& a = events[i];
    const auto& b = events[i + 1];
    bool same_room = a.room == b.room;
    bool stationary = same_room || (b.timestamp - a.timestamp) >= mobility_threshold;
    if (!stationary) {
      close();
      continue;
    }
    if (open && open->room == a.room && open->interval.end == a.timestamp) {
      open->interval.end = b.timestamp;
    } else {
      close();
      open = DwellSegment{user_id, a.room, {a.timestamp, b.timestamp}, DwellStatus::Dwelling, 0, {a.timestamp}};
    }
    if (same_room) open->support.push_back(b.timestamp);
  }
  close();
  return out;
}

std::vector<DwellSegment> filter_disconnections(std::span<const DwellSegment> segments,
                                                Duration threshold) {
  std::vector<DwellSegment> out;
  for (const auto& seg : segments) {
    if (seg.status != DwellStatus::Dwelling || seg.support.empty()) {
      out.push_back(seg);
      continue;
    }
    DwellSegment piece{seg.user_id, seg.room, {seg.support.front(), seg.support.front()},
                       DwellStatus::Dwelling, 0, {}};
    bool piece_open = true;
    auto emit = [&](Instant end) {
      piece.interval.end = end;
      piece.supporting_event_count = piece.support.size();
      out.push_back(piece);
      piece.support.clear();
    };
    for (std::size_t k = 0; k < seg.support.size(); ++k) {
      auto here = seg.support[k];
      bool last = k + 1 == seg.support.size();
      auto next = last ? seg.interval.end : seg.support[k + 1];
      if (!piece_open) {
        piece.interval.start = here;
        piece_open = true;
      }
      piece.support.push_back(here);
      if (next - here > threshold) {
        emit(here);
        out.push_back({seg.user_id, seg.room, {here, next}, DwellStatus::Disconnected, 0, {}});
        piece_open = false;
      }
    }
    if (piece_open) emit(seg.interval.end);
  }
  return out;
}

double quantile_linear(std::vector<double> values, double q) {
  if (values.empty()) throw Error("quantile of empty sample");
  std::sort(values.begin(), values.end());
  double h = (static_cast<double>(values.size()) - 1.0) * q;
  auto lo = static_cast<std::size_t>(std::floor(h));
  auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

double median_of(std::vector<double> values) { return quantile_linear(std::move(values), 0.5); }

namespace {

LearnedThreshold to_threshold(double seconds, std::size_t n) {
  return {Duration{static_cast<std::int64_t>(std::llround(seconds))}, seconds, n};
}

// Entries of one user with timestamps in [from, to].
std::pair<std::size_t, std::size_t> window_range(const LogCorpus& corpus,
                                                 std::span<const std::size_t> idx, Instant from,
                                                 Instant to) {
  const auto& entries = corpus.entries();
  auto lo = std::lower_bound(idx.begin(), idx.end(), from,
                             [&](std::size_t i, Instant t) { return entries[i].timestamp < t; });
  auto hi = std::upper_bound(idx.begin(), idx.end(), to,
                             [&](Instant t, std::size_t i) { return t < entries[i].timestamp; });
  return {static_cast<std::size_t>(lo - idx.begin()), static_cast<std::size_t>(hi - idx.begin())};
}

}  // namespace

LearnedThreshold learn_mobility_threshold(const LogCorpus& corpus, const Schedule& schedule,
                                          const Roster& roster, Duration margin) {
  std::map<std::string, std::vector<std::uint32_t>> section_users;
  for (std::uint32_t u = 0; u < corpus.users().size(); ++u) {
    const auto& name = corpus.users().name(u);
    if (roster.contains(name)) section_users[roster.section(name)].push_back(u);
  }
  std::set<std::pair<std::uint32_t, std::size_t>> seen;  // (user, position of the first event)
  std::vector<double> gaps;
  const auto& entries = corpus.entries();
  for (const auto& lecture : schedule.lectures) {
    auto it = section_users.find(lecture.section_id);
    if (it == section_users.end()) continue;
    for (auto u : it->second) {
      auto idx = corpus.user_events(u);
      auto [lo, hi] = window_range(corpus, idx, lecture.interval.start - margin, lecture.interval.end + margin);
      for (std::size_t k = lo; k + 1 < hi; ++k) {
        const auto& a = entries[idx[k]];
        const auto& b = entries[idx[k + 1]];
        if (a.ap == b.ap) continue;
        if (!seen.insert({u, k}).second) continue;
        gaps.push_back(static_cast<double>((b.timestamp - a.timestamp).count()));
      }
    }
  }
  if (gaps.empty()) {
    throw Error("cannot learn mobility threshold: no successive different-AP events around lectures; "
                "set mobility_threshold explicitly");
  }
  auto n = gaps.size();
  return to_threshold(quantile_linear(std::move(gaps), 0.9), n);
}

LearnedThreshold learn_disconnection_threshold(const LogCorpus& corpus,
                                               const AttendanceRecord& attendance,
                                               const Schedule& schedule) {
  std::optional<Duration> longest;
  std::size_t n = 0;
  const auto& entries = corpus.entries();
  for (const auto& [key, present] : attendance.present) {
    if (!present || key.second >= schedule.lectures.size()) continue;
    auto user = corpus.users().find(key.first);
    if (!user) continue;
    const auto& lecture = schedule.lectures[key.second];
    auto idx = corpus.user_events(*user);
    auto [lo, hi] = window_range(corpus, idx, lecture.interval.start, lecture.interval.end);
    for (std::size_t k = lo; k + 1 < hi; ++k) {
      auto gap = entries[idx[k + 1]].timestamp - entries[idx[k]].timestamp;
      longest = longest ? std::max(*longest, gap) : gap;
      ++n;
    }
  }
  if (!longest) {
    throw Error("cannot learn disconnection threshold: no attended lecture has two events; "
                "set disconnection_threshold explicitly");
  }
  return {*longest, static_cast<double>(longest->count()), n};
}

SegmentationResult segment_corpus(const LogCorpus& corpus, const ApRegistry& registry,
                                  Duration mobility_threshold, Duration disconnection_threshold) {
  SegmentationResult result;
  result.mobility_threshold = mobility_threshold;
  result.disconnection_threshold = disconnection_threshold;
  for (const auto& stream : build_user_streams(corpus, registry, &result.unregistered_events)) {
    auto segments = classify_and_segment(stream.user_id, stream.events, mobility_threshold, registry);
    result.dwells[stream.user_id] = filter_disconnections(segments, disconnection_threshold);
  }
  return result;
}

void write_dwells(const std::string& path, const DwellTable& dwells, const ApRegistry& registry,
                  const PipelineConfig& config) {
  auto out = open_output(path);
  out << "user_id,building,room,start,end,status,events\n";
  for (const auto& [user, segments] : dwells) {
    for (const auto& s : segments) {
      const auto& key = registry.room(s.room);
      out << user << ',' << key.building << ',' << key.room << ','
          << format_local_datetime(s.interval.start, config.utc_offset) << ','
          << format_local_datetime(s.interval.end, config.utc_offset) << ',' << to_string(s.status)
          << ',' << s.supporting_event_count << '\n';
    }
  }
}

DwellTable load_dwells(const std::string& path, const ApRegistry& registry,
                       const PipelineConfig& config) {
  CsvReader reader(path, {"user_id", "building", "room", "start", "end", "status", "events"});
  DwellTable table;
  std::vector<std::string> f;
  while (reader.next(f)) {
    auto line = reader.line_number();
    if (f.size() != 7) throw ParseError(line, path + ": expected 7 fields");
    try {
      DwellSegment s;
      s.user_id = f[0];
      s.room = registry.room_id({f[1], f[2]});
      s.interval = make_interval(parse_local_datetime(f[3], config.utc_offset),
                                 parse_local_datetime(f[4], config.utc_offset));
      if (f[5] == "dwelling") s.status = DwellStatus::Dwelling;
      else if (f[5] == "disconnected") s.status = DwellStatus::Disconnected;
      else throw Error("unknown status '" + f[5] + "'");
      s.supporting_event_count = std::stoul(f[6]);
      table[s.user_id].push_back(std::move(s));
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception& e) {
      throw ParseError(line, e.what());
    }
  }
  return table;
}

}  // namespace wifico
