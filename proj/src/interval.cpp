#include "wifico/interval.hpp"

#include <algorithm>

#include "wifico/error.hpp"

namespace wifico {

TimeInterval make_interval(Instant start, Instant end) {
  if (end < start) throw Error("interval end precedes start");
  return {start, end};
}

std::optional<TimeInterval> interval_overlap(const TimeInterval& a, const TimeInterval& b) {
  auto start = std::max(a.start, b.start);
  auto end = std::min(a.end, b.end);
  if (start < end) return TimeInterval{start, end};
  return std::nullopt;
}

Duration overlap_duration(const TimeInterval& a, const TimeInterval& b) {
  auto o = interval_overlap(a, b);
  return o ? o->duration() : Duration{0};
}

std::vector<TimeInterval> merge_intervals(std::vector<TimeInterval> parts) {
  std::erase_if(parts, [](const TimeInterval& i) { return i.empty(); });
  std::sort(parts.begin(), parts.end());
  std::vector<TimeInterval> out;
  for (const auto& p : parts) {
    if (!out.empty() && p.start <= out.back().end) {
      out.back().end = std::max(out.back().end, p.end);
    } else {
      out.push_back(p);
    }
  }
  return out;
}

Duration total_duration(std::span<const TimeInterval> disjoint) {
  Duration total{0};
  for (const auto& i : disjoint) total += i.duration();
  return total;
}

Duration covered_duration(const TimeInterval& interval, std::span<const TimeInterval> merged) {
  if (interval.empty()) return Duration{0};
  auto it = std::lower_bound(merged.begin(), merged.end(), interval.start,
                             [](const TimeInterval& m, Instant t) { return m.end <= t; });
  Duration total{0};
  for (; it != merged.end() && it->start < interval.end; ++it) {
    total += overlap_duration(*it, interval);
  }
  return total;
}

bool fully_covered(const TimeInterval& interval, std::span<const TimeInterval> merged) {
  return covered_duration(interval, merged) == interval.duration();
}

std::vector<TimeInterval> subtract_intervals(std::span<const TimeInterval> a,
                                             std::span<const TimeInterval> b) {
  auto left = merge_intervals({a.begin(), a.end()});
  auto right = merge_intervals({b.begin(), b.end()});
  std::vector<TimeInterval> out;
  std::size_t j = 0;
  for (auto piece : left) {
    while (j < right.size() && right[j].end <= piece.start) ++j;
    std::size_t k = j;
    auto cursor = piece.start;
    while (k < right.size() && right[k].start < piece.end) {
      if (right[k].start > cursor) out.push_back({cursor, right[k].start});
      cursor = std::max(cursor, right[k].end);
      ++k;
    }
    if (cursor < piece.end) out.push_back({cursor, piece.end});
  }
  return out;
}

std::vector<TimeInterval> clip_intervals(std::span<const TimeInterval> merged,
                                         const TimeInterval& window) {
  std::vector<TimeInterval> out;
  for (const auto& m : merged) {
    if (auto o = interval_overlap(m, window)) out.push_back(*o);
  }
  return out;
}

}  // namespace wifico
