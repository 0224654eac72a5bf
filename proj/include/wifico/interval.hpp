#pragma once

#include <compare>
#include <optional>
#include <span>
#include <vector>

#include "wifico/time.hpp"

namespace wifico {

// Half-open [start, end); zero-length intervals are valid values.
struct TimeInterval {
  Instant start{};
  Instant end{};

  Duration duration() const { return end - start; }
  bool empty() const { return end <= start; }
  bool contains(Instant t) const { return start <= t && t < end; }

  friend auto operator<=>(const TimeInterval&, const TimeInterval&) = default;
};

// Throws Error when end < start.
TimeInterval make_interval(Instant start, Instant end);

// Intersection iff it has positive length; touching endpoints do not overlap.
std::optional<TimeInterval> interval_overlap(const TimeInterval& a, const TimeInterval& b);

Duration overlap_duration(const TimeInterval& a, const TimeInterval& b);

// Sorted, disjoint, non-touching union of the positive-length inputs.
std::vector<TimeInterval> merge_intervals(std::vector<TimeInterval> parts);

Duration total_duration(std::span<const TimeInterval> disjoint);

// Measure of `interval` covered by a merged (sorted, disjoint) set.
Duration covered_duration(const TimeInterval& interval, std::span<const TimeInterval> merged);

// True iff every instant of `interval` is inside the merged set.
bool fully_covered(const TimeInterval& interval, std::span<const TimeInterval> merged);

// merged(a) minus merged(b).
std::vector<TimeInterval> subtract_intervals(std::span<const TimeInterval> a,
                                             std::span<const TimeInterval> b);

// Pieces of a merged set clipped to `window`.
std::vector<TimeInterval> clip_intervals(std::span<const TimeInterval> merged,
                                         const TimeInterval& window);

}  // namespace wifico
