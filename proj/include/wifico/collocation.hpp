#pragma once

#include <functional>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "wifico/model.hpp"
#include "wifico/segmentation.hpp"

namespace wifico {

enum class Context { Scheduled, Class, Other };

std::string_view to_string(Context c);

struct CollocationEpisode {
  std::vector<std::string> members;  // sorted, at least two
  RoomId room;
  TimeInterval interval;
  std::vector<TimeInterval> bridged_gaps;
  Context context = Context::Other;

  friend bool operator==(const CollocationEpisode&, const CollocationEpisode&) = default;
};

// Orders by (start, room, members, end).
bool episode_less(const CollocationEpisode& a, const CollocationEpisode& b);

// Sum over episodes of duration x member count.
std::int64_t person_seconds(std::span<const CollocationEpisode> episodes);

// Maximal intervals during which a fixed set of >= 2 users from `users`
// shares one room key. A membership change ends one episode and starts the
// next. Only positive-length Dwelling segments participate.
std::vector<CollocationEpisode> raw_overlaps(const DwellTable& dwells,
                                             std::span<const std::string> users);

// Positive gaps between consecutive episodes of the same member set and room
// that are continuously covered by some member dwelling at that room.
std::vector<TimeInterval> qualifying_gaps(std::span<const CollocationEpisode> raw,
                                          const DwellTable& dwells);

// Median qualifying gap. Throws Error when there is none; callers fall back
// to a configured threshold (documented default 667 s).
LearnedThreshold learn_gap_threshold(std::span<const CollocationEpisode> raw,
                                     const DwellTable& dwells);

// Greedy left-to-right: a qualifying gap strictly below the threshold merges
// its flanking episodes; chains merge transitively.
std::vector<CollocationEpisode> bridge_gaps(std::span<const CollocationEpisode> raw,
                                            const DwellTable& dwells, Duration gap_threshold);

using PairKey = std::pair<std::string, std::string>;  // first < second
using PairDurations = std::map<PairKey, Duration>;    // absent pairs are zero

PairKey make_pair_key(const std::string& a, const std::string& b);
Duration pair_duration(const PairDurations& d, const std::string& a, const std::string& b);
Duration row_sum(const PairDurations& d, const std::string& user);

// Per unordered pair: measure of the union of the episodes containing both,
// within `period`, minus `exclude`.
PairDurations pairwise_durations(std::span<const CollocationEpisode> episodes,
                                 const TimeInterval& period,
                                 std::span<const TimeInterval> exclude);

// Same, with exclusions chosen per pair (merged, sorted interval sets).
using PairExclusion =
    std::function<std::span<const TimeInterval>(const std::string&, const std::string&)>;
PairDurations pairwise_durations(std::span<const CollocationEpisode> episodes,
                                 const TimeInterval& period, const PairExclusion& exclude);

// episodes.csv: members,building,room,start,end,bridged_seconds
void write_episodes(const std::string& path, std::span<const CollocationEpisode> episodes,
                    const ApRegistry& registry, const PipelineConfig& config);
std::vector<CollocationEpisode> load_episodes(const std::string& path, const ApRegistry& registry,
                                              const PipelineConfig& config);

}  // namespace wifico
