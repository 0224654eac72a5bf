#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "wifico/config.hpp"
#include "wifico/ingest.hpp"
#include "wifico/model.hpp"

namespace wifico {

enum class DwellStatus { Dwelling, Disconnected };

std::string_view to_string(DwellStatus s);

struct DwellSegment {
  std::string user_id;
  RoomId room;
  TimeInterval interval;
  DwellStatus status = DwellStatus::Dwelling;
  std::size_t supporting_event_count = 0;
  // Timestamps of the supporting events; empty for Disconnected and for
  // segments reloaded from dwells.csv.
  std::vector<Instant> support;

  friend bool operator==(const DwellSegment&, const DwellSegment&) = default;
};

// Per-user segments, time-ordered.
using DwellTable = std::map<std::string, std::vector<DwellSegment>>;

// One user's merged stream over all of their devices.
struct UserEvent {
  Instant timestamp{};
  RoomId room;
  std::uint32_t ap = 0;
  std::uint32_t device = 0;
};

struct UserStream {
  std::string user_id;
  std::vector<UserEvent> events;
};


// Events at unregistered APs are skipped; `unregistered` counts them.
std::vector<UserStream> build_user_streams(const LogCorpus& corpus, const ApRegistry& registry,
                                           std::size_t* unregistered = nullptr);

// Events sharing a timestamp at different room keys: keep the room with the
// most events within +-window, ties to the lexicographically smaller key.
std::vector<UserEvent> resolve_concurrent_events(std::span<const UserEvent> events, Duration window,
                                                 const ApRegistry& registry);

// Stationary between successive events at the same room key, or when the gap
// reaches the mobility threshold (attributed to the earlier event's room);
// moving otherwise. Contiguous stationary stretches at one room merge.
std::vector<DwellSegment> classify_and_segment(const std::string& user_id,
                                               std::span<const UserEvent> events,
                                               Duration mobility_threshold,
                                               const ApRegistry& registry);

// Splits out as Disconnected every span between successive support points
// (supporting events, then segment end) longer than the threshold.
std::vector<DwellSegment> filter_disconnections(std::span<const DwellSegment> segments,
                                                Duration disconnection_threshold);

struct LearnedThreshold {
  Duration value{};           // rounded to the nearest second
  double exact_seconds = 0.0;
  std::size_t samples = 0;
};

// Linear interpolation between order statistics (h = (n - 1) q).
double quantile_linear(std::vector<double> values, double q);
double median_of(std::vector<double> values);

// 90th quantile of intervals between successive same-user events at
// different APs inside [lecture.start - margin, lecture.end + margin] for the
// lecture's section. Throws Error when no pair qualifies.
LearnedThreshold learn_mobility_threshold(const LogCorpus& corpus, const Schedule& schedule,
                                          const Roster& roster, Duration margin);

// Longest interval between successive events of a student recorded present,
// within the lecture interval. Throws Error without any such pair.
LearnedThreshold learn_disconnection_threshold(const LogCorpus& corpus,
                                               const AttendanceRecord& attendance,
                                               const Schedule& schedule);

struct SegmentationResult {
  DwellTable dwells;
  Duration mobility_threshold{};
  Duration disconnection_threshold{};
  std::size_t unregistered_events = 0;
};

SegmentationResult segment_corpus(const LogCorpus& corpus, const ApRegistry& registry,
                                  Duration mobility_threshold, Duration disconnection_threshold);

// dwells.csv: user_id,building,room,start,end,status,events
void write_dwells(const std::string& path, const DwellTable& dwells, const ApRegistry& registry,
                  const PipelineConfig& config);
DwellTable load_dwells(const std::string& path, const ApRegistry& registry,
                       const PipelineConfig& config);

}  // namespace wifico
