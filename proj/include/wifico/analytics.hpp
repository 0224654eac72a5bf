#pragma once

#include <array>
#include <iterator>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "wifico/collocation.hpp"
#include "wifico/config.hpp"
#include "wifico/validation.hpp"

namespace wifico {

struct InteractionGraph {
  std::string period;                         // "week-<n>" or "semester"
  std::map<std::string, std::string> nodes;   // user -> group
  PairDurations edges;                        // positive weights only

  friend bool operator==(const InteractionGraph&, const InteractionGraph&) = default;
};

// Episodes may span groups. Each pair's weight excludes the lectures of both
// users' sections.
std::vector<InteractionGraph> weekly_graphs(std::span<const CollocationEpisode> episodes,
                                            const Roster& roster, const Schedule& schedule,
                                            const PipelineConfig& config);

// Lecture exclusion used by weekly_graphs, exposed for cross-checks.
PairExclusion section_lecture_exclusion(const Roster& roster, const Schedule& schedule);

InteractionGraph aggregate_graph(std::span<const InteractionGraph> graphs);

// kind,source,target,value rows: one "period", then "node" and "edge" rows.
void write_graph_csv(const std::string& path, const InteractionGraph& graph);
InteractionGraph load_graph_csv(const std::string& path);
std::string to_dot(const InteractionGraph& graph);

enum class Phase { Before, During, After };
std::string_view to_string(Phase p);
Phase phase_of(std::size_t week, std::size_t midterm_week);

inline constexpr std::size_t kCategoryCount = std::size(kAllCategories);

struct SpaceUsage {
  // [week][category index in kAllCategories] mean collocated seconds per participant
  std::vector<std::array<double, kCategoryCount>> weekly;

  // Mean over the weeks of each phase.
  std::map<Phase, std::array<double, kCategoryCount>> by_phase(std::size_t midterm_week) const;
};

SpaceUsage space_usage(std::span<const CollocationEpisode> episodes, const ApRegistry& registry,
                       const Roster& roster, const PipelineConfig& config);

void write_space_usage_csv(const std::string& path, const SpaceUsage& usage, std::size_t midterm_week);

struct PunctualityRecord {
  std::string user_id;
  std::size_t lecture = 0;
  Duration entry{};  // positive = after the lecture starts
  Duration exit{};   // positive = after the lecture ends
};

struct Punctuality {
  std::vector<PunctualityRecord> records;
  double median_entry_seconds = 0.0;
  double median_exit_seconds = 0.0;
};

// Present attendees only; uses Dwelling segments at the lecture room that
// overlap the lecture.
Punctuality punctuality(const DwellTable& dwells, const Schedule& schedule,
                        const ApRegistry& registry, const AttendanceInference& attendance);

void write_punctuality_csv(const std::string& path, const Punctuality& p);

}  // namespace wifico
