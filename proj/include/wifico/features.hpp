#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "wifico/collocation.hpp"
#include "wifico/config.hpp"
#include "wifico/ingest.hpp"
#include "wifico/validation.hpp"

namespace wifico {

enum class FeatureCategory { Any, Academic, Residential, Recreation };

std::string_view to_string(FeatureCategory c);
bool category_matches(FeatureCategory feature, BuildingCategory building);

struct ContextCell {
  Context context;
  FeatureCategory category;
};

inline constexpr std::array<ContextCell, 9> kContextCells{{
    {Context::Scheduled, FeatureCategory::Any},
    {Context::Scheduled, FeatureCategory::Academic},
    {Context::Scheduled, FeatureCategory::Residential},
    {Context::Scheduled, FeatureCategory::Recreation},
    {Context::Class, FeatureCategory::Academic},
    {Context::Other, FeatureCategory::Any},
    {Context::Other, FeatureCategory::Academic},
    {Context::Other, FeatureCategory::Residential},
    {Context::Other, FeatureCategory::Recreation},
}};

inline constexpr std::size_t kIndividualRaw = 5;
inline constexpr std::size_t kCollocationRaw = 2 * kContextCells.size();
inline constexpr std::size_t kStatCount = 4;
inline constexpr std::size_t kIndividualFeatures = kIndividualRaw * kStatCount;
inline constexpr std::size_t kCollocationFeatures = kCollocationRaw * kStatCount;

// Raw weekly names, e.g. "indiv_any_dwell", "scheduled_any_abs".
const std::vector<std::string>& individual_raw_names();
const std::vector<std::string>& collocation_raw_names();
// Summary columns "<raw>_<stat>" with stat in mean, median, std, apen.
const std::vector<std::string>& individual_feature_columns();
const std::vector<std::string>& collocation_feature_columns();
std::vector<std::string> all_feature_columns();

// Scheduled if the episode overlaps a meeting window whose building list
// allows the episode's building; else Class if it overlaps `class_times`;
// else Other.
Context classify_context(const CollocationEpisode& episode,
                         std::span<const Meeting* const> group_meetings,
                         std::span<const TimeInterval> class_times, const std::string& building);

// Convenience form: group and sections are taken from the episode members.
Context classify_context(const CollocationEpisode& episode, const Schedule& schedule,
                         const Roster& roster, const ApRegistry& registry);

struct WeeklyFeatures {
  std::string user_id;
  std::size_t week = 0;
  // attendance, dwell any/academic/residential/recreation (seconds)
  std::array<double, kIndividualRaw> individual{};
  // per context cell: absolute seconds, relative fraction
  std::array<double, kCollocationRaw> collocation{};
};

// `group_episodes` are the user's group episodes with contexts assigned.
WeeklyFeatures weekly_features(const std::string& user, const DwellTable& dwells,
                               std::span<const CollocationEpisode> group_episodes,
                               std::size_t attendance_count, const ApRegistry& registry,
                               const TimeInterval& week, std::size_t week_index);

// Throws Error when series.size() <= m or r <= 0.
double approx_entropy(std::span<const double> series, int m, double r);

double mean_of(std::span<const double> v);
double population_std(std::span<const double> v);

struct FeatureVector {
  std::string user_id;
  std::vector<double> individual;   // kIndividualFeatures
  std::vector<double> collocation;  // kCollocationFeatures

  std::vector<double> all() const;
};

// ApEn is NaN when a non-constant series has no more than apen_m weeks.
FeatureVector semester_summary(const std::string& user, std::span<const WeeklyFeatures> weeks,
                               int apen_m, double apen_r_factor);

struct FeatureExtraction {
  std::vector<CollocationEpisode> episodes;  // contexts assigned
  std::map<std::string, std::vector<WeeklyFeatures>> weekly;
  std::vector<FeatureVector> vectors;  // roster order
};

// Per-group episodes (members within one group), for all roster users.
FeatureExtraction extract_features(const DwellTable& dwells,
                                   std::span<const CollocationEpisode> group_episodes,
                                   const AttendanceInference& attendance,
                                   const Schedule& schedule, const Roster& roster,
                                   const ApRegistry& registry, const PipelineConfig& config);

UserTable to_table(std::span<const FeatureVector> vectors);
std::vector<FeatureVector> from_table(const UserTable& table);

}  // namespace wifico
