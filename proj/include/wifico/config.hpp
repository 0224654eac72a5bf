#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "wifico/interval.hpp"
#include "wifico/time.hpp"

namespace wifico {

// Parsed `key = value` file; '#' starts a comment. Consumers take() the
// keys they understand so leftovers can be reported as unknown.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::string_view text);
  static KeyValueConfig load(const std::string& path);

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  std::optional<std::string> take(const std::string& key);
  bool has(const std::string& key) const { return values_.contains(key); }

  // Throws ConfigError naming every key nobody consumed.
  void require_all_consumed() const;
  std::set<std::string> unconsumed() const;
  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
  std::set<std::string> consumed_;
};

// A threshold is either fixed or learned from data (nullopt).
using ThresholdSetting = std::optional<Duration>;

ThresholdSetting parse_threshold(std::string_view text);
std::string format_threshold(const ThresholdSetting& t);

enum class GapLearningScope { Group, Cohort };

struct PipelineConfig {
  // Documented defaults: 233 s, 76 min, 11 min 7 s.
  ThresholdSetting mobility_threshold = Duration{233};
  ThresholdSetting disconnection_threshold = Duration{76 * 60};
  ThresholdSetting gap_threshold = Duration{667};
  Duration margin_before_after{30 * 60};
  int apen_m = 2;
  double apen_r_factor = 0.2;
  unsigned week_anchor = 1;  // 0 = Sunday; Monday by default
  Duration utc_offset{-5 * 3600};
  TimeInterval study_window = default_study_window();
  int reference_year = 2019;
  double max_unparseable_fraction = 0.01;
  GapLearningScope gap_learning_scope = GapLearningScope::Group;
  bool bridged_graphs = true;

  static TimeInterval default_study_window();

  // Throws ConfigError for any field outside its range.
  void validate() const;

  Instant first_week_start() const;
  std::size_t week_count() const;
  TimeInterval week_interval(std::size_t week) const;
  // nullopt when t is outside [first_week_start, first_week_start + weeks).
  std::optional<std::size_t> week_of(Instant t) const;

  // Stable text form; used for manifest hashing.
  std::string canonical_text() const;
};

void apply(KeyValueConfig& kv, PipelineConfig& config);

}  // namespace wifico
