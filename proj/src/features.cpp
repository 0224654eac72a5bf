#include "wifico/features.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "wifico/error.hpp"

namespace wifico {

std::string_view to_string(FeatureCategory c) {
  switch (c) {
    case FeatureCategory::Any: return "any";
    case FeatureCategory::Academic: return "academic";
    case FeatureCategory::Residential: return "residential";
    case FeatureCategory::Recreation: return "recreation";
  }
  return "any";
}

bool category_matches(FeatureCategory feature, BuildingCategory building) {
  switch (feature) {
    case FeatureCategory::Any: return true;
    case FeatureCategory::Academic: return building == BuildingCategory::Academic;
    case FeatureCategory::Residential: return building == BuildingCategory::Residential;
    case FeatureCategory::Recreation: return building == BuildingCategory::Recreation;
  }
  return false;
}

namespace {

constexpr std::array<std::string_view, kStatCount> kStats{"mean", "median", "std", "apen"};

std::vector<std::string> with_stats(const std::vector<std::string>& raw) {
  std::vector<std::string> out;
  for (const auto& r : raw) {
    for (auto s : kStats) out.push_back(r + "_" + std::string(s));
  }
  return out;
}

}  // namespace

const std::vector<std::string>& individual_raw_names() {
  static const std::vector<std::string> names{"indiv_academic_attendance", "indiv_any_dwell",
                                              "indiv_academic_dwell", "indiv_residential_dwell",
                                              "indiv_recreation_dwell"};
  return names;
}

const std::vector<std::string>& collocation_raw_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& cell : kContextCells) {
      auto base = std::string(to_string(cell.context)) + "_" + std::string(to_string(cell.category));
      out.push_back(base + "_abs");
      out.push_back(base + "_rel");
    }
    return out;
  }();
  return names;
}

const std::vector<std::string>& individual_feature_columns() {
  static const auto cols = with_stats(individual_raw_names());
  return cols;
}

const std::vector<std::string>& collocation_feature_columns() {
  static const auto cols = with_stats(collocation_raw_names());
  return cols;
}

std::vector<std::string> all_feature_columns() {
  auto out = individual_feature_columns();
  const auto& c = collocation_feature_columns();
  out.insert(out.end(), c.begin(), c.end());
  return out;
}

Context classify_context(const CollocationEpisode& episode,
                         std::span<const Meeting* const> group_meetings,
                         std::span<const TimeInterval> class_times, const std::string& building) {
  for (const auto* m : group_meetings) {
    if (m->allows_building(building) && interval_overlap(episode.interval, m->interval)) {
      return Context::Scheduled;
    }
  }
  if (covered_duration(episode.interval, class_times).count() > 0) return Context::Class;
  return Context::Other;
}

Context classify_context(const CollocationEpisode& episode, const Schedule& schedule,
                         const Roster& roster, const ApRegistry& registry) {
  std::vector<const Meeting*> meetings;
  std::vector<TimeInterval> class_times;
  std::vector<std::string> groups, sections;
  for (const auto& m : episode.members) {
    groups.push_back(roster.group(m));
    sections.push_back(roster.section(m));
  }
  std::sort(groups.begin(), groups.end());
  groups.erase(std::unique(groups.begin(), groups.end()), groups.end());
  std::sort(sections.begin(), sections.end());
  sections.erase(std::unique(sections.begin(), sections.end()), sections.end());
  for (const auto& g : groups) {
    auto ms = schedule.meetings_of_group(g);
    meetings.insert(meetings.end(), ms.begin(), ms.end());
  }
  for (const auto& s : sections) {
    auto ls = schedule.lecture_intervals_of_section(s);
    class_times.insert(class_times.end(), ls.begin(), ls.end());
  }
  class_times = merge_intervals(std::move(class_times));
  return classify_context(episode, meetings, class_times, registry.room(episode.room).building);
}

WeeklyFeatures weekly_features(const std::string& user, const DwellTable& dwells,
                               std::span<const CollocationEpisode> group_episodes,
                               std::size_t attendance_count, const ApRegistry& registry,
                               const TimeInterval& week, std::size_t week_index) {
  WeeklyFeatures out;
  out.user_id = user;
  out.week = week_index;
  out.individual[0] = static_cast<double>(attendance_count);

  constexpr std::array<FeatureCategory, 4> dwell_cats{
      FeatureCategory::Any, FeatureCategory::Academic, FeatureCategory::Residential,
      FeatureCategory::Recreation};
  if (auto it = dwells.find(user); it != dwells.end()) {
    std::array<std::vector<TimeInterval>, 4> pieces;
    for (const auto& s : it->second) {
      if (s.status != DwellStatus::Dwelling) continue;
      auto clipped = interval_overlap(s.interval, week);
      if (!clipped) continue;
      auto cat = registry.room_category(s.room);
      for (std::size_t c = 0; c < dwell_cats.size(); ++c) {
        if (category_matches(dwell_cats[c], cat)) pieces[c].push_back(*clipped);
      }
    }
    for (std::size_t c = 0; c < dwell_cats.size(); ++c) {
      out.individual[1 + c] =
          static_cast<double>(total_duration(merge_intervals(std::move(pieces[c]))).count());
    }
  }

  for (std::size_t c = 0; c < kContextCells.size(); ++c) {
    const auto& cell = kContextCells[c];
    std::vector<TimeInterval> mine, all;
    for (const auto& e : group_episodes) {
      if (e.context != cell.context) continue;
      if (!category_matches(cell.category, registry.room_category(e.room))) continue;
      auto clipped = interval_overlap(e.interval, week);
      if (!clipped) continue;
      all.push_back(*clipped);
      if (std::binary_search(e.members.begin(), e.members.end(), user)) mine.push_back(*clipped);
    }
    auto abs = static_cast<double>(total_duration(merge_intervals(std::move(mine))).count());
    auto den = static_cast<double>(total_duration(merge_intervals(std::move(all))).count());
    out.collocation[2 * c] = abs;
    out.collocation[2 * c + 1] = den > 0 ? abs / den : 0.0;
  }
  return out;
}

double approx_entropy(std::span<const double> series, int m, double r) {
  const auto n = series.size();
  if (m < 1) throw Error("approximate entropy needs m >= 1");
  if (n <= static_cast<std::size_t>(m)) {
    throw Error("approximate entropy needs more than m = " + std::to_string(m) + " values, got " +
                std::to_string(n));
  }
  if (!(r > 0)) throw Error("approximate entropy needs r > 0");
  const auto mm = static_cast<std::size_t>(m);
  // Templates of length m start at 0..n-m; of length m+1 at 0..n-m-1.
  const std::size_t count_m = n - mm + 1;
  const std::size_t count_m1 = n - mm;
  std::vector<std::size_t> c_m(count_m, 0), c_m1(count_m1, 0);
  for (std::size_t i = 0; i < count_m; ++i) {
    for (std::size_t j = i; j < count_m; ++j) {
      bool match = true;
      for (std::size_t k = 0; k < mm && match; ++k) {
        match = std::abs(series[i + k] - series[j + k]) <= r;
      }
      if (!match) continue;
      c_m[i] += (i == j) ? 1 : 0;
      if (i != j) {
        ++c_m[i];
        ++c_m[j];
      }
      if (i < count_m1 && j < count_m1 && std::abs(series[i + mm] - series[j + mm]) <= r) {
        c_m1[i] += (i == j) ? 1 : 0;
        if (i != j) {
          ++c_m1[i];
          ++c_m1[j];
        }
      }
    }
  }
  auto phi = [](const std::vector<std::size_t>& counts) {
    double sum = 0.0;
    const auto total = static_cast<double>(counts.size());
    for (auto c : counts) sum += std::log(static_cast<double>(c) / total);
    return sum / total;
  };
  return phi(c_m) - phi(c_m1);
}

double mean_of(std::span<const double> v) {
  if (v.empty()) return 0.0;
  double sum = 0.0;
  for (double x : v) sum += x;
  return sum / static_cast<double>(v.size());
}

double population_std(std::span<const double> v) {
  if (v.empty()) return 0.0;
  double mu = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - mu) * (x - mu);
  return std::sqrt(ss / static_cast<double>(v.size()));
}

std::vector<double> FeatureVector::all() const {
  auto out = individual;
  out.insert(out.end(), collocation.begin(), collocation.end());
  return out;
}

namespace {

void summarize(std::vector<double> series, int m, double r_factor, std::vector<double>& out) {
  double mu = mean_of(series);
  double sd = population_std(series);
  double apen = std::numeric_limits<double>::quiet_NaN();
  if (sd == 0.0) {
    apen = 0.0;
  } else if (series.size() > static_cast<std::size_t>(m)) {
    apen = approx_entropy(series, m, r_factor * sd);
  }
  std::sort(series.begin(), series.end());
  double med = 0.0;
  if (!series.empty()) {
    auto n = series.size();
    med = n % 2 ? series[n / 2] : (series[n / 2 - 1] + series[n / 2]) / 2.0;
  }
  out.push_back(mu);
  out.push_back(med);
  out.push_back(sd);
  out.push_back(apen);
}

}  // namespace

FeatureVector semester_summary(const std::string& user, std::span<const WeeklyFeatures> weeks,
                               int apen_m, double apen_r_factor) {
  FeatureVector fv;
  fv.user_id = user;
  fv.individual.reserve(kIndividualFeatures);
  fv.collocation.reserve(kCollocationFeatures);
  std::vector<double> series(weeks.size());
  for (std::size_t f = 0; f < kIndividualRaw; ++f) {
    for (std::size_t w = 0; w < weeks.size(); ++w) series[w] = weeks[w].individual[f];
    summarize(series, apen_m, apen_r_factor, fv.individual);
  }
  for (std::size_t f = 0; f < kCollocationRaw; ++f) {
    for (std::size_t w = 0; w < weeks.size(); ++w) series[w] = weeks[w].collocation[f];
    summarize(series, apen_m, apen_r_factor, fv.collocation);
  }
  return fv;
}

FeatureExtraction extract_features(const DwellTable& dwells,
                                   std::span<const CollocationEpisode> group_episodes,
                                   const AttendanceInference& attendance,
                                   const Schedule& schedule, const Roster& roster,
                                   const ApRegistry& registry, const PipelineConfig& config) {
  FeatureExtraction out;
  out.episodes.assign(group_episodes.begin(), group_episodes.end());

  std::map<std::string, std::vector<TimeInterval>> section_times;
  for (const auto& s : roster.sections()) section_times[s] = schedule.lecture_intervals_of_section(s);

  std::map<std::string, std::vector<std::size_t>> by_group;
  for (std::size_t i = 0; i < out.episodes.size(); ++i) {
    auto& e = out.episodes[i];
    const auto& group = roster.group(e.members.front());
    auto meetings = schedule.meetings_of_group(group);
    std::vector<TimeInterval> class_times;
    for (const auto& m : e.members) {
      const auto& t = section_times[roster.section(m)];
      class_times.insert(class_times.end(), t.begin(), t.end());
    }
    class_times = merge_intervals(std::move(class_times));
    e.context = classify_context(e, meetings, class_times, registry.room(e.room).building);
    by_group[group].push_back(i);
  }

  const auto weeks = config.week_count();
  std::map<std::string, std::vector<std::size_t>> present_per_week;
  for (const auto& [key, status] : attendance.status) {
    if (status != AttendanceStatus::Present) continue;
    auto w = config.week_of(schedule.lectures.at(key.second).interval.start);
    if (!w) continue;
    auto& counts = present_per_week[key.first];
    counts.resize(weeks, 0);
    ++counts[*w];
  }

  for (const auto& user : roster.users) {
    std::vector<CollocationEpisode> mine;
    if (auto it = by_group.find(roster.group(user)); it != by_group.end()) {
      for (auto i : it->second) mine.push_back(out.episodes[i]);
    }
    auto& series = out.weekly[user];
    const auto counts_it = present_per_week.find(user);
    for (std::size_t w = 0; w < weeks; ++w) {
      std::size_t count = counts_it == present_per_week.end() ? 0 : counts_it->second[w];
      series.push_back(
          weekly_features(user, dwells, mine, count, registry, config.week_interval(w), w));
    }
    out.vectors.push_back(semester_summary(user, series, config.apen_m, config.apen_r_factor));
  }
  return out;
}

UserTable to_table(std::span<const FeatureVector> vectors) {
  UserTable t;
  t.columns = all_feature_columns();
  for (const auto& v : vectors) t.rows[v.user_id] = v.all();
  return t;
}

std::vector<FeatureVector> from_table(const UserTable& table) {
  if (table.columns != all_feature_columns()) {
    throw Error("feature table columns do not match the expected " +
                std::to_string(kIndividualFeatures + kCollocationFeatures) + " feature names");
  }
  std::vector<FeatureVector> out;
  for (const auto& [user, row] : table.rows) {
    FeatureVector v;
    v.user_id = user;
    v.individual.assign(row.begin(), row.begin() + kIndividualFeatures);
    v.collocation.assign(row.begin() + kIndividualFeatures, row.end());
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace wifico
