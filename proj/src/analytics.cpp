#include "wifico/analytics.hpp"

#include <algorithm>
#include <charconv>
#include <memory>
#include <sstream>

#include "wifico/csv.hpp"
#include "wifico/error.hpp"

namespace wifico {

PairExclusion section_lecture_exclusion(const Roster& roster, const Schedule& schedule) {
  auto per_section = std::make_shared<std::map<std::string, std::vector<TimeInterval>>>();
  for (const auto& s : roster.sections()) (*per_section)[s] = schedule.lecture_intervals_of_section(s);
  auto cache = std::make_shared<std::map<std::pair<std::string, std::string>, std::vector<TimeInterval>>>();
  auto section_of = std::make_shared<std::map<std::string, std::string>>(roster.section_of);
  return [section_of, per_section, cache](const std::string& a,
                                          const std::string& b) -> std::span<const TimeInterval> {
    auto sa = section_of->at(a), sb = section_of->at(b);
    if (sb < sa) std::swap(sa, sb);
    auto key = std::make_pair(sa, sb);
    auto it = cache->find(key);
    if (it == cache->end()) {
      auto merged = (*per_section)[sa];
      if (sb != sa) {
        const auto& other = (*per_section)[sb];
        merged.insert(merged.end(), other.begin(), other.end());
      }
      it = cache->emplace(key, merge_intervals(std::move(merged))).first;
    }
    return it->second;
  };
}

std::vector<InteractionGraph> weekly_graphs(std::span<const CollocationEpisode> episodes,
                                            const Roster& roster, const Schedule& schedule,
                                            const PipelineConfig& config) {
  auto exclude = section_lecture_exclusion(roster, schedule);
  std::map<std::string, std::string> nodes;
  for (const auto& u : roster.users) nodes[u] = roster.group(u);
  std::vector<InteractionGraph> out;
  for (std::size_t w = 0; w < config.week_count(); ++w) {
    InteractionGraph g;
    g.period = "week-" + std::to_string(w);
    g.nodes = nodes;
    g.edges = pairwise_durations(episodes, config.week_interval(w), exclude);
    out.push_back(std::move(g));
  }
  return out;
}

InteractionGraph aggregate_graph(std::span<const InteractionGraph> graphs) {
  InteractionGraph out;
  out.period = graphs.size() == 1 ? graphs.front().period : "semester";
  for (const auto& g : graphs) {
    out.nodes.insert(g.nodes.begin(), g.nodes.end());
    for (const auto& [key, w] : g.edges) out.edges[key] += w;
  }
  return out;
}

void write_graph_csv(const std::string& path, const InteractionGraph& graph) {
  auto out = open_output(path);
  out << "kind,source,target,value\n";
  out << "period," << graph.period << ",,\n";
  for (const auto& [user, group] : graph.nodes) out << "node," << user << ',' << group << ",\n";
  for (const auto& [key, w] : graph.edges) {
    out << "edge," << key.first << ',' << key.second << ',' << w.count() << '\n';
  }
}

InteractionGraph load_graph_csv(const std::string& path) {
  CsvReader reader(path, {"kind", "source", "target", "value"});
  InteractionGraph g;
  std::vector<std::string> f;
  while (reader.next(f)) {
    if (f.size() != 4) throw ParseError(reader.line_number(), path + ": expected 4 fields");
    if (f[0] == "period") {
      g.period = f[1];
    } else if (f[0] == "node") {
      g.nodes[f[1]] = f[2];
    } else if (f[0] == "edge") {
      std::int64_t v = 0;
      auto [p, ec] = std::from_chars(f[3].data(), f[3].data() + f[3].size(), v);
      if (ec != std::errc{} || p != f[3].data() + f[3].size() || v <= 0 || f[1] == f[2]) {
        throw ParseError(reader.line_number(), path + ": invalid edge row");
      }
      g.edges[make_pair_key(f[1], f[2])] = Duration{v};
    } else {
      throw ParseError(reader.line_number(), path + ": unknown row kind '" + f[0] + "'");
    }
  }
  return g;
}

std::string to_dot(const InteractionGraph& graph) {
  std::map<std::string, int> group_index;
  for (const auto& [user, group] : graph.nodes) group_index.emplace(group, 0);
  int next = 0;
  for (auto& [group, idx] : group_index) idx = next++;
  std::ostringstream out;
  out << "graph \"" << graph.period << "\" {\n  node [style=filled, colorscheme=set312];\n";
  for (const auto& [user, group] : graph.nodes) {
    out << "  \"" << user << "\" [group=\"" << group << "\", fillcolor=" << group_index[group] % 12 + 1
        << "];\n";
  }
  for (const auto& [key, w] : graph.edges) {
    out << "  \"" << key.first << "\" -- \"" << key.second << "\" [weight=" << w.count() << "];\n";
  }
  out << "}\n";
  return out.str();
}

std::string_view to_string(Phase p) {
  switch (p) {
    case Phase::Before: return "before";
    case Phase::During: return "during";
    case Phase::After: return "after";
  }
  return "before";
}

Phase phase_of(std::size_t week, std::size_t midterm_week) {
  if (week < midterm_week) return Phase::Before;
  if (week == midterm_week) return Phase::During;
  return Phase::After;
}

std::map<Phase, std::array<double, kCategoryCount>> SpaceUsage::by_phase(
    std::size_t midterm_week) const {
  std::map<Phase, std::array<double, kCategoryCount>> sums;
  std::map<Phase, std::size_t> counts;
  for (std::size_t w = 0; w < weekly.size(); ++w) {
    auto p = phase_of(w, midterm_week);
    auto& s = sums[p];
    for (std::size_t c = 0; c < s.size(); ++c) s[c] += weekly[w][c];
    ++counts[p];
  }
  for (auto& [p, s] : sums) {
    for (auto& v : s) v /= static_cast<double>(counts[p]);
  }
  return sums;
}

SpaceUsage space_usage(std::span<const CollocationEpisode> episodes, const ApRegistry& registry,
                       const Roster& roster, const PipelineConfig& config) {
  const auto weeks = config.week_count();
  constexpr auto ncat = kCategoryCount;
  auto cat_index = [](BuildingCategory c) {
    return static_cast<std::size_t>(std::find(std::begin(kAllCategories), std::end(kAllCategories), c) -
                                    std::begin(kAllCategories));
  };
  // user -> category -> intervals
  std::map<std::string, std::array<std::vector<TimeInterval>, ncat>> pieces;
  for (const auto& e : episodes) {
    auto c = cat_index(registry.room_category(e.room));
    for (const auto& m : e.members) pieces[m][c].push_back(e.interval);
  }
  std::map<std::string, std::array<std::vector<TimeInterval>, ncat>> merged;
  for (auto& [user, cats] : pieces) {
    for (std::size_t c = 0; c < ncat; ++c) merged[user][c] = merge_intervals(std::move(cats[c]));
  }
  SpaceUsage out;
  out.weekly.assign(weeks, {});
  const auto participants = static_cast<double>(roster.users.size());
  if (participants == 0) return out;
  for (std::size_t w = 0; w < weeks; ++w) {
    auto window = config.week_interval(w);
    for (const auto& [user, cats] : merged) {
      if (!roster.contains(user)) continue;
      for (std::size_t c = 0; c < ncat; ++c) {
        out.weekly[w][c] += static_cast<double>(total_duration(clip_intervals(cats[c], window)).count());
      }
    }
    for (auto& v : out.weekly[w]) v /= participants;
  }
  return out;
}

void write_space_usage_csv(const std::string& path, const SpaceUsage& usage, std::size_t midterm_week) {
  auto out = open_output(path);
  out << "week,phase,category,mean_seconds\n";
  for (std::size_t w = 0; w < usage.weekly.size(); ++w) {
    for (std::size_t c = 0; c < kCategoryCount; ++c) {
      out << w << ',' << to_string(phase_of(w, midterm_week)) << ',' << to_string(kAllCategories[c])
          << ',' << usage.weekly[w][c] << '\n';
    }
  }
}

Punctuality punctuality(const DwellTable& dwells, const Schedule& schedule,
                        const ApRegistry& registry, const AttendanceInference& attendance) {
  Punctuality out;
  std::vector<double> entries, exits;
  for (const auto& [key, status] : attendance.status) {
    if (status != AttendanceStatus::Present) continue;
    const auto& lec = schedule.lectures.at(key.second);
    auto room = registry.room_id(lec.room);
    auto it = dwells.find(key.first);
    if (it == dwells.end()) continue;
    std::optional<Instant> first, last;
    for (const auto& s : it->second) {
      if (s.status != DwellStatus::Dwelling || s.room != room) continue;
      if (!interval_overlap(s.interval, lec.interval)) continue;
      if (!first || s.interval.start < *first) first = s.interval.start;
      if (!last || s.interval.end > *last) last = s.interval.end;
    }
    if (!first) continue;
    PunctualityRecord r{key.first, key.second, *first - lec.interval.start, *last - lec.interval.end};
    entries.push_back(static_cast<double>(r.entry.count()));
    exits.push_back(static_cast<double>(r.exit.count()));
    out.records.push_back(std::move(r));
  }
  if (!entries.empty()) {
    out.median_entry_seconds = median_of(entries);
    out.median_exit_seconds = median_of(exits);
  }
  return out;
}

void write_punctuality_csv(const std::string& path, const Punctuality& p) {
  auto out = open_output(path);
  out << "user_id,lecture,entry_seconds,exit_seconds\n";
  for (const auto& r : p.records) {
    out << r.user_id << ',' << r.lecture << ',' << r.entry.count() << ',' << r.exit.count() << '\n';
  }
}

}  // namespace wifico
