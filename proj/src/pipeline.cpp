#include "wifico/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "wifico/error.hpp"

namespace wifico {

SegmentStage run_segment_stage(const LogCorpus& corpus, const ApRegistry& registry,
                               const Roster& roster, const Schedule& schedule,
                               const AttendanceRecord* attendance, const PipelineConfig& config) {
  SegmentStage out;
  Duration mobility, disconnection;
  if (config.mobility_threshold) {
    mobility = *config.mobility_threshold;
  } else {
    out.learned_mobility = learn_mobility_threshold(corpus, schedule, roster, config.margin_before_after);
    mobility = out.learned_mobility->value;
  }
  if (config.disconnection_threshold) {
    disconnection = *config.disconnection_threshold;
  } else {
    if (!attendance) throw Error("learning the disconnection threshold needs attendance records");
    out.learned_disconnection = learn_disconnection_threshold(corpus, *attendance, schedule);
    disconnection = out.learned_disconnection->value;
  }
  out.result = segment_corpus(corpus, registry, mobility, disconnection);
  return out;
}

CollocateStage run_collocate_stage(const DwellTable& dwells, const Roster& roster,
                                   const PipelineConfig& config) {
  CollocateStage out;
  for (const auto& g : roster.groups()) {
    auto members = roster.members(g);
    if (members.size() < 2) continue;
    auto eps = raw_overlaps(dwells, members);
    out.group_raw.insert(out.group_raw.end(), eps.begin(), eps.end());
  }
  std::sort(out.group_raw.begin(), out.group_raw.end(), episode_less);
  out.cohort_raw = raw_overlaps(dwells, roster.users);

  if (config.gap_threshold) {
    out.gap_threshold = *config.gap_threshold;
  } else {
    const auto& basis = config.gap_learning_scope == GapLearningScope::Group ? out.group_raw : out.cohort_raw;
    out.learned_gap = learn_gap_threshold(basis, dwells);
    out.gap_threshold = out.learned_gap->value;
  }
  out.group_episodes = bridge_gaps(out.group_raw, dwells, out.gap_threshold);
  out.cohort_episodes = config.bridged_graphs ? bridge_gaps(out.cohort_raw, dwells, out.gap_threshold)
                                              : out.cohort_raw;
  return out;
}

PipelineRun run_pipeline(const LogCorpus& corpus, const ApRegistry& registry, const Roster& roster,
                         const Schedule& schedule, const AttendanceRecord* attendance,
                         const PipelineConfig& config) {
  PipelineRun run;
  run.segment = run_segment_stage(corpus, registry, roster, schedule, attendance, config);
  const auto& dwells = run.segment.result.dwells;
  run.collocate = run_collocate_stage(dwells, roster, config);
  run.inference = infer_attendance(dwells, schedule, registry, roster, event_times(corpus),
                                   config.margin_before_after);
  if (attendance) run.reliability = score(run.inference, *attendance);
  run.features = extract_features(dwells, run.collocate.group_episodes, run.inference, schedule, roster,
                                  registry, config);
  return run;
}

StudyData build_study_data(const std::vector<FeatureVector>& features, const UserTable& peer_evaluations,
                           const UserTable& scores, const Roster& roster,
                           const std::string& score_column) {
  auto col = std::find(scores.columns.begin(), scores.columns.end(), score_column);
  if (col == scores.columns.end()) throw Error("scores table has no column '" + score_column + "'");
  const auto score_idx = static_cast<std::size_t>(col - scores.columns.begin());

  StudyData d;
  const auto pe_cols = peer_evaluations.columns.size();
  const auto total = pe_cols + kIndividualFeatures + kCollocationFeatures;
  std::vector<std::vector<double>> rows;
  for (const auto& fv : features) {
    if (!roster.contains(fv.user_id)) continue;
    if (roster.members(roster.group(fv.user_id)).size() < 2) continue;
    auto s = scores.rows.find(fv.user_id);
    if (s == scores.rows.end() || std::isnan(s->second.at(score_idx))) continue;
    std::vector<double> row;
    row.reserve(total);
    auto pe = peer_evaluations.rows.find(fv.user_id);
    for (std::size_t c = 0; c < pe_cols; ++c) {
      row.push_back(pe == peer_evaluations.rows.end() ? std::numeric_limits<double>::quiet_NaN() : pe->second[c]);
    }
    row.insert(row.end(), fv.individual.begin(), fv.individual.end());
    row.insert(row.end(), fv.collocation.begin(), fv.collocation.end());
    rows.push_back(std::move(row));
    d.users.push_back(fv.user_id);
    d.groups.push_back(roster.group(fv.user_id));
    d.instructors.push_back(roster.instructor(fv.user_id));
  }
  d.features = Matrix(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(total));
  d.scores = Vector(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < total; ++c) d.features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    d.scores(static_cast<Eigen::Index>(r)) = scores.rows.at(d.users[r])[score_idx];
  }
  d.feature_names = peer_evaluations.columns;
  for (const auto& n : individual_feature_columns()) d.feature_names.push_back(n);
  for (const auto& n : collocation_feature_columns()) d.feature_names.push_back(n);

  auto range = [](std::size_t from, std::size_t count) {
    Indices v(count);
    for (std::size_t i = 0; i < count; ++i) v[i] = from + i;
    return v;
  };
  auto iwf = range(pe_cols, kIndividualFeatures);
  auto gwf = range(pe_cols + kIndividualFeatures, kCollocationFeatures);
  auto both = iwf;
  both.insert(both.end(), gwf.begin(), gwf.end());
  d.models = {{"M_0", {}}, {"M_PE", range(0, pe_cols)}, {"M_iWF", iwf}, {"M_gWF", gwf}, {"M_iWF_gWF", both}};
  if (pe_cols == 0) d.models.erase(d.models.begin() + 1);
  return d;
}

}  // namespace wifico
