#pragma once

#include <optional>
#include <string>
#include <vector>

#include "wifico/collocation.hpp"
#include "wifico/config.hpp"
#include "wifico/features.hpp"
#include "wifico/ingest.hpp"
#include "wifico/modeling.hpp"
#include "wifico/segmentation.hpp"
#include "wifico/validation.hpp"

namespace wifico {

struct SegmentStage {
  SegmentationResult result;
  std::optional<LearnedThreshold> learned_mobility;
  std::optional<LearnedThreshold> learned_disconnection;
};

// Thresholds left at "learn" are learned from the corpus; learning the
// disconnection threshold needs attendance records.
SegmentStage run_segment_stage(const LogCorpus& corpus, const ApRegistry& registry,
                               const Roster& roster, const Schedule& schedule,
                               const AttendanceRecord* attendance, const PipelineConfig& config);

struct CollocateStage {
  std::vector<CollocationEpisode> group_raw;
  std::vector<CollocationEpisode> group_episodes;  // bridged
  std::vector<CollocationEpisode> cohort_raw;
  std::vector<CollocationEpisode> cohort_episodes;  // bridged unless graphs use raw
  Duration gap_threshold{};
  std::optional<LearnedThreshold> learned_gap;
};

CollocateStage run_collocate_stage(const DwellTable& dwells, const Roster& roster,
                                   const PipelineConfig& config);

struct PipelineRun {
  SegmentStage segment;
  CollocateStage collocate;
  AttendanceInference inference;
  std::optional<ReliabilityReport> reliability;
  FeatureExtraction features;
};

PipelineRun run_pipeline(const LogCorpus& corpus, const ApRegistry& registry, const Roster& roster,
                         const Schedule& schedule, const AttendanceRecord* attendance,
                         const PipelineConfig& config);

// Model inputs: users with a score whose group has at least 2 members.
// Models: M_0, M_PE, M_iWF, M_gWF, M_iWF_gWF.
StudyData build_study_data(const std::vector<FeatureVector>& features, const UserTable& peer_evaluations,
                           const UserTable& scores, const Roster& roster,
                           const std::string& score_column = "score");

}  // namespace wifico
