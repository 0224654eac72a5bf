#pragma once

#include <map>
#include <string>
#include <vector>

#include "wifico/ingest.hpp"
#include "wifico/model.hpp"
#include "wifico/segmentation.hpp"

namespace wifico {

enum class AttendanceStatus { Present, Absent, Unobserved };

std::string_view to_string(AttendanceStatus s);

struct AttendanceInference {
  std::map<AttendanceKey, AttendanceStatus> status;

  std::size_t count(AttendanceStatus s) const;
};

// Sorted event timestamps per user.
using EventTimes = std::map<std::string, std::vector<Instant>>;

EventTimes event_times(const LogCorpus& corpus);

// One entry per (roster user, lecture of that user's section).
// Unobserved: no event of the user in [start - margin, end + margin].
// Present: a Dwelling segment at the lecture room overlaps the lecture.
AttendanceInference infer_attendance(const DwellTable& dwells, const Schedule& schedule,
                                     const ApRegistry& registry, const Roster& roster,
                                     const EventTimes& events, Duration margin);

struct ReliabilityReport {
  std::size_t true_positives = 0;
  std::size_t false_positives = 0;
  std::size_t true_negatives = 0;
  std::size_t false_negatives = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double specificity = 0.0;
  double false_discovery_rate = 0.0;
  double false_negative_rate = 0.0;
  std::size_t unobserved_count = 0;
  double unobserved_actually_present_fraction = 0.0;

  std::size_t comparable() const {
    return true_positives + false_positives + true_negatives + false_negatives;
  }
};

// Positive class is Present. Unobserved entries are excluded from the
// confusion counts. Throws Error when nothing is comparable.
ReliabilityReport score(const AttendanceInference& inference, const AttendanceRecord& truth);

// Metrics from counts; zero denominators give 0.
ReliabilityReport report_from_counts(std::size_t tp, std::size_t fp, std::size_t tn,
                                     std::size_t fn);

void write_report_json(const std::string& path, const ReliabilityReport& report);
void write_inference_csv(const std::string& path, const AttendanceInference& inference);
AttendanceInference load_inference_csv(const std::string& path);

}  // namespace wifico
