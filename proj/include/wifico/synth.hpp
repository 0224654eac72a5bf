#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "wifico/collocation.hpp"
#include "wifico/config.hpp"
#include "wifico/ingest.hpp"
#include "wifico/model.hpp"

namespace wifico {

struct SimConfig {
  std::uint64_t seed = 1;
  std::size_t users = 200;
  std::size_t group_min = 4;
  std::size_t group_max = 6;
  std::size_t section_size = 40;
  std::size_t instructors = 2;
  std::size_t weeks = 14;
  double dorm_fraction = 0.7;

  Duration poll_period{900};
  Duration poll_jitter{420};
  double p_second_device = 0.3;

  double p_unlogged_attendance = 0.07;
  double p_ap_snap = 0.25;
  double p_signin_miss = 0.11;
  double p_absent = 0.15;
  double p_absent_offcampus = 0.03;
  Duration planted_silence{0};  // one attended lecture goes quiet this long

  double entry_median_seconds = 300;
  double exit_median_seconds = 120;
  double entry_spread_seconds = 180;
  double exit_spread_seconds = 90;

  double regularity_min = 0.3, regularity_max = 1.0;
  double collab_min = 0.2, collab_max = 1.0;
  double p_adhoc = 0.12;
  double p_lunch = 0.6;
  double p_recreation = 0.25;
  double p_step_out = 0.3;  // long meeting stays interrupted by a hallway visit
  std::size_t midterm_week = 7;
  double midterm_adhoc_factor = 3.0;

  double score_participation = 1.0;
  double score_consistency = 0.6;
  double score_noise = 0.5;
  double pe_loading = 0.1;
  double pe_missing = 0.05;
  bool null_scores = false;

  Duration margin{30 * 60};
  Instant study_start = PipelineConfig::default_study_window().start;
  Duration utc_offset{-5 * 3600};

  // All noise knobs and jitter zero.
  static SimConfig noiseless();

  // Throws ConfigError when inconsistent.
  void validate() const;

  // Matching pipeline settings (window, offset, year).
  PipelineConfig pipeline_config() const;
};

// Keys mirror the field names; unknown keys stay unconsumed.
void apply(KeyValueConfig& kv, SimConfig& config);

// Counter-style RNG: independent stream per (seed, stream, key).
std::mt19937_64 sim_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t key);

struct Stay {
  RoomId room;
  TimeInterval interval;

  friend bool operator==(const Stay&, const Stay&) = default;
};

// Per user, sorted non-overlapping stays; time outside stays is transit or
// off campus.
using Timeline = std::map<std::string, std::vector<Stay>>;

struct SimScenario {
  SimConfig config;
  ApRegistry registry;
  Roster roster;
  Schedule schedule;
  Timeline timeline;
  AttendanceRecord attendance;          // recorded sign-in truth
  std::map<AttendanceKey, bool> physical;  // physically in the lecture room
  LogCorpus corpus;
  UserTable scores;  // column "score"
  UserTable peer_evaluations;
  std::vector<std::pair<std::string, std::string>> roommates;
  std::map<std::string, double> meeting_hours_mean;
  std::map<std::string, double> meeting_hours_std;
};

SimScenario simulate(const SimConfig& config);

// Per-second scan of the timeline: maximal intervals during which a fixed
// set of >= 2 users from `users` occupies one room.
std::vector<CollocationEpisode> oracle_episodes(const Timeline& timeline,
                                                std::span<const std::string> users,
                                                const TimeInterval& window);

// Writes logs.csv, aps.csv, roster.csv, lectures.csv, meetings.csv,
// attendance.csv, scores.csv, pe.csv and truth/{timeline,physical}.csv.
void write_scenario(const std::string& dir, const SimScenario& scenario);

}  // namespace wifico
