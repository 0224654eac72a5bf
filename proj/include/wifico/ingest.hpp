#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "wifico/config.hpp"
#include "wifico/model.hpp"

namespace wifico {

// Interned strings; ids are dense. After LogCorpusBuilder::build() ids follow
// lexicographic order, so comparing ids compares the strings.
class SymbolTable {
 public:
  std::uint32_t intern(std::string_view s);
  std::optional<std::uint32_t> find(std::string_view s) const;
  const std::string& name(std::uint32_t id) const { return names_.at(id); }
  std::size_t size() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }

  // Reorders ids lexicographically; returns old-id -> new-id.
  std::vector<std::uint32_t> sort();

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::uint32_t> index_;
};

struct CorpusEntry {
  Instant timestamp{};
  UpdateType update_type = UpdateType::SnmpUpdate;
  std::uint32_t user = 0;
  std::uint32_t device = 0;
  std::uint32_t ap = 0;
  std::uint32_t label = 0;

  friend bool operator==(const CorpusEntry&, const CorpusEntry&) = default;
};

struct IngestStats {
  std::size_t lines = 0;
  std::size_t kept = 0;
  std::size_t dropped_out_of_window = 0;
  std::size_t failed = 0;
  std::vector<std::string> warnings;  // first few parse errors
};

// Time-ordered association events with a per-user index.
class LogCorpus {
 public:
  std::size_t size() const { return entries_.size(); }
  const std::vector<CorpusEntry>& entries() const { return entries_; }
  AssociationEvent event(std::size_t i) const;

  const SymbolTable& users() const { return users_; }
  const SymbolTable& devices() const { return devices_; }
  const SymbolTable& aps() const { return aps_; }
  const SymbolTable& labels() const { return labels_; }

  // Indices into entries(), ascending, for one user id.
  std::span<const std::size_t> user_events(std::uint32_t user) const { return per_user_.at(user); }
  const std::vector<std::vector<std::size_t>>& per_user_index() const { return per_user_; }

  IngestStats stats;

 private:
  friend class LogCorpusBuilder;
  std::vector<CorpusEntry> entries_;
  SymbolTable users_, devices_, aps_, labels_;
  std::vector<std::vector<std::size_t>> per_user_;
};

class LogCorpusBuilder {
 public:
  void add(Instant t, UpdateType type, std::string_view user, std::string_view device,
           std::string_view ap_id, std::string_view ap_label);
  void add(const AssociationEvent& e) {
    add(e.timestamp, e.update_type, e.user_id, e.device_id, e.ap_id, e.ap_label);
  }
  void reserve(std::size_t n) { entries_.reserve(n); }

  // Sorted by (timestamp, user, device, ap, label, update type).
  LogCorpus build() &&;

 private:
  std::vector<CorpusEntry> entries_;
  SymbolTable users_, devices_, aps_, labels_;
};

// Year of a timestamp lacking one: reference_year, rolled forward when the
// month precedes the study window's start month.
int resolve_log_year(unsigned month, const PipelineConfig& config);

// Fields: timestamp, update type, user, device MAC, AP id (MAC), AP label.
// Tab-separated when the line contains a tab, comma-separated otherwise.
AssociationEvent parse_log_line(std::string_view line, const PipelineConfig& config,
                                std::size_t line_number = 0);

// Canonical form: comma-separated, lowercase MACs, "Mon D HH:MM:SS".
std::string serialize_log_line(const AssociationEvent& e, const PipelineConfig& config);

bool is_mac_address(std::string_view s);

inline const std::vector<std::string> kLogHeader = {"timestamp", "update_type", "user_id",
                                                    "device_id", "ap_id",      "ap_label"};

struct LoadOptions {
  char delimiter = ',';
  bool abort_on_error = false;  // otherwise skip-with-warning up to the configured fraction
};

// Drops out-of-window events (counted); aborts when the failed-line fraction
// exceeds config.max_unparseable_fraction.
LogCorpus load_corpus(const std::string& path, const PipelineConfig& config,
                      const LoadOptions& options = {});

void write_corpus(const std::string& path, const LogCorpus& corpus, const PipelineConfig& config);

ApRegistry load_registry(const std::string& path);
Roster load_roster(const std::string& path);
Schedule load_schedule(const std::string& lectures_path, const std::string& meetings_path,
                       const PipelineConfig& config);
AttendanceRecord load_attendance(const std::string& path);

void write_registry(const std::string& path, const ApRegistry& registry);
void write_roster(const std::string& path, const Roster& roster);
void write_lectures(const std::string& path, const Schedule& schedule, const PipelineConfig& config);
void write_meetings(const std::string& path, const Schedule& schedule, const PipelineConfig& config);
void write_attendance(const std::string& path, const AttendanceRecord& attendance);

// Throws ValidationError listing every dangling reference.
void cross_validate(const ApRegistry& registry, const Roster& roster, const Schedule& schedule,
                    const AttendanceRecord& attendance);

// Opaque numeric per-user columns (final scores, peer-evaluation scales).
// Empty cells load as NaN.
struct UserTable {
  std::vector<std::string> columns;
  std::map<std::string, std::vector<double>> rows;
};

UserTable load_user_table(const std::string& path);
void write_user_table(const std::string& path, const UserTable& table);

}  // namespace wifico
