#include "wifico/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>

#include "wifico/csv.hpp"
#include "wifico/error.hpp"

namespace wifico {
namespace {

std::string lowercase(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

double parse_number(const std::string& s, std::size_t line) {
  if (s.empty()) return std::nan("");
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) throw ParseError(line, "invalid number '" + s + "'");
  return v;
}

std::size_t parse_index(const std::string& s, std::size_t line) {
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
    throw ParseError(line, "invalid index '" + s + "'");
  }
  return v;
}

template <typename F>
auto at_line(std::size_t line, F&& f) {
  try {
    return f();
  } catch (const ParseError&) {
    throw;
  } catch (const std::exception& e) {
    throw ParseError(line, e.what());
  }
}

}  // namespace

std::uint32_t SymbolTable::intern(std::string_view s) {
  auto key = std::string(s);
  auto it = index_.find(key);
  if (it != index_.end()) return it->second;
  auto id = static_cast<std::uint32_t>(names_.size());
  names_.push_back(key);
  index_.emplace(std::move(key), id);
  return id;
}

std::optional<std::uint32_t> SymbolTable::find(std::string_view s) const {
  auto it = index_.find(std::string(s));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::uint32_t> SymbolTable::sort() {
  std::vector<std::uint32_t> order(names_.size());
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return names_[a] < names_[b]; });
  std::vector<std::uint32_t> remap(names_.size());
  std::vector<std::string> sorted;
  sorted.reserve(names_.size());
  for (std::uint32_t new_id = 0; new_id < order.size(); ++new_id) {
    remap[order[new_id]] = new_id;
    sorted.push_back(std::move(names_[order[new_id]]));
  }
  names_ = std::move(sorted);
  index_.clear();
  for (std::uint32_t i = 0; i < names_.size(); ++i) index_.emplace(names_[i], i);
  return remap;
}

AssociationEvent LogCorpus::event(std::size_t i) const {
  const auto& e = entries_.at(i);
  return {e.timestamp,          e.update_type,     users_.name(e.user),
          devices_.name(e.device), aps_.name(e.ap), labels_.name(e.label)};
}

void LogCorpusBuilder::add(Instant t, UpdateType type, std::string_view user,
                           std::string_view device, std::string_view ap_id,
                           std::string_view ap_label) {
  entries_.push_back({t, type, users_.intern(user), devices_.intern(device), aps_.intern(ap_id),
                      labels_.intern(ap_label)});
}

LogCorpus LogCorpusBuilder::build() && {
  LogCorpus out;
  auto users = users_.sort();
  auto devices = devices_.sort();
  auto aps = aps_.sort();
  auto labels = labels_.sort();
  for (auto& e : entries_) {
    e.user = users[e.user];
    e.device = devices[e.device];
    e.ap = aps[e.ap];
    e.label = labels[e.label];
  }
  std::sort(entries_.begin(), entries_.end(), [](const CorpusEntry& a, const CorpusEntry& b) {
    return std::tie(a.timestamp, a.user, a.device, a.ap, a.label, a.update_type) <
           std::tie(b.timestamp, b.user, b.device, b.ap, b.label, b.update_type);
  });
  out.per_user_.resize(users_.size());
  for (std::size_t i = 0; i < entries_.size(); ++i) out.per_user_[entries_[i].user].push_back(i);
  out.entries_ = std::move(entries_);
  out.users_ = std::move(users_);
  out.devices_ = std::move(devices_);
  out.aps_ = std::move(aps_);
  out.labels_ = std::move(labels_);
  out.stats.lines = out.stats.kept = out.entries_.size();
  return out;
}

int resolve_log_year(unsigned month, const PipelineConfig& config) {
  auto start_month = local_month(config.study_window.start, config.utc_offset);
  return config.reference_year + (month < start_month ? 1 : 0);
}

bool is_mac_address(std::string_view s) {
  if (s.size() != 17) return false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i % 3 == 2) {
      if (s[i] != ':') return false;
    } else if (!std::isxdigit(static_cast<unsigned char>(s[i]))) {
      return false;
    }
  }
  return true;
}

AssociationEvent parse_log_line(std::string_view line, const PipelineConfig& config,
                                std::size_t line_number) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  char delimiter = line.find('\t') != std::string_view::npos ? '\t' : ',';
  auto fields = split_fields(line, delimiter);
  if (fields.size() != 6) {
    throw ParseError(line_number, "expected 6 fields, found " + std::to_string(fields.size()));
  }
  AssociationEvent e;
  e.timestamp = at_line(line_number, [&] {
    auto month = syslog_month(fields[0]);
    return parse_syslog_timestamp(fields[0], resolve_log_year(month, config), config.utc_offset);
  });
  e.update_type = at_line(line_number, [&] { return parse_update_type(fields[1]); });
  if (fields[2].empty()) throw ParseError(line_number, "empty user id");
  e.user_id = fields[2];
  if (!is_mac_address(fields[3])) throw ParseError(line_number, "malformed device MAC '" + fields[3] + "'");
  if (!is_mac_address(fields[4])) throw ParseError(line_number, "malformed AP MAC '" + fields[4] + "'");
  e.device_id = lowercase(fields[3]);
  e.ap_id = lowercase(fields[4]);
  at_line(line_number, [&] { return parse_ap_label(fields[5]); });
  e.ap_label = fields[5];
  return e;
}

std::string serialize_log_line(const AssociationEvent& e, const PipelineConfig& config) {
  return format_syslog_timestamp(e.timestamp, config.utc_offset) + "," +
         std::string(to_string(e.update_type)) + "," + e.user_id + "," + e.device_id + "," +
         e.ap_id + "," + e.ap_label;
}

LogCorpus load_corpus(const std::string& path, const PipelineConfig& config,
                      const LoadOptions& options) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  LogCorpusBuilder builder;
  IngestStats stats;
  std::string line;
  std::size_t line_number = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_number;
    if (!header_seen) {
      auto fields = split_fields(line, line.find('\t') != std::string::npos ? '\t' : options.delimiter);
      if (fields == kLogHeader) {
        header_seen = true;
        continue;
      }
      header_seen = true;
    }
    ++stats.lines;
    try {
      auto e = parse_log_line(line, config, line_number);
      if (!config.study_window.contains(e.timestamp)) {
        ++stats.dropped_out_of_window;
        continue;
      }
      builder.add(e);
      ++stats.kept;
    } catch (const ParseError& err) {
      if (options.abort_on_error) throw;
      ++stats.failed;
      if (stats.warnings.size() < 20) stats.warnings.push_back(err.what());
    }
  }
  if (stats.lines > 0 &&
      static_cast<double>(stats.failed) > config.max_unparseable_fraction * static_cast<double>(stats.lines)) {
    throw Error(path + ": " + std::to_string(stats.failed) + " of " + std::to_string(stats.lines) +
                " lines unparseable (limit " + std::to_string(config.max_unparseable_fraction) + ")" +
                (stats.warnings.empty() ? "" : "; first: " + stats.warnings.front()));
  }
  auto corpus = std::move(builder).build();
  corpus.stats = stats;
  return corpus;
}

void write_corpus(const std::string& path, const LogCorpus& corpus, const PipelineConfig& config) {
  auto out = open_output(path);
  out << join_fields(kLogHeader) << "\n";
  std::string line;
  for (const auto& e : corpus.entries()) {
    line = format_syslog_timestamp(e.timestamp, config.utc_offset);
    line += ',';
    line += to_string(e.update_type);
    line += ',';
    line += corpus.users().name(e.user);
    line += ',';
    line += corpus.devices().name(e.device);
    line += ',';
    line += corpus.aps().name(e.ap);
    line += ',';
    line += corpus.labels().name(e.label);
    line += '\n';
    out << line;
  }
}

ApRegistry load_registry(const std::string& path) {
  CsvReader reader(path, {"ap_id", "building_id", "room_id", "category"});
  ApRegistry registry;
  std::vector<std::string> f;
  while (reader.next(f)) {
    auto line = reader.line_number();
    if (f.size() != 4) throw ParseError(line, path + ": expected 4 fields");
    at_line(line, [&] {
      registry.add({lowercase(f[0]), f[1], f[2], parse_category(f[3])});
      return 0;
    });
  }
  return registry;
}

Roster load_roster(const std::string& path) {
  CsvReader reader(path, {"user_id", "group_id", "section_id", "instructor_id"});
  Roster roster;
  std::vector<std::string> f;
  while (reader.next(f)) {
    auto line = reader.line_number();
    if (f.size() != 4) throw ParseError(line, path + ": expected 4 fields");
    at_line(line, [&] {
      roster.add(f[0], f[1], f[2], f[3]);
      return 0;
    });
  }
  return roster;
}

Schedule load_schedule(const std::string& lectures_path, const std::string& meetings_path,
                       const PipelineConfig& config) {
  Schedule schedule;
  {
    CsvReader reader(lectures_path, {"section_id", "start", "end", "building_id", "room_id"});
    std::vector<std::string> f;
    while (reader.next(f)) {
      auto line = reader.line_number();
      if (f.size() != 5) throw ParseError(line, lectures_path + ": expected 5 fields");
      auto interval = at_line(line, [&] {
        return make_interval(parse_local_datetime(f[1], config.utc_offset),
                             parse_local_datetime(f[2], config.utc_offset));
      });
      if (interval.empty()) throw ParseError(line, "lecture interval is empty");
      schedule.lectures.push_back({f[0], interval, {f[3], f[4]}});
    }
  }
  {
    CsvReader reader(meetings_path, {"group_id", "start", "end", "building_ids"});
    std::vector<std::string> f;
    while (reader.next(f)) {
      auto line = reader.line_number();
      if (f.size() != 4) throw ParseError(line, meetings_path + ": expected 4 fields");
      Meeting m;
      m.group_id = f[0];
      m.interval = at_line(line, [&] {
        return make_interval(parse_local_datetime(f[1], config.utc_offset),
                             parse_local_datetime(f[2], config.utc_offset));
      });
      if (f[3] != "*") {
        std::vector<std::string> buildings;
        for (auto& b : split_fields(f[3], ';')) {
          if (!b.empty()) buildings.push_back(b);
        }
        if (buildings.empty()) throw ParseError(line, "meeting without buildings (use '*' for anywhere)");
        m.buildings = std::move(buildings);
      }
      schedule.meetings.push_back(std::move(m));
    }
  }
  return schedule;
}

AttendanceRecord load_attendance(const std::string& path) {
  CsvReader reader(path, {"user_id", "lecture_index", "present"});
  AttendanceRecord record;
  std::vector<std::string> f;
  while (reader.next(f)) {
    auto line = reader.line_number();
    if (f.size() != 3) throw ParseError(line, path + ": expected 3 fields");
    if (f[2] != "0" && f[2] != "1") throw ParseError(line, "present must be 0 or 1");
    record.present[{f[0], parse_index(f[1], line)}] = f[2] == "1";
  }
  return record;
}

void write_registry(const std::string& path, const ApRegistry& registry) {
  auto out = open_output(path);
  out << "ap_id,building_id,room_id,category\n";
  for (const auto& ap : registry.access_points()) {
    out << ap.ap_id << ',' << ap.building_id << ',' << ap.room_id << ',' << to_string(ap.category)
        << '\n';
  }
}

void write_roster(const std::string& path, const Roster& roster) {
  auto out = open_output(path);
  out << "user_id,group_id,section_id,instructor_id\n";
  for (const auto& u : roster.users) {
    out << u << ',' << roster.group(u) << ',' << roster.section(u) << ',' << roster.instructor(u)
        << '\n';
  }
}

void write_lectures(const std::string& path, const Schedule& schedule, const PipelineConfig& config) {
  auto out = open_output(path);
  out << "section_id,start,end,building_id,room_id\n";
  for (const auto& l : schedule.lectures) {
    out << l.section_id << ',' << format_local_datetime(l.interval.start, config.utc_offset) << ','
        << format_local_datetime(l.interval.end, config.utc_offset) << ',' << l.room.building << ','
        << l.room.room << '\n';
  }
}

void write_meetings(const std::string& path, const Schedule& schedule, const PipelineConfig& config) {
  auto out = open_output(path);
  out << "group_id,start,end,building_ids\n";
  for (const auto& m : schedule.meetings) {
    out << m.group_id << ',' << format_local_datetime(m.interval.start, config.utc_offset) << ','
        << format_local_datetime(m.interval.end, config.utc_offset) << ','
        << (m.buildings ? join_fields(*m.buildings, ';') : std::string("*")) << '\n';
  }
}

void write_attendance(const std::string& path, const AttendanceRecord& attendance) {
  auto out = open_output(path);
  out << "user_id,lecture_index,present\n";
  for (const auto& [key, present] : attendance.present) {
    out << key.first << ',' << key.second << ',' << (present ? 1 : 0) << '\n';
  }
}

void cross_validate(const ApRegistry& registry, const Roster& roster, const Schedule& schedule,
                    const AttendanceRecord& attendance) {
  std::vector<std::string> offenders;
  std::set<std::string> scheduled_sections;
  for (std::size_t i = 0; i < schedule.lectures.size(); ++i) {
    const auto& l = schedule.lectures[i];
    scheduled_sections.insert(l.section_id);
    if (!registry.find_room(l.room)) {
      offenders.push_back("lecture " + std::to_string(i) + ": room " + l.room.label() + " not in registry");
    }
  }
  for (const auto& section : roster.sections()) {
    if (!scheduled_sections.contains(section)) {
      offenders.push_back("roster section " + section + " has no lectures in schedule");
    }
  }
  auto groups = roster.groups();
  for (const auto& m : schedule.meetings) {
    if (!std::binary_search(groups.begin(), groups.end(), m.group_id)) {
      offenders.push_back("meeting references unknown group " + m.group_id);
    }
  }
  for (const auto& [key, present] : attendance.present) {
    const auto& [user, index] = key;
    if (!roster.contains(user)) {
      offenders.push_back("attendance user " + user + " not in roster");
      continue;
    }
    if (index >= schedule.lectures.size()) {
      offenders.push_back("attendance for " + user + " references missing lecture " + std::to_string(index));
    } else if (schedule.lectures[index].section_id != roster.section(user)) {
      offenders.push_back("attendance for " + user + " references lecture " + std::to_string(index) +
                          " of another section");
    }
  }
  if (!offenders.empty()) throw ValidationError("input cross-reference check failed:", std::move(offenders));
}

UserTable load_user_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  UserTable table;
  std::string line;
  std::size_t line_number = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto f = split_fields(line, ',');
    if (!header) {
      if (f.empty() || f[0] != "user_id") throw ParseError(line_number, path + ": header must start with user_id");
      table.columns.assign(f.begin() + 1, f.end());
      header = true;
      continue;
    }
    if (f.size() != table.columns.size() + 1) throw ParseError(line_number, path + ": wrong field count");
    std::vector<double> values;
    for (std::size_t i = 1; i < f.size(); ++i) values.push_back(parse_number(f[i], line_number));
    if (!table.rows.emplace(f[0], std::move(values)).second) {
      throw ParseError(line_number, "duplicate user " + f[0]);
    }
  }
  if (!header) throw Error(path + ": missing header");
  return table;
}

void write_user_table(const std::string& path, const UserTable& table) {
  auto out = open_output(path);
  out << "user_id";
  for (const auto& c : table.columns) out << ',' << c;
  out << '\n';
  for (const auto& [user, values] : table.rows) {
    out << user;
    for (double v : values) out << ',' << format_number(v);
    out << '\n';
  }
}

}  // namespace wifico
