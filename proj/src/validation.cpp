#include "wifico/validation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <json.hpp>

#include "wifico/csv.hpp"
#include "wifico/error.hpp"

namespace wifico {

std::string_view to_string(AttendanceStatus s) {
  switch (s) {
    case AttendanceStatus::Present: return "present";
    case AttendanceStatus::Absent: return "absent";
    case AttendanceStatus::Unobserved: return "unobserved";
  }
  return "unobserved";
}

std::size_t AttendanceInference::count(AttendanceStatus s) const {
  return static_cast<std::size_t>(
      std::count_if(status.begin(), status.end(), [&](const auto& kv) { return kv.second == s; }));
}

EventTimes event_times(const LogCorpus& corpus) {
  EventTimes out;
  const auto& index = corpus.per_user_index();
  for (std::uint32_t u = 0; u < index.size(); ++u) {
    auto& times = out[corpus.users().name(u)];
    times.reserve(index[u].size());
    for (auto i : index[u]) times.push_back(corpus.entries()[i].timestamp);
    std::sort(times.begin(), times.end());
  }
  return out;
}

namespace {

bool any_event_in(const std::vector<Instant>& times, Instant lo, Instant hi) {
  auto it = std::lower_bound(times.begin(), times.end(), lo);
  return it != times.end() && *it <= hi;
}

}  // namespace

AttendanceInference infer_attendance(const DwellTable& dwells, const Schedule& schedule,
                                     const ApRegistry& registry, const Roster& roster,
                                     const EventTimes& events, Duration margin) {
  std::vector<RoomId> rooms;
  rooms.reserve(schedule.lectures.size());
  for (const auto& lec : schedule.lectures) rooms.push_back(registry.room_id(lec.room));

  std::map<std::string, std::vector<std::size_t>> by_section;
  for (std::size_t i = 0; i < schedule.lectures.size(); ++i) {
    by_section[schedule.lectures[i].section_id].push_back(i);
  }

  static const std::vector<Instant> kNoEvents;
  static const std::vector<DwellSegment> kNoDwells;
  AttendanceInference out;
  for (const auto& user : roster.users) {
    auto sec = by_section.find(roster.section(user));
    if (sec == by_section.end()) continue;
    auto ev = events.find(user);
    const auto& times = ev == events.end() ? kNoEvents : ev->second;
    auto dw = dwells.find(user);
    const auto& segments = dw == dwells.end() ? kNoDwells : dw->second;
    for (auto idx : sec->second) {
      const auto& lec = schedule.lectures[idx];
      AttendanceStatus status;
      if (!any_event_in(times, lec.interval.start - margin, lec.interval.end + margin)) {
        status = AttendanceStatus::Unobserved;
      } else {
        bool present = std::any_of(segments.begin(), segments.end(), [&](const DwellSegment& s) {
          return s.status == DwellStatus::Dwelling && s.room == rooms[idx] &&
                 interval_overlap(s.interval, lec.interval).has_value();
        });
        status = present ? AttendanceStatus::Present : AttendanceStatus::Absent;
      }
      out.status.emplace(AttendanceKey{user, idx}, status);
    }
  }
  return out;
}

ReliabilityReport report_from_counts(std::size_t tp, std::size_t fp, std::size_t tn,
                                     std::size_t fn) {
  auto ratio = [](std::size_t num, std::size_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
  };
  ReliabilityReport r;
  r.true_positives = tp;
  r.false_positives = fp;
  r.true_negatives = tn;
  r.false_negatives = fn;
  r.precision = ratio(tp, tp + fp);
  r.recall = ratio(tp, tp + fn);
  r.f1 = r.precision + r.recall == 0.0
             ? 0.0
             : 2.0 * r.precision * r.recall / (r.precision + r.recall);
  r.specificity = ratio(tn, tn + fp);
  r.false_discovery_rate = 1.0 - r.precision;
  r.false_negative_rate = 1.0 - r.recall;
  return r;
}

ReliabilityReport score(const AttendanceInference& inference, const AttendanceRecord& truth) {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0, unobserved = 0, unobserved_present = 0;
  for (const auto& [key, status] : inference.status) {
    auto it = truth.present.find(key);
    if (it == truth.present.end()) continue;
    bool actual = it->second;
    if (status == AttendanceStatus::Unobserved) {
      ++unobserved;
      if (actual) ++unobserved_present;
      continue;
    }
    bool predicted = status == AttendanceStatus::Present;
    if (predicted && actual) ++tp;
    else if (predicted) ++fp;
    else if (actual) ++fn;
    else ++tn;
  }
  if (tp + fp + tn + fn == 0) {
    throw Error("no comparable (user, lecture) entries between inference and ground truth");
  }
  auto r = report_from_counts(tp, fp, tn, fn);
  r.unobserved_count = unobserved;
  r.unobserved_actually_present_fraction =
      unobserved == 0 ? 0.0 : static_cast<double>(unobserved_present) / static_cast<double>(unobserved);
  return r;
}

void write_report_json(const std::string& path, const ReliabilityReport& r) {
  auto round4 = [](double x) { return std::round(x * 1e4) / 1e4; };
  nlohmann::ordered_json j;
  j["true_positives"] = r.true_positives;
  j["false_positives"] = r.false_positives;
  j["true_negatives"] = r.true_negatives;
  j["false_negatives"] = r.false_negatives;
  j["precision"] = round4(r.precision);
  j["recall"] = round4(r.recall);
  j["f1"] = round4(r.f1);
  j["specificity"] = round4(r.specificity);
  j["false_discovery_rate"] = round4(r.false_discovery_rate);
  j["false_negative_rate"] = round4(r.false_negative_rate);
  j["unobserved_count"] = r.unobserved_count;
  j["unobserved_actually_present_fraction"] = round4(r.unobserved_actually_present_fraction);
  open_output(path) << j.dump(2) << '\n';
}

void write_inference_csv(const std::string& path, const AttendanceInference& inference) {
  auto out = open_output(path);
  out << "user_id,lecture,status\n";
  for (const auto& [key, status] : inference.status) {
    out << key.first << ',' << key.second << ',' << to_string(status) << '\n';
  }
}

AttendanceInference load_inference_csv(const std::string& path) {
  CsvReader reader(path, {"user_id", "lecture", "status"});
  AttendanceInference inference;
  std::vector<std::string> f;
  while (reader.next(f)) {
    auto line = reader.line_number();
    if (f.size() != 3) throw ParseError(line, path + ": expected 3 fields");
    std::size_t lecture = 0;
    auto [ptr, ec] = std::from_chars(f[1].data(), f[1].data() + f[1].size(), lecture);
    if (ec != std::errc{} || ptr != f[1].data() + f[1].size()) throw ParseError(line, "bad lecture index '" + f[1] + "'");
    AttendanceStatus status;
    if (f[2] == "present") status = AttendanceStatus::Present;
    else if (f[2] == "absent") status = AttendanceStatus::Absent;
    else if (f[2] == "unobserved") status = AttendanceStatus::Unobserved;
    else throw ParseError(line, "unknown status '" + f[2] + "'");
    inference.status[{f[0], lecture}] = status;
  }
  return inference;
}

}  // namespace wifico
