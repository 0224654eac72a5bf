#include "wifico/config.hpp"

#include <array>
#include <cctype>
#include <fstream>
#include <sstream>

#include "wifico/error.hpp"

namespace wifico {
namespace {

std::string trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return std::string(s);
}

constexpr std::array<std::string_view, 7> kWeekdays = {"sun", "mon", "tue", "wed",
                                                       "thu", "fri", "sat"};

unsigned parse_weekday(std::string_view text) {
  std::string s;
  for (char c : text.substr(0, 3)) s += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  for (std::size_t i = 0; i < kWeekdays.size(); ++i) {
    if (s == kWeekdays[i]) return static_cast<unsigned>(i);
  }
  throw ConfigError("unknown weekday: '" + std::string(text) + "'");
}

template <typename F>
auto convert(const std::string& key, const std::string& value, F&& f) {
  try {
    return f(value);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError("config key '" + key + "': " + e.what());
  }
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(std::string_view text) {
  KeyValueConfig out;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    auto body = trim(line);
    if (body.empty() || body.front() == '[') continue;
    auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    auto key = trim(std::string_view(body).substr(0, eq));
    auto value = trim(std::string_view(body).substr(eq + 1));
    if (key.empty()) throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
    out.values_[key] = value;
  }
  return out;
}

KeyValueConfig KeyValueConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

std::optional<std::string> KeyValueConfig::take(const std::string& key) {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  consumed_.insert(key);
  return it->second;
}

std::set<std::string> KeyValueConfig::unconsumed() const {
  std::set<std::string> out;
  for (const auto& [key, value] : values_) {
    if (!consumed_.contains(key)) out.insert(key);
  }
  return out;
}

void KeyValueConfig::require_all_consumed() const {
  std::string unknown;
  for (const auto& [k, v] : values_) {
    if (!consumed_.contains(k)) unknown += (unknown.empty() ? "" : ", ") + k;
  }
  if (!unknown.empty()) throw ConfigError("unknown config keys: " + unknown);
}

ThresholdSetting parse_threshold(std::string_view text) {
  if (text == "learn") return std::nullopt;
  return parse_duration(text);
}

std::string format_threshold(const ThresholdSetting& t) {
  return t ? format_duration(*t) : std::string("learn");
}

TimeInterval PipelineConfig::default_study_window() {
  auto start = parse_local_datetime("2019-01-07 00:00:00", Duration{-5 * 3600});
  return {start, start + kWeek * 14};
}

void PipelineConfig::validate() const {
  auto positive = [](const ThresholdSetting& t, const char* name) {
    if (t && t->count() <= 0) throw ConfigError(std::string(name) + " must be > 0");
  };
  positive(mobility_threshold, "mobility_threshold");
  positive(disconnection_threshold, "disconnection_threshold");
  positive(gap_threshold, "gap_threshold");
  if (margin_before_after.count() <= 0) throw ConfigError("margin must be > 0");
  if (apen_m < 1) throw ConfigError("apen_m must be >= 1");
  if (!(apen_r_factor > 0.0 && apen_r_factor < 1.0)) {
    throw ConfigError("apen_r_factor must be in (0, 1)");
  }
  if (week_anchor > 6) throw ConfigError("week_anchor must be a weekday");
  if (study_window.duration().count() <= 0) throw ConfigError("study window must be non-empty");
  if (reference_year < 1970 || reference_year > 9999) throw ConfigError("reference_year out of range");
  if (!(max_unparseable_fraction >= 0.0 && max_unparseable_fraction <= 1.0)) {
    throw ConfigError("max_unparseable_fraction must be in [0, 1]");
  }
}

Instant PipelineConfig::first_week_start() const {
  return week_anchor_at_or_before(study_window.start, week_anchor, utc_offset);
}

std::size_t PipelineConfig::week_count() const {
  auto span = study_window.end - first_week_start();
  return static_cast<std::size_t>((span.count() + kWeek.count() - 1) / kWeek.count());
}

TimeInterval PipelineConfig::week_interval(std::size_t week) const {
  auto start = first_week_start() + kWeek * static_cast<std::int64_t>(week);
  return {start, start + kWeek};
}

std::optional<std::size_t> PipelineConfig::week_of(Instant t) const {
  auto first = first_week_start();
  if (t < first) return std::nullopt;
  auto w = static_cast<std::size_t>((t - first).count() / kWeek.count());
  if (w >= week_count()) return std::nullopt;
  return w;
}

std::string PipelineConfig::canonical_text() const {
  std::ostringstream out;
  out << "mobility_threshold=" << format_threshold(mobility_threshold) << "\n"
      << "disconnection_threshold=" << format_threshold(disconnection_threshold) << "\n"
      << "gap_threshold=" << format_threshold(gap_threshold) << "\n"
      << "margin=" << format_duration(margin_before_after) << "\n"
      << "apen_m=" << apen_m << "\n"
      << "apen_r_factor=" << apen_r_factor << "\n"
      << "week_anchor=" << kWeekdays[week_anchor] << "\n"
      << "utc_offset=" << format_utc_offset(utc_offset) << "\n"
      << "study_start=" << format_local_datetime(study_window.start, utc_offset) << "\n"
      << "study_end=" << format_local_datetime(study_window.end, utc_offset) << "\n"
      << "reference_year=" << reference_year << "\n"
      << "max_unparseable_fraction=" << max_unparseable_fraction << "\n"
      << "gap_learning_scope=" << (gap_learning_scope == GapLearningScope::Group ? "group" : "cohort")
      << "\n"
      << "graph_episodes=" << (bridged_graphs ? "bridged" : "raw") << "\n";
  return out.str();
}

void apply(KeyValueConfig& kv, PipelineConfig& c) {
  if (auto v = kv.take("mobility_threshold")) c.mobility_threshold = convert("mobility_threshold", *v, parse_threshold);
  if (auto v = kv.take("disconnection_threshold")) c.disconnection_threshold = convert("disconnection_threshold", *v, parse_threshold);
  if (auto v = kv.take("gap_threshold")) c.gap_threshold = convert("gap_threshold", *v, parse_threshold);
  if (auto v = kv.take("margin")) c.margin_before_after = convert("margin", *v, parse_duration);
  if (auto v = kv.take("apen_m")) c.apen_m = convert("apen_m", *v, [](const std::string& s) { return std::stoi(s); });
  if (auto v = kv.take("apen_r_factor")) c.apen_r_factor = convert("apen_r_factor", *v, [](const std::string& s) { return std::stod(s); });
  if (auto v = kv.take("week_anchor")) c.week_anchor = parse_weekday(*v);
  if (auto v = kv.take("utc_offset")) c.utc_offset = convert("utc_offset", *v, parse_utc_offset);
  // Dates are local to utc_offset, so read them after it.
  auto weeks = kv.take("weeks");
  if (auto v = kv.take("study_start")) {
    auto start = convert("study_start", *v, [&](const std::string& s) { return parse_local_datetime(s, c.utc_offset); });
    auto length = c.study_window.duration();
    c.study_window = {start, start + length};
  }
  if (auto v = kv.take("study_end")) {
    c.study_window.end = convert("study_end", *v, [&](const std::string& s) { return parse_local_datetime(s, c.utc_offset); });
  } else if (weeks) {
    auto n = convert("weeks", *weeks, [](const std::string& s) { return std::stoi(s); });
    if (n <= 0) throw ConfigError("weeks must be > 0");
    c.study_window.end = c.study_window.start + kWeek * n;
  }
  if (auto v = kv.take("reference_year")) c.reference_year = convert("reference_year", *v, [](const std::string& s) { return std::stoi(s); });
  if (auto v = kv.take("max_unparseable_fraction")) c.max_unparseable_fraction = convert("max_unparseable_fraction", *v, [](const std::string& s) { return std::stod(s); });
  if (auto v = kv.take("gap_learning_scope")) {
    if (*v == "group") c.gap_learning_scope = GapLearningScope::Group;
    else if (*v == "cohort") c.gap_learning_scope = GapLearningScope::Cohort;
    else throw ConfigError("gap_learning_scope must be group or cohort");
  }
  if (auto v = kv.take("graph_episodes")) {
    if (*v == "bridged") c.bridged_graphs = true;
    else if (*v == "raw") c.bridged_graphs = false;
    else throw ConfigError("graph_episodes must be bridged or raw");
  }
  c.validate();
}

}  // namespace wifico
