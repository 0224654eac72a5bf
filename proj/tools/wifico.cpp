#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "wifico/analytics.hpp"
#include "wifico/csv.hpp"
#include "wifico/error.hpp"
#include "wifico/manifest.hpp"
#include "wifico/pipeline.hpp"
#include "wifico/synth.hpp"

namespace fs = std::filesystem;
using namespace wifico;

namespace {

constexpr const char* kVersion = WIFICO_VERSION;

struct Options {
  std::string run_dir = "runs/default";
  std::string config;
  std::optional<std::uint64_t> seed;
  int jobs = 1;
  std::string mobility_threshold, disconnection_threshold, gap_threshold;
  std::string format = "csv";
  std::string input;
};

struct Settings {
  PipelineConfig pipeline;
  SimConfig sim;
  StudyConfig study;
  std::string extra_text;  // non-pipeline keys from the config file, sorted
};

class Stage {
 public:
  Stage(std::string name, const Options& opts) : name_(std::move(name)), opts_(opts), begun_(Clock::now()) {
    manifest_.stage = name_;
    manifest_.tool_version = kVersion;
  }

  const std::string& name() const { return name_; }
  fs::path run_dir() const { return opts_.run_dir; }
  fs::path dir() const { return run_dir() / name_; }
  fs::path predecessor(const std::string& stage) const { return run_dir() / stage; }
  RunManifest& manifest() { return manifest_; }

  // Fails with the command that produces `stage` when it has not run.
  fs::path require(const std::string& stage) {
    auto m = predecessor(stage) / "manifest.json";
    if (!fs::exists(m)) {
      throw Error("missing " + m.string() + "; run `wifico " + stage + " --run-dir " + opts_.run_dir +
                  "` first");
    }
    auto upstream = load_manifest(m.string());
    for (const auto& [k, v] : upstream.timings_ms) manifest_.timings_ms[k] = v;
    if (!upstream_seed_) upstream_seed_ = upstream.seed;
    return predecessor(stage);
  }

  std::optional<std::uint64_t> upstream_seed() const { return upstream_seed_; }

  // Records the hash of a file this stage reads.
  std::string input(const fs::path& path) {
    if (!fs::exists(path)) throw Error("missing input " + path.string());
    manifest_.inputs[display(path)] = sha256_file(path.string());
    return path.string();
  }

  std::optional<std::string> optional_input(const fs::path& path) {
    if (!fs::exists(path)) return std::nullopt;
    return input(path);
  }

  std::string output(const std::string& relative) const { return (dir() / relative).string(); }

  void prepare() {
    fs::remove_all(dir());
    fs::create_directories(dir());
  }

  void finish(const Settings& s) {
    manifest_.seed = s.sim.seed;
    manifest_.config_hash = sha256_hex(s.pipeline.canonical_text() + s.extra_text);
    {
      auto out = open_output(output("pipeline.conf"));
      out << s.pipeline.canonical_text();
    }
    for (const auto& entry : fs::recursive_directory_iterator(dir())) {
      if (!entry.is_regular_file() || entry.path().filename() == "manifest.json") continue;
      manifest_.outputs[fs::relative(entry.path(), dir()).generic_string()] = sha256_file(entry.path().string());
    }
    manifest_.settings["jobs"] = std::to_string(opts_.jobs);
    manifest_.timings_ms[name_] =
        std::chrono::duration<double, std::milli>(Clock::now() - begun_).count();
    write_manifest(output("manifest.json"), manifest_);
  }

 private:
  using Clock = std::chrono::steady_clock;

  std::string display(const fs::path& path) const {
    auto rel = fs::relative(path, run_dir());
    if (!rel.empty() && *rel.begin() != "..") return rel.generic_string();
    return fs::absolute(path).lexically_normal().generic_string();
  }

  std::string name_;
  const Options& opts_;
  RunManifest manifest_;
  Clock::time_point begun_;
  std::optional<std::uint64_t> upstream_seed_;
};

// Upstream pipeline.conf (or the simulator's settings), then --config, then
// command-line overrides.
Settings load_settings(const Options& opts, const std::optional<fs::path>& base,
                       std::optional<std::uint64_t> upstream_seed, bool derive_from_sim = false) {
  Settings s;
  if (upstream_seed) s.sim.seed = s.study.seed = *upstream_seed;
  if (base && fs::exists(*base)) {
    auto kv = KeyValueConfig::load(base->string());
    apply(kv, s.pipeline);
    kv.require_all_consumed();
  }
  std::optional<KeyValueConfig> kv_pipe;
  if (!opts.config.empty()) {
    auto text = read_file(opts.config);
    auto kv_sim = KeyValueConfig::parse(text);
    auto kv_study = KeyValueConfig::parse(text);
    kv_pipe = KeyValueConfig::parse(text);
    apply(kv_sim, s.sim);
    apply(kv_study, s.study);
    auto sim_left = kv_sim.unconsumed(), study_left = kv_study.unconsumed();
    for (const auto& [k, v] : kv_sim.values()) {
      if (!sim_left.contains(k) || !study_left.contains(k)) s.extra_text += k + "=" + v + "\n";
    }
    auto probe = *kv_pipe;
    apply(probe, s.pipeline);
    std::string unknown;
    for (const auto& k : probe.unconsumed()) {
      if (sim_left.contains(k) && study_left.contains(k)) unknown += (unknown.empty() ? "" : ", ") + k;
    }
    if (!unknown.empty()) throw ConfigError(opts.config + ": unknown keys: " + unknown);
  }
  if (opts.seed) {
    s.sim.seed = *opts.seed;
    s.study.seed = *opts.seed;
  }
  if (derive_from_sim) s.pipeline = s.sim.pipeline_config();
  if (kv_pipe) apply(*kv_pipe, s.pipeline);
  auto threshold = [](const std::string& flag, const std::string& text, ThresholdSetting& field) {
    if (text.empty()) return;
    try {
      field = parse_threshold(text);
    } catch (const std::exception& e) {
      throw ConfigError("--" + flag + ": " + e.what());
    }
  };
  threshold("mobility-threshold", opts.mobility_threshold, s.pipeline.mobility_threshold);
  threshold("disconnection-threshold", opts.disconnection_threshold, s.pipeline.disconnection_threshold);
  threshold("gap-threshold", opts.gap_threshold, s.pipeline.gap_threshold);
  s.pipeline.validate();
  s.sim.validate();
  s.extra_text += "seed=" + std::to_string(s.sim.seed) + "\n";
  return s;
}

void record_thresholds(Stage& st, const Settings& s) {
  st.manifest().settings["mobility_threshold"] = format_threshold(s.pipeline.mobility_threshold);
  st.manifest().settings["disconnection_threshold"] = format_threshold(s.pipeline.disconnection_threshold);
  st.manifest().settings["gap_threshold"] = format_threshold(s.pipeline.gap_threshold);
}

nlohmann::ordered_json learned_json(Duration used, const std::optional<LearnedThreshold>& learned) {
  nlohmann::ordered_json j;
  j["seconds"] = used.count();
  j["learned"] = learned.has_value();
  if (learned) {
    j["exact_seconds"] = learned->exact_seconds;
    j["samples"] = learned->samples;
  }
  return j;
}

void write_json(const std::string& path, const nlohmann::ordered_json& j) {
  auto out = open_output(path);
  out << j.dump(2) << '\n';
}

// Inputs shared by every stage after ingest.
struct Inputs {
  ApRegistry registry;
  Roster roster;
  Schedule schedule;
  std::optional<AttendanceRecord> attendance;
};

Inputs load_inputs(Stage& st, const fs::path& ingest, const PipelineConfig& config) {
  Inputs in;
  in.registry = load_registry(st.input(ingest / "aps.csv"));
  in.roster = load_roster(st.input(ingest / "roster.csv"));
  in.schedule = load_schedule(st.input(ingest / "lectures.csv"), st.input(ingest / "meetings.csv"), config);
  if (auto a = st.optional_input(ingest / "attendance.csv")) in.attendance = load_attendance(*a);
  return in;
}

std::optional<fs::path> conf_of(const fs::path& stage_dir) { return stage_dir / "pipeline.conf"; }

// ---- subcommands ----

void cmd_simulate(const Options& opts) {
  Stage st("simulate", opts);
  auto s = load_settings(opts, std::nullopt, std::nullopt, true);
  st.prepare();
  auto scenario = simulate(s.sim);
  write_scenario(st.dir().string(), scenario);
  st.manifest().settings["users"] = std::to_string(s.sim.users);
  st.manifest().settings["weeks"] = std::to_string(s.sim.weeks);
  st.manifest().settings["events"] = std::to_string(scenario.corpus.size());
  record_thresholds(st, s);
  st.finish(s);
  std::cout << "simulate: " << scenario.corpus.size() << " events for " << s.sim.users << " users -> "
            << st.dir().string() << "\n";
}

void cmd_ingest(const Options& opts) {
  Stage st("ingest", opts);
  fs::path src;
  if (!opts.input.empty()) {
    src = opts.input;
    if (!fs::is_directory(src)) throw Error("--input " + opts.input + " is not a directory");
  } else {
    src = st.require("simulate");
  }
  auto s = load_settings(opts, conf_of(src), st.upstream_seed());
  auto corpus = load_corpus(st.input(src / "logs.csv"), s.pipeline);
  auto registry = load_registry(st.input(src / "aps.csv"));
  auto roster = load_roster(st.input(src / "roster.csv"));
  auto schedule = load_schedule(st.input(src / "lectures.csv"), st.input(src / "meetings.csv"), s.pipeline);
  std::optional<AttendanceRecord> attendance;
  if (auto a = st.optional_input(src / "attendance.csv")) attendance = load_attendance(*a);
  std::optional<UserTable> scores, pe;
  if (auto p = st.optional_input(src / "scores.csv")) scores = load_user_table(*p);
  if (auto p = st.optional_input(src / "pe.csv")) pe = load_user_table(*p);
  cross_validate(registry, roster, schedule, attendance.value_or(AttendanceRecord{}));

  st.prepare();
  write_corpus(st.output("logs.csv"), corpus, s.pipeline);
  write_registry(st.output("aps.csv"), registry);
  write_roster(st.output("roster.csv"), roster);
  write_lectures(st.output("lectures.csv"), schedule, s.pipeline);
  write_meetings(st.output("meetings.csv"), schedule, s.pipeline);
  if (attendance) write_attendance(st.output("attendance.csv"), *attendance);
  if (scores) write_user_table(st.output("scores.csv"), *scores);
  if (pe) write_user_table(st.output("pe.csv"), *pe);

  nlohmann::ordered_json j;
  j["lines"] = corpus.stats.lines;
  j["events"] = corpus.stats.kept;
  j["dropped_out_of_window"] = corpus.stats.dropped_out_of_window;
  j["failed_lines"] = corpus.stats.failed;
  j["warnings"] = corpus.stats.warnings;
  j["users"] = roster.users.size();
  j["access_points"] = registry.access_points().size();
  j["lectures"] = schedule.lectures.size();
  j["meetings"] = schedule.meetings.size();
  j["attendance_records"] = attendance ? attendance->present.size() : 0;
  write_json(st.output("summary.json"), j);
  record_thresholds(st, s);
  st.finish(s);
  for (const auto& w : corpus.stats.warnings) std::cerr << "ingest: warning: " << w << "\n";
  std::cout << "ingest: " << corpus.stats.kept << " events kept of " << corpus.stats.lines << " lines\n";
}

void cmd_segment(const Options& opts) {
  Stage st("segment", opts);
  auto ingest = st.require("ingest");
  auto s = load_settings(opts, conf_of(ingest), st.upstream_seed());
  auto in = load_inputs(st, ingest, s.pipeline);
  auto corpus = load_corpus(st.input(ingest / "logs.csv"), s.pipeline);
  auto seg = run_segment_stage(corpus, in.registry, in.roster, in.schedule,
                               in.attendance ? &*in.attendance : nullptr, s.pipeline);
  st.prepare();
  write_dwells(st.output("dwells.csv"), seg.result.dwells, in.registry, s.pipeline);
  nlohmann::ordered_json j;
  j["mobility_threshold"] = learned_json(seg.result.mobility_threshold, seg.learned_mobility);
  j["disconnection_threshold"] = learned_json(seg.result.disconnection_threshold, seg.learned_disconnection);
  j["unregistered_events"] = seg.result.unregistered_events;
  write_json(st.output("thresholds.json"), j);
  record_thresholds(st, s);
  st.manifest().settings["mobility_threshold_seconds"] = std::to_string(seg.result.mobility_threshold.count());
  st.manifest().settings["disconnection_threshold_seconds"] =
      std::to_string(seg.result.disconnection_threshold.count());
  st.finish(s);
  std::cout << "segment: mobility " << seg.result.mobility_threshold.count() << "s, disconnection "
            << seg.result.disconnection_threshold.count() << "s\n";
}

void cmd_collocate(const Options& opts) {
  Stage st("collocate", opts);
  auto ingest = st.require("ingest");
  auto segment = st.require("segment");
  auto s = load_settings(opts, conf_of(segment), st.upstream_seed());
  auto in = load_inputs(st, ingest, s.pipeline);
  auto dwells = load_dwells(st.input(segment / "dwells.csv"), in.registry, s.pipeline);
  auto co = run_collocate_stage(dwells, in.roster, s.pipeline);
  st.prepare();
  write_episodes(st.output("group_raw.csv"), co.group_raw, in.registry, s.pipeline);
  write_episodes(st.output("group_episodes.csv"), co.group_episodes, in.registry, s.pipeline);
  write_episodes(st.output("cohort_episodes.csv"), co.cohort_episodes, in.registry, s.pipeline);
  nlohmann::ordered_json j;
  j["gap_threshold"] = learned_json(co.gap_threshold, co.learned_gap);
  j["group_raw_episodes"] = co.group_raw.size();
  j["group_episodes"] = co.group_episodes.size();
  j["cohort_episodes"] = co.cohort_episodes.size();
  write_json(st.output("gap.json"), j);
  record_thresholds(st, s);
  st.manifest().settings["gap_threshold_seconds"] = std::to_string(co.gap_threshold.count());
  st.finish(s);
  std::cout << "collocate: " << co.group_episodes.size() << " group episodes (gap " << co.gap_threshold.count()
            << "s)\n";
}

void cmd_validate(const Options& opts) {
  Stage st("validate", opts);
  auto ingest = st.require("ingest");
  auto segment = st.require("segment");
  auto s = load_settings(opts, conf_of(segment), st.upstream_seed());
  auto in = load_inputs(st, ingest, s.pipeline);
  auto corpus = load_corpus(st.input(ingest / "logs.csv"), s.pipeline);
  auto dwells = load_dwells(st.input(segment / "dwells.csv"), in.registry, s.pipeline);
  auto inference = infer_attendance(dwells, in.schedule, in.registry, in.roster, event_times(corpus),
                                    s.pipeline.margin_before_after);
  st.prepare();
  write_inference_csv(st.output("inference.csv"), inference);
  if (in.attendance) {
    auto report = score(inference, *in.attendance);
    write_report_json(st.output("report.json"), report);
    std::cout << "validate: precision " << report.precision << ", recall " << report.recall << "\n";
  } else {
    st.manifest().settings["report"] = "skipped: no attendance.csv in ingest";
    std::cout << "validate: no attendance records; wrote inference only\n";
  }
  record_thresholds(st, s);
  st.finish(s);
}

void cmd_features(const Options& opts) {
  Stage st("features", opts);
  auto ingest = st.require("ingest");
  auto segment = st.require("segment");
  auto collocate = st.require("collocate");
  auto validate = st.require("validate");
  auto s = load_settings(opts, conf_of(collocate), st.upstream_seed());
  auto in = load_inputs(st, ingest, s.pipeline);
  auto dwells = load_dwells(st.input(segment / "dwells.csv"), in.registry, s.pipeline);
  auto episodes = load_episodes(st.input(collocate / "group_episodes.csv"), in.registry, s.pipeline);
  auto inference = load_inference_csv(st.input(validate / "inference.csv"));
  auto fx = extract_features(dwells, episodes, inference, in.schedule, in.roster, in.registry, s.pipeline);
  st.prepare();
  write_user_table(st.output("features.csv"), to_table(fx.vectors));
  {
    auto out = open_output(st.output("weekly.csv"));
    std::vector<std::string> header{"user_id", "week"};
    for (const auto& n : individual_raw_names()) header.push_back(n);
    for (const auto& n : collocation_raw_names()) header.push_back(n);
    out << join_fields(header) << '\n';
    for (const auto& [user, weeks] : fx.weekly) {
      for (std::size_t w = 0; w < weeks.size(); ++w) {
        out << user << ',' << w;
        for (double v : weeks[w].individual) out << ',' << v;
        for (double v : weeks[w].collocation) out << ',' << v;
        out << '\n';
      }
    }
  }
  record_thresholds(st, s);
  st.finish(s);
  std::cout << "features: " << fx.vectors.size() << " users x " << all_feature_columns().size()
            << " columns\n";
}

void cmd_train(const Options& opts) {
  Stage st("train", opts);
  auto ingest = st.require("ingest");
  auto features = st.require("features");
  auto s = load_settings(opts, conf_of(features), st.upstream_seed());
  auto roster = load_roster(st.input(ingest / "roster.csv"));
  auto scores_path = st.optional_input(ingest / "scores.csv");
  if (!scores_path) {
    throw Error("ingest has no scores.csv; add scores.csv to the input directory and rerun `wifico ingest`");
  }
  auto scores = load_user_table(*scores_path);
  UserTable pe;
  if (auto p = st.optional_input(ingest / "pe.csv")) pe = load_user_table(*p);
  auto vectors = from_table(load_user_table(st.input(features / "features.csv")));
  auto data = build_study_data(vectors, pe, scores, roster);
  auto result = run_study(data, s.study);
  st.prepare();
  write_results_json(st.output("results.json"), result, data);
  {
    auto out = open_output(st.output("summary.md"));
    out << markdown_summary(result);
  }
  for (const auto& w : result.warnings) std::cerr << "train: warning: " << w << "\n";
  st.manifest().settings["samples"] = std::to_string(data.users.size());
  st.manifest().settings["k"] = s.study.fixed_k ? std::to_string(*s.study.fixed_k) : "auto";
  st.finish(s);
  std::cout << markdown_summary(result);
}

nlohmann::ordered_json graph_json(const InteractionGraph& g) {
  nlohmann::ordered_json j;
  j["period"] = g.period;
  j["nodes"] = g.nodes;
  auto edges = nlohmann::ordered_json::array();
  for (const auto& [key, value] : g.edges) edges.push_back({key.first, key.second, value.count()});
  j["edges"] = edges;
  return j;
}

void cmd_report(const Options& opts) {
  if (opts.format != "csv" && opts.format != "json") throw ConfigError("--format must be csv or json");
  Stage st("report", opts);
  auto ingest = st.require("ingest");
  auto segment = st.require("segment");
  auto collocate = st.require("collocate");
  auto validate = st.require("validate");
  auto s = load_settings(opts, conf_of(collocate), st.upstream_seed());
  auto in = load_inputs(st, ingest, s.pipeline);
  auto dwells = load_dwells(st.input(segment / "dwells.csv"), in.registry, s.pipeline);
  auto cohort = load_episodes(st.input(collocate / "cohort_episodes.csv"), in.registry, s.pipeline);
  auto group = load_episodes(st.input(collocate / "group_episodes.csv"), in.registry, s.pipeline);
  auto inference = load_inference_csv(st.input(validate / "inference.csv"));

  auto weekly = weekly_graphs(cohort, in.roster, in.schedule, s.pipeline);
  auto semester = aggregate_graph(weekly);
  auto usage = space_usage(group, in.registry, in.roster, s.pipeline);
  auto punct = punctuality(dwells, in.schedule, in.registry, inference);
  const auto midterm = s.sim.midterm_week;

  st.prepare();
  if (opts.format == "csv") {
    for (const auto& g : weekly) write_graph_csv(st.output("graphs/" + g.period + ".csv"), g);
    write_graph_csv(st.output("graphs/semester.csv"), semester);
    {
      auto out = open_output(st.output("graphs/semester.dot"));
      out << to_dot(semester);
    }
    write_space_usage_csv(st.output("space_usage.csv"), usage, midterm);
    write_punctuality_csv(st.output("punctuality.csv"), punct);
  } else {
    nlohmann::ordered_json j;
    auto graphs = nlohmann::ordered_json::array();
    for (const auto& g : weekly) graphs.push_back(graph_json(g));
    j["weekly_graphs"] = graphs;
    j["semester_graph"] = graph_json(semester);
    auto rows = nlohmann::ordered_json::array();
    for (std::size_t w = 0; w < usage.weekly.size(); ++w) {
      nlohmann::ordered_json row;
      row["week"] = w;
      row["phase"] = to_string(phase_of(w, midterm));
      for (std::size_t c = 0; c < kCategoryCount; ++c) row[std::string(to_string(kAllCategories[c]))] = usage.weekly[w][c];
      rows.push_back(row);
    }
    j["space_usage"] = rows;
    j["punctuality"] = {{"records", punct.records.size()},
                        {"median_entry_seconds", punct.median_entry_seconds},
                        {"median_exit_seconds", punct.median_exit_seconds}};
    write_json(st.output("report.json"), j);
  }
  st.manifest().settings["format"] = opts.format;
  st.finish(s);
  std::cout << "report: " << weekly.size() << " weekly graphs, punctuality median entry "
            << punct.median_entry_seconds << "s exit " << punct.median_exit_seconds << "s\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"WiFi association-log collocation pipeline"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  Options opts;

  struct Command {
    const char* name;
    const char* help;
    void (*run)(const Options&);
  };
  const std::vector<Command> commands{
      {"simulate", "Generate a synthetic campus scenario", cmd_simulate},
      {"ingest", "Load and cross-check raw inputs", cmd_ingest},
      {"segment", "Label dwell segments per user", cmd_segment},
      {"collocate", "Intersect dwells into collocation episodes", cmd_collocate},
      {"validate", "Infer attendance and score it against sign-ins", cmd_validate},
      {"features", "Weekly features and semester summaries", cmd_features},
      {"train", "Cross-validated score models", cmd_train},
      {"report", "Interaction graphs, space usage and punctuality", cmd_report},
  };
  const Command* chosen = nullptr;
  for (const auto& c : commands) {
    auto* sub = app.add_subcommand(c.name, c.help);
    sub->add_option("--run-dir", opts.run_dir, "Run directory")->capture_default_str();
    sub->add_option("--config", opts.config, "key = value configuration file")->check(CLI::ExistingFile);
    sub->add_option("--seed", opts.seed, "Seed for simulation and fold assignment");
    sub->add_option("--jobs", opts.jobs, "Worker cap")->check(CLI::PositiveNumber)->capture_default_str();
    sub->add_option("--mobility-threshold", opts.mobility_threshold, "Duration (e.g. 233s) or 'learn'");
    sub->add_option("--disconnection-threshold", opts.disconnection_threshold, "Duration (e.g. 76m) or 'learn'");
    sub->add_option("--gap-threshold", opts.gap_threshold, "Duration (e.g. 667s) or 'learn'");
    if (std::string(c.name) == "ingest") {
      sub->add_option("--input", opts.input, "Directory with logs.csv, aps.csv, roster.csv, ...");
    }
    if (std::string(c.name) == "report") {
      sub->add_option("--format", opts.format, "csv or json")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
    }
    sub->callback([&chosen, &c] { chosen = &c; });
  }
  CLI11_PARSE(app, argc, argv);
  if (!chosen) return 2;
  try {
    chosen->run(opts);
  } catch (const std::exception& e) {
    std::cerr << "wifico " << chosen->name << ": error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
