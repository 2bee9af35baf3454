#include "aerogeo/cli.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>

#include "CLI11.hpp"
#include "aerogeo/evaluation.hpp"
#include "aerogeo/io.hpp"
#include "aerogeo/pipeline.hpp"
#include "aerogeo/simulator.hpp"

namespace aerogeo::cli {

namespace fs = std::filesystem;

namespace {

struct RunConfig {
  std::string out_dir;
  std::string convention = "corrected";
  bool lenient = false;
  unsigned threads = 0;
  double gate_m = 10.0;
  int max_coast_frames = 90;
  std::optional<std::uint64_t> seed;
  std::string format = "csv";

  // estimate
  std::string telemetry;
  std::string detections;
  std::string detections_format;
  double horizon_warning_deg = 85.0;
  // track / evaluate
  std::string fixes;
  std::string tracks;
  std::string truth;
  std::vector<std::string> matches;
  double auto_gate_m = 50.0;
  // simulate / sweep / bench
  std::string scenario;
  std::string grid;
  std::size_t replicates = 10;
  std::string dataset;
  std::size_t repetitions = 5;
  std::size_t min_frames = 3000;
};

AxisConvention parse_convention(const std::string& s) {
  if (s == "corrected") {
    return AxisConvention::Corrected;
  }
  if (s == "paper-verbatim") {
    return AxisConvention::PaperVerbatim;
  }
  throw ConfigError("--convention must be corrected or paper-verbatim, got '" + s + "'");
}

void require_file(const std::string& path, const char* flag) {
  if (path.empty()) {
    throw ConfigError(std::string(flag) + " is required");
  }
  if (!fs::exists(path)) {
    throw IoError(std::string(flag) + ": " + path + " does not exist");
  }
}

fs::path require_out(const RunConfig& cfg) {
  if (cfg.out_dir.empty()) {
    throw ConfigError("--out is required");
  }
  ensure_directory(cfg.out_dir);
  return cfg.out_dir;
}

PipelineOptions pipeline_options(const RunConfig& cfg) {
  PipelineOptions p;
  p.estimate.convention = parse_convention(cfg.convention);
  p.estimate.horizon_warning_deg = cfg.horizon_warning_deg;
  p.gate.gate_m = cfg.gate_m;
  p.gate.max_coast_frames = cfg.max_coast_frames;
  p.threads = cfg.threads;
  if (!(p.gate.gate_m > 0.0) || p.gate.max_coast_frames < 0) {
    throw ConfigError("--gate-m must be > 0 and --max-coast-frames >= 0");
  }
  return p;
}

template <typename T>
T load_with(const std::string& path, T (*parse)(std::istream&, const std::string&)) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open " + path);
  }
  return parse(in, fs::path(path).filename().string());
}

int cmd_estimate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  require_file(cfg.telemetry, "--telemetry");
  require_file(cfg.detections, "--detections");
  const PipelineOptions options = pipeline_options(cfg);
  const fs::path out_dir = require_out(cfg);

  const auto telemetry = load_telemetry(cfg.telemetry, cfg.lenient);
  std::string format = cfg.detections_format;
  if (format.empty()) {
    format = fs::is_directory(cfg.detections) ? "yolo-normalized" : "native-csv";
  }
  Parsed<DetectionRecord> detections;
  if (parse_detection_format(format) == DetectionFormat::NativeCsv) {
    detections = load_detections_csv(cfg.detections, cfg.lenient);
  } else {
    detections = load_yolo_directory(cfg.detections, telemetry.records, cfg.lenient);
  }
  if (telemetry.skipped_rows + detections.skipped_rows > 0) {
    err << "lenient: skipped " << telemetry.skipped_rows << " telemetry and "
        << detections.skipped_rows << " detection rows\n";
  }

  const auto bundles = join_frames(telemetry.records, detections.records);
  const auto observations = to_observations(bundles);
  const auto outcomes = estimate_batch(observations, options.estimate, options.threads);
  write_atomically(out_dir / "fixes.csv", [&](std::ostream& o) { write_fixes_csv(o, outcomes); });
  out << "estimated " << outcomes.size() - count_unestimable(outcomes) << " of "
      << outcomes.size() << " detections over " << bundles.size() << " frames\n";
  return kExitOk;
}

int cmd_track(const RunConfig& cfg, std::ostream& out) {
  require_file(cfg.fixes, "--fixes");
  const PipelineOptions options = pipeline_options(cfg);
  const fs::path out_dir = require_out(cfg);
  const auto outcomes = load_with<std::vector<FixOutcome>>(cfg.fixes, &parse_fixes_csv);
  const auto tracks = associate(group_by_frame(outcomes), options.gate);
  write_atomically(out_dir / "tracks.csv", [&](std::ostream& o) { write_tracks_csv(o, tracks); });
  out << tracks.size() << " track(s)\n";
  return kExitOk;
}

int cmd_evaluate(const RunConfig& cfg, std::ostream& out) {
  require_file(cfg.tracks, "--tracks");
  require_file(cfg.truth, "--truth");
  if (!cfg.fixes.empty()) {
    require_file(cfg.fixes, "--fixes");
  }
  const ReportFormat format = parse_report_format(cfg.format);
  const fs::path out_dir = require_out(cfg);

  const auto tracks = load_with<std::vector<Track>>(cfg.tracks, &parse_tracks_csv);
  const auto truth = load_truth_csv(cfg.truth, cfg.lenient);
  std::size_t unestimable = 0;
  if (!cfg.fixes.empty()) {
    unestimable =
        count_unestimable(load_with<std::vector<FixOutcome>>(cfg.fixes, &parse_fixes_csv));
  }
  MatchOptions matching;
  matching.auto_gate_m = cfg.auto_gate_m;
  if (!cfg.matches.empty()) {
    matching.labels.emplace();
    for (const auto& m : cfg.matches) {
      const auto eq = m.rfind('=');
      if (eq == std::string::npos || eq == 0) {
        throw ConfigError("--match expects LABEL=TRACK_ID, got '" + m + "'");
      }
      try {
        (*matching.labels)[m.substr(0, eq)] = std::stoll(m.substr(eq + 1));
      } catch (const std::exception&) {
        throw ConfigError("--match expects LABEL=TRACK_ID, got '" + m + "'");
      }
    }
  }

  const ErrorReport report = score(tracks, truth.records, matching, unestimable);
  if (format == ReportFormat::Csv) {
    write_atomically(out_dir / "errors.csv", [&](std::ostream& o) { write_errors_csv(o, report); });
  } else {
    write_atomically(out_dir / "errors.json",
                     [&](std::ostream& o) { write_errors_json(o, report); });
  }
  write_atomically(out_dir / "summary.json",
                   [&](std::ostream& o) { write_summary_json(o, report); });
  out << "evaluated " << report.frames_evaluated << " fixes over " << report.tracks.size()
      << " track(s); median " << format_double(report.overall.median_m) << " m\n";
  return kExitOk;
}

int cmd_simulate(const RunConfig& cfg, std::ostream& out) {
  require_file(cfg.scenario, "--scenario");
  sim::ScenarioConfig scenario = sim::load_scenario(cfg.scenario);
  if (cfg.seed) {
    scenario.seed = *cfg.seed;
  }
  if (!cfg.detections_format.empty()) {
    scenario.detection_format = parse_detection_format(cfg.detections_format);
  }
  const fs::path out_dir = require_out(cfg);
  const sim::Manifest m = sim::generate(scenario, out_dir);
  out << m.telemetry_rows << " frames, " << m.detections << " detections, " << m.truth_records
      << " truth record(s)\n";
  for (const auto& w : m.warnings) {
    out << "warning: " << w << '\n';
  }
  return kExitOk;
}

int cmd_sweep(const RunConfig& cfg, std::ostream& out) {
  require_file(cfg.scenario, "--scenario");
  require_file(cfg.grid, "--grid");
  sim::ScenarioConfig scenario = sim::load_scenario(cfg.scenario);
  if (cfg.seed) {
    scenario.seed = *cfg.seed;
  }
  const sim::SweepGrid grid = sim::load_grid(cfg.grid);
  const PipelineOptions options = pipeline_options(cfg);
  const fs::path out_dir = require_out(cfg);
  const sim::SweepResult result =
      sim::sweep(scenario, grid, cfg.replicates, options, cfg.threads);
  write_atomically(out_dir / "sweep.csv", [&](std::ostream& o) { sim::write_sweep_csv(o, result); });
  write_atomically(out_dir / "sweep_summary.csv",
                   [&](std::ostream& o) { sim::write_sweep_summary_csv(o, result); });
  out << result.cells.size() << " cell(s) x " << cfg.replicates << " replicate(s)\n";
  return kExitOk;
}

int cmd_bench(const RunConfig& cfg, std::ostream& out) {
  if (cfg.dataset.empty() || !fs::is_directory(cfg.dataset)) {
    throw IoError("--dataset must name an existing directory");
  }
  const fs::path out_dir = require_out(cfg);
  const BenchResult r = run_bench(cfg.dataset, cfg.repetitions, cfg.min_frames);
  write_atomically(out_dir / "bench.json", [&](std::ostream& o) { write_bench_json(o, r); });
  out << format_double(r.math_only_frames_per_second()) << " frames/s (math only), "
      << "three/single ratio " << format_double(r.three_to_single_ratio()) << '\n';
  return kExitOk;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Aerial geolocation of near-surface marine robots", "aerogeo"};
  app.require_subcommand(1);
  RunConfig cfg;

  const auto common = [&](CLI::App* sub) {
    sub->add_option("--out", cfg.out_dir, "Output directory")->required();
    sub->add_option("--threads", cfg.threads, "Worker threads (0 = auto)");
  };
  const auto pipeline_flags = [&](CLI::App* sub) {
    sub->add_option("--convention", cfg.convention, "corrected | paper-verbatim");
    sub->add_option("--gate-m", cfg.gate_m, "Track association gate [m]");
    sub->add_option("--max-coast-frames", cfg.max_coast_frames, "Frames a track may coast");
  };

  auto* estimate = app.add_subcommand("estimate", "Estimate robot positions per detection");
  common(estimate);
  pipeline_flags(estimate);
  estimate->add_option("--telemetry", cfg.telemetry, "telemetry.csv or .jsonl")->required();
  estimate->add_option("--detections", cfg.detections, "detections.csv or labels directory")
      ->required();
  estimate->add_option("--detections-format", cfg.detections_format,
                       "native-csv | yolo-normalized");
  estimate->add_option("--horizon-warning-deg", cfg.horizon_warning_deg,
                       "Flag fixes whose ray is this close to the horizon");
  estimate->add_flag("--lenient", cfg.lenient, "Skip malformed rows instead of failing");

  auto* track = app.add_subcommand("track", "Associate fixes into per-robot tracks");
  common(track);
  pipeline_flags(track);
  track->add_option("--fixes", cfg.fixes, "fixes.csv from estimate")->required();

  auto* evaluate = app.add_subcommand("evaluate", "Score tracks against recorded truth");
  common(evaluate);
  evaluate->add_option("--tracks", cfg.tracks, "tracks.csv from track")->required();
  evaluate->add_option("--truth", cfg.truth, "truth.csv")->required();
  evaluate->add_option("--fixes", cfg.fixes, "fixes.csv, to count unestimable detections");
  evaluate->add_option("--match", cfg.matches, "LABEL=TRACK_ID (repeatable); default auto");
  evaluate->add_option("--auto-gate-m", cfg.auto_gate_m, "Auto-match distance gate [m]");
  evaluate->add_option("--format", cfg.format, "csv | json");
  evaluate->add_flag("--lenient", cfg.lenient, "Skip malformed truth rows");

  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic dataset");
  common(simulate);
  simulate->add_option("--scenario", cfg.scenario, "scenario.json")->required();
  simulate->add_option("--seed", cfg.seed, "Override the scenario seed");
  simulate->add_option("--detections-format", cfg.detections_format,
                       "native-csv | yolo-normalized");

  auto* sweep = app.add_subcommand("sweep", "Monte Carlo sweep over noise parameters");
  common(sweep);
  pipeline_flags(sweep);
  sweep->add_option("--scenario", cfg.scenario, "Base scenario.json")->required();
  sweep->add_option("--grid", cfg.grid, "grid.json")->required();
  sweep->add_option("--replicates", cfg.replicates, "Replicates per cell");
  sweep->add_option("--seed", cfg.seed, "Override the base seed");

  auto* bench = app.add_subcommand("bench", "Time the estimation pipeline on a dataset");
  common(bench);
  bench->add_option("--dataset", cfg.dataset, "Dataset directory")->required();
  bench->add_option("--repetitions", cfg.repetitions, "Timed repetitions");
  bench->add_option("--min-frames", cfg.min_frames, "Minimum dataset size");

  std::vector<std::string> argv_storage;
  argv_storage.reserve(args.size() + 1);
  argv_storage.emplace_back("aerogeo");
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_storage) {
    argv.push_back(a.data());
  }

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  }

  try {
    if (estimate->parsed()) {
      return cmd_estimate(cfg, out, err);
    }
    if (track->parsed()) {
      return cmd_track(cfg, out);
    }
    if (evaluate->parsed()) {
      return cmd_evaluate(cfg, out);
    }
    if (simulate->parsed()) {
      return cmd_simulate(cfg, out);
    }
    if (sweep->parsed()) {
      return cmd_sweep(cfg, out);
    }
    if (bench->parsed()) {
      return cmd_bench(cfg, out);
    }
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const Error& e) {
    // Parse, range, configuration and matching failures.
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  return kExitValidation;
}

} // namespace aerogeo::cli
