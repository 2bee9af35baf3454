#include "aerogeo/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <limits>
#include <map>

#include "json.hpp"

namespace aerogeo {

namespace {

const std::vector<std::string> kFixColumns = {
    "frame_id",    "detection_index", "lat_deg",            "lon_deg",
    "theta_x_deg", "theta_y_deg",     "d_forward_m",        "d_lateral_m",
    "bearing_offset_deg", "ground_range_m", "dn_m", "de_m", "warning", "error"};

const std::vector<std::string> kTrackColumns = {
    "track_id",    "frame_id",    "lat_deg",     "lon_deg",
    "theta_x_deg", "theta_y_deg", "d_forward_m", "d_lateral_m",
    "bearing_offset_deg", "ground_range_m", "dn_m", "de_m"};

void write_header(std::ostream& out, const std::vector<std::string>& columns) {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    out << (i ? "," : "") << columns[i];
  }
  out << '\n';
}

void write_diagnostics(std::ostream& out, const PositionFix& fix) {
  const auto& s = fix.solution;
  out << format_double(fix.estimate.lat_deg()) << ',' << format_double(fix.estimate.lon_deg())
      << ',' << format_double(rad_to_deg(fix.angles.theta_x_rad)) << ','
      << format_double(rad_to_deg(fix.angles.theta_y_rad)) << ','
      << format_double(s.d_forward_m) << ',' << format_double(s.d_lateral_m) << ','
      << format_double(rad_to_deg(s.bearing_offset_rad)) << ','
      << format_double(s.ground_range_m) << ',' << format_double(s.offset.north_m) << ','
      << format_double(s.offset.east_m);
}

PositionFix read_diagnostics(const csv::Reader& r) {
  PositionFix fix;
  fix.estimate = GeoPoint(r.number("lat_deg"), r.number("lon_deg"));
  fix.angles.theta_x_rad = deg_to_rad(r.number("theta_x_deg"));
  fix.angles.theta_y_rad = deg_to_rad(r.number("theta_y_deg"));
  fix.solution.d_forward_m = r.number("d_forward_m");
  fix.solution.d_lateral_m = r.number("d_lateral_m");
  fix.solution.bearing_offset_rad = deg_to_rad(r.number("bearing_offset_deg"));
  fix.solution.ground_range_m = r.number("ground_range_m");
  fix.solution.offset = EnuOffset{r.number("dn_m"), r.number("de_m")};
  return fix;
}

FixStatus status_from_code(const csv::Reader& r, const std::string& code) {
  for (const auto s : {FixStatus::Horizon, FixStatus::Domain, FixStatus::Singularity}) {
    if (to_code(s) == code) {
      return s;
    }
  }
  r.fail(ParseErrorKind::MalformedRow, "error", "unknown error code '" + code + "'");
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// Keeps up to `per_frame` detections per frame, padding with copies shifted
// by a quarter image width (alternating sides) when a frame has fewer.
std::vector<FrameBundle> variant(std::span<const FrameBundle> bundles, std::size_t per_frame) {
  std::vector<FrameBundle> out(bundles.begin(), bundles.end());
  for (auto& b : out) {
    if (b.detections.empty()) {
      continue;
    }
    if (b.detections.size() > per_frame) {
      b.detections.resize(per_frame);
    }
    const double w = b.telemetry.image_width_px;
    const DetectionRecord seed = b.detections.front();
    for (std::size_t k = 1; b.detections.size() < per_frame; ++k) {
      DetectionRecord copy = seed;
      const double shift = (k % 2 == 1 ? 1.0 : -1.0) * w / 4.0 * static_cast<double>((k + 1) / 2);
      copy.center.x_px = std::clamp(seed.center.x_px + shift, 0.0, w);
      b.detections.push_back(copy);
    }
  }
  return out;
}

double time_math(std::span<const Observation> observations, std::size_t frames,
                 std::size_t repetitions) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t rep = 0; rep < repetitions; ++rep) {
    const auto start = std::chrono::steady_clock::now();
    const auto outcomes = estimate_batch(observations, {}, 1);
    const auto grouped = group_by_frame(outcomes);
    const auto tracks = associate(grouped);
    const double elapsed = seconds_since(start);
    // Keep the optimizer from discarding the work.
    if (tracks.size() == std::numeric_limits<std::size_t>::max()) {
      throw Error("unreachable");
    }
    best = std::min(best, elapsed);
  }
  return best / static_cast<double>(frames);
}

} // namespace

PipelineResult run_estimation(std::span<const TelemetryRecord> telemetry,
                              std::span<const DetectionRecord> detections,
                              const PipelineOptions& options) {
  const auto bundles = join_frames(telemetry, detections);
  const auto observations = to_observations(bundles);
  PipelineResult result;
  result.outcomes = estimate_batch(observations, options.estimate, options.threads);
  result.tracks = associate(group_by_frame(result.outcomes), options.gate);
  return result;
}

std::size_t count_unestimable(std::span<const FixOutcome> outcomes) {
  return static_cast<std::size_t>(std::count_if(
      outcomes.begin(), outcomes.end(), [](const FixOutcome& o) { return !o.fix.has_value(); }));
}

void write_fixes_csv(std::ostream& out, std::span<const FixOutcome> outcomes) {
  write_header(out, kFixColumns);
  for (const auto& o : outcomes) {
    out << o.frame_id << ',' << o.detection_index << ',';
    if (o.fix) {
      write_diagnostics(out, *o.fix);
      out << ',' << (o.fix->near_horizon ? "near_horizon" : "") << ",\n";
    } else {
      out << ",,,,,,,,,,," << to_code(o.status) << '\n';
    }
  }
}

std::vector<FixOutcome> parse_fixes_csv(std::istream& in, const std::string& source) {
  csv::Reader reader(in, source);
  reader.require_columns(kFixColumns);
  std::vector<FixOutcome> out;
  while (reader.next_row()) {
    FixOutcome o;
    o.frame_id = reader.integer("frame_id");
    o.detection_index = static_cast<int>(reader.integer("detection_index"));
    const std::string& code = reader.text("error");
    if (code.empty()) {
      PositionFix fix = read_diagnostics(reader);
      fix.frame_id = o.frame_id;
      fix.detection_index = o.detection_index;
      fix.near_horizon = reader.text("warning") == "near_horizon";
      o.fix = fix;
    } else {
      o.status = status_from_code(reader, code);
    }
    out.push_back(std::move(o));
  }
  return out;
}

void write_tracks_csv(std::ostream& out, std::span<const Track> tracks) {
  write_header(out, kTrackColumns);
  for (const auto& t : tracks) {
    for (const auto& fix : t.fixes) {
      out << t.track_id << ',' << fix.frame_id << ',';
      write_diagnostics(out, fix);
      out << '\n';
    }
  }
}

std::vector<Track> parse_tracks_csv(std::istream& in, const std::string& source) {
  csv::Reader reader(in, source);
  reader.require_columns(kTrackColumns);
  std::map<std::int64_t, Track> by_id;
  while (reader.next_row()) {
    const std::int64_t id = reader.integer("track_id");
    PositionFix fix = read_diagnostics(reader);
    fix.frame_id = reader.integer("frame_id");
    fix.track_id = id;
    Track& t = by_id[id];
    t.track_id = id;
    if (!t.fixes.empty() && t.fixes.back().frame_id >= fix.frame_id) {
      reader.fail(ParseErrorKind::MalformedRow, "frame_id",
                  "frames of a track must be strictly increasing");
    }
    fix.detection_index = 0;
    t.fixes.push_back(fix);
  }
  std::vector<Track> out;
  for (auto& [id, t] : by_id) {
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<DetectionRecord> load_dataset_detections(const std::filesystem::path& dir,
                                                     std::span<const TelemetryRecord> telemetry,
                                                     bool lenient) {
  if (std::filesystem::exists(dir / "detections.csv")) {
    return load_detections_csv(dir / "detections.csv", lenient).records;
  }
  if (std::filesystem::is_directory(dir / "labels")) {
    return load_yolo_directory(dir / "labels", telemetry, lenient).records;
  }
  throw IoError(dir.string() + " holds neither detections.csv nor labels/");
}

BenchResult run_bench(const std::filesystem::path& dataset_dir, std::size_t repetitions,
                      std::size_t min_frames) {
  if (repetitions == 0) {
    throw ConfigError("repetitions must be >= 1");
  }
  const auto telemetry_path = std::filesystem::exists(dataset_dir / "telemetry.jsonl")
                                  ? dataset_dir / "telemetry.jsonl"
                                  : dataset_dir / "telemetry.csv";

  BenchResult result;
  result.repetitions = repetitions;

  double best_parse = std::numeric_limits<double>::infinity();
  std::vector<TelemetryRecord> telemetry;
  std::vector<DetectionRecord> detections;
  for (std::size_t rep = 0; rep < repetitions; ++rep) {
    const auto start = std::chrono::steady_clock::now();
    telemetry = load_telemetry(telemetry_path).records;
    detections = load_dataset_detections(dataset_dir, telemetry);
    const auto run = run_estimation(telemetry, detections);
    best_parse = std::min(best_parse, seconds_since(start));
    if (run.tracks.size() == std::numeric_limits<std::size_t>::max()) {
      throw Error("unreachable");
    }
  }

  result.frames = telemetry.size();
  if (result.frames == 0) {
    throw ConfigError("benchmark dataset has no frames");
  }
  if (result.frames < min_frames) {
    throw ConfigError("benchmark dataset has " + std::to_string(result.frames) +
                      " frames, at least " + std::to_string(min_frames) + " required");
  }
  result.detections = detections.size();
  const auto frames = static_cast<double>(result.frames);
  result.parse_included_s_per_frame = best_parse / frames;

  const auto bundles = join_frames(telemetry, detections);
  const auto all = to_observations(bundles);
  result.math_only_s_per_frame = time_math(all, result.frames, repetitions);

  const auto single = to_observations(variant(bundles, 1));
  const auto three = to_observations(variant(bundles, 3));
  result.single_robot_detections = single.size();
  result.three_robot_detections = three.size();
  result.single_robot_math_s_per_frame = time_math(single, result.frames, repetitions);
  result.three_robot_math_s_per_frame = time_math(three, result.frames, repetitions);
  return result;
}

void write_bench_json(std::ostream& out, const BenchResult& r) {
  nlohmann::ordered_json j;
  j["frames"] = r.frames;
  j["repetitions"] = r.repetitions;
  j["detections"] = r.detections;
  j["parse_included_s_per_frame"] = r.parse_included_s_per_frame;
  j["math_only_s_per_frame"] = r.math_only_s_per_frame;
  j["math_only_frames_per_second"] = r.math_only_frames_per_second();
  j["single_robot"] = {{"detections", r.single_robot_detections},
                       {"math_s_per_frame", r.single_robot_math_s_per_frame}};
  j["three_robot"] = {{"detections", r.three_robot_detections},
                      {"math_s_per_frame", r.three_robot_math_s_per_frame}};
  j["three_to_single_ratio"] = r.three_to_single_ratio();
  j["capture_rate_fps"] = 30.0;
  j["meets_capture_rate"] = r.math_only_frames_per_second() >= 30.0;
  out << j.dump(2) << '\n';
}

} // namespace aerogeo
