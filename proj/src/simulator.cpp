#include "aerogeo/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>

#include "aerogeo/io.hpp"
#include "aerogeo/oracle.hpp"
#include "aerogeo/parallel.hpp"

namespace aerogeo::sim {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

class NoiseStream {
public:
  NoiseStream(std::uint64_t seed) : engine_(seed) {}

  double gaussian(double sigma) {
    if (sigma <= 0.0) {
      return 0.0;
    }
    return std::normal_distribution<double>(0.0, sigma)(engine_);
  }
  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }

private:
  std::mt19937_64 engine_;
};

double lerp(double a, double b, double t) { return a + (b - a) * t; }

// Index pair and blend factor for frame f within sorted keyframes.
template <typename Keyframe>
std::tuple<const Keyframe*, const Keyframe*, double> bracket(const std::vector<Keyframe>& kfs,
                                                             std::int64_t f) {
  if (f <= kfs.front().frame) {
    return {&kfs.front(), &kfs.front(), 0.0};
  }
  if (f >= kfs.back().frame) {
    return {&kfs.back(), &kfs.back(), 0.0};
  }
  const auto hi = std::upper_bound(kfs.begin(), kfs.end(), f,
                                   [](std::int64_t v, const Keyframe& k) { return v < k.frame; });
  const auto lo = hi - 1;
  const double t = static_cast<double>(f - lo->frame) / static_cast<double>(hi->frame - lo->frame);
  return {&*lo, &*hi, t};
}

// Heading follows the shorter arc between keyframes.
double heading_lerp(double from_deg, double to_deg, double t) {
  double delta = std::fmod(to_deg - from_deg, 360.0);
  if (delta > 180.0) {
    delta -= 360.0;
  } else if (delta <= -180.0) {
    delta += 360.0;
  }
  return from_deg + delta * t;
}

DroneKeyframe drone_at(const std::vector<DroneKeyframe>& kfs, std::int64_t f) {
  const auto [a, b, t] = bracket(kfs, f);
  return DroneKeyframe{f,
                       lerp(a->east_m, b->east_m, t),
                       lerp(a->north_m, b->north_m, t),
                       lerp(a->altitude_m, b->altitude_m, t),
                       heading_lerp(a->heading_deg, b->heading_deg, t),
                       lerp(a->depression_deg, b->depression_deg, t)};
}

oracle::GroundPoint robot_at(const RobotPath& path, std::int64_t f) {
  const auto [a, b, t] = bracket(path.waypoints, f);
  return oracle::GroundPoint{lerp(a->east_m, b->east_m, t), lerp(a->north_m, b->north_m, t)};
}

template <typename Keyframe>
void check_keyframes(const std::vector<Keyframe>& kfs, const std::string& what) {
  if (kfs.empty()) {
    throw ConfigError(what + " needs at least one keyframe");
  }
  for (std::size_t i = 1; i < kfs.size(); ++i) {
    if (kfs[i].frame <= kfs[i - 1].frame) {
      throw ConfigError(what + " keyframes must have strictly increasing frames");
    }
  }
}

void check_nonnegative(double v, const char* name) {
  if (!std::isfinite(v) || v < 0.0) {
    throw ConfigError(std::string(name) + " must be a finite value >= 0");
  }
}

double json_number(const nlohmann::json& j, const char* key, double fallback) {
  return j.contains(key) ? j.at(key).get<double>() : fallback;
}

double& noise_field(NoiseModel& n, const std::string& name) {
  if (name == "gnss_sigma_m") return n.gnss_sigma_m;
  if (name == "heading_sigma_deg") return n.heading_sigma_deg;
  if (name == "altitude_sigma_m") return n.altitude_sigma_m;
  if (name == "tide_bias_m") return n.tide_bias_m;
  if (name == "tide_drift_m_per_min") return n.tide_drift_m_per_min;
  if (name == "pixel_sigma_px") return n.pixel_sigma_px;
  if (name == "truth_misalignment_sigma_m") return n.truth_misalignment_sigma_m;
  if (name == "detection_dropout_prob") return n.detection_dropout_prob;
  throw ConfigError("unknown noise parameter '" + name + "'");
}

const char* const kNoiseFields[] = {"gnss_sigma_m",         "heading_sigma_deg",
                                    "altitude_sigma_m",     "tide_bias_m",
                                    "tide_drift_m_per_min", "pixel_sigma_px",
                                    "truth_misalignment_sigma_m", "detection_dropout_prob"};

} // namespace

std::uint64_t derive_seed(std::uint64_t master, std::string_view stream, std::uint64_t a,
                          std::uint64_t b) {
  std::uint64_t h = splitmix64(master);
  h = splitmix64(h ^ fnv1a(stream));
  h = splitmix64(h ^ a);
  return splitmix64(h ^ (b * 0x9e3779b97f4a7c15ULL + 1));
}

void validate(const ScenarioConfig& cfg) {
  if (cfg.duration_frames < 1) {
    throw ConfigError("duration_frames must be >= 1");
  }
  if (!(cfg.fps > 0.0) || !std::isfinite(cfg.fps)) {
    throw ConfigError("fps must be > 0");
  }
  if (cfg.robot_paths.empty()) {
    throw ConfigError("scenario needs at least one robot");
  }
  check_keyframes(cfg.drone_path, "drone_path");
  for (const auto& k : cfg.drone_path) {
    if (!(k.altitude_m > 0.0)) {
      throw ConfigError("drone altitude_m must be > 0");
    }
    if (k.depression_deg < 0.0 || k.depression_deg >= 90.0) {
      throw ConfigError("drone depression_deg must lie in [0, 90)");
    }
  }
  std::set<std::string> labels;
  for (const auto& r : cfg.robot_paths) {
    if (r.label.empty() || r.label.find(',') != std::string::npos) {
      throw ConfigError("robot labels must be non-empty and free of commas");
    }
    if (!labels.insert(r.label).second) {
      throw ConfigError("duplicate robot label '" + r.label + "'");
    }
    check_keyframes(r.waypoints, "robot '" + r.label + "'");
  }
  const NoiseModel& n = cfg.noise;
  check_nonnegative(n.gnss_sigma_m, "gnss_sigma_m");
  check_nonnegative(n.heading_sigma_deg, "heading_sigma_deg");
  check_nonnegative(n.altitude_sigma_m, "altitude_sigma_m");
  check_nonnegative(n.pixel_sigma_px, "pixel_sigma_px");
  check_nonnegative(n.truth_misalignment_sigma_m, "truth_misalignment_sigma_m");
  if (!std::isfinite(n.tide_bias_m) || !std::isfinite(n.tide_drift_m_per_min)) {
    throw ConfigError("tide parameters must be finite");
  }
  if (!(n.detection_dropout_prob >= 0.0 && n.detection_dropout_prob <= 1.0)) {
    throw ConfigError("detection_dropout_prob must lie in [0, 1]");
  }
  check_nonnegative(cfg.robot_size_m, "robot_size_m");
}

ScenarioConfig scenario_from_json(const nlohmann::json& j) {
  try {
    ScenarioConfig cfg;
    cfg.seed = j.value("seed", std::uint64_t{0});
    const auto& anchor = j.at("anchor");
    cfg.anchor = GeoPoint(anchor.at("lat_deg").get<double>(), anchor.at("lon_deg").get<double>());
    cfg.duration_frames = j.at("duration_frames").get<std::int64_t>();
    cfg.fps = json_number(j, "fps", 30.0);
    if (j.contains("intrinsics")) {
      const auto& ij = j.at("intrinsics");
      cfg.intrinsics = CameraIntrinsics(
          ij.at("focal_length_mm").get<double>(), ij.at("sensor_width_mm").get<double>(),
          ij.at("sensor_height_mm").get<double>(), ij.at("image_width_px").get<int>(),
          ij.at("image_height_px").get<int>());
    }
    for (const auto& k : j.at("drone_path")) {
      cfg.drone_path.push_back(DroneKeyframe{k.value("frame", std::int64_t{0}),
                                             json_number(k, "east_m", 0.0),
                                             json_number(k, "north_m", 0.0),
                                             k.at("altitude_m").get<double>(),
                                             json_number(k, "heading_deg", 0.0),
                                             json_number(k, "depression_deg", 0.0)});
    }
    for (const auto& r : j.at("robot_paths")) {
      RobotPath path;
      path.label = r.at("label").get<std::string>();
      for (const auto& w : r.at("waypoints")) {
        path.waypoints.push_back(RobotKeyframe{w.value("frame", std::int64_t{0}),
                                               json_number(w, "east_m", 0.0),
                                               json_number(w, "north_m", 0.0)});
      }
      cfg.robot_paths.push_back(std::move(path));
    }
    if (j.contains("noise")) {
      const auto& nj = j.at("noise");
      for (auto it = nj.begin(); it != nj.end(); ++it) {
        noise_field(cfg.noise, it.key()) = it.value().get<double>();
      }
    }
    if (j.contains("detection_format")) {
      cfg.detection_format = parse_detection_format(j.at("detection_format").get<std::string>());
    }
    cfg.robot_size_m = json_number(j, "robot_size_m", cfg.robot_size_m);
    validate(cfg);
    return cfg;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("scenario: ") + e.what());
  } catch (const DomainError& e) {
    throw ConfigError(std::string("scenario: ") + e.what());
  }
}

nlohmann::ordered_json scenario_to_json(const ScenarioConfig& cfg) {
  nlohmann::ordered_json j;
  j["seed"] = cfg.seed;
  j["anchor"] = {{"lat_deg", cfg.anchor.lat_deg()}, {"lon_deg", cfg.anchor.lon_deg()}};
  j["duration_frames"] = cfg.duration_frames;
  j["fps"] = cfg.fps;
  const auto& in = cfg.intrinsics;
  j["intrinsics"] = {{"focal_length_mm", in.focal_length_mm()},
                     {"sensor_width_mm", in.sensor_width_mm()},
                     {"sensor_height_mm", in.sensor_height_mm()},
                     {"image_width_px", in.image_width_px()},
                     {"image_height_px", in.image_height_px()}};
  j["drone_path"] = nlohmann::ordered_json::array();
  for (const auto& k : cfg.drone_path) {
    j["drone_path"].push_back({{"frame", k.frame},
                               {"east_m", k.east_m},
                               {"north_m", k.north_m},
                               {"altitude_m", k.altitude_m},
                               {"heading_deg", k.heading_deg},
                               {"depression_deg", k.depression_deg}});
  }
  j["robot_paths"] = nlohmann::ordered_json::array();
  for (const auto& r : cfg.robot_paths) {
    nlohmann::ordered_json rj;
    rj["label"] = r.label;
    rj["waypoints"] = nlohmann::ordered_json::array();
    for (const auto& w : r.waypoints) {
      rj["waypoints"].push_back({{"frame", w.frame}, {"east_m", w.east_m}, {"north_m", w.north_m}});
    }
    j["robot_paths"].push_back(std::move(rj));
  }
  NoiseModel n = cfg.noise;
  for (const char* name : kNoiseFields) {
    j["noise"][name] = noise_field(n, name);
  }
  j["detection_format"] =
      cfg.detection_format == DetectionFormat::NativeCsv ? "native-csv" : "yolo-normalized";
  j["robot_size_m"] = cfg.robot_size_m;
  return j;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.filename().string() + ": " + e.what());
  }
  return scenario_from_json(j);
}

SimulatedDataset simulate(const ScenarioConfig& cfg) {
  validate(cfg);
  const oracle::EnuAnchor anchor(cfg.anchor);
  const NoiseModel& noise = cfg.noise;
  const CameraIntrinsics& intr = cfg.intrinsics;
  const double focal_px_x = intr.focal_length_mm() * intr.image_width_px() / intr.sensor_width_mm();
  const double focal_px_y =
      intr.focal_length_mm() * intr.image_height_px() / intr.sensor_height_mm();

  SimulatedDataset ds;
  Manifest& m = ds.manifest;
  m.seed = cfg.seed;
  m.duration_frames = cfg.duration_frames;
  for (const auto& r : cfg.robot_paths) {
    m.robots.push_back(RobotCounts{r.label, 0, 0, 0, 0});
  }
  std::size_t clamped_altitudes = 0;

  for (std::int64_t f = 0; f < cfg.duration_frames; ++f) {
    const auto frame = static_cast<std::uint64_t>(f);
    const DroneKeyframe truth_pose = drone_at(cfg.drone_path, f);
    const double t_s = static_cast<double>(f) / cfg.fps;

    NoiseStream gnss(derive_seed(cfg.seed, "gnss", frame));
    NoiseStream heading(derive_seed(cfg.seed, "heading", frame));
    NoiseStream altitude(derive_seed(cfg.seed, "altitude", frame));

    const EnuOffset reported_enu{truth_pose.north_m + gnss.gaussian(noise.gnss_sigma_m),
                                 truth_pose.east_m + gnss.gaussian(noise.gnss_sigma_m)};
    const GeoPoint reported = anchor.to_geo(reported_enu);
    double reported_alt = truth_pose.altitude_m + noise.tide_bias_m +
                          noise.tide_drift_m_per_min * t_s / 60.0 +
                          altitude.gaussian(noise.altitude_sigma_m);
    if (reported_alt < 0.01) {
      reported_alt = 0.01;
      ++clamped_altitudes;
    }
    double reported_heading =
        std::fmod(truth_pose.heading_deg + heading.gaussian(noise.heading_sigma_deg), 360.0);
    if (reported_heading < 0.0) {
      reported_heading += 360.0;
    }
    if (reported_heading >= 360.0) {
      reported_heading = 0.0;
    }

    TelemetryRecord rec;
    rec.frame_id = f;
    rec.timestamp_s = t_s;
    rec.lat_deg = reported.lat_deg();
    rec.lon_deg = reported.lon_deg();
    rec.altitude_m = reported_alt;
    rec.heading_deg = reported_heading;
    rec.depression_deg = truth_pose.depression_deg;
    rec.focal_length_mm = intr.focal_length_mm();
    rec.sensor_width_mm = intr.sensor_width_mm();
    rec.sensor_height_mm = intr.sensor_height_mm();
    rec.image_width_px = intr.image_width_px();
    rec.image_height_px = intr.image_height_px();
    ds.telemetry.push_back(rec);

    const oracle::LocalScene scene{{truth_pose.east_m, truth_pose.north_m, truth_pose.altitude_m},
                                   deg_to_rad(truth_pose.heading_deg),
                                   deg_to_rad(truth_pose.depression_deg),
                                   intr};

    for (std::size_t r = 0; r < cfg.robot_paths.size(); ++r) {
      const RobotPath& path = cfg.robot_paths[r];
      const oracle::GroundPoint pos = robot_at(path, f);
      const GeoPoint geo = anchor.to_geo(EnuOffset{pos.north_m, pos.east_m});
      ds.trajectories.push_back(TrajectoryRow{f, path.label, geo.lat_deg(), geo.lon_deg()});

      const oracle::Projection pr = oracle::project(scene, pos);
      if (pr.status != oracle::ProjectionStatus::InFrame) {
        continue;
      }
      RobotCounts& counts = m.robots[r];
      ++counts.frames_in_frustum;

      NoiseStream dropout(derive_seed(cfg.seed, "dropout", frame, r));
      if (noise.detection_dropout_prob > 0.0 && dropout.uniform() < noise.detection_dropout_prob) {
        ++counts.dropouts;
        continue;
      }
      NoiseStream pixel(derive_seed(cfg.seed, "pixel", frame, r));
      const PixelPoint center{pr.pixel.x_px + pixel.gaussian(noise.pixel_sigma_px),
                              pr.pixel.y_px + pixel.gaussian(noise.pixel_sigma_px)};
      if (!inside_image(intr, center)) {
        ++counts.off_frame_after_noise;
        continue;
      }
      const double range = std::hypot(pos.east_m - truth_pose.east_m,
                                      pos.north_m - truth_pose.north_m, truth_pose.altitude_m);
      DetectionRecord det;
      det.frame_id = f;
      det.class_id = 0;
      det.center = center;
      det.width_px = cfg.robot_size_m * focal_px_x / range;
      det.height_px = cfg.robot_size_m * focal_px_y / range;
      det.confidence = 1.0;
      ds.detections.push_back(det);
      ++counts.detections;
    }
  }

  // Truth windows: runs of >= 2 frames where a robot stays put.
  for (std::size_t r = 0; r < cfg.robot_paths.size(); ++r) {
    const RobotPath& path = cfg.robot_paths[r];
    std::int64_t run_start = 0;
    oracle::GroundPoint run_pos = robot_at(path, 0);
    const auto close_run = [&](std::int64_t run_end) {
      if (run_end - run_start + 1 < 2 && cfg.duration_frames > 1) {
        return;
      }
      NoiseStream misalign(derive_seed(cfg.seed, "truth", static_cast<std::uint64_t>(run_start), r));
      const EnuOffset perturbed{
          run_pos.north_m + misalign.gaussian(noise.truth_misalignment_sigma_m),
          run_pos.east_m + misalign.gaussian(noise.truth_misalignment_sigma_m)};
      const GeoPoint geo = anchor.to_geo(perturbed);
      ds.truth.push_back(TruthRecord{path.label, geo.lat_deg(), geo.lon_deg(), run_start, run_end});
    };
    for (std::int64_t f = 1; f < cfg.duration_frames; ++f) {
      const oracle::GroundPoint p = robot_at(path, f);
      if (p.east_m != run_pos.east_m || p.north_m != run_pos.north_m) {
        close_run(f - 1);
        run_start = f;
        run_pos = p;
      }
    }
    close_run(cfg.duration_frames - 1);
  }

  m.telemetry_rows = ds.telemetry.size();
  m.truth_records = ds.truth.size();
  for (const auto& c : m.robots) {
    m.in_frustum += c.frames_in_frustum;
    m.dropouts += c.dropouts;
    m.off_frame_after_noise += c.off_frame_after_noise;
    m.detections += c.detections;
    if (c.frames_in_frustum == 0) {
      m.warnings.push_back("robot '" + c.label + "' is never inside the camera frustum");
    }
  }
  if (clamped_altitudes > 0) {
    m.warnings.push_back(std::to_string(clamped_altitudes) +
                         " reported altitudes clamped to 0.01 m");
  }
  return ds;
}

void write_trajectories_csv(std::ostream& out, const std::vector<TrajectoryRow>& rows) {
  out << "frame_id,robot_label,lat_deg,lon_deg\n";
  for (const auto& r : rows) {
    out << r.frame_id << ',' << r.robot_label << ',' << format_double(r.lat_deg) << ','
        << format_double(r.lon_deg) << '\n';
  }
}

void write_manifest_json(std::ostream& out, const Manifest& m) {
  nlohmann::ordered_json j;
  j["seed"] = m.seed;
  j["duration_frames"] = m.duration_frames;
  j["telemetry_rows"] = m.telemetry_rows;
  j["in_frustum"] = m.in_frustum;
  j["dropouts"] = m.dropouts;
  j["off_frame_after_noise"] = m.off_frame_after_noise;
  j["detections"] = m.detections;
  j["truth_records"] = m.truth_records;
  j["robots"] = nlohmann::ordered_json::array();
  for (const auto& r : m.robots) {
    j["robots"].push_back({{"label", r.label},
                           {"frames_in_frustum", r.frames_in_frustum},
                           {"dropouts", r.dropouts},
                           {"off_frame_after_noise", r.off_frame_after_noise},
                           {"detections", r.detections}});
  }
  j["warnings"] = m.warnings;
  out << j.dump(2) << '\n';
}

Manifest generate(const ScenarioConfig& cfg, const std::filesystem::path& out_dir) {
  const SimulatedDataset ds = simulate(cfg);
  ensure_directory(out_dir);
  write_atomically(out_dir / "telemetry.csv",
                   [&](std::ostream& o) { write_telemetry_csv(o, ds.telemetry); });
  if (cfg.detection_format == DetectionFormat::NativeCsv) {
    write_atomically(out_dir / "detections.csv",
                     [&](std::ostream& o) { write_detections_csv(o, ds.detections); });
  } else {
    const auto labels = out_dir / "labels";
    ensure_directory(labels);
    std::map<std::int64_t, std::vector<YoloLabel>> per_frame;
    for (const auto& d : ds.detections) {
      per_frame[d.frame_id].push_back(normalize(d, cfg.intrinsics));
    }
    for (const auto& [frame, rows] : per_frame) {
      write_atomically(labels / label_filename(frame),
                       [&](std::ostream& o) { write_yolo_labels(o, rows); });
    }
  }
  write_atomically(out_dir / "truth.csv", [&](std::ostream& o) { write_truth_csv(o, ds.truth); });
  write_atomically(out_dir / "ground_truth_trajectories.csv",
                   [&](std::ostream& o) { write_trajectories_csv(o, ds.trajectories); });
  write_atomically(out_dir / "manifest.json",
                   [&](std::ostream& o) { write_manifest_json(o, ds.manifest); });
  return ds.manifest;
}

// ------------------------------------------------------------------- sweep

SweepGrid grid_from_json(const nlohmann::json& j) {
  SweepGrid grid;
  try {
    for (const auto& a : j.at("axes")) {
      SweepAxis axis;
      axis.parameter = a.at("parameter").get<std::string>();
      axis.values = a.at("values").get<std::vector<double>>();
      if (axis.values.empty()) {
        throw ConfigError("sweep axis '" + axis.parameter + "' has no values");
      }
      ScenarioConfig probe;
      set_parameter(probe, axis.parameter, axis.values.front());
      grid.axes.push_back(std::move(axis));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("grid: ") + e.what());
  }
  if (grid.axes.empty()) {
    throw ConfigError("sweep grid is empty");
  }
  return grid;
}

SweepGrid load_grid(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  try {
    return grid_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.filename().string() + ": " + e.what());
  }
}

void set_parameter(ScenarioConfig& cfg, const std::string& name, double value) {
  constexpr std::string_view prefix = "noise.";
  if (!name.starts_with(prefix)) {
    throw ConfigError("unknown sweep parameter '" + name + "'");
  }
  noise_field(cfg.noise, name.substr(prefix.size())) = value;
}

SweepResult sweep(const ScenarioConfig& base, const SweepGrid& grid, std::size_t replicates,
                  const PipelineOptions& options, unsigned threads) {
  if (grid.axes.empty()) {
    throw ConfigError("sweep grid is empty");
  }
  if (replicates == 0) {
    throw ConfigError("replicates must be >= 1");
  }
  SweepResult result;
  std::size_t cells = 1;
  for (const auto& a : grid.axes) {
    result.parameters.push_back(a.parameter);
    cells *= a.values.size();
  }

  std::vector<std::vector<double>> cell_params(cells);
  for (std::size_t c = 0; c < cells; ++c) {
    std::size_t rest = c;
    std::vector<double> params(grid.axes.size());
    for (std::size_t k = grid.axes.size(); k-- > 0;) {
      const auto& values = grid.axes[k].values;
      params[k] = values[rest % values.size()];
      rest /= values.size();
    }
    cell_params[c] = std::move(params);
  }

  PipelineOptions inner = options;
  inner.threads = 1;
  result.rows.resize(cells * replicates);
  parallel_for(result.rows.size(), threads, [&](std::size_t i) {
    SweepRow& row = result.rows[i];
    row.cell = i / replicates;
    row.replicate = i % replicates;
    row.parameters = cell_params[row.cell];
    row.seed = derive_seed(base.seed, "sweep", row.cell, row.replicate);
    try {
      ScenarioConfig cfg = base;
      cfg.seed = row.seed;
      for (std::size_t k = 0; k < grid.axes.size(); ++k) {
        set_parameter(cfg, grid.axes[k].parameter, row.parameters[k]);
      }
      const SimulatedDataset ds = simulate(cfg);
      const PipelineResult run = run_estimation(ds.telemetry, ds.detections, inner);
      const ErrorReport report =
          score(run.tracks, ds.truth, {}, count_unestimable(run.outcomes));
      row.summary = report.overall;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
  });

  for (std::size_t c = 0; c < cells; ++c) {
    SweepCell cell;
    cell.cell = c;
    cell.parameters = cell_params[c];
    std::vector<double> medians;
    std::vector<double> means;
    std::vector<double> rms;
    for (std::size_t r = 0; r < replicates; ++r) {
      const SweepRow& row = result.rows[c * replicates + r];
      if (row.summary) {
        medians.push_back(row.summary->median_m);
        means.push_back(row.summary->mean_m);
        rms.push_back(row.summary->rms_m);
      } else {
        ++cell.replicates_failed;
      }
    }
    cell.replicates_ok = medians.size();
    cell.median_of_medians_m = summarize(medians).median_m;
    cell.mean_of_means_m = summarize(means).mean_m;
    cell.mean_rms_m = summarize(rms).mean_m;
    result.cells.push_back(std::move(cell));
  }
  return result;
}

void write_sweep_csv(std::ostream& out, const SweepResult& result) {
  out << "cell,replicate";
  for (const auto& p : result.parameters) {
    out << ',' << p;
  }
  out << ",seed,count,min_m,max_m,mean_m,rms_m,median_m,p95_m,error\n";
  for (const auto& row : result.rows) {
    out << row.cell << ',' << row.replicate;
    for (const double v : row.parameters) {
      out << ',' << format_double(v);
    }
    out << ',' << row.seed;
    if (row.summary) {
      const auto& s = *row.summary;
      out << ',' << s.count << ',' << format_double(s.min_m) << ',' << format_double(s.max_m)
          << ',' << format_double(s.mean_m) << ',' << format_double(s.rms_m) << ','
          << format_double(s.median_m) << ',' << format_double(s.p95_m) << ",\n";
    } else {
      std::string message = row.error;
      std::replace(message.begin(), message.end(), ',', ';');
      std::replace(message.begin(), message.end(), '\n', ' ');
      out << ",,,,,,,," << message << '\n';
    }
  }
}

void write_sweep_summary_csv(std::ostream& out, const SweepResult& result) {
  out << "cell";
  for (const auto& p : result.parameters) {
    out << ',' << p;
  }
  out << ",replicates_ok,replicates_failed,median_of_medians_m,mean_of_means_m,mean_rms_m\n";
  for (const auto& c : result.cells) {
    out << c.cell;
    for (const double v : c.parameters) {
      out << ',' << format_double(v);
    }
    out << ',' << c.replicates_ok << ',' << c.replicates_failed << ','
        << format_double(c.median_of_medians_m) << ',' << format_double(c.mean_of_means_m) << ','
        << format_double(c.mean_rms_m) << '\n';
  }
}

} // namespace aerogeo::sim
