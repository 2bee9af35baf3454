#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "aerogeo/camera.hpp"
#include "aerogeo/evaluation.hpp"
#include "aerogeo/geodesy.hpp"
#include "aerogeo/ingestion.hpp"
#include "aerogeo/pipeline.hpp"

#include "json.hpp"

namespace aerogeo::sim {

/// Drone state at a keyframe; positions relative to the scenario anchor.
struct DroneKeyframe {
  std::int64_t frame = 0;
  double east_m = 0.0;
  double north_m = 0.0;
  double altitude_m = 50.0;
  double heading_deg = 0.0;
  double depression_deg = 0.0;
};

struct RobotKeyframe {
  std::int64_t frame = 0;
  double east_m = 0.0;
  double north_m = 0.0;
};

struct RobotPath {
  std::string label;
  std::vector<RobotKeyframe> waypoints;
};

/// Gaussian jitter for every sensor, plus a linear tide drift that biases
/// the reported altitude.
struct NoiseModel {
  double gnss_sigma_m = 0.0;       ///< per horizontal axis
  double heading_sigma_deg = 0.0;
  double altitude_sigma_m = 0.0;
  double tide_bias_m = 0.0;
  double tide_drift_m_per_min = 0.0;
  double pixel_sigma_px = 0.0;     ///< per image axis
  double truth_misalignment_sigma_m = 0.0;
  double detection_dropout_prob = 0.0;
};

struct ScenarioConfig {
  std::uint64_t seed = 0;
  GeoPoint anchor;
  std::int64_t duration_frames = 1;
  double fps = 30.0;
  std::vector<DroneKeyframe> drone_path;
  std::vector<RobotPath> robot_paths;
  CameraIntrinsics intrinsics{8.8, 13.2, 8.8, 1920, 1080};
  NoiseModel noise;
  DetectionFormat detection_format = DetectionFormat::NativeCsv;
  double robot_size_m = 0.65; ///< footprint used for bounding-box extents
};

/// Throws ConfigError.
void validate(const ScenarioConfig& cfg);

ScenarioConfig scenario_from_json(const nlohmann::json& j);
nlohmann::ordered_json scenario_to_json(const ScenarioConfig& cfg);
ScenarioConfig load_scenario(const std::filesystem::path& path);

struct TrajectoryRow {
  std::int64_t frame_id = 0;
  std::string robot_label;
  double lat_deg = 0.0;
  double lon_deg = 0.0;
};

struct RobotCounts {
  std::string label;
  std::size_t frames_in_frustum = 0;
  std::size_t dropouts = 0;
  std::size_t off_frame_after_noise = 0;
  std::size_t detections = 0;
};

struct Manifest {
  std::uint64_t seed = 0;
  std::int64_t duration_frames = 0;
  std::size_t telemetry_rows = 0;
  std::size_t in_frustum = 0;
  std::size_t dropouts = 0;
  std::size_t off_frame_after_noise = 0;
  std::size_t detections = 0;
  std::size_t truth_records = 0;
  std::vector<RobotCounts> robots;
  std::vector<std::string> warnings;
};

struct SimulatedDataset {
  std::vector<TelemetryRecord> telemetry;
  std::vector<DetectionRecord> detections;
  std::vector<TruthRecord> truth;
  std::vector<TrajectoryRow> trajectories;
  Manifest manifest;
};

/// Noise-free state is computed first, then noise is drawn from streams
/// seeded by (seed, stream name, frame, robot), so adding or resizing one
/// stream never perturbs another. Truth records cover every run of two or
/// more frames during which a robot does not move.
SimulatedDataset simulate(const ScenarioConfig& cfg);

/// simulate() and write telemetry.csv, detections.csv or labels/,
/// truth.csv, ground_truth_trajectories.csv and manifest.json into out_dir.
Manifest generate(const ScenarioConfig& cfg, const std::filesystem::path& out_dir);

void write_trajectories_csv(std::ostream& out, const std::vector<TrajectoryRow>& rows);
void write_manifest_json(std::ostream& out, const Manifest& manifest);

/// Seed for one (master, stream, index...) combination.
std::uint64_t derive_seed(std::uint64_t master, std::string_view stream, std::uint64_t a,
                          std::uint64_t b = 0);

// ------------------------------------------------------------------- sweep

struct SweepAxis {
  std::string parameter; ///< e.g. "noise.gnss_sigma_m"
  std::vector<double> values;
};

struct SweepGrid {
  std::vector<SweepAxis> axes;
};

SweepGrid grid_from_json(const nlohmann::json& j);
SweepGrid load_grid(const std::filesystem::path& path);

/// Sets a noise parameter by its dotted name. Throws ConfigError for
/// unknown names.
void set_parameter(ScenarioConfig& cfg, const std::string& name, double value);

struct SweepRow {
  std::size_t cell = 0;
  std::size_t replicate = 0;
  std::vector<double> parameters;
  std::uint64_t seed = 0;
  std::optional<ErrorSummary> summary;
  std::string error;
};

struct SweepCell {
  std::size_t cell = 0;
  std::vector<double> parameters;
  std::size_t replicates_ok = 0;
  std::size_t replicates_failed = 0;
  double median_of_medians_m = 0.0;
  double mean_of_means_m = 0.0;
  double mean_rms_m = 0.0;
};

struct SweepResult {
  std::vector<std::string> parameters;
  std::vector<SweepRow> rows;   ///< ordered by (cell, replicate)
  std::vector<SweepCell> cells; ///< ordered by cell
};

/// Cells are the cartesian product of the axes, last axis varying fastest.
/// Each replicate runs simulate -> estimate -> track -> score with seed
/// derive_seed(base.seed, "sweep", cell, replicate). Failures land in the
/// row's error column.
SweepResult sweep(const ScenarioConfig& base, const SweepGrid& grid, std::size_t replicates,
                  const PipelineOptions& options = {}, unsigned threads = 1);

void write_sweep_csv(std::ostream& out, const SweepResult& result);
void write_sweep_summary_csv(std::ostream& out, const SweepResult& result);

} // namespace aerogeo::sim
