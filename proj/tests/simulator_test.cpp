#include "aerogeo/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include <gtest/gtest.h>

#include "aerogeo/errors.hpp"

namespace aerogeo::sim {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Drone hovering at the anchor looking north; robots on the water plane.
ScenarioConfig hover_scene(std::int64_t frames, std::vector<RobotKeyframe> robots) {
  ScenarioConfig cfg;
  cfg.seed = 1234;
  cfg.anchor = GeoPoint(13.19, -59.64);
  cfg.duration_frames = frames;
  cfg.drone_path = {DroneKeyframe{0, 0, 0, 40, 0, 45}};
  char label = 'a';
  for (const auto& r : robots) {
    cfg.robot_paths.push_back(RobotPath{std::string("robot_") + label++, {r}});
  }
  return cfg;
}

ErrorReport run_and_score(const ScenarioConfig& cfg) {
  const SimulatedDataset ds = simulate(cfg);
  const PipelineResult res = run_estimation(ds.telemetry, ds.detections);
  return score(res.tracks, ds.truth, {}, count_unestimable(res.outcomes));
}

TEST(Validate, RejectsBadConfigs) {
  ScenarioConfig ok = hover_scene(10, {{0, 0, 40}});
  EXPECT_NO_THROW(validate(ok));
  ScenarioConfig c = ok;
  c.duration_frames = 0;
  EXPECT_THROW(validate(c), ConfigError);
  c = ok;
  c.fps = 0;
  EXPECT_THROW(validate(c), ConfigError);
  c = ok;
  c.robot_paths.clear();
  EXPECT_THROW(validate(c), ConfigError);
  c = ok;
  c.noise.detection_dropout_prob = 1.5;
  EXPECT_THROW(validate(c), ConfigError);
  c = ok;
  c.noise.gnss_sigma_m = -1;
  EXPECT_THROW(validate(c), ConfigError);
  c = ok;
  c.drone_path = {DroneKeyframe{0, 0, 0, 40, 0, 45}, DroneKeyframe{0, 0, 0, 40, 0, 45}};
  EXPECT_THROW(validate(c), ConfigError);
}

TEST(ScenarioJson, RoundTrip) {
  ScenarioConfig cfg = hover_scene(50, {{0, 3, 40}, {0, -5, 55}});
  cfg.noise.pixel_sigma_px = 2.5;
  cfg.noise.tide_drift_m_per_min = 0.1;
  cfg.detection_format = DetectionFormat::YoloNormalized;
  const ScenarioConfig back = scenario_from_json(nlohmann::json::parse(scenario_to_json(cfg).dump()));
  EXPECT_EQ(scenario_to_json(back).dump(), scenario_to_json(cfg).dump());
}

TEST(ScenarioJson, UnknownNoiseField) {
  auto j = nlohmann::json::parse(scenario_to_json(hover_scene(5, {{0, 0, 40}})).dump());
  j["noise"]["wind_m_s"] = 3.0;
  EXPECT_THROW(scenario_from_json(j), ConfigError);
}

TEST(Simulate, DeterministicFiles) {
  ScenarioConfig cfg = hover_scene(120, {{0, 0, 40}, {0, 12, 60}});
  cfg.noise = NoiseModel{1.5, 1.0, 0.5, 0.1, 0.2, 5.0, 0.3, 0.2};
  const fs::path a = fs::temp_directory_path() / "aerogeo_sim_a";
  const fs::path b = fs::temp_directory_path() / "aerogeo_sim_b";
  fs::remove_all(a);
  fs::remove_all(b);
  generate(cfg, a);
  generate(cfg, b);
  for (const char* name : {"telemetry.csv", "detections.csv", "truth.csv",
                           "ground_truth_trajectories.csv", "manifest.json"}) {
    ASSERT_TRUE(fs::exists(a / name)) << name;
    EXPECT_EQ(slurp(a / name), slurp(b / name)) << name;
  }
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Simulate, YoloOutputDirectory) {
  ScenarioConfig cfg = hover_scene(10, {{0, 0, 40}});
  cfg.detection_format = DetectionFormat::YoloNormalized;
  const fs::path dir = fs::temp_directory_path() / "aerogeo_sim_yolo";
  fs::remove_all(dir);
  generate(cfg, dir);
  EXPECT_FALSE(fs::exists(dir / "detections.csv"));
  EXPECT_TRUE(fs::exists(dir / "labels" / "frame_000009.txt"));
  const auto telemetry = load_telemetry(dir / "telemetry.csv").records;
  EXPECT_EQ(load_dataset_detections(dir, telemetry).size(), 10u);
  fs::remove_all(dir);
}

TEST(Simulate, StreamsAreIndependent) {
  ScenarioConfig cfg = hover_scene(60, {{0, 0, 40}});
  cfg.noise.gnss_sigma_m = 1.0;
  const SimulatedDataset base = simulate(cfg);
  cfg.noise.pixel_sigma_px = 4.0;
  cfg.noise.detection_dropout_prob = 0.3;
  const SimulatedDataset more = simulate(cfg);
  EXPECT_EQ(base.telemetry, more.telemetry);
  EXPECT_NE(base.detections, more.detections);
}

TEST(Simulate, FullDropout) {
  ScenarioConfig cfg = hover_scene(40, {{0, 0, 40}, {0, 5, 50}});
  cfg.noise.detection_dropout_prob = 1.0;
  const SimulatedDataset ds = simulate(cfg);
  EXPECT_TRUE(ds.detections.empty());
  EXPECT_EQ(ds.telemetry.size(), 40u);
  EXPECT_EQ(ds.manifest.dropouts, ds.manifest.in_frustum);
  EXPECT_EQ(ds.manifest.in_frustum, 80u);
}

TEST(Simulate, ManifestConservation) {
  ScenarioConfig cfg = hover_scene(300, {{0, 0, 40}, {0, 30, 45}});
  cfg.robot_paths[1].waypoints.push_back({150, 80, 45}); // leaves the frame
  cfg.noise.detection_dropout_prob = 0.25;
  cfg.noise.pixel_sigma_px = 40;
  const SimulatedDataset ds = simulate(cfg);
  const Manifest& m = ds.manifest;
  EXPECT_EQ(m.telemetry_rows, 300u);
  EXPECT_EQ(ds.telemetry.size(), 300u);
  EXPECT_EQ(m.detections, ds.detections.size());
  EXPECT_EQ(m.detections, m.in_frustum - m.dropouts - m.off_frame_after_noise);
  EXPECT_LT(m.robots[1].frames_in_frustum, 300u);
  std::size_t sum = 0;
  for (const auto& r : m.robots) {
    EXPECT_EQ(r.detections, r.frames_in_frustum - r.dropouts - r.off_frame_after_noise);
    sum += r.detections;
  }
  EXPECT_EQ(sum, m.detections);
  EXPECT_EQ(m.truth_records, ds.truth.size());
  EXPECT_EQ(ds.trajectories.size(), 600u);
}

TEST(Simulate, UnseenRobotWarns) {
  const SimulatedDataset ds = simulate(hover_scene(10, {{0, 0, 40}, {0, 0, -40}}));
  EXPECT_EQ(ds.manifest.robots[1].frames_in_frustum, 0u);
  EXPECT_FALSE(ds.manifest.warnings.empty());
}

TEST(Simulate, TruthWindowsCoverStationaryRuns) {
  ScenarioConfig cfg = hover_scene(100, {{0, 0, 40}});
  cfg.robot_paths[0].waypoints = {{0, 0, 40}, {30, 0, 40}, {50, 5, 40}};
  const SimulatedDataset ds = simulate(cfg);
  ASSERT_EQ(ds.truth.size(), 2u);
  EXPECT_EQ(ds.truth[0].valid_from_frame, 0);
  EXPECT_EQ(ds.truth[0].valid_to_frame, 30);
  EXPECT_EQ(ds.truth[1].valid_from_frame, 50);
  EXPECT_EQ(ds.truth[1].valid_to_frame, 99);
}

TEST(Simulate, ZeroNoiseCenterlineIsExact) {
  const ErrorReport r = run_and_score(hover_scene(100, {{0, 0, 40}}));
  EXPECT_EQ(r.frames_evaluated, 100u);
  EXPECT_LE(r.overall.max_m, 0.05);
}

TEST(Simulate, ZeroNoiseOffCenterlineWithinCosineBound) {
  ScenarioConfig cfg = hover_scene(30, {{0, 15, 60}});
  const SimulatedDataset ds = simulate(cfg);
  const PipelineResult res = run_estimation(ds.telemetry, ds.detections);
  const ErrorReport r = score(res.tracks, ds.truth);
  for (const auto& o : res.outcomes) {
    ASSERT_TRUE(o.fix.has_value());
    const double ty = o.fix->angles.theta_y_rad;
    const double bound = std::abs(o.fix->solution.d_lateral_m) * (1 - std::cos(ty));
    EXPECT_LE(r.tracks[0].samples[o.frame_id].haversine_m, bound + 0.05);
  }
  EXPECT_GT(r.overall.min_m, 0.0);
}

TEST(Simulate, AltitudeBiasScalesWithDepressionTangent) {
  // Robot on the optical centerline: elevation angle atan(60 / 40).
  const double tan_elevation = 60.0 / 40.0;
  for (double b : {-1.0, 0.5, 2.0}) {
    ScenarioConfig cfg = hover_scene(10, {{0, 0, 60}});
    cfg.drone_path[0].depression_deg = rad_to_deg(std::atan(tan_elevation));
    cfg.noise.tide_bias_m = b;
    const ErrorReport r = run_and_score(cfg);
    for (const auto& s : r.tracks[0].samples) {
      EXPECT_NEAR(s.dlat_err_m, b * tan_elevation, 1e-3 * std::abs(b) + 0.01) << b;
      EXPECT_NEAR(s.dlon_err_m, 0.0, 0.01);
    }
  }
}

TEST(Sweep, SingleCellMatchesDirectRun) {
  const ScenarioConfig base = hover_scene(60, {{0, 0, 40}});
  SweepGrid grid{{SweepAxis{"noise.gnss_sigma_m", {0.0}}}};
  const SweepResult res = sweep(base, grid, 2);
  ASSERT_EQ(res.rows.size(), 2u);
  ASSERT_EQ(res.cells.size(), 1u);
  ScenarioConfig direct = base;
  direct.seed = derive_seed(base.seed, "sweep", 0, 0);
  const ErrorReport r = run_and_score(direct);
  ASSERT_TRUE(res.rows[0].summary.has_value());
  EXPECT_EQ(*res.rows[0].summary, r.overall);
  EXPECT_EQ(res.cells[0].replicates_ok, 2u);
}

TEST(Sweep, CellOrderAndErrorsColumn) {
  const ScenarioConfig base = hover_scene(20, {{0, 0, 40}});
  SweepGrid grid{{SweepAxis{"noise.pixel_sigma_px", {0, 1}},
                  SweepAxis{"noise.detection_dropout_prob", {0, 1}}}};
  const SweepResult res = sweep(base, grid, 1, {}, 2);
  ASSERT_EQ(res.cells.size(), 4u);
  EXPECT_EQ(res.cells[1].parameters, (std::vector<double>{0, 1}));
  EXPECT_EQ(res.cells[2].parameters, (std::vector<double>{1, 0}));
  // Full dropout leaves nothing to score.
  ASSERT_TRUE(res.rows[1].summary.has_value());
  EXPECT_EQ(res.rows[1].summary->count, 0u);
  std::ostringstream out;
  write_sweep_csv(out, res);
  const std::string header = out.str().substr(0, out.str().find('\n'));
  EXPECT_EQ(header,
            "cell,replicate,noise.pixel_sigma_px,noise.detection_dropout_prob,seed,count,min_m,"
            "max_m,mean_m,rms_m,median_m,p95_m,error");
}

TEST(Sweep, FailuresLandInErrorColumn) {
  // A robot far outside gate range of any truth window fails auto matching.
  ScenarioConfig base = hover_scene(20, {{0, 0, 40}});
  base.noise.gnss_sigma_m = 0;
  SweepGrid grid{{SweepAxis{"noise.tide_bias_m", {0, 200}}}};
  const SweepResult res = sweep(base, grid, 1);
  ASSERT_EQ(res.rows.size(), 2u);
  EXPECT_TRUE(res.rows[0].error.empty());
  EXPECT_FALSE(res.rows[1].summary.has_value());
  EXPECT_FALSE(res.rows[1].error.empty());
  EXPECT_EQ(res.cells[1].replicates_failed, 1u);
  ScenarioConfig cfg = base;
  EXPECT_THROW(set_parameter(cfg, "drone.altitude", 1), ConfigError);
}

std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    r[idx[i]] = static_cast<double>(i);
  }
  return r;
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  const auto rx = ranks(x);
  const auto ry = ranks(y);
  const double n = static_cast<double>(x.size());
  double d2 = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    d2 += (rx[i] - ry[i]) * (rx[i] - ry[i]);
  }
  return 1 - 6 * d2 / (n * (n * n - 1));
}

TEST(Sweep, GnssSigmaRaisesMedianError) {
  const ScenarioConfig base = hover_scene(150, {{0, 0, 50}});
  const std::vector<double> sigmas{0.25, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 6.0};
  SweepGrid grid{{SweepAxis{"noise.gnss_sigma_m", sigmas}}};
  // A wide gate keeps one track per robot at the largest jitter.
  PipelineOptions options;
  options.gate.gate_m = 60;
  const SweepResult res = sweep(base, grid, 10, options);
  std::vector<double> medians;
  for (const auto& c : res.cells) {
    EXPECT_EQ(c.replicates_ok, 10u);
    medians.push_back(c.median_of_medians_m);
  }
  EXPECT_GT(spearman(sigmas, medians), 0.9);
}

} // namespace
} // namespace aerogeo::sim
