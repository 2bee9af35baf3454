#include "aerogeo/cli.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

namespace aerogeo::cli {
namespace {

namespace fs = std::filesystem;

const fs::path kScenarios = AEROGEO_SCENARIO_DIR;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(const std::vector<std::string>& args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("aerogeo_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  void write(const std::string& name, const std::string& content) const {
    std::ofstream(dir_ / name, std::ios::binary) << content;
  }

  /// simulate -> estimate -> track -> evaluate into `root`.
  void pipeline(const std::string& scenario, const std::string& root) {
    ASSERT_EQ(invoke({"simulate", "--scenario", (kScenarios / scenario).string(), "--out",
                      path(root + "/data")})
                  .code,
              kExitOk);
    ASSERT_EQ(invoke({"estimate", "--telemetry", path(root + "/data/telemetry.csv"),
                      "--detections", path(root + "/data/detections.csv"), "--out",
                      path(root + "/est")})
                  .code,
              kExitOk);
    // Half the minimum robot separation of the bundled scenarios.
    ASSERT_EQ(invoke({"track", "--fixes", path(root + "/est/fixes.csv"), "--gate-m", "25",
                      "--out", path(root + "/trk")})
                  .code,
              kExitOk);
    const Result r = invoke({"evaluate", "--tracks", path(root + "/trk/tracks.csv"), "--truth",
                             path(root + "/data/truth.csv"), "--fixes",
                             path(root + "/est/fixes.csv"), "--out", path(root + "/eval")});
    ASSERT_EQ(r.code, kExitOk) << r.err;
  }

  fs::path dir_;
};

const std::string kTelemetry =
    "frame_id,timestamp_s,lat_deg,lon_deg,altitude_m,heading_deg,depression_deg,"
    "focal_length_mm,sensor_width_mm,sensor_height_mm,image_width_px,image_height_px\n"
    "0,0,13.19,-59.64,50,90,30,8.8,13.2,8.8,1920,1080\n"
    "1,0.1,13.19,-59.64,50,90,30,8.8,13.2,8.8,1920,1080\n";

TEST_F(CliTest, NoSubcommandIsValidationError) {
  EXPECT_EQ(invoke({}).code, kExitValidation);
  EXPECT_EQ(invoke({"fly"}).code, kExitValidation);
}

TEST_F(CliTest, HelpExitsZero) {
  const Result r = invoke({"--help"});
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_NE(r.out.find("estimate"), std::string::npos);
}

TEST_F(CliTest, EmptyDetectionsGiveHeaderOnlyFixes) {
  write("telemetry.csv", kTelemetry);
  write("detections.csv", "frame_id,class_id,cx_px,cy_px,w_px,h_px,confidence\n");
  const Result r = invoke({"estimate", "--telemetry", path("telemetry.csv"), "--detections",
                           path("detections.csv"), "--out", path("out")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const std::string fixes = slurp(path("out/fixes.csv"));
  EXPECT_EQ(fixes,
            "frame_id,detection_index,lat_deg,lon_deg,theta_x_deg,theta_y_deg,d_forward_m,"
            "d_lateral_m,bearing_offset_deg,ground_range_m,dn_m,de_m,warning,error\n");
}

TEST_F(CliTest, EstimateWritesDiagnostics) {
  write("telemetry.csv", kTelemetry);
  write("detections.csv", "frame_id,class_id,cx_px,cy_px,w_px,h_px,confidence\n"
                          "0,0,1440,540,10,10,0.9\n");
  ASSERT_EQ(invoke({"estimate", "--telemetry", path("telemetry.csv"), "--detections",
                    path("detections.csv"), "--out", path("out")})
                .code,
            kExitOk);
  std::istringstream in(slurp(path("out/fixes.csv")));
  std::string header;
  std::string row;
  std::getline(in, header);
  std::getline(in, row);
  EXPECT_EQ(row.rfind("0,0,13.18980529116077", 0), 0u) << row;
  EXPECT_NE(row.find(",36.0843918243516"), std::string::npos) << row;
}

TEST_F(CliTest, UnestimableRowsCarryErrorCode) {
  write("telemetry.csv",
        "frame_id,timestamp_s,lat_deg,lon_deg,altitude_m,heading_deg,depression_deg,"
        "focal_length_mm,sensor_width_mm,sensor_height_mm,image_width_px,image_height_px\n"
        "0,0,13.19,-59.64,50,0,85,8.8,13.2,8.8,1920,1080\n");
  write("detections.csv", "frame_id,class_id,cx_px,cy_px,w_px,h_px,confidence\n"
                          "0,0,960,10,10,10,0.9\n0,0,960,1000,10,10,0.9\n");
  ASSERT_EQ(invoke({"estimate", "--telemetry", path("telemetry.csv"), "--detections",
                    path("detections.csv"), "--out", path("out")})
                .code,
            kExitOk);
  const std::string fixes = slurp(path("out/fixes.csv"));
  EXPECT_NE(fixes.find("0,0,,,,,,,,,,,,horizon\n"), std::string::npos) << fixes;
}

TEST_F(CliTest, MissingTelemetryColumnNamesIt) {
  write("telemetry.csv", "frame_id,timestamp_s,lat_deg,lon_deg,heading_deg,depression_deg,"
                         "focal_length_mm,sensor_width_mm,sensor_height_mm,image_width_px,"
                         "image_height_px\n");
  write("detections.csv", "frame_id,class_id,cx_px,cy_px,w_px,h_px,confidence\n");
  const Result r = invoke({"estimate", "--telemetry", path("telemetry.csv"), "--detections",
                           path("detections.csv"), "--out", path("out")});
  EXPECT_EQ(r.code, kExitValidation);
  EXPECT_NE(r.err.find("altitude_m"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("telemetry.csv:1"), std::string::npos) << r.err;
  EXPECT_FALSE(fs::exists(path("out/fixes.csv")));
}

TEST_F(CliTest, MissingInputIsIoError) {
  const Result r = invoke({"estimate", "--telemetry", path("nope.csv"), "--detections",
                           path("nope2.csv"), "--out", path("out")});
  EXPECT_EQ(r.code, kExitIo);
}

TEST_F(CliTest, BadFlagValues) {
  write("telemetry.csv", kTelemetry);
  write("detections.csv", "frame_id,class_id,cx_px,cy_px,w_px,h_px,confidence\n");
  EXPECT_EQ(invoke({"estimate", "--telemetry", path("telemetry.csv"), "--detections",
                    path("detections.csv"), "--out", path("out"), "--convention", "sideways"})
                .code,
            kExitValidation);
  EXPECT_EQ(invoke({"estimate", "--telemetry", path("telemetry.csv"), "--detections",
                    path("detections.csv"), "--out", path("out"), "--detections-format", "coco"})
                .code,
            kExitValidation);
  EXPECT_EQ(invoke({"estimate", "--telemetry", path("telemetry.csv"), "--out", path("out")}).code,
            kExitValidation);
}

TEST_F(CliTest, SingleRobotFlow) {
  pipeline("single_robot.json", "run");
  const std::string tracks = slurp(path("run/trk/tracks.csv"));
  EXPECT_EQ(tracks.find("\n1,"), std::string::npos);
  const std::string summary = slurp(path("run/eval/summary.json"));
  EXPECT_NE(summary.find("\"robot_label\": \"robot_a\""), std::string::npos);
  EXPECT_TRUE(fs::exists(path("run/eval/errors.csv")));
}

TEST_F(CliTest, ThreeRobotFlow) {
  pipeline("three_robots.json", "run");
  const std::string summary = slurp(path("run/eval/summary.json"));
  for (const char* label : {"robot_a", "robot_b", "robot_c"}) {
    EXPECT_NE(summary.find(label), std::string::npos) << label;
  }
}

TEST_F(CliTest, Determinism) {
  pipeline("three_robots.json", "a");
  pipeline("three_robots.json", "b");
  for (const char* f : {"data/telemetry.csv", "data/detections.csv", "data/truth.csv",
                        "data/manifest.json", "est/fixes.csv", "trk/tracks.csv",
                        "eval/errors.csv", "eval/summary.json"}) {
    EXPECT_EQ(slurp(path(std::string("a/") + f)), slurp(path(std::string("b/") + f))) << f;
  }
}

TEST_F(CliTest, ThreadCountDoesNotChangeOutput) {
  pipeline("three_robots.json", "a");
  ASSERT_EQ(invoke({"estimate", "--telemetry", path("a/data/telemetry.csv"), "--detections",
                    path("a/data/detections.csv"), "--out", path("par"), "--threads", "4"})
                .code,
            kExitOk);
  EXPECT_EQ(slurp(path("a/est/fixes.csv")), slurp(path("par/fixes.csv")));
}

TEST_F(CliTest, EvaluateWithoutOverlappingTruth) {
  pipeline("single_robot.json", "run");
  write("truth.csv", "robot_label,lat_deg,lon_deg,valid_from_frame,valid_to_frame\n"
                     "far,13.5,-59.64,0,899\n");
  const Result r = invoke({"evaluate", "--tracks", path("run/trk/tracks.csv"), "--truth",
                           path("truth.csv"), "--out", path("eval")});
  EXPECT_EQ(r.code, kExitValidation);
  EXPECT_NE(r.err.find("UnmatchedTrack"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("0"), std::string::npos);
}

TEST_F(CliTest, EvaluateExplicitMatchAndJson) {
  pipeline("single_robot.json", "run");
  const Result r = invoke({"evaluate", "--tracks", path("run/trk/tracks.csv"), "--truth",
                           path("run/data/truth.csv"), "--match", "robot_a=0", "--format", "json",
                           "--out", path("eval")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_TRUE(fs::exists(path("eval/errors.json")));
  // No unestimable detections, so the auto-matched summary is identical.
  EXPECT_EQ(slurp(path("eval/summary.json")), slurp(path("run/eval/summary.json")));
  EXPECT_EQ(invoke({"evaluate", "--tracks", path("run/trk/tracks.csv"), "--truth",
                    path("run/data/truth.csv"), "--match", "robot_a", "--out", path("eval")})
                .code,
            kExitValidation);
}

TEST_F(CliTest, YoloDatasetFlow) {
  ASSERT_EQ(invoke({"simulate", "--scenario", (kScenarios / "single_robot.json").string(),
                    "--detections-format", "yolo-normalized", "--seed", "3", "--out",
                    path("data")})
                .code,
            kExitOk);
  EXPECT_TRUE(fs::is_directory(path("data/labels")));
  const Result r = invoke({"estimate", "--telemetry", path("data/telemetry.csv"), "--detections",
                           path("data/labels"), "--out", path("est")});
  EXPECT_EQ(r.code, kExitOk) << r.err;
}

TEST_F(CliTest, SweepWritesTables) {
  write("grid.json", R"({"axes":[{"parameter":"noise.gnss_sigma_m","values":[0.5,2]}]})");
  const Result r = invoke({"sweep", "--scenario", (kScenarios / "single_robot.json").string(),
                           "--grid", path("grid.json"), "--replicates", "2", "--out",
                           path("sw")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  std::istringstream rows(slurp(path("sw/sweep.csv")));
  std::string line;
  int n = 0;
  while (std::getline(rows, line)) {
    ++n;
  }
  EXPECT_EQ(n, 5);
  EXPECT_TRUE(fs::exists(path("sw/sweep_summary.csv")));
}

TEST_F(CliTest, BenchRejectsEmptyDataset) {
  fs::create_directories(path("data"));
  write("data/telemetry.csv",
        "frame_id,timestamp_s,lat_deg,lon_deg,altitude_m,heading_deg,depression_deg,"
        "focal_length_mm,sensor_width_mm,sensor_height_mm,image_width_px,image_height_px\n");
  write("data/detections.csv", "frame_id,class_id,cx_px,cy_px,w_px,h_px,confidence\n");
  EXPECT_EQ(invoke({"bench", "--dataset", path("data"), "--out", path("b")}).code,
            kExitValidation);
  EXPECT_EQ(invoke({"bench", "--dataset", path("missing"), "--out", path("b")}).code, kExitIo);
}

TEST_F(CliTest, BenchSmallDataset) {
  ASSERT_EQ(invoke({"simulate", "--scenario", (kScenarios / "three_robots.json").string(),
                    "--out", path("data")})
                .code,
            kExitOk);
  EXPECT_EQ(invoke({"bench", "--dataset", path("data"), "--out", path("b")}).code,
            kExitValidation);
  const Result r = invoke({"bench", "--dataset", path("data"), "--repetitions", "1",
                           "--min-frames", "100", "--out", path("b")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const std::string json = slurp(path("b/bench.json"));
  EXPECT_NE(json.find("\"frames\": 900"), std::string::npos) << json;
}

} // namespace
} // namespace aerogeo::cli
