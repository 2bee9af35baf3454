#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <ostream>
#include <span>
#include <vector>

#include "aerogeo/ingestion.hpp"
#include "aerogeo/projection.hpp"
#include "aerogeo/tracking.hpp"

namespace aerogeo {

struct PipelineOptions {
  EstimateOptions estimate;
  GateConfig gate;
  unsigned threads = 1;
};

struct PipelineResult {
  std::vector<FixOutcome> outcomes; ///< one per detection, frame order
  std::vector<Track> tracks;
};

/// join -> estimate -> associate.
PipelineResult run_estimation(std::span<const TelemetryRecord> telemetry,
                              std::span<const DetectionRecord> detections,
                              const PipelineOptions& options = {});

std::size_t count_unestimable(std::span<const FixOutcome> outcomes);

/// fixes.csv: one row per detection with the estimate and every
/// intermediate; unestimable rows leave the numeric columns empty and carry
/// an error code.
void write_fixes_csv(std::ostream& out, std::span<const FixOutcome> outcomes);
std::vector<FixOutcome> parse_fixes_csv(std::istream& in, const std::string& source = "fixes.csv");

void write_tracks_csv(std::ostream& out, std::span<const Track> tracks);
std::vector<Track> parse_tracks_csv(std::istream& in, const std::string& source = "tracks.csv");

/// Detections of a dataset directory: detections.csv when present,
/// otherwise the labels/ directory.
std::vector<DetectionRecord> load_dataset_detections(const std::filesystem::path& dir,
                                                     std::span<const TelemetryRecord> telemetry,
                                                     bool lenient = false);

struct BenchResult {
  std::size_t frames = 0;
  std::size_t repetitions = 0;
  std::size_t detections = 0;
  std::size_t single_robot_detections = 0;
  std::size_t three_robot_detections = 0;
  double parse_included_s_per_frame = 0.0;
  double math_only_s_per_frame = 0.0;
  double single_robot_math_s_per_frame = 0.0;
  double three_robot_math_s_per_frame = 0.0;

  double math_only_frames_per_second() const { return 1.0 / math_only_s_per_frame; }
  double three_to_single_ratio() const {
    return three_robot_math_s_per_frame / single_robot_math_s_per_frame;
  }
};

/// Times the math pipeline (estimation + association) on a dataset
/// directory, with and without parsing. The single-robot variant keeps the
/// first detection of each frame; the three-robot variant keeps three,
/// padding frames that have fewer with horizontally shifted copies.
/// Per-frame costs are the best of `repetitions` runs.
BenchResult run_bench(const std::filesystem::path& dataset_dir, std::size_t repetitions,
                      std::size_t min_frames = 3000);

void write_bench_json(std::ostream& out, const BenchResult& result);

} // namespace aerogeo
