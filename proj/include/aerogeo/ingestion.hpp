#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "aerogeo/camera.hpp"
#include "aerogeo/csv.hpp"
#include "aerogeo/projection.hpp"

namespace aerogeo {

/// One telemetry row: drone pose and camera state for a single video frame.
struct TelemetryRecord {
  std::int64_t frame_id = 0;
  double timestamp_s = 0.0;
  double lat_deg = 0.0;
  double lon_deg = 0.0;
  double altitude_m = 0.0;
  double heading_deg = 0.0;
  double depression_deg = 0.0;
  double focal_length_mm = 0.0;
  double sensor_width_mm = 0.0;
  double sensor_height_mm = 0.0;
  int image_width_px = 0;
  int image_height_px = 0;

  DronePose pose() const;
  CameraIntrinsics intrinsics() const;

  friend bool operator==(const TelemetryRecord&, const TelemetryRecord&) = default;
};

struct DetectionRecord {
  std::int64_t frame_id = 0;
  int class_id = 0;
  PixelPoint center;
  double width_px = 0.0;
  double height_px = 0.0;
  double confidence = 1.0;

  friend bool operator==(const DetectionRecord&, const DetectionRecord&) = default;
};

/// Row of a normalized label file: "class cx cy w h [confidence]", every
/// geometric value in [0, 1].
struct YoloLabel {
  int class_id = 0;
  double cx = 0.0;
  double cy = 0.0;
  double w = 0.0;
  double h = 0.0;
  std::optional<double> confidence;

  friend bool operator==(const YoloLabel&, const YoloLabel&) = default;
};

/// Static reference position of one robot over an inclusive frame range.
struct TruthRecord {
  std::string robot_label;
  double lat_deg = 0.0;
  double lon_deg = 0.0;
  std::int64_t valid_from_frame = 0;
  std::int64_t valid_to_frame = 0;

  GeoPoint position() const { return GeoPoint(lat_deg, lon_deg); }

  friend bool operator==(const TruthRecord&, const TruthRecord&) = default;
};

struct FrameBundle {
  TelemetryRecord telemetry;
  std::vector<DetectionRecord> detections;
};

struct ParseOptions {
  std::string source = "<stream>";
  /// Skip and count bad rows instead of failing. Header errors stay fatal.
  bool lenient = false;
};

template <typename T>
struct Parsed {
  std::vector<T> records;
  std::size_t skipped_rows = 0;
};

enum class DetectionFormat { NativeCsv, YoloNormalized };

/// "native-csv" or "yolo-normalized"; anything else is UnknownFormat.
DetectionFormat parse_detection_format(const std::string& name);

inline const std::vector<std::string> kTelemetryColumns = {
    "frame_id",        "timestamp_s",     "lat_deg",          "lon_deg",
    "altitude_m",      "heading_deg",     "depression_deg",   "focal_length_mm",
    "sensor_width_mm", "sensor_height_mm", "image_width_px",  "image_height_px"};
inline const std::vector<std::string> kDetectionColumns = {
    "frame_id", "class_id", "cx_px", "cy_px", "w_px", "h_px", "confidence"};
inline const std::vector<std::string> kTruthColumns = {
    "robot_label", "lat_deg", "lon_deg", "valid_from_frame", "valid_to_frame"};

Parsed<TelemetryRecord> parse_telemetry_csv(std::istream& in, const ParseOptions& opts = {});
Parsed<TelemetryRecord> parse_telemetry_jsonl(std::istream& in, const ParseOptions& opts = {});
/// Chooses JSON-lines for *.jsonl, CSV otherwise.
Parsed<TelemetryRecord> load_telemetry(const std::filesystem::path& path, bool lenient = false);
void write_telemetry_csv(std::ostream& out, std::span<const TelemetryRecord> records);
void write_telemetry_jsonl(std::ostream& out, std::span<const TelemetryRecord> records);

Parsed<DetectionRecord> parse_detections_csv(std::istream& in, const ParseOptions& opts = {});
Parsed<DetectionRecord> load_detections_csv(const std::filesystem::path& path,
                                            bool lenient = false);
void write_detections_csv(std::ostream& out, std::span<const DetectionRecord> records);

Parsed<YoloLabel> parse_yolo_labels(std::istream& in, const ParseOptions& opts = {});
void write_yolo_labels(std::ostream& out, std::span<const YoloLabel> labels);

/// "frame_000042.txt" -> 42. Throws BadFilenamePattern.
std::int64_t frame_id_from_label_filename(const std::string& filename);
std::string label_filename(std::int64_t frame_id);

/// Scales a normalized label to pixels: x = cx * W, y = cy * H.
DetectionRecord denormalize(const YoloLabel& label, std::int64_t frame_id,
                            const CameraIntrinsics& intr);
YoloLabel normalize(const DetectionRecord& det, const CameraIntrinsics& intr);

/// Reads one label stream for one frame and scales it with `intr`.
Parsed<DetectionRecord> parse_yolo_detections(std::istream& in, std::int64_t frame_id,
                                              const CameraIntrinsics& intr,
                                              const ParseOptions& opts = {});

/// Reads every frame_*.txt file of a labels directory. Image dimensions come
/// from the telemetry row of the same frame; a label file whose frame has no
/// telemetry is an OrphanDetection. Other files in the directory are
/// BadFilenamePattern.
Parsed<DetectionRecord> load_yolo_directory(const std::filesystem::path& dir,
                                            std::span<const TelemetryRecord> telemetry,
                                            bool lenient = false);

Parsed<TruthRecord> parse_truth_csv(std::istream& in, const ParseOptions& opts = {});
Parsed<TruthRecord> load_truth_csv(const std::filesystem::path& path, bool lenient = false);
void write_truth_csv(std::ostream& out, std::span<const TruthRecord> records);

/// One bundle per telemetry record, sorted by frame_id. Detections keep
/// their input order within a frame. Throws OrphanDetection for detections
/// without telemetry and DetectionOutOfBounds for centers outside the image.
std::vector<FrameBundle> join_frames(std::span<const TelemetryRecord> telemetry,
                                     std::span<const DetectionRecord> detections);

/// Flattens bundles into estimation inputs; detection_index is the position
/// within the frame.
std::vector<Observation> to_observations(std::span<const FrameBundle> bundles);

} // namespace aerogeo
