#include "aerogeo/ingestion.hpp"

#include <charconv>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <regex>
#include <set>
#include <sstream>
#include <unordered_map>

#include "json.hpp"

namespace aerogeo {

namespace {

using FailFn = std::function<void(ParseErrorKind, const std::string&, const std::string&)>;

std::string num(double v) { return format_double(v); }

// Checks that apply to one telemetry row in isolation.
void validate_telemetry_row(const TelemetryRecord& r, const FailFn& fail) {
  const auto range = [&](const char* field, const std::string& detail) {
    fail(ParseErrorKind::UnitRangeViolation, field, detail);
  };
  if (r.frame_id < 0) {
    range("frame_id", "must be >= 0, got " + std::to_string(r.frame_id));
  }
  if (r.lat_deg < -90.0 || r.lat_deg > 90.0) {
    range("lat_deg", "must lie in [-90, 90], got " + num(r.lat_deg));
  }
  if (r.lon_deg < -180.0 || r.lon_deg > 180.0) {
    range("lon_deg", "must lie in [-180, 180], got " + num(r.lon_deg));
  }
  if (!(r.altitude_m > 0.0)) {
    range("altitude_m", "must be > 0, got " + num(r.altitude_m));
  }
  if (r.depression_deg < 0.0 || r.depression_deg >= 90.0) {
    range("depression_deg", "must lie in [0, 90), got " + num(r.depression_deg));
  }
  if (!(r.focal_length_mm > 0.0)) {
    range("focal_length_mm", "must be > 0, got " + num(r.focal_length_mm));
  }
  if (!(r.sensor_width_mm > 0.0)) {
    range("sensor_width_mm", "must be > 0, got " + num(r.sensor_width_mm));
  }
  if (!(r.sensor_height_mm > 0.0)) {
    range("sensor_height_mm", "must be > 0, got " + num(r.sensor_height_mm));
  }
  if (r.image_width_px < 1) {
    range("image_width_px", "must be >= 1, got " + std::to_string(r.image_width_px));
  }
  if (r.image_height_px < 1) {
    range("image_height_px", "must be >= 1, got " + std::to_string(r.image_height_px));
  }
}

// Cross-row checks: timestamps never decrease, frame ids are unique.
class TelemetrySequence {
public:
  void check(const TelemetryRecord& r, const FailFn& fail) const {
    if (seen_.contains(r.frame_id)) {
      fail(ParseErrorKind::DuplicateFrame, "frame_id",
           "frame " + std::to_string(r.frame_id) + " appears more than once");
    }
    if (last_timestamp_ && r.timestamp_s < *last_timestamp_) {
      fail(ParseErrorKind::NonMonotoneTimestamp, "timestamp_s",
           num(r.timestamp_s) + " is earlier than the previous row's " +
               num(*last_timestamp_));
    }
  }
  void accept(const TelemetryRecord& r) {
    seen_.insert(r.frame_id);
    last_timestamp_ = r.timestamp_s;
  }

private:
  std::set<std::int64_t> seen_;
  std::optional<double> last_timestamp_;
};

int to_int(std::int64_t v, const FailFn& fail, const char* field) {
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
    fail(ParseErrorKind::UnitRangeViolation, field, "value out of integer range");
  }
  return static_cast<int>(v);
}

// Runs `row` for each data row, converting row-level ParseErrors into skips
// when lenient.
template <typename Row>
std::size_t for_each_row(csv::Reader& reader, bool lenient, Row&& row) {
  std::size_t skipped = 0;
  while (true) {
    try {
      if (!reader.next_row()) {
        break;
      }
      row();
    } catch (const ParseError&) {
      if (!lenient) {
        throw;
      }
      ++skipped;
    }
  }
  return skipped;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  return in;
}

void check_unit(double v, const FailFn& fail, const char* field) {
  if (!(v >= 0.0 && v <= 1.0)) {
    fail(ParseErrorKind::ValueOutOfUnitRange, field, num(v) + " is outside [0, 1]");
  }
}

} // namespace

DronePose TelemetryRecord::pose() const {
  return DronePose(GeoPoint(lat_deg, lon_deg), altitude_m, heading_deg, depression_deg);
}

CameraIntrinsics TelemetryRecord::intrinsics() const {
  return CameraIntrinsics(focal_length_mm, sensor_width_mm, sensor_height_mm, image_width_px,
                          image_height_px);
}

DetectionFormat parse_detection_format(const std::string& name) {
  if (name == "native-csv") {
    return DetectionFormat::NativeCsv;
  }
  if (name == "yolo-normalized") {
    return DetectionFormat::YoloNormalized;
  }
  throw ParseError(ParseErrorKind::UnknownFormat, "format", 0, "",
                   "'" + name + "' (expected native-csv or yolo-normalized)");
}

// ---------------------------------------------------------------- telemetry

Parsed<TelemetryRecord> parse_telemetry_csv(std::istream& in, const ParseOptions& opts) {
  csv::Reader reader(in, opts.source);
  reader.require_columns(kTelemetryColumns);

  Parsed<TelemetryRecord> out;
  TelemetrySequence sequence;
  const FailFn fail = [&](ParseErrorKind k, const std::string& f, const std::string& d) {
    reader.fail(k, f, d);
  };
  out.skipped_rows = for_each_row(reader, opts.lenient, [&] {
    TelemetryRecord r;
    r.frame_id = reader.integer("frame_id");
    r.timestamp_s = reader.number("timestamp_s");
    r.lat_deg = reader.number("lat_deg");
    r.lon_deg = reader.number("lon_deg");
    r.altitude_m = reader.number("altitude_m");
    r.heading_deg = reader.number("heading_deg");
    r.depression_deg = reader.number("depression_deg");
    r.focal_length_mm = reader.number("focal_length_mm");
    r.sensor_width_mm = reader.number("sensor_width_mm");
    r.sensor_height_mm = reader.number("sensor_height_mm");
    r.image_width_px = to_int(reader.integer("image_width_px"), fail, "image_width_px");
    r.image_height_px = to_int(reader.integer("image_height_px"), fail, "image_height_px");
    validate_telemetry_row(r, fail);
    sequence.check(r, fail);
    sequence.accept(r);
    out.records.push_back(r);
  });
  return out;
}

Parsed<TelemetryRecord> parse_telemetry_jsonl(std::istream& in, const ParseOptions& opts) {
  Parsed<TelemetryRecord> out;
  TelemetrySequence sequence;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.empty()) {
      continue;
    }
    const FailFn fail = [&](ParseErrorKind k, const std::string& f, const std::string& d) {
      throw ParseError(k, opts.source, line_no, f, d);
    };
    try {
      const auto obj = nlohmann::json::parse(line, nullptr, false);
      if (obj.is_discarded() || !obj.is_object()) {
        fail(ParseErrorKind::MalformedRow, "", "line is not a JSON object");
      }
      for (const auto& key : kTelemetryColumns) {
        if (!obj.contains(key)) {
          fail(ParseErrorKind::MissingColumn, key, "required key is absent");
        }
      }
      const auto number = [&](const std::string& key) {
        const auto& v = obj.at(key);
        if (!v.is_number() || !std::isfinite(v.get<double>())) {
          fail(ParseErrorKind::MalformedRow, key, "not a finite number");
        }
        return v.get<double>();
      };
      const auto integer = [&](const std::string& key) {
        const auto& v = obj.at(key);
        if (!v.is_number_integer()) {
          fail(ParseErrorKind::MalformedRow, key, "not an integer");
        }
        return v.get<std::int64_t>();
      };
      TelemetryRecord r;
      r.frame_id = integer("frame_id");
      r.timestamp_s = number("timestamp_s");
      r.lat_deg = number("lat_deg");
      r.lon_deg = number("lon_deg");
      r.altitude_m = number("altitude_m");
      r.heading_deg = number("heading_deg");
      r.depression_deg = number("depression_deg");
      r.focal_length_mm = number("focal_length_mm");
      r.sensor_width_mm = number("sensor_width_mm");
      r.sensor_height_mm = number("sensor_height_mm");
      r.image_width_px = to_int(integer("image_width_px"), fail, "image_width_px");
      r.image_height_px = to_int(integer("image_height_px"), fail, "image_height_px");
      validate_telemetry_row(r, fail);
      sequence.check(r, fail);
      sequence.accept(r);
      out.records.push_back(r);
    } catch (const ParseError& e) {
      if (!opts.lenient || e.kind() == ParseErrorKind::MissingColumn) {
        throw;
      }
      ++out.skipped_rows;
    }
  }
  return out;
}

Parsed<TelemetryRecord> load_telemetry(const std::filesystem::path& path, bool lenient) {
  auto in = open_input(path);
  const ParseOptions opts{path.filename().string(), lenient};
  if (path.extension() == ".jsonl") {
    return parse_telemetry_jsonl(in, opts);
  }
  return parse_telemetry_csv(in, opts);
}

void write_telemetry_csv(std::ostream& out, std::span<const TelemetryRecord> records) {
  for (std::size_t i = 0; i < kTelemetryColumns.size(); ++i) {
    out << (i ? "," : "") << kTelemetryColumns[i];
  }
  out << '\n';
  for (const auto& r : records) {
    out << r.frame_id << ',' << num(r.timestamp_s) << ',' << num(r.lat_deg) << ','
        << num(r.lon_deg) << ',' << num(r.altitude_m) << ',' << num(r.heading_deg) << ','
        << num(r.depression_deg) << ',' << num(r.focal_length_mm) << ','
        << num(r.sensor_width_mm) << ',' << num(r.sensor_height_mm) << ',' << r.image_width_px
        << ',' << r.image_height_px << '\n';
  }
}

void write_telemetry_jsonl(std::ostream& out, std::span<const TelemetryRecord> records) {
  for (const auto& r : records) {
    nlohmann::ordered_json obj;
    obj["frame_id"] = r.frame_id;
    obj["timestamp_s"] = r.timestamp_s;
    obj["lat_deg"] = r.lat_deg;
    obj["lon_deg"] = r.lon_deg;
    obj["altitude_m"] = r.altitude_m;
    obj["heading_deg"] = r.heading_deg;
    obj["depression_deg"] = r.depression_deg;
    obj["focal_length_mm"] = r.focal_length_mm;
    obj["sensor_width_mm"] = r.sensor_width_mm;
    obj["sensor_height_mm"] = r.sensor_height_mm;
    obj["image_width_px"] = r.image_width_px;
    obj["image_height_px"] = r.image_height_px;
    out << obj.dump() << '\n';
  }
}

// --------------------------------------------------------------- detections

Parsed<DetectionRecord> parse_detections_csv(std::istream& in, const ParseOptions& opts) {
  csv::Reader reader(in, opts.source);
  reader.require_columns(kDetectionColumns);
  const FailFn fail = [&](ParseErrorKind k, const std::string& f, const std::string& d) {
    reader.fail(k, f, d);
  };

  Parsed<DetectionRecord> out;
  out.skipped_rows = for_each_row(reader, opts.lenient, [&] {
    DetectionRecord d;
    d.frame_id = reader.integer("frame_id");
    d.class_id = to_int(reader.integer("class_id"), fail, "class_id");
    d.center.x_px = reader.number("cx_px");
    d.center.y_px = reader.number("cy_px");
    d.width_px = reader.number("w_px");
    d.height_px = reader.number("h_px");
    d.confidence = reader.number("confidence");
    if (d.frame_id < 0) {
      fail(ParseErrorKind::UnitRangeViolation, "frame_id", "must be >= 0");
    }
    if (d.class_id < 0) {
      fail(ParseErrorKind::UnitRangeViolation, "class_id", "must be >= 0");
    }
    if (d.width_px < 0.0) {
      fail(ParseErrorKind::UnitRangeViolation, "w_px", "must be >= 0");
    }
    if (d.height_px < 0.0) {
      fail(ParseErrorKind::UnitRangeViolation, "h_px", "must be >= 0");
    }
    check_unit(d.confidence, fail, "confidence");
    out.records.push_back(d);
  });
  return out;
}

Parsed<DetectionRecord> load_detections_csv(const std::filesystem::path& path, bool lenient) {
  auto in = open_input(path);
  return parse_detections_csv(in, ParseOptions{path.filename().string(), lenient});
}

void write_detections_csv(std::ostream& out, std::span<const DetectionRecord> records) {
  out << "frame_id,class_id,cx_px,cy_px,w_px,h_px,confidence\n";
  for (const auto& d : records) {
    out << d.frame_id << ',' << d.class_id << ',' << num(d.center.x_px) << ','
        << num(d.center.y_px) << ',' << num(d.width_px) << ',' << num(d.height_px) << ','
        << num(d.confidence) << '\n';
  }
}

// --------------------------------------------------------------------- yolo

Parsed<YoloLabel> parse_yolo_labels(std::istream& in, const ParseOptions& opts) {
  Parsed<YoloLabel> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.find_first_not_of(" \t") == std::string::npos) {
      continue;
    }
    const FailFn fail = [&](ParseErrorKind k, const std::string& f, const std::string& d) {
      throw ParseError(k, opts.source, line_no, f, d);
    };
    try {
      std::istringstream fields(line);
      std::vector<std::string> tokens;
      for (std::string t; fields >> t;) {
        tokens.push_back(t);
      }
      if (tokens.size() != 5 && tokens.size() != 6) {
        fail(ParseErrorKind::MalformedRow, "",
             "expected 'class cx cy w h [confidence]', found " + std::to_string(tokens.size()) +
                 " values");
      }
      static const char* names[] = {"class", "cx", "cy", "w", "h", "confidence"};
      const auto value = [&](std::size_t i) {
        const std::string& s = tokens[i];
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) {
          fail(ParseErrorKind::MalformedRow, names[i], "'" + s + "' is not a finite number");
        }
        return v;
      };
      YoloLabel label;
      {
        const std::string& s = tokens[0];
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), label.class_id);
        if (ec != std::errc{} || ptr != s.data() + s.size() || label.class_id < 0) {
          fail(ParseErrorKind::MalformedRow, "class", "'" + s + "' is not a class index");
        }
      }
      label.cx = value(1);
      label.cy = value(2);
      label.w = value(3);
      label.h = value(4);
      for (std::size_t i = 1; i < 5; ++i) {
        check_unit(value(i), fail, names[i]);
      }
      if (tokens.size() == 6) {
        label.confidence = value(5);
        check_unit(*label.confidence, fail, "confidence");
      }
      out.records.push_back(label);
    } catch (const ParseError&) {
      if (!opts.lenient) {
        throw;
      }
      ++out.skipped_rows;
    }
  }
  return out;
}

void write_yolo_labels(std::ostream& out, std::span<const YoloLabel> labels) {
  for (const auto& l : labels) {
    out << l.class_id << ' ' << num(l.cx) << ' ' << num(l.cy) << ' ' << num(l.w) << ' '
        << num(l.h);
    if (l.confidence) {
      out << ' ' << num(*l.confidence);
    }
    out << '\n';
  }
}

std::int64_t frame_id_from_label_filename(const std::string& filename) {
  static const std::regex pattern(R"(frame_(\d{6,})\.txt)");
  std::smatch m;
  if (!std::regex_match(filename, m, pattern)) {
    throw ParseError(ParseErrorKind::BadFilenamePattern, filename, 0, "",
                     "label files must be named frame_<6+ digit id>.txt");
  }
  try {
    return std::stoll(m[1].str());
  } catch (const std::out_of_range&) {
    throw ParseError(ParseErrorKind::BadFilenamePattern, filename, 0, "",
                     "frame id out of range");
  }
}

std::string label_filename(std::int64_t frame_id) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "frame_%06lld.txt", static_cast<long long>(frame_id));
  return buf;
}

DetectionRecord denormalize(const YoloLabel& label, std::int64_t frame_id,
                            const CameraIntrinsics& intr) {
  const double w = intr.image_width_px();
  const double h = intr.image_height_px();
  DetectionRecord d;
  d.frame_id = frame_id;
  d.class_id = label.class_id;
  d.center = PixelPoint{label.cx * w, label.cy * h};
  d.width_px = label.w * w;
  d.height_px = label.h * h;
  d.confidence = label.confidence.value_or(1.0);
  return d;
}

YoloLabel normalize(const DetectionRecord& det, const CameraIntrinsics& intr) {
  const double w = intr.image_width_px();
  const double h = intr.image_height_px();
  return YoloLabel{det.class_id,         det.center.x_px / w, det.center.y_px / h,
                   det.width_px / w,     det.height_px / h,   det.confidence};
}

Parsed<DetectionRecord> parse_yolo_detections(std::istream& in, std::int64_t frame_id,
                                              const CameraIntrinsics& intr,
                                              const ParseOptions& opts) {
  const Parsed<YoloLabel> labels = parse_yolo_labels(in, opts);
  Parsed<DetectionRecord> out;
  out.skipped_rows = labels.skipped_rows;
  out.records.reserve(labels.records.size());
  for (const auto& l : labels.records) {
    out.records.push_back(denormalize(l, frame_id, intr));
  }
  return out;
}

Parsed<DetectionRecord> load_yolo_directory(const std::filesystem::path& dir,
                                            std::span<const TelemetryRecord> telemetry,
                                            bool lenient) {
  if (!std::filesystem::is_directory(dir)) {
    throw IoError(dir.string() + " is not a directory");
  }
  std::unordered_map<std::int64_t, const TelemetryRecord*> by_frame;
  for (const auto& t : telemetry) {
    by_frame.emplace(t.frame_id, &t);
  }

  std::vector<std::pair<std::int64_t, std::filesystem::path>> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) {
      continue;
    }
    const std::string name = entry.path().filename().string();
    files.emplace_back(frame_id_from_label_filename(name), entry.path());
  }
  std::sort(files.begin(), files.end());

  Parsed<DetectionRecord> out;
  for (const auto& [frame_id, path] : files) {
    const auto it = by_frame.find(frame_id);
    if (it == by_frame.end()) {
      throw ParseError(ParseErrorKind::OrphanDetection, path.filename().string(), 0, "frame_id",
                       "frame " + std::to_string(frame_id) + " has no telemetry row");
    }
    auto in = open_input(path);
    auto parsed = parse_yolo_detections(in, frame_id, it->second->intrinsics(),
                                        ParseOptions{path.filename().string(), lenient});
    out.skipped_rows += parsed.skipped_rows;
    out.records.insert(out.records.end(), parsed.records.begin(), parsed.records.end());
  }
  return out;
}

// -------------------------------------------------------------------- truth

Parsed<TruthRecord> parse_truth_csv(std::istream& in, const ParseOptions& opts) {
  csv::Reader reader(in, opts.source);
  reader.require_columns(kTruthColumns);

  Parsed<TruthRecord> out;
  out.skipped_rows = for_each_row(reader, opts.lenient, [&] {
    TruthRecord t;
    t.robot_label = reader.text("robot_label");
    t.lat_deg = reader.number("lat_deg");
    t.lon_deg = reader.number("lon_deg");
    t.valid_from_frame = reader.integer("valid_from_frame");
    t.valid_to_frame = reader.integer("valid_to_frame");
    if (t.robot_label.empty()) {
      reader.fail(ParseErrorKind::MalformedRow, "robot_label", "label is empty");
    }
    if (t.lat_deg < -90.0 || t.lat_deg > 90.0) {
      reader.fail(ParseErrorKind::UnitRangeViolation, "lat_deg", "must lie in [-90, 90]");
    }
    if (t.lon_deg < -180.0 || t.lon_deg > 180.0) {
      reader.fail(ParseErrorKind::UnitRangeViolation, "lon_deg", "must lie in [-180, 180]");
    }
    if (t.valid_from_frame < 0) {
      reader.fail(ParseErrorKind::UnitRangeViolation, "valid_from_frame", "must be >= 0");
    }
    if (t.valid_to_frame < t.valid_from_frame) {
      reader.fail(ParseErrorKind::UnitRangeViolation, "valid_to_frame",
                  "frame range is empty");
    }
    out.records.push_back(t);
  });
  return out;
}

Parsed<TruthRecord> load_truth_csv(const std::filesystem::path& path, bool lenient) {
  auto in = open_input(path);
  return parse_truth_csv(in, ParseOptions{path.filename().string(), lenient});
}

void write_truth_csv(std::ostream& out, std::span<const TruthRecord> records) {
  out << "robot_label,lat_deg,lon_deg,valid_from_frame,valid_to_frame\n";
  for (const auto& t : records) {
    out << t.robot_label << ',' << num(t.lat_deg) << ',' << num(t.lon_deg) << ','
        << t.valid_from_frame << ',' << t.valid_to_frame << '\n';
  }
}

// -------------------------------------------------------------------- join

std::vector<FrameBundle> join_frames(std::span<const TelemetryRecord> telemetry,
                                     std::span<const DetectionRecord> detections) {
  std::vector<FrameBundle> bundles;
  bundles.reserve(telemetry.size());
  for (const auto& t : telemetry) {
    bundles.push_back(FrameBundle{t, {}});
  }
  std::stable_sort(bundles.begin(), bundles.end(), [](const auto& a, const auto& b) {
    return a.telemetry.frame_id < b.telemetry.frame_id;
  });

  std::unordered_map<std::int64_t, std::size_t> index;
  for (std::size_t i = 0; i < bundles.size(); ++i) {
    index.emplace(bundles[i].telemetry.frame_id, i);
  }
  for (const auto& d : detections) {
    const auto it = index.find(d.frame_id);
    if (it == index.end()) {
      throw ParseError(ParseErrorKind::OrphanDetection, "detections", 0, "frame_id",
                       "frame " + std::to_string(d.frame_id) + " has no telemetry row");
    }
    FrameBundle& bundle = bundles[it->second];
    const TelemetryRecord& t = bundle.telemetry;
    if (d.center.x_px < 0.0 || d.center.x_px > t.image_width_px || d.center.y_px < 0.0 ||
        d.center.y_px > t.image_height_px) {
      throw ParseError(ParseErrorKind::DetectionOutOfBounds, "detections", 0, "cx_px",
                       "frame " + std::to_string(d.frame_id) + ": center (" +
                           num(d.center.x_px) + ", " + num(d.center.y_px) +
                           ") outside the image");
    }
    bundle.detections.push_back(d);
  }
  return bundles;
}

std::vector<Observation> to_observations(std::span<const FrameBundle> bundles) {
  std::vector<Observation> out;
  for (const auto& b : bundles) {
    if (b.detections.empty()) {
      continue;
    }
    const DronePose pose = b.telemetry.pose();
    const CameraIntrinsics intr = b.telemetry.intrinsics();
    for (std::size_t i = 0; i < b.detections.size(); ++i) {
      out.push_back(Observation{b.telemetry.frame_id, static_cast<int>(i), pose, intr,
                                b.detections[i].center});
    }
  }
  return out;
}

} // namespace aerogeo
