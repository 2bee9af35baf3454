#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "aerogeo/errors.hpp"
#include "aerogeo/ingestion.hpp"
#include "aerogeo/tracking.hpp"

namespace aerogeo {

/// Error of one fix against its truth point. The signed components are
/// estimate minus truth, in meters along north and east, converted at the
/// truth latitude.
struct ErrorSample {
  std::int64_t frame_id = 0;
  std::int64_t track_id = 0;
  double haversine_m = 0.0;
  double dlat_err_m = 0.0;
  double dlon_err_m = 0.0;

  friend bool operator==(const ErrorSample&, const ErrorSample&) = default;
};

struct ErrorSummary {
  std::size_t count = 0;
  double min_m = 0.0;
  double max_m = 0.0;
  double mean_m = 0.0;
  double rms_m = 0.0;
  double median_m = 0.0;
  double p95_m = 0.0; ///< linear interpolation between closest ranks

  friend bool operator==(const ErrorSummary&, const ErrorSummary&) = default;
};

struct TrackReport {
  std::int64_t track_id = 0;
  std::string robot_label;
  std::vector<ErrorSample> samples; ///< increasing frame_id
  ErrorSummary summary;

  friend bool operator==(const TrackReport&, const TrackReport&) = default;
};

struct ErrorReport {
  std::vector<TrackReport> tracks; ///< increasing track_id
  ErrorSummary overall;
  std::size_t frames_evaluated = 0;
  std::size_t frames_unestimable = 0;

  friend bool operator==(const ErrorReport&, const ErrorReport&) = default;
};

/// Tracks that could not be paired with any truth record.
class UnmatchedTrack : public Error {
public:
  explicit UnmatchedTrack(std::vector<std::int64_t> track_ids);
  const std::vector<std::int64_t>& track_ids() const { return track_ids_; }

private:
  std::vector<std::int64_t> track_ids_;
};

/// Two tracks with overlapping frame spans claim the same robot.
class AmbiguousMatch : public Error {
public:
  using Error::Error;
};

struct MatchOptions {
  /// robot_label -> track_id. When absent every track is matched
  /// automatically to the nearest truth record covering its first scorable
  /// frame.
  std::optional<std::map<std::string, std::int64_t>> labels;
  double auto_gate_m = 50.0;
};

/// Summary of a series; all zeros for an empty series.
ErrorSummary summarize(std::span<const double> values);

ErrorSample measure_error(const GeoPoint& estimate, const GeoPoint& truth,
                          std::int64_t frame_id, std::int64_t track_id);

/// Scores every fix whose frame lies inside a truth window of its robot.
ErrorReport score(std::span<const Track> tracks, std::span<const TruthRecord> truth,
                  const MatchOptions& matching = {}, std::size_t frames_unestimable = 0);

enum class ReportFormat { Csv, Json };

ReportFormat parse_report_format(const std::string& name);

/// Per-sample rows sorted by (track_id, frame_id).
void write_errors_csv(std::ostream& out, const ErrorReport& report);
void write_errors_json(std::ostream& out, const ErrorReport& report);
void write_summary_json(std::ostream& out, const ErrorReport& report);

/// Rebuilds a report from its emitted errors.csv and summary.json.
ErrorReport parse_report(std::istream& errors_csv, std::istream& summary_json);

} // namespace aerogeo
