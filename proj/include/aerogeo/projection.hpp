#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aerogeo/camera.hpp"
#include "aerogeo/geodesy.hpp"

namespace aerogeo {

/// Drone state for one frame.
///
/// altitude_m is the height above the water plane. heading_deg is the body
/// azimuth clockwise from true north, normalized to [0, 360). depression_deg
/// is the combined downward tilt of the optical axis from the vertical
/// (gimbal pitch plus body pitch; 0 looks straight down).
class DronePose {
public:
  DronePose(GeoPoint position, double altitude_m, double heading_deg, double depression_deg);

  const GeoPoint& position() const { return position_; }
  double altitude_m() const { return altitude_m_; }
  double heading_deg() const { return heading_deg_; }
  double depression_deg() const { return depression_deg_; }

private:
  GeoPoint position_;
  double altitude_m_;
  double heading_deg_;
  double depression_deg_;
};

/// Every intermediate quantity of one ground projection, kept for
/// diagnostics.
struct GroundSolution {
  double d_forward_m = 0.0;        ///< along the heading
  double d_lateral_m = 0.0;        ///< to the right of the heading
  double bearing_offset_rad = 0.0; ///< target azimuth relative to heading
  double ground_range_m = 0.0;     ///< nadir to target
  EnuOffset offset;                ///< heading-resolved north/east
};

struct PositionFix {
  std::int64_t frame_id = 0;
  int detection_index = 0;
  std::optional<std::int64_t> track_id;
  GeoPoint estimate;
  GroundSolution solution;
  AngularOffset angles;
  bool near_horizon = false;
};

struct EstimateOptions {
  AxisConvention convention = AxisConvention::Corrected;
  /// Fixes whose ray elevation (depression + theta_y) reaches this angle are
  /// flagged; beyond 90 degrees they are rejected outright.
  double horizon_warning_deg = 85.0;
};

/// Forward distance, lateral shift, bearing and ground range for a ray at
/// `angles` from a camera `altitude_m` above the water, tilted
/// `depression_rad` from nadir. The returned offset is left zero; see
/// resolve_heading.
///
/// Throws DomainError for altitude <= 0 and HorizonError when the ray
/// elevation |depression + theta_y| reaches 90 degrees.
GroundSolution ground_geometry(double altitude_m, double depression_rad,
                               const AngularOffset& angles);

/// Rotates the heading-relative solution into north/east components.
EnuOffset resolve_heading(double heading_rad, const GroundSolution& sol);

/// Full chain: pixel -> angles -> ground geometry -> heading -> geodetic.
/// Assumes zero camera roll and zero camera yaw relative to the body.
PositionFix estimate_position(const DronePose& pose, const CameraIntrinsics& intr,
                              const PixelPoint& p, const EstimateOptions& options = {});

/// One detection with the pose and camera of its frame.
struct Observation {
  std::int64_t frame_id;
  int detection_index;
  DronePose pose;
  CameraIntrinsics intrinsics;
  PixelPoint pixel;
};

enum class FixStatus { Ok, Horizon, Domain, Singularity };

/// Short machine-readable code used in output files ("", "horizon", ...).
std::string to_code(FixStatus status);

/// Result of estimating one observation. Unestimable observations keep their
/// slot so per-frame series stay aligned.
struct FixOutcome {
  std::int64_t frame_id = 0;
  int detection_index = 0;
  FixStatus status = FixStatus::Ok;
  std::optional<PositionFix> fix;
  std::string message;
};

/// Estimates every observation, in parallel when threads != 1. Output order
/// equals input order regardless of completion order.
std::vector<FixOutcome> estimate_batch(std::span<const Observation> observations,
                                       const EstimateOptions& options = {},
                                       unsigned threads = 1);

} // namespace aerogeo
