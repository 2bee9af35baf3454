#include "aerogeo/projection.hpp"

#include <cmath>
#include <numbers>

#include "aerogeo/errors.hpp"
#include "aerogeo/parallel.hpp"

namespace aerogeo {

namespace {

double normalize_heading_deg(double heading_deg) {
  if (!std::isfinite(heading_deg)) {
    throw DomainError("heading is not finite");
  }
  double h = std::fmod(heading_deg, 360.0);
  if (h < 0.0) {
    h += 360.0;
  }
  // fmod of a tiny negative value can round up to exactly 360.
  return h >= 360.0 ? 0.0 : h;
}

} // namespace

DronePose::DronePose(GeoPoint position, double altitude_m, double heading_deg,
                     double depression_deg)
    : position_(position),
      altitude_m_(altitude_m),
      heading_deg_(normalize_heading_deg(heading_deg)),
      depression_deg_(depression_deg) {
  if (!std::isfinite(altitude_m) || altitude_m <= 0.0) {
    throw DomainError("altitude_m must be positive, got " + std::to_string(altitude_m));
  }
  if (!std::isfinite(depression_deg) || depression_deg < 0.0 || depression_deg >= 90.0) {
    throw DomainError("depression_deg must lie in [0, 90), got " +
                      std::to_string(depression_deg));
  }
}

GroundSolution ground_geometry(double altitude_m, double depression_rad,
                               const AngularOffset& angles) {
  if (!std::isfinite(altitude_m) || altitude_m <= 0.0) {
    throw DomainError("altitude_m must be positive, got " + std::to_string(altitude_m));
  }
  const double elevation = depression_rad + angles.theta_y_rad;
  if (!(std::abs(elevation) < std::numbers::pi / 2.0)) {
    throw HorizonError("ray at " + std::to_string(rad_to_deg(elevation)) +
                       " deg from nadir does not meet the water plane");
  }

  const double a = altitude_m;
  const double tx = angles.theta_x_rad;

  GroundSolution sol;
  sol.d_forward_m = a * std::tan(elevation);
  sol.d_lateral_m = std::sqrt(a * a + sol.d_forward_m * sol.d_forward_m) * std::tan(tx);
  if (sol.d_forward_m == 0.0 && sol.d_lateral_m == 0.0) {
    sol.bearing_offset_rad = 0.0;
  } else {
    sol.bearing_offset_rad = std::atan2(sol.d_lateral_m, sol.d_forward_m);
  }
  const double s = std::sin(tx);
  sol.ground_range_m =
      std::sqrt(s * s * a * a + sol.d_forward_m * sol.d_forward_m) / std::cos(tx);
  return sol;
}

EnuOffset resolve_heading(double heading_rad, const GroundSolution& sol) {
  const double azimuth = heading_rad + sol.bearing_offset_rad;
  return EnuOffset{sol.ground_range_m * std::cos(azimuth), sol.ground_range_m * std::sin(azimuth)};
}

PositionFix estimate_position(const DronePose& pose, const CameraIntrinsics& intr,
                              const PixelPoint& p, const EstimateOptions& options) {
  PositionFix fix;
  fix.angles = pixel_to_angles(intr, p);
  const double depression_rad = deg_to_rad(pose.depression_deg());
  fix.solution = ground_geometry(pose.altitude_m(), depression_rad, fix.angles);
  fix.solution.offset = resolve_heading(deg_to_rad(pose.heading_deg()), fix.solution);
  fix.estimate = apply_offset(pose.position(), fix.solution.offset, options.convention);
  fix.near_horizon = std::abs(depression_rad + fix.angles.theta_y_rad) >=
                     deg_to_rad(options.horizon_warning_deg);
  return fix;
}

std::string to_code(FixStatus status) {
  switch (status) {
  case FixStatus::Ok:
    return "";
  case FixStatus::Horizon:
    return "horizon";
  case FixStatus::Domain:
    return "domain";
  case FixStatus::Singularity:
    return "singularity";
  }
  return "unknown";
}

std::vector<FixOutcome> estimate_batch(std::span<const Observation> observations,
                                       const EstimateOptions& options, unsigned threads) {
  std::vector<FixOutcome> out(observations.size());
  parallel_for(observations.size(), threads, [&](std::size_t i) {
    const Observation& obs = observations[i];
    FixOutcome& result = out[i];
    result.frame_id = obs.frame_id;
    result.detection_index = obs.detection_index;
    try {
      PositionFix fix = estimate_position(obs.pose, obs.intrinsics, obs.pixel, options);
      fix.frame_id = obs.frame_id;
      fix.detection_index = obs.detection_index;
      result.fix = fix;
    } catch (const HorizonError& e) {
      result.status = FixStatus::Horizon;
      result.message = e.what();
    } catch (const SingularityError& e) {
      result.status = FixStatus::Singularity;
      result.message = e.what();
    } catch (const DomainError& e) {
      result.status = FixStatus::Domain;
      result.message = e.what();
    }
  });
  return out;
}

} // namespace aerogeo
