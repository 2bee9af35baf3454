#pragma once

#include "aerogeo/camera.hpp"
#include "aerogeo/errors.hpp"
#include "aerogeo/geodesy.hpp"

// Exact pinhole model of a drone camera over a flat water plane. It shares
// only the camera and geodesy primitives with the estimation chain, so it
// can be used to measure that chain and to render synthetic detections.

namespace aerogeo::oracle {

class BehindCameraError : public Error {
public:
  using Error::Error;
};

/// The target projects outside the image; the off-image pixel is kept for
/// diagnostics.
class OutOfFrameError : public Error {
public:
  OutOfFrameError(const std::string& what, PixelPoint pixel) : Error(what), pixel_(pixel) {}
  const PixelPoint& pixel() const { return pixel_; }

private:
  PixelPoint pixel_;
};

struct EnuPoint {
  double east_m = 0.0;
  double north_m = 0.0;
  double up_m = 0.0;
};

struct GroundPoint {
  double east_m = 0.0;
  double north_m = 0.0;
};

/// Camera placed in a local tangent frame. heading is clockwise from north,
/// depression is the tilt of the optical axis from nadir.
struct LocalScene {
  EnuPoint drone;
  double heading_rad = 0.0;
  double depression_rad = 0.0;
  CameraIntrinsics intrinsics;
};

/// Intersects the ray through `p` with the plane up = 0.
/// Throws HorizonError when the ray does not descend toward the plane.
GroundPoint raycast_ground(const LocalScene& scene, const PixelPoint& p);

enum class ProjectionStatus { InFrame, OutOfFrame, BehindCamera };

struct Projection {
  ProjectionStatus status = ProjectionStatus::InFrame;
  PixelPoint pixel; ///< meaningful unless BehindCamera
};

/// Non-throwing projection of a point on the water plane.
Projection project(const LocalScene& scene, const GroundPoint& target);

/// Throws BehindCameraError or OutOfFrameError.
PixelPoint project_to_pixel(const LocalScene& scene, const GroundPoint& target);

/// Linear tangent-plane converter between geodetic points and local
/// east/north meters around a fixed reference.
class EnuAnchor {
public:
  explicit EnuAnchor(GeoPoint reference);

  const GeoPoint& reference() const { return reference_; }
  EnuOffset to_enu(const GeoPoint& p) const;
  GeoPoint to_geo(const EnuOffset& offset) const;

private:
  GeoPoint reference_;
  DegreeScale scale_;
};

} // namespace aerogeo::oracle
