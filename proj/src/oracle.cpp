#include "aerogeo/oracle.hpp"

#include <cmath>
#include <string>

namespace aerogeo::oracle {

namespace {

// Camera basis in the heading-aligned frame (x right, y forward, z up).
struct CameraBasis {
  double axis_y, axis_z; // optical axis, no x component
  double up_y, up_z;     // image "up" direction
};

CameraBasis basis_for(double depression_rad) {
  const double s = std::sin(depression_rad);
  const double c = std::cos(depression_rad);
  return CameraBasis{s, -c, c, s};
}

} // namespace

GroundPoint raycast_ground(const LocalScene& scene, const PixelPoint& p) {
  const AngularOffset angles = pixel_to_angles(scene.intrinsics, p);
  const CameraBasis b = basis_for(scene.depression_rad);

  // ray = axis + tan(theta_x) * right + tan(theta_y) * up
  const double ray_x = std::tan(angles.theta_x_rad);
  const double ray_y = b.axis_y + std::tan(angles.theta_y_rad) * b.up_y;
  const double ray_z = b.axis_z + std::tan(angles.theta_y_rad) * b.up_z;
  if (!(ray_z < 0.0)) {
    throw HorizonError("ray does not descend toward the water plane");
  }
  const double t = scene.drone.up_m / -ray_z;
  const double lateral = t * ray_x;
  const double forward = t * ray_y;

  const double sh = std::sin(scene.heading_rad);
  const double ch = std::cos(scene.heading_rad);
  return GroundPoint{scene.drone.east_m + lateral * ch + forward * sh,
                     scene.drone.north_m - lateral * sh + forward * ch};
}

Projection project(const LocalScene& scene, const GroundPoint& target) {
  const double de = target.east_m - scene.drone.east_m;
  const double dn = target.north_m - scene.drone.north_m;
  const double sh = std::sin(scene.heading_rad);
  const double ch = std::cos(scene.heading_rad);
  const double lateral = de * ch - dn * sh;
  const double forward = de * sh + dn * ch;
  const double down = -scene.drone.up_m;

  const CameraBasis b = basis_for(scene.depression_rad);
  const double depth = forward * b.axis_y + down * b.axis_z;
  if (!(depth > 0.0)) {
    return Projection{ProjectionStatus::BehindCamera, {}};
  }
  const double tan_x = lateral / depth;
  const double tan_y = (forward * b.up_y + down * b.up_z) / depth;

  const CameraIntrinsics& intr = scene.intrinsics;
  const FieldOfView fov = field_of_view(intr);
  const double half_w = intr.image_width_px() / 2.0;
  const double half_h = intr.image_height_px() / 2.0;
  const PixelPoint pixel{half_w + tan_x / std::tan(fov.fov_x_rad / 2.0) * half_w,
                         half_h - tan_y / std::tan(fov.fov_y_rad / 2.0) * half_h};
  return Projection{inside_image(intr, pixel) ? ProjectionStatus::InFrame
                                              : ProjectionStatus::OutOfFrame,
                    pixel};
}

PixelPoint project_to_pixel(const LocalScene& scene, const GroundPoint& target) {
  const Projection pr = project(scene, target);
  switch (pr.status) {
  case ProjectionStatus::BehindCamera:
    throw BehindCameraError("target is behind the camera");
  case ProjectionStatus::OutOfFrame:
    throw OutOfFrameError("target projects outside the image at (" +
                              std::to_string(pr.pixel.x_px) + ", " +
                              std::to_string(pr.pixel.y_px) + ")",
                          pr.pixel);
  case ProjectionStatus::InFrame:
    break;
  }
  return pr.pixel;
}

EnuAnchor::EnuAnchor(GeoPoint reference)
    : reference_(reference), scale_(degree_scale_at(reference.lat_deg())) {}

EnuOffset EnuAnchor::to_enu(const GeoPoint& p) const {
  return EnuOffset{(p.lat_deg() - reference_.lat_deg()) * scale_.meters_per_deg_lat,
                   lon_difference_deg(reference_.lon_deg(), p.lon_deg()) *
                       scale_.meters_per_deg_lon};
}

GeoPoint EnuAnchor::to_geo(const EnuOffset& offset) const {
  return apply_offset(reference_, offset, AxisConvention::Corrected);
}

} // namespace aerogeo::oracle
