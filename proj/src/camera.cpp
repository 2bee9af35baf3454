#include "aerogeo/camera.hpp"

#include <cmath>
#include <string>

#include "aerogeo/errors.hpp"

namespace aerogeo {

namespace {

void require_positive(double value, const char* name) {
  if (!std::isfinite(value) || value <= 0.0) {
    throw DomainError(std::string(name) + " must be positive, got " + std::to_string(value));
  }
}

} // namespace

CameraIntrinsics::CameraIntrinsics(double focal_length_mm, double sensor_width_mm,
                                   double sensor_height_mm, int image_width_px,
                                   int image_height_px)
    : focal_length_mm_(focal_length_mm),
      sensor_width_mm_(sensor_width_mm),
      sensor_height_mm_(sensor_height_mm),
      image_width_px_(image_width_px),
      image_height_px_(image_height_px) {
  require_positive(focal_length_mm, "focal_length_mm");
  require_positive(sensor_width_mm, "sensor_width_mm");
  require_positive(sensor_height_mm, "sensor_height_mm");
  if (image_width_px < 1 || image_height_px < 1) {
    throw DomainError("image dimensions must be at least 1 px");
  }
}

FieldOfView field_of_view(const CameraIntrinsics& intr) {
  const double f = intr.focal_length_mm();
  return FieldOfView{2.0 * std::atan(intr.sensor_width_mm() / (2.0 * f)),
                     2.0 * std::atan(intr.sensor_height_mm() / (2.0 * f))};
}

PixelOffset pixel_offset(const CameraIntrinsics& intr, const PixelPoint& p) {
  const double half_w = intr.image_width_px() / 2.0;
  const double half_h = intr.image_height_px() / 2.0;
  // Vertical axis flipped so positive means above center, i.e. farther out.
  return PixelOffset{p.x_px - half_w, half_h - p.y_px};
}

AngularOffset pixel_to_angles(const CameraIntrinsics& intr, const PixelPoint& p) {
  if (!std::isfinite(p.x_px) || !std::isfinite(p.y_px)) {
    throw DomainError("pixel coordinates are not finite");
  }
  const FieldOfView fov = field_of_view(intr);
  const PixelOffset d = pixel_offset(intr, p);
  const double nx = 2.0 * d.dx_px / intr.image_width_px();
  const double ny = 2.0 * d.dy_px / intr.image_height_px();
  return AngularOffset{std::atan(nx * std::tan(fov.fov_x_rad / 2.0)),
                       std::atan(ny * std::tan(fov.fov_y_rad / 2.0))};
}

bool inside_image(const CameraIntrinsics& intr, const PixelPoint& p) {
  return p.x_px >= 0.0 && p.x_px <= intr.image_width_px() && p.y_px >= 0.0 &&
         p.y_px <= intr.image_height_px();
}

} // namespace aerogeo
