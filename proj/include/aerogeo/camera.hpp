#pragma once

namespace aerogeo {

/// Pinhole camera description. Focal length and sensor extents in mm,
/// image extents in pixels. Focal length is per-frame because zoom can
/// change mid-flight.
class CameraIntrinsics {
public:
  CameraIntrinsics(double focal_length_mm, double sensor_width_mm, double sensor_height_mm,
                   int image_width_px, int image_height_px);

  double focal_length_mm() const { return focal_length_mm_; }
  double sensor_width_mm() const { return sensor_width_mm_; }
  double sensor_height_mm() const { return sensor_height_mm_; }
  int image_width_px() const { return image_width_px_; }
  int image_height_px() const { return image_height_px_; }

  friend bool operator==(const CameraIntrinsics&, const CameraIntrinsics&) = default;

private:
  double focal_length_mm_;
  double sensor_width_mm_;
  double sensor_height_mm_;
  int image_width_px_;
  int image_height_px_;
};

struct FieldOfView {
  double fov_x_rad = 0.0;
  double fov_y_rad = 0.0;
};

/// Pixel coordinates: origin at the top-left corner, x rightward, y downward.
/// Subpixel values are allowed.
struct PixelPoint {
  double x_px = 0.0;
  double y_px = 0.0;

  friend bool operator==(const PixelPoint&, const PixelPoint&) = default;
};

/// Displacement from the image center. dy_px is positive above the center.
struct PixelOffset {
  double dx_px = 0.0;
  double dy_px = 0.0;
};

/// Angles between the optical axis and the ray through a pixel.
/// theta_x is positive to the right of the image, theta_y positive toward
/// the top of the image (farther from the drone).
struct AngularOffset {
  double theta_x_rad = 0.0;
  double theta_y_rad = 0.0;
};

FieldOfView field_of_view(const CameraIntrinsics& intr);

PixelOffset pixel_offset(const CameraIntrinsics& intr, const PixelPoint& p);

AngularOffset pixel_to_angles(const CameraIntrinsics& intr, const PixelPoint& p);

bool inside_image(const CameraIntrinsics& intr, const PixelPoint& p);

} // namespace aerogeo
