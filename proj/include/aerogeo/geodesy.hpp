#pragma once

#include <numbers>

namespace aerogeo {

/// Spherical Earth radius shared by the distance metric and the degree
/// scale factors [m].
inline constexpr double kEarthRadiusM = 6'371'000.0;
inline constexpr double kMetersPerFoot = 0.3048;

constexpr double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
constexpr double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

/// Maps any finite longitude onto (-180, 180]. Values already in range are
/// returned bit-for-bit.
double normalize_lon_deg(double lon_deg);

/// Geodetic latitude/longitude pair in degrees.
///
/// Latitude must lie in [-90, 90]; longitude is normalized to (-180, 180]
/// on construction, so two points compare equal iff they name the same
/// place (poles excepted).
class GeoPoint {
public:
  GeoPoint() = default;
  GeoPoint(double lat_deg, double lon_deg);

  double lat_deg() const { return lat_deg_; }
  double lon_deg() const { return lon_deg_; }

  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;

private:
  double lat_deg_ = 0.0;
  double lon_deg_ = 0.0;
};

/// Local horizontal displacement [m].
struct EnuOffset {
  double north_m = 0.0;
  double east_m = 0.0;

  friend bool operator==(const EnuOffset&, const EnuOffset&) = default;
};

struct GeodeticShift {
  double dlat_deg = 0.0;
  double dlon_deg = 0.0;
};

/// Distance spanned by one degree of latitude / longitude at a reference
/// latitude. Stored in meters; the feet accessors exist for callers that
/// think in "feet per degree".
struct DegreeScale {
  double meters_per_deg_lat = 0.0;
  double meters_per_deg_lon = 0.0;
  double reference_lat_deg = 0.0;

  double feet_per_deg_lat() const { return meters_per_deg_lat / kMetersPerFoot; }
  double feet_per_deg_lon() const { return meters_per_deg_lon / kMetersPerFoot; }
};

/// How north/east offsets pair with latitude/longitude shifts.
///
/// `Corrected` divides the north offset by the latitude scale and the east
/// offset by the longitude scale. `PaperVerbatim` swaps the pairing
/// (east -> latitude, north -> longitude), reproducing the printed
/// conversion literally.
enum class AxisConvention { Corrected, PaperVerbatim };

/// Great-circle distance on the sphere of radius kEarthRadiusM [m].
double haversine_distance(const GeoPoint& a, const GeoPoint& b);

/// Throws DomainError for latitudes outside [-90, 90].
DegreeScale degree_scale_at(double lat_deg);

/// Converts an offset into a degree shift using the scale at `origin`.
/// Throws SingularityError when the longitude scale is zero and the
/// longitude numerator is not.
GeodeticShift offset_to_shift(const GeoPoint& origin, const EnuOffset& offset,
                              AxisConvention convention = AxisConvention::Corrected);

/// origin + offset_to_shift(origin, offset). Valid for offsets well below
/// the Earth radius (<= 100 km).
GeoPoint apply_offset(const GeoPoint& origin, const EnuOffset& offset,
                      AxisConvention convention = AxisConvention::Corrected);

/// Signed longitude difference b - a wrapped to (-180, 180].
double lon_difference_deg(double a_lon_deg, double b_lon_deg);

} // namespace aerogeo
