#include "aerogeo/geodesy.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "aerogeo/errors.hpp"

namespace aerogeo {

double normalize_lon_deg(double lon_deg) {
  if (!std::isfinite(lon_deg)) {
    throw DomainError("longitude is not finite");
  }
  if (lon_deg > -180.0 && lon_deg <= 180.0) {
    return lon_deg;
  }
  double wrapped = std::fmod(lon_deg + 180.0, 360.0);
  if (wrapped <= 0.0) {
    wrapped += 360.0;
  }
  return wrapped - 180.0;
}

GeoPoint::GeoPoint(double lat_deg, double lon_deg) {
  if (!std::isfinite(lat_deg) || lat_deg < -90.0 || lat_deg > 90.0) {
    throw DomainError("latitude " + std::to_string(lat_deg) + " outside [-90, 90]");
  }
  lat_deg_ = lat_deg;
  lon_deg_ = normalize_lon_deg(lon_deg);
}

double haversine_distance(const GeoPoint& a, const GeoPoint& b) {
  const double phi_a = deg_to_rad(a.lat_deg());
  const double phi_b = deg_to_rad(b.lat_deg());
  const double dphi = phi_b - phi_a;
  const double dlambda = deg_to_rad(lon_difference_deg(a.lon_deg(), b.lon_deg()));

  const double s_phi = std::sin(dphi / 2.0);
  const double s_lambda = std::sin(dlambda / 2.0);
  const double h = s_phi * s_phi + std::cos(phi_a) * std::cos(phi_b) * s_lambda * s_lambda;
  const double central_angle = 2.0 * std::asin(std::sqrt(std::clamp(h, 0.0, 1.0)));
  return kEarthRadiusM * central_angle;
}

DegreeScale degree_scale_at(double lat_deg) {
  if (!std::isfinite(lat_deg) || lat_deg < -90.0 || lat_deg > 90.0) {
    throw DomainError("latitude " + std::to_string(lat_deg) + " outside [-90, 90]");
  }
  const double per_deg = std::numbers::pi * kEarthRadiusM / 180.0;
  // cos(pi/2) is not exactly zero in floating point.
  const double cos_lat = std::abs(lat_deg) == 90.0 ? 0.0 : std::cos(deg_to_rad(lat_deg));
  return DegreeScale{per_deg, per_deg * cos_lat, lat_deg};
}

GeodeticShift offset_to_shift(const GeoPoint& origin, const EnuOffset& offset,
                              AxisConvention convention) {
  if (!std::isfinite(offset.north_m) || !std::isfinite(offset.east_m)) {
    throw DomainError("offset is not finite");
  }
  const DegreeScale scale = degree_scale_at(origin.lat_deg());

  double lat_numerator = offset.north_m;
  double lon_numerator = offset.east_m;
  if (convention == AxisConvention::PaperVerbatim) {
    std::swap(lat_numerator, lon_numerator);
  }

  GeodeticShift shift;
  shift.dlat_deg = lat_numerator / scale.meters_per_deg_lat;
  if (lon_numerator == 0.0) {
    shift.dlon_deg = 0.0;
  } else if (scale.meters_per_deg_lon == 0.0) {
    throw SingularityError("longitude scale is zero at latitude " +
                           std::to_string(origin.lat_deg()));
  } else {
    shift.dlon_deg = lon_numerator / scale.meters_per_deg_lon;
  }
  return shift;
}

GeoPoint apply_offset(const GeoPoint& origin, const EnuOffset& offset, AxisConvention convention) {
  const GeodeticShift shift = offset_to_shift(origin, offset, convention);
  return GeoPoint(origin.lat_deg() + shift.dlat_deg, origin.lon_deg() + shift.dlon_deg);
}

double lon_difference_deg(double a_lon_deg, double b_lon_deg) {
  return normalize_lon_deg(b_lon_deg - a_lon_deg);
}

} // namespace aerogeo
