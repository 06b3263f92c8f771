#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace rdsp {

inline constexpr double kEarthRadiusM = 6'371'000.0;
inline constexpr double kMetersPerDegreeLat =
    std::numbers::pi * kEarthRadiusM / 180.0;

// WGS-ish point on the reference sphere, stored in degrees.
struct GeoPosition {
  double latitude_deg = 0.0;
  double longitude_deg = 0.0;

  friend bool operator==(const GeoPosition&, const GeoPosition&) = default;
};

inline constexpr double deg_to_rad(double deg) {
  return deg * (std::numbers::pi / 180.0);
}

inline constexpr double rad_to_deg(double rad) {
  return rad * (180.0 / std::numbers::pi);
}

inline bool is_valid(const GeoPosition& p) {
  return p.latitude_deg >= -90.0 && p.latitude_deg <= 90.0 &&
         p.longitude_deg >= -180.0 && p.longitude_deg <= 180.0;
}

// Great-circle distance in meters on a sphere of radius kEarthRadiusM.
// The asin form stays well conditioned for nearby points, which matters
// because radio adjacency compares distances near the range boundary.
inline double haversine_distance(const GeoPosition& a, const GeoPosition& b) {
  const double phi1 = deg_to_rad(a.latitude_deg);
  const double phi2 = deg_to_rad(b.latitude_deg);
  const double dphi = phi2 - phi1;
  const double dlambda = deg_to_rad(b.longitude_deg - a.longitude_deg);
  const double sp = std::sin(dphi / 2.0);
  const double sl = std::sin(dlambda / 2.0);
  double h = sp * sp + std::cos(phi1) * std::cos(phi2) * sl * sl;
  if (h < 0.0) h = 0.0;
  if (h > 1.0) h = 1.0;
  return 2.0 * kEarthRadiusM * std::asin(std::sqrt(h));
}

// Offset a point by local east/north meters. Valid for the sub-kilometer
// scenario footprints used here; the longitude scale is taken at the
// origin latitude.
inline GeoPosition local_offset(const GeoPosition& origin, double east_m,
                                double north_m) {
  GeoPosition p;
  p.latitude_deg = origin.latitude_deg + north_m / kMetersPerDegreeLat;
  const double lon_scale =
      kMetersPerDegreeLat * std::cos(deg_to_rad(origin.latitude_deg));
  p.longitude_deg = origin.longitude_deg + east_m / lon_scale;
  if (!is_valid(p)) throw std::out_of_range("local_offset: left valid range");
  return p;
}

}  // namespace rdsp
