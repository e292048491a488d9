#include "gnss/geo.hpp"

#include <algorithm>
#include <cmath>

#include "gnss/constants.hpp"
#include "gnss/errors.hpp"

namespace gnss::geo {

using constants::kWgs84SemiMajor;
using constants::kWgs84SemiMinor;

namespace {
// first eccentricity squared
const double kE2 =
    1.0 - (kWgs84SemiMinor * kWgs84SemiMinor) / (kWgs84SemiMajor * kWgs84SemiMajor);
}  // namespace

EcefPosition geodetic_to_ecef(const GeodeticPosition& p) {
  const double lat = deg2rad(p.latitude_deg);
  const double lon = deg2rad(p.longitude_deg);
  const double slat = std::sin(lat);
  const double clat = std::cos(lat);
  const double n = kWgs84SemiMajor / std::sqrt(1.0 - kE2 * slat * slat);
  return {(n + p.height_m) * clat * std::cos(lon),
          (n + p.height_m) * clat * std::sin(lon),
          (n * (1.0 - kE2) + p.height_m) * slat};
}

GeodeticPosition ecef_to_geodetic(const EcefPosition& p) {
  if (p.norm() < 1e5) {
    throw NearSingular("ecef_to_geodetic: point too close to Earth center");
  }
  const double rho = std::hypot(p.x, p.y);
  const double lon = std::atan2(p.y, p.x);

  // Iterate latitude; converges in a handful of steps for |h| << a.
  double lat = std::atan2(p.z, rho * (1.0 - kE2));
  double h = 0.0;
  for (int i = 0; i < 20; ++i) {
    const double slat = std::sin(lat);
    const double n = kWgs84SemiMajor / std::sqrt(1.0 - kE2 * slat * slat);
    h = (std::abs(std::cos(lat)) > 1e-10) ? rho / std::cos(lat) - n
                                          : std::abs(p.z) / std::abs(slat) - n * (1.0 - kE2);
    const double next = std::atan2(p.z, rho * (1.0 - kE2 * n / (n + h)));
    if (std::abs(next - lat) < 1e-14) {
      lat = next;
      break;
    }
    lat = next;
  }
  return {rad2deg(lat), rad2deg(lon), h};
}

double geometric_range(const EcefPosition& sat, const EcefPosition& rx) {
  return (sat - rx).norm();
}

double elevation_angle(const EcefPosition& sat, const GeodeticPosition& rx) {
  const EcefPosition rx_ecef = geodetic_to_ecef(rx);
  const EcefPosition los = sat - rx_ecef;
  const double lat = deg2rad(rx.latitude_deg);
  const double lon = deg2rad(rx.longitude_deg);
  // Local ellipsoidal up vector.
  const EcefPosition up{std::cos(lat) * std::cos(lon), std::cos(lat) * std::sin(lon),
                        std::sin(lat)};
  const double s = los.dot(up) / los.norm();
  return rad2deg(std::asin(std::clamp(s, -1.0, 1.0)));
}

double surface_distance(const GeodeticPosition& a, const GeodeticPosition& b) {
  const double lat1 = deg2rad(a.latitude_deg);
  const double lat2 = deg2rad(b.latitude_deg);
  const double dlat = lat2 - lat1;
  const double dlon = deg2rad(b.longitude_deg - a.longitude_deg);
  const double s1 = std::sin(dlat / 2.0);
  const double s2 = std::sin(dlon / 2.0);
  const double h = s1 * s1 + std::cos(lat1) * std::cos(lat2) * s2 * s2;
  return 2.0 * constants::kMeanEarthRadius * std::asin(std::min(1.0, std::sqrt(h)));
}

GeodeticPosition offset_by(const GeodeticPosition& origin, double bearing_deg,
                           double distance_m) {
  const double lat1 = deg2rad(origin.latitude_deg);
  const double lon1 = deg2rad(origin.longitude_deg);
  const double brg = deg2rad(bearing_deg);
  const double delta = distance_m / constants::kMeanEarthRadius;
  const double lat2 =
      std::asin(std::sin(lat1) * std::cos(delta) + std::cos(lat1) * std::sin(delta) * std::cos(brg));
  const double lon2 =
      lon1 + std::atan2(std::sin(brg) * std::sin(delta) * std::cos(lat1),
                        std::cos(delta) - std::sin(lat1) * std::sin(lat2));
  double lon_deg = rad2deg(lon2);
  while (lon_deg > 180.0) lon_deg -= 360.0;
  while (lon_deg < -180.0) lon_deg += 360.0;
  return {rad2deg(lat2), lon_deg, origin.height_m};
}

}  // namespace gnss::geo
