#pragma once

#include <cmath>

namespace gnss::geo {

/// Latitude/longitude in degrees, height in meters above the WGS-84 ellipsoid.
struct GeodeticPosition {
  double latitude_deg = 0.0;
  double longitude_deg = 0.0;
  double height_m = 0.0;
};

/// Earth-centered Earth-fixed cartesian position, meters.
struct EcefPosition {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  EcefPosition operator+(const EcefPosition& o) const { return {x + o.x, y + o.y, z + o.z}; }
  EcefPosition operator-(const EcefPosition& o) const { return {x - o.x, y - o.y, z - o.z}; }
  EcefPosition operator*(double s) const { return {x * s, y * s, z * s}; }
  double dot(const EcefPosition& o) const { return x * o.x + y * o.y + z * o.z; }
  double norm() const { return std::sqrt(x * x + y * y + z * z); }
};

EcefPosition geodetic_to_ecef(const GeodeticPosition& p);

/// Inverse transform (Bowring-style iteration). Throws NearSingular for
/// points closer than 1e5 m to the Earth center.
GeodeticPosition ecef_to_geodetic(const EcefPosition& p);

/// Euclidean satellite-receiver distance, meters.
double geometric_range(const EcefPosition& sat, const EcefPosition& rx);

/// Angle of the satellite above the local horizontal plane at rx, degrees.
double elevation_angle(const EcefPosition& sat, const GeodeticPosition& rx);

/// Great-circle distance on the mean-Earth sphere, meters.
double surface_distance(const GeodeticPosition& a, const GeodeticPosition& b);

/// Point at the given initial bearing and great-circle distance from origin,
/// mean-Earth sphere, height preserved.
GeodeticPosition offset_by(const GeodeticPosition& origin, double bearing_deg,
                           double distance_m);

}  // namespace gnss::geo
