#pragma once

namespace gnss {

// Physical constants shared by every module. Single source of truth.
namespace constants {

inline constexpr double kSpeedOfLight = 299792458.0;       // m/s
inline constexpr double kEarthMu = 3.986004418e14;         // m^3/s^2
inline constexpr double kWgs84SemiMajor = 6378137.0;       // m
inline constexpr double kWgs84SemiMinor = 6356752.314245;  // m
inline constexpr double kMeanEarthRadius = 6371000.0;      // m, spherical reports only
inline constexpr double kPi = 3.14159265358979323846;

inline constexpr double kGpsChipRate = 1.023e6;       // chips/s
inline constexpr int kCaCodeLength = 1023;            // chips per period
inline constexpr double kGpsBitPeriod = 0.020;        // s (50 bps)
inline constexpr int kGpsCodePeriodsPerBit = 20;

}  // namespace constants

inline double deg2rad(double deg) { return deg * constants::kPi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / constants::kPi; }

}  // namespace gnss
