#pragma once

#include <string>
#include <vector>

#include "gnss/geo.hpp"

namespace gnss::constellation {

/// Two-body Keplerian orbital elements. Angles in degrees, epoch in
/// simulation seconds.
struct KeplerianElements {
  double semi_major_axis_m = 0.0;
  double eccentricity = 0.0;
  double inclination_deg = 0.0;
  double raan_deg = 0.0;
  double arg_perigee_deg = 0.0;
  double mean_anomaly_epoch_deg = 0.0;
  double epoch_s = 0.0;
};

struct SatelliteState {
  int prn = 0;
  geo::EcefPosition position;
  geo::EcefPosition velocity;  // m/s
  double time_s = 0.0;
};

struct Constellation {
  struct Entry {
    int prn;
    KeplerianElements elements;
  };
  std::vector<Entry> satellites;
  std::string name;
};

struct DopValues {
  double gdop = 0.0;
  double pdop = 0.0;
  double hdop = 0.0;
  double vdop = 0.0;
  double tdop = 0.0;
};

/// Propagates elements to time t. Mean anomaly advanced at n = sqrt(mu/a^3),
/// eccentric anomaly by Newton iteration (1e-12 rad, <= 30 iterations),
/// then perifocal -> ECEF rotation. The ECEF frame is treated as inertial.
SatelliteState propagate(const KeplerianElements& e, double t, int prn = 0);

/// 31-satellite GPS-like Walker arrangement: a = 26560 km, circular, 55 deg
/// inclination, 6 planes, seeded per-satellite phase jitter.
Constellation default_constellation(unsigned seed);

std::vector<SatelliteState> visible_satellites(const geo::GeodeticPosition& rx,
                                               const Constellation& c, double t,
                                               double mask_deg = 5.0);

std::vector<int> common_visible(const geo::GeodeticPosition& a,
                                const geo::GeodeticPosition& b, const Constellation& c,
                                double t, double mask_deg = 5.0);

/// Dilution of precision from unit line-of-sight geometry. Throws
/// SingularGeometry when the normal matrix is numerically singular.
DopValues dop(const std::vector<SatelliteState>& sats, const geo::EcefPosition& rx);

/// Almanac text format: `prn a e inc raan argp M0 epoch`, one satellite per
/// line, angles in degrees, `#` comment lines ignored.
Constellation load_almanac(const std::string& path);
void save_almanac(const Constellation& c, const std::string& path);

}  // namespace gnss::constellation
