#include "gnss/constellation.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "gnss/constants.hpp"
#include "gnss/errors.hpp"

namespace gnss::constellation {

using constants::kEarthMu;
using constants::kPi;

namespace {

double solve_kepler(double mean_anomaly, double ecc) {
  // Newton iteration on E - e sin E = M.
  double e_anom = mean_anomaly;
  for (int i = 0; i < 30; ++i) {
    const double f = e_anom - ecc * std::sin(e_anom) - mean_anomaly;
    const double fp = 1.0 - ecc * std::cos(e_anom);
    const double step = f / fp;
    e_anom -= step;
    if (std::abs(step) < 1e-12) return e_anom;
  }
  throw NoConvergence("Kepler iteration did not converge");
}

}  // namespace

SatelliteState propagate(const KeplerianElements& e, double t, int prn) {
  const double a = e.semi_major_axis_m;
  const double n = std::sqrt(kEarthMu / (a * a * a));
  const double m0 = deg2rad(e.mean_anomaly_epoch_deg);
  double mean_anomaly = std::fmod(m0 + n * (t - e.epoch_s), 2.0 * kPi);
  if (mean_anomaly < 0) mean_anomaly += 2.0 * kPi;

  const double e_anom = solve_kepler(mean_anomaly, e.eccentricity);
  const double ce = std::cos(e_anom);
  const double se = std::sin(e_anom);
  const double r = a * (1.0 - e.eccentricity * ce);

  // Perifocal position and velocity.
  const double xp = a * (ce - e.eccentricity);
  const double yp = a * std::sqrt(1.0 - e.eccentricity * e.eccentricity) * se;
  const double edot = n * a * a / r;  // a * dE/dt, with dE/dt = n a / r
  const double vxp = -edot * se;
  const double vyp = edot * std::sqrt(1.0 - e.eccentricity * e.eccentricity) * ce;

  const double cw = std::cos(deg2rad(e.arg_perigee_deg));
  const double sw = std::sin(deg2rad(e.arg_perigee_deg));
  const double ci = std::cos(deg2rad(e.inclination_deg));
  const double si = std::sin(deg2rad(e.inclination_deg));
  const double co = std::cos(deg2rad(e.raan_deg));
  const double so = std::sin(deg2rad(e.raan_deg));

  // Rotation perifocal -> ECEF (frame treated as inertial).
  const double r11 = co * cw - so * sw * ci;
  const double r12 = -co * sw - so * cw * ci;
  const double r21 = so * cw + co * sw * ci;
  const double r22 = -so * sw + co * cw * ci;
  const double r31 = sw * si;
  const double r32 = cw * si;

  SatelliteState s;
  s.prn = prn;
  s.time_s = t;
  s.position = {r11 * xp + r12 * yp, r21 * xp + r22 * yp, r31 * xp + r32 * yp};
  s.velocity = {r11 * vxp + r12 * vyp, r21 * vxp + r22 * vyp, r31 * vxp + r32 * vyp};
  return s;
}

Constellation default_constellation(unsigned seed) {
  Constellation c;
  c.name = "walker-31-synthetic-seed" + std::to_string(seed);
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> jitter(-4.0, 4.0);

  const int planes = 6;
  const int counts[planes] = {6, 5, 5, 5, 5, 5};  // 31 total
  int prn = 1;
  for (int p = 0; p < planes; ++p) {
    for (int k = 0; k < counts[p]; ++k) {
      KeplerianElements e;
      e.semi_major_axis_m = 26560e3;
      e.eccentricity = 0.0;
      e.inclination_deg = 55.0;
      e.raan_deg = 60.0 * p;
      e.arg_perigee_deg = 0.0;
      e.mean_anomaly_epoch_deg =
          360.0 * k / counts[p] + 360.0 / (2.0 * counts[p]) * p + jitter(rng);
      e.epoch_s = 0.0;
      c.satellites.push_back({prn++, e});
    }
  }
  return c;
}

std::vector<SatelliteState> visible_satellites(const geo::GeodeticPosition& rx,
                                               const Constellation& c, double t,
                                               double mask_deg) {
  std::vector<SatelliteState> out;
  for (const auto& [prn, elements] : c.satellites) {
    SatelliteState s = propagate(elements, t, prn);
    if (geo::elevation_angle(s.position, rx) > mask_deg) out.push_back(s);
  }
  std::sort(out.begin(), out.end(),
            [](const SatelliteState& a, const SatelliteState& b) { return a.prn < b.prn; });
  return out;
}

std::vector<int> common_visible(const geo::GeodeticPosition& a,
                                const geo::GeodeticPosition& b, const Constellation& c,
                                double t, double mask_deg) {
  const auto va = visible_satellites(a, c, t, mask_deg);
  const auto vb = visible_satellites(b, c, t, mask_deg);
  std::vector<int> out;
  for (const auto& sa : va) {
    for (const auto& sb : vb) {
      if (sa.prn == sb.prn) {
        out.push_back(sa.prn);
        break;
      }
    }
  }
  return out;
}

DopValues dop(const std::vector<SatelliteState>& sats, const geo::EcefPosition& rx) {
  if (sats.size() < 4) throw SingularGeometry("dop: fewer than 4 satellites");

  Eigen::MatrixXd h(sats.size(), 4);
  for (size_t i = 0; i < sats.size(); ++i) {
    const geo::EcefPosition los = sats[i].position - rx;
    const double rng = los.norm();
    h(i, 0) = los.x / rng;
    h(i, 1) = los.y / rng;
    h(i, 2) = los.z / rng;
    h(i, 3) = 1.0;
  }
  const Eigen::Matrix4d nrm = h.transpose() * h;
  const Eigen::JacobiSVD<Eigen::Matrix4d> svd(nrm);
  const double cond =
      svd.singularValues()(0) / std::max(svd.singularValues()(3), 1e-300);
  if (!(cond < 1e12)) throw SingularGeometry("dop: geometry matrix singular");

  const Eigen::Matrix4d g = nrm.inverse();

  DopValues d;
  d.gdop = std::sqrt(g.trace());
  d.pdop = std::sqrt(g(0, 0) + g(1, 1) + g(2, 2));
  d.tdop = std::sqrt(g(3, 3));

  // Rotate position block to local ENU at rx.
  const geo::GeodeticPosition llh = geo::ecef_to_geodetic(rx);
  const double lat = deg2rad(llh.latitude_deg);
  const double lon = deg2rad(llh.longitude_deg);
  Eigen::Matrix3d r;
  r << -std::sin(lon), std::cos(lon), 0.0,                                          // east
      -std::sin(lat) * std::cos(lon), -std::sin(lat) * std::sin(lon), std::cos(lat),  // north
      std::cos(lat) * std::cos(lon), std::cos(lat) * std::sin(lon), std::sin(lat);    // up
  const Eigen::Matrix3d p_enu = r * g.topLeftCorner<3, 3>() * r.transpose();
  d.hdop = std::sqrt(p_enu(0, 0) + p_enu(1, 1));
  d.vdop = std::sqrt(p_enu(2, 2));
  return d;
}

Constellation load_almanac(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open almanac file: " + path);
  Constellation c;
  c.name = path;
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ss(line);
    Constellation::Entry entry{};
    auto& e = entry.elements;
    if (!(ss >> entry.prn >> e.semi_major_axis_m >> e.eccentricity >> e.inclination_deg >>
          e.raan_deg >> e.arg_perigee_deg >> e.mean_anomaly_epoch_deg >> e.epoch_s)) {
      throw std::runtime_error("malformed almanac line: " + line);
    }
    c.satellites.push_back(entry);
  }
  return c;
}

void save_almanac(const Constellation& c, const std::string& path) {
  std::ofstream out(path);
  out << "# prn a e inc raan argp M0 epoch\n";
  out.precision(12);
  for (const auto& [prn, e] : c.satellites) {
    out << prn << ' ' << e.semi_major_axis_m << ' ' << e.eccentricity << ' '
        << e.inclination_deg << ' ' << e.raan_deg << ' ' << e.arg_perigee_deg << ' '
        << e.mean_anomaly_epoch_deg << ' ' << e.epoch_s << '\n';
  }
}

}  // namespace gnss::constellation
