#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "gnss/constants.hpp"
#include "gnss/errors.hpp"
#include "gnss/geo.hpp"

using namespace gnss;
using namespace gnss::geo;

TEST_CASE("geodetic_to_ecef reference points") {
  const EcefPosition equator = geodetic_to_ecef({0.0, 0.0, 0.0});
  CHECK(equator.x == doctest::Approx(6378137.0).epsilon(1e-12));
  CHECK(std::abs(equator.y) < 1e-6);
  CHECK(std::abs(equator.z) < 1e-6);

  const EcefPosition pole = geodetic_to_ecef({90.0, 0.0, 0.0});
  CHECK(std::abs(pole.x) < 1e-3);
  CHECK(pole.z == doctest::Approx(6356752.3142).epsilon(1e-10));
}

TEST_CASE("ecef_to_geodetic reference points") {
  const GeodeticPosition equator = ecef_to_geodetic({6378137.0, 0.0, 0.0});
  CHECK(std::abs(equator.latitude_deg) < 1e-9);
  CHECK(std::abs(equator.longitude_deg) < 1e-9);
  CHECK(std::abs(equator.height_m) < 1e-3);

  const GeodeticPosition pole = ecef_to_geodetic({0.0, 0.0, 6356752.3142});
  CHECK(pole.latitude_deg == doctest::Approx(90.0).epsilon(1e-9));
  CHECK(std::abs(pole.height_m) < 1e-3);
}

TEST_CASE("ecef_to_geodetic throws near Earth center") {
  CHECK_THROWS_AS(ecef_to_geodetic({1000.0, 0.0, 0.0}), NearSingular);
}

TEST_CASE("round trip geodetic -> ECEF -> geodetic under 1 mm") {
  std::mt19937 rng(42);
  std::uniform_real_distribution<double> lat(-89.9, 89.9);
  std::uniform_real_distribution<double> lon(-180.0, 180.0);
  std::uniform_real_distribution<double> h(-5000.0, 9000.0);
  for (int i = 0; i < 1000; ++i) {
    const GeodeticPosition p{lat(rng), lon(rng), h(rng)};
    const GeodeticPosition back = ecef_to_geodetic(geodetic_to_ecef(p));
    const double err = geometric_range(geodetic_to_ecef(p), geodetic_to_ecef(back));
    CHECK(err < 1e-3);
  }
}

TEST_CASE("geometric_range basics") {
  CHECK(geometric_range({26560000.0, 0.0, 0.0}, {6378137.0, 0.0, 0.0}) ==
        doctest::Approx(20181863.0).epsilon(1e-12));
  CHECK(geometric_range({1.0, 2.0, 3.0}, {1.0, 2.0, 3.0}) == 0.0);
}

TEST_CASE("geometric_range vs extended-precision oracle") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> coord(-3e7, 3e7);
  for (int i = 0; i < 500; ++i) {
    const EcefPosition a{coord(rng), coord(rng), coord(rng)};
    const EcefPosition b{coord(rng), coord(rng), coord(rng)};
    const long double dx = (long double)a.x - b.x;
    const long double dy = (long double)a.y - b.y;
    const long double dz = (long double)a.z - b.z;
    const long double expected = sqrtl(dx * dx + dy * dy + dz * dz);
    CHECK(std::abs(geometric_range(a, b) - (double)expected) <=
          1e-12 * (double)expected);
    CHECK(geometric_range(a, b) == geometric_range(b, a));
  }
}

TEST_CASE("triangle inequality on random triples") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> coord(-3e7, 3e7);
  for (int i = 0; i < 200; ++i) {
    const EcefPosition a{coord(rng), coord(rng), coord(rng)};
    const EcefPosition b{coord(rng), coord(rng), coord(rng)};
    const EcefPosition c{coord(rng), coord(rng), coord(rng)};
    CHECK(geometric_range(a, c) <=
          geometric_range(a, b) + geometric_range(b, c) + 1e-6);
  }
}

TEST_CASE("elevation at zenith and below horizon") {
  const GeodeticPosition rx{47.0, 8.0, 0.0};
  const GeodeticPosition above{47.0, 8.0, 20000e3};
  CHECK(elevation_angle(geodetic_to_ecef(above), rx) == doctest::Approx(90.0).epsilon(1e-8));

  // Satellite beyond the antipode direction sits below the horizon.
  const EcefPosition down = geodetic_to_ecef(rx) * -4.0;
  CHECK(elevation_angle(down, rx) < 0.0);
}

TEST_CASE("elevation vs local-frame oracle") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> lat(-89.0, 89.0);
  std::uniform_real_distribution<double> lon(-180.0, 180.0);
  std::uniform_real_distribution<double> coord(-3e7, 3e7);
  for (int i = 0; i < 300; ++i) {
    const GeodeticPosition rx{lat(rng), lon(rng), 0.0};
    EcefPosition sat{coord(rng), coord(rng), coord(rng)};
    if (sat.norm() < 7e6) continue;

    // ENU decomposition of the line of sight.
    const EcefPosition los = sat - geodetic_to_ecef(rx);
    const double la = deg2rad(rx.latitude_deg);
    const double lo = deg2rad(rx.longitude_deg);
    const double e = -std::sin(lo) * los.x + std::cos(lo) * los.y;
    const double n = -std::sin(la) * std::cos(lo) * los.x -
                     std::sin(la) * std::sin(lo) * los.y + std::cos(la) * los.z;
    const double u = std::cos(la) * std::cos(lo) * los.x +
                     std::cos(la) * std::sin(lo) * los.y + std::sin(la) * los.z;
    const double expected = rad2deg(std::atan2(u, std::hypot(e, n)));
    CHECK(elevation_angle(sat, rx) == doctest::Approx(expected).epsilon(1e-9));
  }
}

TEST_CASE("surface_distance landmarks") {
  const GeodeticPosition a{10.0, 20.0, 0.0};
  CHECK(surface_distance(a, a) == 0.0);

  const GeodeticPosition p{0.0, 0.0, 0.0};
  const GeodeticPosition anti{0.0, 180.0, 0.0};
  CHECK(surface_distance(p, anti) ==
        doctest::Approx(constants::kPi * constants::kMeanEarthRadius).epsilon(1e-12));

  const GeodeticPosition q{0.0, 90.0, 0.0};
  CHECK(surface_distance(p, q) == doctest::Approx(10007543.0).epsilon(1e-6));
}

TEST_CASE("offset_by lands at the requested distance") {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> lat(-60.0, 60.0);
  std::uniform_real_distribution<double> lon(-180.0, 180.0);
  std::uniform_real_distribution<double> brg(0.0, 360.0);
  std::uniform_real_distribution<double> dist(1e3, 5e6);
  for (int i = 0; i < 200; ++i) {
    const GeodeticPosition origin{lat(rng), lon(rng), 0.0};
    const double d = dist(rng);
    const GeodeticPosition dest = offset_by(origin, brg(rng), d);
    CHECK(surface_distance(origin, dest) == doctest::Approx(d).epsilon(1e-9));
  }
}
