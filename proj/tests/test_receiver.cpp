#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "gnss/constants.hpp"
#include "gnss/constellation.hpp"
#include "gnss/errors.hpp"
#include "gnss/receiver.hpp"

using namespace gnss;
using namespace gnss::receiver;
using gnss::constants::kSpeedOfLight;

namespace {

struct Setup {
  geo::GeodeticPosition rx_llh;
  geo::EcefPosition rx;
  std::vector<constellation::SatelliteState> sats;
};

Setup visible_setup(unsigned seed, geo::GeodeticPosition rx_llh = {47.0, 8.0, 400.0},
                    double t = 2000.0) {
  Setup s;
  s.rx_llh = rx_llh;
  s.rx = geo::geodetic_to_ecef(rx_llh);
  const auto c = constellation::default_constellation(seed);
  s.sats = constellation::visible_satellites(rx_llh, c, t, 5.0);
  return s;
}

}  // namespace

TEST_CASE("equidistant satellites arrive together, ordering follows range") {
  const Setup s = visible_setup(1);
  REQUIRE(s.sats.size() >= 4);
  const ArrivalTimeSet arrivals = simulate_arrivals(s.rx, s.sats);

  for (const auto& a : s.sats) {
    for (const auto& b : s.sats) {
      const double ra = geo::geometric_range(a.position, s.rx);
      const double rb = geo::geometric_range(b.position, s.rx);
      const double dt = arrivals.arrival_s.at(a.prn) - arrivals.arrival_s.at(b.prn);
      // differences scaled by c equal range differences
      CHECK(std::abs(dt * kSpeedOfLight - (ra - rb)) < 1e-6);
      if (ra < rb) CHECK(dt < 0.0);
    }
  }
}

TEST_CASE("form_pseudoranges arithmetic") {
  ArrivalTimeSet a;
  a.arrival_s = {{1, 0.1}, {2, 0.1}, {3, 0.1}, {4, 0.1}};
  const auto pr = form_pseudoranges(a);
  for (const auto& [prn, rho] : pr.pseudorange_m) {
    CHECK(rho == doctest::Approx(kSpeedOfLight * kDefaultReferenceTravelTime).epsilon(1e-12));
  }

  ArrivalTimeSet b;
  b.arrival_s = {{1, 0.0}, {2, 1e-3}, {3, 0.0}, {4, 0.0}};
  const auto pr2 = form_pseudoranges(b);
  CHECK(pr2.reference_prn == 1);
  CHECK(pr2.pseudorange_m.at(2) - pr2.pseudorange_m.at(1) ==
        doctest::Approx(kSpeedOfLight * 1e-3).epsilon(1e-12));

  // common-mode shift when the assumed reference travel time changes
  const auto pr3 = form_pseudoranges(b, 0.075);
  const double shift = kSpeedOfLight * (0.075 - kDefaultReferenceTravelTime);
  for (const auto& [prn, rho] : pr3.pseudorange_m) {
    CHECK(rho - pr2.pseudorange_m.at(prn) == doctest::Approx(shift).epsilon(1e-12));
  }
}

TEST_CASE("form_pseudoranges needs four arrivals") {
  ArrivalTimeSet a;
  a.arrival_s = {{1, 0.0}, {2, 0.0}, {3, 0.0}};
  CHECK_THROWS_AS(form_pseudoranges(a), TooFewSatellites);
}

TEST_CASE("noiseless inversion recovers the receiver") {
  const Setup s = visible_setup(2);
  const auto fix = solve_fix(form_pseudoranges(simulate_arrivals(s.rx, s.sats)), s.sats);
  CHECK((fix.position - s.rx).norm() < 1e-3);
  CHECK(fix.residual_rms_m < 1e-6);
  CHECK(fix.iterations <= 25);
}

TEST_CASE("constant pseudorange offset is absorbed by the clock bias") {
  const Setup s = visible_setup(3);
  auto pr = form_pseudoranges(simulate_arrivals(s.rx, s.sats));
  const auto fix0 = solve_fix(pr, s.sats);
  for (auto& [prn, rho] : pr.pseudorange_m) rho += 10000.0;
  const auto fix1 = solve_fix(pr, s.sats);
  CHECK((fix0.position - fix1.position).norm() < 1e-3);
  CHECK(fix1.clock_bias_m - fix0.clock_bias_m == doctest::Approx(10000.0).epsilon(1e-7));
}

TEST_CASE("uniform delay on all arrivals leaves the fix unchanged") {
  const Setup s = visible_setup(4);
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> delta(0.0, 10e-3);
  const auto base = simulate_arrivals(s.rx, s.sats);
  const auto fix0 = solve_fix(form_pseudoranges(base), s.sats);
  for (int i = 0; i < 50; ++i) {
    ArrivalTimeSet shifted = base;
    const double d = delta(rng);
    for (auto& [prn, t] : shifted.arrival_s) t += d;
    const auto fix = solve_fix(form_pseudoranges(shifted), s.sats);
    CHECK((fix.position - fix0.position).norm() < 1e-3);
  }
}

TEST_CASE("single-satellite delay moves the fix") {
  const Setup s = visible_setup(5);
  auto arrivals = simulate_arrivals(s.rx, s.sats);
  const auto fix0 = solve_fix(form_pseudoranges(arrivals), s.sats);
  arrivals.arrival_s.begin()->second += 1e-6;
  const auto fix1 = solve_fix(form_pseudoranges(arrivals), s.sats);
  CHECK((fix0.position - fix1.position).norm() >= 1.0);
}

TEST_CASE("reference travel time choice does not affect the fix") {
  const Setup s = visible_setup(6);
  const auto arrivals = simulate_arrivals(s.rx, s.sats);
  const auto fix0 = solve_fix(form_pseudoranges(arrivals, 0.065), s.sats);
  for (double ref : {0.068802, 0.075, 0.085}) {
    const auto fix = solve_fix(form_pseudoranges(arrivals, ref), s.sats);
    CHECK((fix.position - fix0.position).norm() < 1e-3);
  }
}

TEST_CASE("solver matches coarse-to-fine grid search oracle") {
  std::mt19937 rng(12);
  std::uniform_real_distribution<double> lat(-60.0, 60.0);
  std::uniform_real_distribution<double> lon(-180.0, 180.0);
  for (int inst = 0; inst < 5; ++inst) {
    const Setup s = visible_setup(10 + inst, {lat(rng), lon(rng), 100.0});
    if (s.sats.size() < 4) continue;
    const auto pr = form_pseudoranges(simulate_arrivals(s.rx, s.sats));
    const auto fix = solve_fix(pr, s.sats);

    // coarse-to-fine grid refinement around the truth; bias handled by
    // minimizing over the common offset analytically (mean residual)
    auto cost = [&](const geo::EcefPosition& p) {
      double mean = 0.0;
      for (const auto& [prn, rho] : pr.pseudorange_m) {
        const auto it = std::find_if(s.sats.begin(), s.sats.end(),
                                     [prn = prn](const auto& st) { return st.prn == prn; });
        mean += rho - geo::geometric_range(it->position, p);
      }
      mean /= pr.pseudorange_m.size();
      double acc = 0.0;
      for (const auto& [prn, rho] : pr.pseudorange_m) {
        const auto it = std::find_if(s.sats.begin(), s.sats.end(),
                                     [prn = prn](const auto& st) { return st.prn == prn; });
        const double r = rho - geo::geometric_range(it->position, p) - mean;
        acc += r * r;
      }
      return acc;
    };
    geo::EcefPosition best = s.rx + geo::EcefPosition{300.0, -200.0, 150.0};
    double span = 1000.0;
    while (span > 0.005) {
      geo::EcefPosition improved = best;
      double best_cost = cost(best);
      for (int dx = -2; dx <= 2; ++dx) {
        for (int dy = -2; dy <= 2; ++dy) {
          for (int dz = -2; dz <= 2; ++dz) {
            const geo::EcefPosition cand =
                best + geo::EcefPosition{dx * span, dy * span, dz * span};
            const double cc = cost(cand);
            if (cc < best_cost) {
              best_cost = cc;
              improved = cand;
            }
          }
        }
      }
      best = improved;
      span *= 0.5;
    }
    CHECK((fix.position - best).norm() < 0.1);
  }
}

TEST_CASE("position error ordering follows DOP class under range noise") {
  // two geometries: full visible set (low PDOP) vs the 4 satellites with the
  // worst spread (high PDOP); RMS error over trials must be ordered
  const Setup s = visible_setup(8);
  REQUIRE(s.sats.size() >= 6);

  std::vector<constellation::SatelliteState> low = s.sats;
  // greedy pick of a clustered subset: the 4 closest pairwise
  std::vector<constellation::SatelliteState> high(s.sats.begin(), s.sats.begin() + 4);
  double best_spread = 1e18;
  for (size_t i = 0; i < s.sats.size(); ++i) {
    for (size_t j = i + 1; j < s.sats.size(); ++j) {
      for (size_t k = j + 1; k < s.sats.size(); ++k) {
        for (size_t l = k + 1; l < s.sats.size(); ++l) {
          const std::vector<constellation::SatelliteState> cand{
              s.sats[i], s.sats[j], s.sats[k], s.sats[l]};
          double spread = 0.0;
          for (size_t a = 0; a < 4; ++a) {
            for (size_t b = a + 1; b < 4; ++b) {
              spread += (cand[a].position - cand[b].position).norm();
            }
          }
          if (spread < best_spread) {
            try {
              constellation::dop(cand, s.rx);
            } catch (const SingularGeometry&) {
              continue;
            }
            best_spread = spread;
            high = cand;
          }
        }
      }
    }
  }
  const double pdop_low = constellation::dop(low, s.rx).pdop;
  const double pdop_high = constellation::dop(high, s.rx).pdop;
  REQUIRE(pdop_high > pdop_low);

  std::mt19937 rng(55);
  std::normal_distribution<double> noise(0.0, 5.0);
  auto rms_error = [&](const std::vector<constellation::SatelliteState>& sats) {
    double acc = 0.0;
    const int trials = 40;
    for (int tr = 0; tr < trials; ++tr) {
      auto pr = form_pseudoranges(simulate_arrivals(s.rx, sats));
      for (auto& [prn, rho] : pr.pseudorange_m) rho += noise(rng);
      acc += std::pow((solve_fix(pr, sats).position - s.rx).norm(), 2);
    }
    return std::sqrt(acc / trials);
  };
  CHECK(rms_error(high) > rms_error(low));
}
