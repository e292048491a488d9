#pragma once

#include <map>
#include <optional>
#include <vector>

#include "gnss/constellation.hpp"
#include "gnss/geo.hpp"

namespace gnss::receiver {

/// Per-satellite arrival instants on the receiver's local clock.
struct ArrivalTimeSet {
  std::map<int, double> arrival_s;  // prn -> arrival, relative to epoch_label_s
  double epoch_label_s = 0.0;
};

struct PseudorangeSet {
  std::map<int, double> pseudorange_m;
  int reference_prn = 0;  // earliest arrival
};

struct PositionFix {
  geo::EcefPosition position;
  double clock_bias_m = 0.0;
  double residual_rms_m = 0.0;
  int iterations = 0;
  constellation::DopValues dop;
};

/// Default assumed travel time for the earliest-arriving satellite.
inline constexpr double kDefaultReferenceTravelTime = 0.068802;  // s

/// arrival_i = t_transmit + range_i/c + clock_offset, common transmit instant.
ArrivalTimeSet simulate_arrivals(const geo::EcefPosition& rx,
                                 const std::vector<constellation::SatelliteState>& sats,
                                 double clock_offset_s = 0.0);

/// Common-reception-time pseudoranges: the earliest arrival is assigned the
/// reference travel time, the rest follow from relative offsets.
PseudorangeSet form_pseudoranges(const ArrivalTimeSet& a,
                                 double reference_travel_time_s = kDefaultReferenceTravelTime);

/// Gauss-Newton over (x, y, z, clock bias). Converges when the position update
/// drops below 1e-4 m; at most 25 iterations; origin start by default.
PositionFix solve_fix(const PseudorangeSet& p,
                      const std::vector<constellation::SatelliteState>& sats,
                      std::optional<geo::EcefPosition> initial_guess = std::nullopt);

}  // namespace gnss::receiver
