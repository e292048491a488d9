#pragma once

#include <map>
#include <string>
#include <vector>

#include "gnss/constellation.hpp"
#include "gnss/geo.hpp"

namespace gnss::attacker {

/// Per-satellite temporal shifts realizing a spoofed location, plus the
/// common code-phase offset applied during sanitization.
struct DelayPlan {
  geo::GeodeticPosition attacker_location;
  geo::GeodeticPosition target_location;
  double computed_at_s = 0.0;
  double processing_delay_s = 0.0;
  std::map<int, double> delay_s;  // prn -> delay
  double common_offset_s = 0.0;
};

struct SubsetSelection {
  std::vector<int> prns;
  constellation::DopValues dop_at_target;
  long candidate_count_examined = 0;
};

struct TrajectorySchedule {
  std::vector<std::pair<double, DelayPlan>> entries;  // strictly increasing times
  std::string waypoint_source;
};

struct TimingBudget {
  std::string scheme;  // osnma | chimera_fast | chimera_slow
  double disclosure_window_s = 0.0;
  double bit_latency_s = 0.0;
  double processing_latency_s = 0.0;
};

struct FeasibilityReport {
  bool pass = false;
  double slack_s = 0.0;
};

/// Default attacker hardware processing delay.
inline constexpr double kDefaultProcessingDelay = 0.050;  // s

/// Per-satellite delay (r_T - r_A - c*t_p) / c. Unsanitized: entries may be
/// negative. Throws NotCommonlyVisible when a satellite is below the horizon
/// at either location.
DelayPlan compute_delay_plan(const geo::GeodeticPosition& attacker_loc,
                             const geo::GeodeticPosition& target_loc,
                             const std::vector<constellation::SatelliteState>& sats,
                             double t, double processing_delay_s = kDefaultProcessingDelay);

/// If any delay is negative, adds the magnitude of the most negative delay to
/// every entry so the minimum becomes zero; otherwise a no-op.
DelayPlan sanitize(const DelayPlan& plan);

struct QuantizedPlan {
  DelayPlan plan;
  std::map<int, double> quantization_error_s;  // prn -> residual
};

/// Rounds each delay to the nearest integer multiple of 1/sample_rate.
QuantizedPlan quantize(const DelayPlan& plan, double sample_rate_hz);

/// Exhaustive search over k-combinations of commonly visible satellites for
/// the lowest GDOP evaluated at the target; ties broken by lowest PRN sum.
SubsetSelection select_subset(const geo::GeodeticPosition& attacker_loc,
                              const geo::GeodeticPosition& target_loc,
                              const constellation::Constellation& c, double t, int k,
                              double mask_deg = 5.0);

struct DelaySeries {
  std::vector<double> times_s;
  std::map<int, std::vector<double>> delta_s;  // prn -> delay relative to t0 value
};

/// Delay corrections over [t0, t1], reported relative to the value at t0.
DelaySeries delay_correction_series(const geo::GeodeticPosition& attacker_loc,
                                    const geo::GeodeticPosition& target_loc,
                                    const std::vector<int>& prns,
                                    const constellation::Constellation& c, double t0,
                                    double t1, double step_s,
                                    double processing_delay_s = kDefaultProcessingDelay,
                                    double mask_deg = 5.0);

/// One sanitized DelayPlan per waypoint; linear interpolation of delays
/// between waypoints is the documented playback rule.
TrajectorySchedule trajectory_schedule(
    const geo::GeodeticPosition& attacker_loc,
    const std::vector<std::pair<double, geo::GeodeticPosition>>& waypoints,
    const constellation::Constellation& c, const std::vector<int>& prns,
    double processing_delay_s = kDefaultProcessingDelay, double mask_deg = 5.0);

/// Pass iff bit latency + processing latency fit inside the key disclosure
/// window; slack is the remaining margin.
FeasibilityReport check_timing_budget(const TimingBudget& b);

/// Structured-text (JSON) serialization consumed by the harness and baseband
/// layers. Delays carry 12 decimal digits.
std::string serialize_plan(const DelayPlan& plan);
DelayPlan deserialize_plan(const std::string& text);

}  // namespace gnss::attacker
