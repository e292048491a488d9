#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gnss/attacker.hpp"
#include "gnss/constellation.hpp"
#include "gnss/geo.hpp"
#include "gnss/receiver.hpp"

namespace gnss::harness {

inline constexpr const char* kVersion = "0.1.0";

struct Scenario {
  geo::GeodeticPosition attacker_location{47.0, 8.0, 400.0};
  geo::GeodeticPosition target_location{46.5, 9.0, 300.0};
  unsigned constellation_seed = 1;
  std::string almanac_path;  // when set, overrides constellation_seed
  double epoch_s = 0.0;
  double sample_rate_hz = 10e6;
  int subset_size = 6;
  double processing_delay_s = attacker::kDefaultProcessingDelay;
  double mask_deg = 5.0;
  unsigned long rng_seed = 0;  // mandatory for any randomized analysis
  bool baseband_path = false;
  bool quantize_enabled = true;
  bool horizontal_error = false;
};

Scenario scenario_from_json_file(const std::string& path);
std::string scenario_to_json(const Scenario& s);

/// FNV-1a hash of the canonical scenario serialization; embedded in reports.
std::string scenario_hash(const Scenario& s);

constellation::Constellation scenario_constellation(const Scenario& s);

struct SpoofReport {
  receiver::PositionFix fix;
  double error_to_target_m = 0.0;
  double spoof_distance_m = 0.0;
  std::vector<int> subset;
  constellation::DopValues dop_at_target;
  double quantization_step_m = 0.0;
  attacker::FeasibilityReport timing;
  std::string scenario_hash;
  std::string constellation_name;
  std::string version = kVersion;
};

/// Full pipeline: subset selection, delay plan, sanitize, quantize, victim
/// arrivals shifted (or baseband synthesis + correlation when enabled),
/// pseudoranges, fix. Forced subset bypasses selection when given.
SpoofReport run_spoof(const Scenario& s,
                      const std::vector<int>& forced_subset = {});

struct SweepRow {
  double rate_hz = 0.0;
  double granularity_m = 0.0;  // c / f_s
  double median_error_m = 0.0;
  double max_error_m = 0.0;
};

std::vector<SweepRow> sweep_sampling_rate(const Scenario& s,
                                          const std::vector<double>& rates, int trials);

struct GdopRow {
  std::vector<int> subset;
  double gdop = 0.0;
  double median_error_m = 0.0;
};

/// Per-subset spoof error with target jitter across seeded trials; the
/// geometry (epoch) stays fixed so each subset keeps its GDOP.
std::vector<GdopRow> gdop_comparison(const Scenario& s,
                                     const std::vector<std::vector<int>>& subsets,
                                     int trials);

struct DriftPoint {
  double t_s = 0.0;
  double error_m = 0.0;
};

/// Victim error over time with a DelayPlan frozen at the scenario epoch, or
/// refreshed every recompute_interval_s (<= 0 means never).
std::vector<DriftPoint> drift_run(const Scenario& s, const std::vector<int>& subset,
                                  double duration_s, double step_s,
                                  double recompute_interval_s);

struct BoundingBox {
  double lat_min_deg, lat_max_deg, lon_min_deg, lon_max_deg;
};

struct CoverageMap {
  struct Cell {
    geo::GeodeticPosition center;
    int common_count = 0;
    bool spoofable = false;
  };
  std::vector<Cell> cells;
  std::string grid_descriptor;
};

/// Hexagonal tiling (axial layout on a local tangent projection) of the
/// region; per cell, common-visible count against the attacker location.
CoverageMap coverage_grid(const geo::GeodeticPosition& attacker_loc,
                          const BoundingBox& region, double cell_side_m,
                          const constellation::Constellation& c, double t,
                          double mask_deg = 5.0);

struct WorldCoverage {
  struct Point {
    double lat_deg, lon_deg;
    int max_common = 0;
  };
  std::vector<Point> points;
  Point worst_case;
  bool spoofable_everywhere = false;
};

WorldCoverage world_coverage(const std::vector<geo::GeodeticPosition>& receivers,
                             const constellation::Constellation& c, double t,
                             double grid_step_deg, double mask_deg = 5.0);

struct TrajectoryPoint {
  double t_s = 0.0;
  geo::GeodeticPosition waypoint;
  SpoofReport report;
};

std::vector<TrajectoryPoint> trajectory_run(
    const Scenario& s,
    const std::vector<std::pair<double, geo::GeodeticPosition>>& waypoints);

/// Spearman rank correlation; used by the GDOP analyses and their tests.
double rank_correlation(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace gnss::harness
