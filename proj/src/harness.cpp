#include "gnss/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "gnss/baseband.hpp"
#include "gnss/constants.hpp"
#include "gnss/errors.hpp"

namespace gnss::harness {

using constants::kSpeedOfLight;
using json = nlohmann::json;

namespace {

json geodetic_to_json(const geo::GeodeticPosition& p) {
  return {{"lat_deg", p.latitude_deg}, {"lon_deg", p.longitude_deg}, {"height_m", p.height_m}};
}

geo::GeodeticPosition geodetic_from_json(const json& j) {
  return {j.at("lat_deg").get<double>(), j.at("lon_deg").get<double>(),
          j.at("height_m").get<double>()};
}

}  // namespace

std::string scenario_to_json(const Scenario& s) {
  json j;
  j["attacker_location"] = geodetic_to_json(s.attacker_location);
  j["target_location"] = geodetic_to_json(s.target_location);
  j["constellation_seed"] = s.constellation_seed;
  j["almanac_path"] = s.almanac_path;
  j["epoch_s"] = s.epoch_s;
  j["sample_rate_hz"] = s.sample_rate_hz;
  j["subset_size"] = s.subset_size;
  j["processing_delay_s"] = s.processing_delay_s;
  j["mask_deg"] = s.mask_deg;
  j["rng_seed"] = s.rng_seed;
  j["baseband_path"] = s.baseband_path;
  j["quantize"] = s.quantize_enabled;
  j["horizontal_error"] = s.horizontal_error;
  return j.dump(2);
}

Scenario scenario_from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open scenario file: " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ScenarioError("scenario parse error: " + std::string(e.what()));
  }
  Scenario s;
  try {
    s.attacker_location = geodetic_from_json(j.at("attacker_location"));
    s.target_location = geodetic_from_json(j.at("target_location"));
    s.rng_seed = j.at("rng_seed").get<unsigned long>();
    if (j.contains("constellation_seed")) s.constellation_seed = j["constellation_seed"];
    if (j.contains("almanac_path")) s.almanac_path = j["almanac_path"];
    if (j.contains("epoch_s")) s.epoch_s = j["epoch_s"];
    if (j.contains("sample_rate_hz")) s.sample_rate_hz = j["sample_rate_hz"];
    if (j.contains("subset_size")) s.subset_size = j["subset_size"];
    if (j.contains("processing_delay_s")) s.processing_delay_s = j["processing_delay_s"];
    if (j.contains("mask_deg")) s.mask_deg = j["mask_deg"];
    if (j.contains("baseband_path")) s.baseband_path = j["baseband_path"];
    if (j.contains("quantize")) s.quantize_enabled = j["quantize"];
    if (j.contains("horizontal_error")) s.horizontal_error = j["horizontal_error"];
  } catch (const json::exception& e) {
    throw ScenarioError("scenario field error: " + std::string(e.what()));
  }
  return s;
}

std::string scenario_hash(const Scenario& s) {
  const std::string text = scenario_to_json(s);
  std::uint64_t h = 1469598103934665603ull;  // FNV-1a
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  std::ostringstream ss;
  ss << std::hex << h;
  return ss.str();
}

constellation::Constellation scenario_constellation(const Scenario& s) {
  if (!s.almanac_path.empty()) return constellation::load_almanac(s.almanac_path);
  return constellation::default_constellation(s.constellation_seed);
}

namespace {

std::vector<constellation::SatelliteState> subset_states(
    const constellation::Constellation& c, const std::vector<int>& prns, double t) {
  std::vector<constellation::SatelliteState> out;
  for (int prn : prns) {
    const auto it = std::find_if(c.satellites.begin(), c.satellites.end(),
                                 [prn](const auto& e) { return e.prn == prn; });
    if (it == c.satellites.end()) {
      throw UnknownPrn("no such PRN in constellation: " + std::to_string(prn));
    }
    out.push_back(constellation::propagate(it->elements, t, prn));
  }
  return out;
}

double fix_error(const receiver::PositionFix& fix, const geo::GeodeticPosition& target,
                 bool horizontal_only) {
  const geo::EcefPosition tgt = geo::geodetic_to_ecef(target);
  const geo::EcefPosition d = fix.position - tgt;
  if (!horizontal_only) return d.norm();
  const double lat = deg2rad(target.latitude_deg);
  const double lon = deg2rad(target.longitude_deg);
  const double east = -std::sin(lon) * d.x + std::cos(lon) * d.y;
  const double north = -std::sin(lat) * std::cos(lon) * d.x -
                       std::sin(lat) * std::sin(lon) * d.y + std::cos(lat) * d.z;
  return std::hypot(east, north);
}

// Victim-side arrivals after the attacker applies the plan's delays.
receiver::ArrivalTimeSet shifted_arrivals(
    const geo::GeodeticPosition& attacker_loc,
    const std::vector<constellation::SatelliteState>& sats, const attacker::DelayPlan& plan) {
  receiver::ArrivalTimeSet arrivals =
      receiver::simulate_arrivals(geo::geodetic_to_ecef(attacker_loc), sats);
  for (auto& [prn, t] : arrivals.arrival_s) t += plan.delay_s.at(prn);
  return arrivals;
}

// Sample-domain realization: synthesize each satellite signal with its
// victim-side relative offset in integer samples, combine, reacquire.
receiver::ArrivalTimeSet baseband_arrivals(const receiver::ArrivalTimeSet& continuous,
                                           double sample_rate_hz) {
  double earliest = std::numeric_limits<double>::infinity();
  for (const auto& [prn, t] : continuous.arrival_s) earliest = std::min(earliest, t);

  std::vector<baseband::IqBuffer> parts;
  std::vector<double> gains;
  std::vector<baseband::CaCode> codes;
  long max_delay = 0;
  const std::vector<int> bits{0, 0, 0};
  for (const auto& [prn, t] : continuous.arrival_s) {
    const long delay = std::llround((t - earliest) * sample_rate_hz);
    max_delay = std::max(max_delay, delay);
    const auto code = baseband::generate_ca_code(prn);
    parts.push_back(baseband::apply_sample_delay(
        baseband::spread_bits(bits, code, sample_rate_hz), delay));
    gains.push_back(1.0);
    codes.push_back(code);
  }
  const baseband::IqBuffer combined = baseband::combine(parts, gains);
  const long period = std::llround(sample_rate_hz * constants::kCaCodeLength /
                                   constants::kGpsChipRate);
  const auto offsets =
      baseband::measure_relative_offsets(combined, codes, max_delay + period);

  receiver::ArrivalTimeSet out;
  out.epoch_label_s = continuous.epoch_label_s;
  for (const auto& [prn, off] : offsets) out.arrival_s[prn] = earliest + off;
  return out;
}

}  // namespace

SpoofReport run_spoof(const Scenario& s, const std::vector<int>& forced_subset) {
  const auto c = scenario_constellation(s);

  SpoofReport report;
  report.scenario_hash = scenario_hash(s);
  report.constellation_name = c.name;
  report.spoof_distance_m = geo::surface_distance(s.attacker_location, s.target_location);
  report.quantization_step_m = kSpeedOfLight / s.sample_rate_hz;

  try {
    if (forced_subset.empty()) {
      const auto sel = attacker::select_subset(s.attacker_location, s.target_location, c,
                                               s.epoch_s, s.subset_size, s.mask_deg);
      report.subset = sel.prns;
      report.dop_at_target = sel.dop_at_target;
    } else {
      report.subset = forced_subset;
      report.dop_at_target =
          constellation::dop(subset_states(c, forced_subset, s.epoch_s),
                             geo::geodetic_to_ecef(s.target_location));
    }
  } catch (const std::exception& e) {
    throw ScenarioError(std::string("subset selection: ") + e.what());
  }

  const auto sats = subset_states(c, report.subset, s.epoch_s);

  attacker::DelayPlan plan;
  try {
    plan = attacker::sanitize(attacker::compute_delay_plan(
        s.attacker_location, s.target_location, sats, s.epoch_s, s.processing_delay_s));
    if (s.quantize_enabled) plan = attacker::quantize(plan, s.sample_rate_hz).plan;
  } catch (const std::exception& e) {
    throw ScenarioError(std::string("delay planning: ") + e.what());
  }

  try {
    receiver::ArrivalTimeSet arrivals = shifted_arrivals(s.attacker_location, sats, plan);
    if (s.baseband_path) arrivals = baseband_arrivals(arrivals, s.sample_rate_hz);
    const auto pr = receiver::form_pseudoranges(arrivals);
    report.fix = receiver::solve_fix(pr, sats);
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string("victim pipeline: ") + e.what());
  }

  report.error_to_target_m = fix_error(report.fix, s.target_location, s.horizontal_error);

  attacker::TimingBudget budget;
  budget.scheme = "chimera_fast";
  budget.disclosure_window_s = 6.0;
  budget.bit_latency_s = constants::kGpsBitPeriod;
  budget.processing_latency_s = s.processing_delay_s;
  report.timing = attacker::check_timing_budget(budget);
  return report;
}

namespace {

// Deterministic per-trial variation: epoch and target bearing change, the
// spoof distance stays the scenario's.
Scenario trial_scenario(const Scenario& base, unsigned long trial) {
  std::mt19937_64 rng(base.rng_seed * 1000003ull + trial);
  std::uniform_real_distribution<double> bearing(0.0, 360.0);
  std::uniform_real_distribution<double> epoch(0.0, 43082.0);  // one orbital period

  Scenario s = base;
  const double dist =
      geo::surface_distance(base.attacker_location, base.target_location);
  s.target_location = geo::offset_by(base.attacker_location, bearing(rng), dist);
  s.epoch_s = epoch(rng);
  return s;
}

}  // namespace

std::vector<SweepRow> sweep_sampling_rate(const Scenario& s,
                                          const std::vector<double>& rates, int trials) {
  if (rates.size() < 2) throw ScenarioError("sweep_sampling_rate: need at least 2 rates");

  // Fix the trial geometries once so only the rate varies across columns.
  std::vector<Scenario> trial_set;
  unsigned long trial = 0;
  while (trial_set.size() < static_cast<size_t>(trials)) {
    Scenario t = trial_scenario(s, trial++);
    try {
      attacker::select_subset(t.attacker_location, t.target_location,
                              scenario_constellation(t), t.epoch_s, t.subset_size,
                              t.mask_deg);
      trial_set.push_back(t);
    } catch (const std::exception&) {
      if (trial > static_cast<unsigned long>(trials) * 20ul) {
        throw ScenarioError("sweep_sampling_rate: cannot find enough feasible trials");
      }
    }
  }

  std::vector<SweepRow> out;
  for (double rate : rates) {
    std::vector<double> errors;
    for (const auto& t : trial_set) {
      Scenario run = t;
      run.sample_rate_hz = rate;
      errors.push_back(run_spoof(run).error_to_target_m);
    }
    std::sort(errors.begin(), errors.end());
    SweepRow row;
    row.rate_hz = rate;
    row.granularity_m = kSpeedOfLight / rate;
    row.median_error_m = errors[errors.size() / 2];
    row.max_error_m = errors.back();
    out.push_back(row);
  }
  return out;
}

std::vector<GdopRow> gdop_comparison(const Scenario& s,
                                     const std::vector<std::vector<int>>& subsets,
                                     int trials) {
  const auto c = scenario_constellation(s);
  const geo::EcefPosition tgt = geo::geodetic_to_ecef(s.target_location);

  std::vector<GdopRow> out;
  for (const auto& subset : subsets) {
    GdopRow row;
    row.subset = subset;
    row.gdop = constellation::dop(subset_states(c, subset, s.epoch_s), tgt).gdop;

    std::vector<double> errors;
    std::mt19937_64 rng(s.rng_seed ^ 0x9e3779b97f4a7c15ull);
    std::uniform_real_distribution<double> bearing(0.0, 360.0);
    std::uniform_real_distribution<double> dist(0.0, 5000.0);
    for (int t = 0; t < trials; ++t) {
      Scenario run = s;
      run.target_location = geo::offset_by(s.target_location, bearing(rng), dist(rng));
      errors.push_back(run_spoof(run, subset).error_to_target_m);
    }
    std::sort(errors.begin(), errors.end());
    row.median_error_m = errors[errors.size() / 2];
    out.push_back(row);
  }
  return out;
}

std::vector<DriftPoint> drift_run(const Scenario& s, const std::vector<int>& subset,
                                  double duration_s, double step_s,
                                  double recompute_interval_s) {
  const auto c = scenario_constellation(s);

  auto make_plan = [&](double t) {
    auto plan = attacker::sanitize(attacker::compute_delay_plan(
        s.attacker_location, s.target_location, subset_states(c, subset, t), t,
        s.processing_delay_s));
    if (s.quantize_enabled) plan = attacker::quantize(plan, s.sample_rate_hz).plan;
    return plan;
  };

  attacker::DelayPlan plan = make_plan(s.epoch_s);
  double last_recompute = s.epoch_s;

  std::vector<DriftPoint> out;
  for (double dt = 0.0; dt <= duration_s + 1e-9; dt += step_s) {
    const double t = s.epoch_s + dt;
    const auto sats = subset_states(c, subset, t);
    for (const auto& sat : sats) {
      if (geo::elevation_angle(sat.position, s.attacker_location) <= s.mask_deg ||
          geo::elevation_angle(sat.position, s.target_location) <= s.mask_deg) {
        throw VisibilityLost("drift_run: PRN " + std::to_string(sat.prn) +
                             " below mask at t=" + std::to_string(t));
      }
    }
    if (recompute_interval_s > 0.0 && t - last_recompute >= recompute_interval_s - 1e-9) {
      plan = make_plan(t);
      last_recompute = t;
    }
    const auto arrivals = shifted_arrivals(s.attacker_location, sats, plan);
    const auto fix = receiver::solve_fix(receiver::form_pseudoranges(arrivals), sats);
    out.push_back({dt, fix_error(fix, s.target_location, s.horizontal_error)});
  }
  return out;
}

CoverageMap coverage_grid(const geo::GeodeticPosition& attacker_loc,
                          const BoundingBox& region, double cell_side_m,
                          const constellation::Constellation& c, double t,
                          double mask_deg) {
  const double lat0 = 0.5 * (region.lat_min_deg + region.lat_max_deg);
  const double lon0 = 0.5 * (region.lon_min_deg + region.lon_max_deg);
  const double r = constants::kMeanEarthRadius;
  const double clat = std::cos(deg2rad(lat0));

  // Pointy-top axial hexagons on the local tangent plane.
  const double dx = cell_side_m * std::sqrt(3.0);
  const double dy = cell_side_m * 1.5;
  const double half_w = r * clat * deg2rad(0.5 * (region.lon_max_deg - region.lon_min_deg));
  const double half_h = r * deg2rad(0.5 * (region.lat_max_deg - region.lat_min_deg));
  const int qmax = static_cast<int>(std::ceil(half_w / dx)) + 1;
  const int rmax = static_cast<int>(std::ceil(half_h / dy)) + 1;

  CoverageMap map;
  {
    std::ostringstream desc;
    desc << "axial-hex side=" << cell_side_m << "m center=(" << lat0 << "," << lon0 << ")";
    map.grid_descriptor = desc.str();
  }
  for (int rr = -rmax; rr <= rmax; ++rr) {
    for (int q = -qmax; q <= qmax; ++q) {
      const double x = dx * (q + 0.5 * rr);
      const double y = dy * rr;
      if (std::abs(x) > half_w || std::abs(y) > half_h) continue;
      geo::GeodeticPosition center{lat0 + rad2deg(y / r), lon0 + rad2deg(x / (r * clat)),
                                   0.0};
      CoverageMap::Cell cell;
      cell.center = center;
      cell.common_count = static_cast<int>(
          constellation::common_visible(attacker_loc, center, c, t, mask_deg).size());
      cell.spoofable = cell.common_count >= 4;
      map.cells.push_back(cell);
    }
  }
  return map;
}

WorldCoverage world_coverage(const std::vector<geo::GeodeticPosition>& receivers,
                             const constellation::Constellation& c, double t,
                             double grid_step_deg, double mask_deg) {
  if (receivers.empty()) throw ScenarioError("world_coverage: need at least one receiver");

  WorldCoverage out;
  out.worst_case = {0.0, 0.0, std::numeric_limits<int>::max()};
  for (double lat = -85.0; lat <= 85.0 + 1e-9; lat += grid_step_deg) {
    for (double lon = -180.0; lon < 180.0 - 1e-9; lon += grid_step_deg) {
      const geo::GeodeticPosition p{lat, lon, 0.0};
      int best = 0;
      for (const auto& rx : receivers) {
        best = std::max(best,
                        static_cast<int>(constellation::common_visible(rx, p, c, t, mask_deg).size()));
      }
      out.points.push_back({lat, lon, best});
      if (best < out.worst_case.max_common) out.worst_case = {lat, lon, best};
    }
  }
  out.spoofable_everywhere = out.worst_case.max_common >= 4;
  return out;
}

std::vector<TrajectoryPoint> trajectory_run(
    const Scenario& s,
    const std::vector<std::pair<double, geo::GeodeticPosition>>& waypoints) {
  const auto c = scenario_constellation(s);
  if (waypoints.empty()) throw ScenarioError("trajectory_run: no waypoints");

  Scenario first = s;
  first.target_location = waypoints.front().second;
  first.epoch_s = waypoints.front().first;
  const auto sel = attacker::select_subset(first.attacker_location, first.target_location,
                                           c, first.epoch_s, s.subset_size, s.mask_deg);

  const auto sched = attacker::trajectory_schedule(s.attacker_location, waypoints, c,
                                                   sel.prns, s.processing_delay_s,
                                                   s.mask_deg);

  std::vector<TrajectoryPoint> out;
  for (size_t i = 0; i < sched.entries.size(); ++i) {
    const auto& [t, plan_raw] = sched.entries[i];
    attacker::DelayPlan plan = plan_raw;
    if (s.quantize_enabled) plan = attacker::quantize(plan, s.sample_rate_hz).plan;

    const auto sats = subset_states(c, sel.prns, t);
    const auto arrivals = shifted_arrivals(s.attacker_location, sats, plan);
    const auto fix = receiver::solve_fix(receiver::form_pseudoranges(arrivals), sats);

    TrajectoryPoint point;
    point.t_s = t;
    point.waypoint = waypoints[i].second;
    point.report.fix = fix;
    point.report.subset = sel.prns;
    point.report.scenario_hash = scenario_hash(s);
    point.report.constellation_name = c.name;
    point.report.quantization_step_m = kSpeedOfLight / s.sample_rate_hz;
    point.report.spoof_distance_m =
        geo::surface_distance(s.attacker_location, waypoints[i].second);
    point.report.error_to_target_m = fix_error(fix, waypoints[i].second, s.horizontal_error);
    out.push_back(point);
  }
  return out;
}

double rank_correlation(const std::vector<double>& a, const std::vector<double>& b) {
  const size_t n = a.size();
  if (n != b.size() || n < 2) throw std::invalid_argument("rank_correlation: bad input");

  auto ranks = [](const std::vector<double>& v) {
    std::vector<size_t> order(v.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](size_t i, size_t j) { return v[i] < v[j]; });
    std::vector<double> r(v.size());
    for (size_t i = 0; i < order.size(); ++i) r[order[i]] = static_cast<double>(i);
    return r;
  };
  const auto ra = ranks(a);
  const auto rb = ranks(b);
  const double mean = (n - 1) / 2.0;
  double num = 0.0, da = 0.0, db = 0.0;
  for (size_t i = 0; i < n; ++i) {
    num += (ra[i] - mean) * (rb[i] - mean);
    da += (ra[i] - mean) * (ra[i] - mean);
    db += (rb[i] - mean) * (rb[i] - mean);
  }
  return num / std::sqrt(da * db);
}

}  // namespace gnss::harness
