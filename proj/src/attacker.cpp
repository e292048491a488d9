#include "gnss/attacker.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "gnss/constants.hpp"
#include "gnss/errors.hpp"

namespace gnss::attacker {

using constants::kSpeedOfLight;
using json = nlohmann::json;

DelayPlan compute_delay_plan(const geo::GeodeticPosition& attacker_loc,
                             const geo::GeodeticPosition& target_loc,
                             const std::vector<constellation::SatelliteState>& sats,
                             double t, double processing_delay_s) {
  std::vector<int> hidden;
  for (const auto& s : sats) {
    if (geo::elevation_angle(s.position, attacker_loc) <= 0.0 ||
        geo::elevation_angle(s.position, target_loc) <= 0.0) {
      hidden.push_back(s.prn);
    }
  }
  if (!hidden.empty()) {
    std::ostringstream msg;
    msg << "compute_delay_plan: not commonly visible PRNs:";
    for (int p : hidden) msg << ' ' << p;
    throw NotCommonlyVisible(msg.str());
  }

  const geo::EcefPosition a = geo::geodetic_to_ecef(attacker_loc);
  const geo::EcefPosition tgt = geo::geodetic_to_ecef(target_loc);

  DelayPlan plan;
  plan.attacker_location = attacker_loc;
  plan.target_location = target_loc;
  plan.computed_at_s = t;
  plan.processing_delay_s = processing_delay_s;
  for (const auto& s : sats) {
    const double r_a = geo::geometric_range(s.position, a);
    const double r_t = geo::geometric_range(s.position, tgt);
    plan.delay_s[s.prn] = (r_t - r_a - kSpeedOfLight * processing_delay_s) / kSpeedOfLight;
  }
  return plan;
}

DelayPlan sanitize(const DelayPlan& plan) {
  DelayPlan out = plan;
  double lowest = 0.0;
  for (const auto& [prn, d] : plan.delay_s) lowest = std::min(lowest, d);
  if (lowest < 0.0) {
    out.common_offset_s = -lowest;
    for (auto& [prn, d] : out.delay_s) d += out.common_offset_s;
  }
  return out;
}

QuantizedPlan quantize(const DelayPlan& plan, double sample_rate_hz) {
  QuantizedPlan out;
  out.plan = plan;
  const double step = 1.0 / sample_rate_hz;
  for (auto& [prn, d] : out.plan.delay_s) {
    const double quantized = std::round(d * sample_rate_hz) * step;
    out.quantization_error_s[prn] = d - quantized;
    d = quantized;
  }
  return out;
}

namespace {

// Visits every k-combination of indices in [0, n).
template <typename Fn>
void for_each_combination(int n, int k, Fn&& fn) {
  std::vector<int> idx(k);
  for (int i = 0; i < k; ++i) idx[i] = i;
  while (true) {
    fn(idx);
    int i = k - 1;
    while (i >= 0 && idx[i] == n - k + i) --i;
    if (i < 0) break;
    ++idx[i];
    for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

}  // namespace

SubsetSelection select_subset(const geo::GeodeticPosition& attacker_loc,
                              const geo::GeodeticPosition& target_loc,
                              const constellation::Constellation& c, double t, int k,
                              double mask_deg) {
  const auto common = constellation::common_visible(attacker_loc, target_loc, c, t, mask_deg);
  if (static_cast<int>(common.size()) < k) {
    throw TooFewCommonSatellites("select_subset: " + std::to_string(common.size()) +
                                 " common satellites, need " + std::to_string(k));
  }

  const auto states = constellation::visible_satellites(target_loc, c, t, mask_deg);
  std::vector<constellation::SatelliteState> pool;
  for (int prn : common) {
    for (const auto& s : states) {
      if (s.prn == prn) pool.push_back(s);
    }
  }
  const geo::EcefPosition tgt = geo::geodetic_to_ecef(target_loc);

  SubsetSelection best;
  double best_gdop = std::numeric_limits<double>::infinity();
  int best_prn_sum = std::numeric_limits<int>::max();

  for_each_combination(static_cast<int>(pool.size()), k, [&](const std::vector<int>& idx) {
    ++best.candidate_count_examined;
    std::vector<constellation::SatelliteState> subset;
    subset.reserve(k);
    int prn_sum = 0;
    for (int i : idx) {
      subset.push_back(pool[i]);
      prn_sum += pool[i].prn;
    }
    constellation::DopValues d;
    try {
      d = constellation::dop(subset, tgt);
    } catch (const SingularGeometry&) {
      return;
    }
    if (d.gdop < best_gdop - 1e-12 ||
        (std::abs(d.gdop - best_gdop) <= 1e-12 && prn_sum < best_prn_sum)) {
      best_gdop = d.gdop;
      best_prn_sum = prn_sum;
      best.dop_at_target = d;
      best.prns.clear();
      for (const auto& s : subset) best.prns.push_back(s.prn);
    }
  });

  if (best.prns.empty()) {
    throw SingularGeometry("select_subset: every candidate subset was singular");
  }
  return best;
}

DelaySeries delay_correction_series(const geo::GeodeticPosition& attacker_loc,
                                    const geo::GeodeticPosition& target_loc,
                                    const std::vector<int>& prns,
                                    const constellation::Constellation& c, double t0,
                                    double t1, double step_s, double processing_delay_s,
                                    double mask_deg) {
  DelaySeries out;
  std::map<int, double> baseline;

  for (double t = t0; t <= t1 + 1e-9; t += step_s) {
    std::vector<constellation::SatelliteState> sats;
    for (int prn : prns) {
      const auto it =
          std::find_if(c.satellites.begin(), c.satellites.end(),
                       [prn](const auto& e) { return e.prn == prn; });
      if (it == c.satellites.end()) throw UnknownPrn("delay_correction_series: PRN " +
                                                     std::to_string(prn));
      auto s = constellation::propagate(it->elements, t, prn);
      if (geo::elevation_angle(s.position, attacker_loc) <= mask_deg ||
          geo::elevation_angle(s.position, target_loc) <= mask_deg) {
        throw VisibilityLost("delay_correction_series: PRN " + std::to_string(prn) +
                             " below mask at t=" + std::to_string(t));
      }
      sats.push_back(s);
    }
    const DelayPlan plan =
        compute_delay_plan(attacker_loc, target_loc, sats, t, processing_delay_s);
    out.times_s.push_back(t);
    for (const auto& [prn, d] : plan.delay_s) {
      if (baseline.find(prn) == baseline.end()) baseline[prn] = d;
      out.delta_s[prn].push_back(d - baseline[prn]);
    }
  }
  return out;
}

TrajectorySchedule trajectory_schedule(
    const geo::GeodeticPosition& attacker_loc,
    const std::vector<std::pair<double, geo::GeodeticPosition>>& waypoints,
    const constellation::Constellation& c, const std::vector<int>& prns,
    double processing_delay_s, double mask_deg) {
  if (waypoints.size() < 2) {
    throw ScenarioError("trajectory_schedule: need at least 2 waypoints");
  }
  for (size_t i = 1; i < waypoints.size(); ++i) {
    if (!(waypoints[i].first > waypoints[i - 1].first)) {
      throw NonMonotonicTimes("trajectory_schedule: waypoint times must strictly increase");
    }
  }

  TrajectorySchedule sched;
  sched.waypoint_source = "explicit waypoint list";
  for (const auto& [t, loc] : waypoints) {
    std::vector<constellation::SatelliteState> sats;
    for (int prn : prns) {
      const auto it =
          std::find_if(c.satellites.begin(), c.satellites.end(),
                       [prn](const auto& e) { return e.prn == prn; });
      if (it == c.satellites.end()) throw UnknownPrn("trajectory_schedule: PRN " +
                                                     std::to_string(prn));
      auto s = constellation::propagate(it->elements, t, prn);
      if (geo::elevation_angle(s.position, attacker_loc) <= mask_deg ||
          geo::elevation_angle(s.position, loc) <= mask_deg) {
        throw NotCommonlyVisible("trajectory_schedule: PRN " + std::to_string(prn) +
                                 " not commonly visible at t=" + std::to_string(t));
      }
      sats.push_back(s);
    }
    sched.entries.emplace_back(
        t, sanitize(compute_delay_plan(attacker_loc, loc, sats, t, processing_delay_s)));
  }
  return sched;
}

FeasibilityReport check_timing_budget(const TimingBudget& b) {
  FeasibilityReport r;
  r.slack_s = b.disclosure_window_s - (b.bit_latency_s + b.processing_latency_s);
  r.pass = r.slack_s > 0.0;
  return r;
}

namespace {

json geodetic_to_json(const geo::GeodeticPosition& p) {
  return {{"lat_deg", p.latitude_deg}, {"lon_deg", p.longitude_deg}, {"height_m", p.height_m}};
}

geo::GeodeticPosition geodetic_from_json(const json& j) {
  return {j.at("lat_deg").get<double>(), j.at("lon_deg").get<double>(),
          j.at("height_m").get<double>()};
}

std::string fixed12(double v) {
  std::ostringstream ss;
  ss.setf(std::ios::fixed);
  ss.precision(12);
  ss << v;
  return ss.str();
}

}  // namespace

std::string serialize_plan(const DelayPlan& plan) {
  json j;
  j["attacker_location"] = geodetic_to_json(plan.attacker_location);
  j["target_location"] = geodetic_to_json(plan.target_location);
  j["computed_at_s"] = plan.computed_at_s;
  j["processing_delay_s"] = plan.processing_delay_s;
  j["common_offset_s"] = fixed12(plan.common_offset_s);
  json entries = json::object();
  for (const auto& [prn, d] : plan.delay_s) entries[std::to_string(prn)] = fixed12(d);
  j["entries"] = entries;
  return j.dump(2);
}

DelayPlan deserialize_plan(const std::string& text) {
  const json j = json::parse(text);
  DelayPlan plan;
  plan.attacker_location = geodetic_from_json(j.at("attacker_location"));
  plan.target_location = geodetic_from_json(j.at("target_location"));
  plan.computed_at_s = j.at("computed_at_s").get<double>();
  plan.processing_delay_s = j.at("processing_delay_s").get<double>();
  plan.common_offset_s = std::stod(j.at("common_offset_s").get<std::string>());
  for (const auto& [key, val] : j.at("entries").items()) {
    plan.delay_s[std::stoi(key)] = std::stod(val.get<std::string>());
  }
  return plan;
}

}  // namespace gnss::attacker
