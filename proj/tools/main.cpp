// gnss-relay: delay-relay spoofing simulator and analysis CLI.
//
// Subcommands mirror the harness analyses; each takes --config <scenario.json>
// plus flag overrides and writes CSV tables and a JSON summary to --out-dir.
// Exit codes: 0 success, 2 scenario error, 3 pipeline error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include <nlohmann/json.hpp>

#include "gnss/errors.hpp"
#include "gnss/harness.hpp"

using namespace gnss;
using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct CommonOpts {
  std::string config;
  std::string out_dir = ".";
  double sample_rate_hz = -1.0;
  double epoch_s = -1e18;
  int subset_size = -1;
  long seed = -1;
  bool baseband = false;
  bool no_quantize = false;
  bool horizontal = false;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--config", o.config, "Scenario JSON file")->required();
  cmd->add_option("--out-dir", o.out_dir, "Output directory for CSV/summary files");
  cmd->add_option("--sample-rate", o.sample_rate_hz, "Override sample rate, Hz");
  cmd->add_option("--epoch", o.epoch_s, "Override scenario epoch, s");
  cmd->add_option("--subset-size", o.subset_size, "Override spoofed subset size");
  cmd->add_option("--seed", o.seed, "Override RNG seed");
  cmd->add_flag("--baseband", o.baseband, "Run the sample-domain baseband path");
  cmd->add_flag("--no-quantize", o.no_quantize, "Disable sample quantization");
  cmd->add_flag("--horizontal", o.horizontal, "Report horizontal-only errors");
}

harness::Scenario load_scenario(const CommonOpts& o) {
  harness::Scenario s = harness::scenario_from_json_file(o.config);
  if (o.sample_rate_hz > 0.0) s.sample_rate_hz = o.sample_rate_hz;
  if (o.epoch_s > -1e17) s.epoch_s = o.epoch_s;
  if (o.subset_size > 0) s.subset_size = o.subset_size;
  if (o.seed >= 0) s.rng_seed = static_cast<unsigned long>(o.seed);
  if (o.baseband) s.baseband_path = true;
  if (o.no_quantize) s.quantize_enabled = false;
  if (o.horizontal) s.horizontal_error = true;
  return s;
}

std::ofstream open_out(const std::string& dir, const std::string& name) {
  fs::create_directories(dir);
  std::ofstream out(fs::path(dir) / name);
  if (!out) throw std::runtime_error("cannot write " + name + " in " + dir);
  return out;
}

void write_summary(const std::string& dir, const harness::Scenario& s,
                   const std::string& command, const json& results) {
  json j;
  j["command"] = command;
  j["scenario_hash"] = harness::scenario_hash(s);
  j["version"] = harness::kVersion;
  j["constellation"] = harness::scenario_constellation(s).name;
  j["results"] = results;
  auto out = open_out(dir, command + "_summary.json");
  out << j.dump(2) << '\n';
}

std::string join_prns(const std::vector<int>& prns) {
  std::ostringstream ss;
  for (size_t i = 0; i < prns.size(); ++i) ss << (i ? " " : "") << prns[i];
  return ss.str();
}

std::vector<std::vector<int>> parse_subsets(const std::string& text) {
  std::vector<std::vector<int>> out;
  std::istringstream groups(text);
  std::string group;
  while (std::getline(groups, group, ';')) {
    std::vector<int> prns;
    std::istringstream items(group);
    std::string item;
    while (std::getline(items, item, ',')) prns.push_back(std::stoi(item));
    if (!prns.empty()) out.push_back(prns);
  }
  return out;
}

std::vector<std::pair<double, geo::GeodeticPosition>> parse_waypoints(
    const std::string& text) {
  std::vector<std::pair<double, geo::GeodeticPosition>> out;
  std::istringstream groups(text);
  std::string group;
  while (std::getline(groups, group, ';')) {
    double t, lat, lon;
    char c1, c2;
    std::istringstream ss(group);
    if (!(ss >> t >> c1 >> lat >> c2 >> lon)) {
      throw ScenarioError("bad waypoint: " + group);
    }
    out.emplace_back(t, geo::GeodeticPosition{lat, lon, 0.0});
  }
  return out;
}

int run_spoof_cmd(const CommonOpts& o) {
  const harness::Scenario s = load_scenario(o);
  const harness::SpoofReport r = harness::run_spoof(s);

  auto csv = open_out(o.out_dir, "spoof.csv");
  csv << "error_to_target_m,spoof_distance_m,gdop,pdop,quantization_step_m,"
         "clock_bias_m,residual_rms_m,iterations,subset\n";
  csv << r.error_to_target_m << ',' << r.spoof_distance_m << ',' << r.dop_at_target.gdop
      << ',' << r.dop_at_target.pdop << ',' << r.quantization_step_m << ','
      << r.fix.clock_bias_m << ',' << r.fix.residual_rms_m << ',' << r.fix.iterations
      << ",\"" << join_prns(r.subset) << "\"\n";

  json res;
  res["error_to_target_m"] = r.error_to_target_m;
  res["spoof_distance_m"] = r.spoof_distance_m;
  res["subset"] = r.subset;
  res["gdop_at_target"] = r.dop_at_target.gdop;
  res["quantization_step_m"] = r.quantization_step_m;
  res["timing_feasible"] = r.timing.pass;
  res["timing_slack_s"] = r.timing.slack_s;
  write_summary(o.out_dir, s, "spoof", res);
  std::cout << "spoof error " << r.error_to_target_m << " m (subset "
            << join_prns(r.subset) << ")\n";
  return 0;
}

int sweep_cmd(const CommonOpts& o, const std::vector<double>& rates, int trials) {
  const harness::Scenario s = load_scenario(o);
  const auto rows = harness::sweep_sampling_rate(s, rates, trials);

  auto csv = open_out(o.out_dir, "sweep_fs.csv");
  csv << "rate_hz,granularity_m,median_error_m,max_error_m\n";
  json res = json::array();
  for (const auto& row : rows) {
    csv << row.rate_hz << ',' << row.granularity_m << ',' << row.median_error_m << ','
        << row.max_error_m << '\n';
    res.push_back({{"rate_hz", row.rate_hz},
                   {"granularity_m", row.granularity_m},
                   {"median_error_m", row.median_error_m},
                   {"max_error_m", row.max_error_m}});
  }
  write_summary(o.out_dir, s, "sweep_fs", res);
  return 0;
}

int gdop_cmd(const CommonOpts& o, const std::string& subsets_text, int trials) {
  const harness::Scenario s = load_scenario(o);
  const auto rows = harness::gdop_comparison(s, parse_subsets(subsets_text), trials);

  auto csv = open_out(o.out_dir, "gdop.csv");
  csv << "subset,gdop,median_error_m\n";
  json res = json::array();
  for (const auto& row : rows) {
    csv << '"' << join_prns(row.subset) << "\"," << row.gdop << ',' << row.median_error_m
        << '\n';
    res.push_back({{"subset", row.subset},
                   {"gdop", row.gdop},
                   {"median_error_m", row.median_error_m}});
  }
  write_summary(o.out_dir, s, "gdop", res);
  return 0;
}

int drift_cmd(const CommonOpts& o, const std::string& subset_text, double duration,
              double step, double recompute) {
  const harness::Scenario s = load_scenario(o);
  std::vector<int> subset;
  if (!subset_text.empty()) {
    subset = parse_subsets(subset_text).at(0);
  } else {
    subset = attacker::select_subset(s.attacker_location, s.target_location,
                                     harness::scenario_constellation(s), s.epoch_s,
                                     s.subset_size, s.mask_deg)
                 .prns;
  }
  const auto series = harness::drift_run(s, subset, duration, step, recompute);

  auto csv = open_out(o.out_dir, "drift.csv");
  csv << "t_s,error_m\n";
  for (const auto& p : series) csv << p.t_s << ',' << p.error_m << '\n';

  json res;
  res["subset"] = subset;
  res["final_error_m"] = series.back().error_m;
  res["samples"] = series.size();
  write_summary(o.out_dir, s, "drift", res);
  return 0;
}

int coverage_cmd(const CommonOpts& o, const harness::BoundingBox& box, double side) {
  const harness::Scenario s = load_scenario(o);
  const auto map = harness::coverage_grid(s.attacker_location, box, side,
                                          harness::scenario_constellation(s), s.epoch_s,
                                          s.mask_deg);
  auto csv = open_out(o.out_dir, "coverage.csv");
  csv << "lat_deg,lon_deg,common_count,spoofable\n";
  int spoofable = 0;
  for (const auto& cell : map.cells) {
    csv << cell.center.latitude_deg << ',' << cell.center.longitude_deg << ','
        << cell.common_count << ',' << (cell.spoofable ? 1 : 0) << '\n';
    spoofable += cell.spoofable;
  }
  json res;
  res["grid"] = map.grid_descriptor;
  res["cells"] = map.cells.size();
  res["spoofable_cells"] = spoofable;
  write_summary(o.out_dir, s, "coverage", res);
  return 0;
}

int world_cmd(const CommonOpts& o, const std::string& receivers_text, double step) {
  const harness::Scenario s = load_scenario(o);
  std::vector<geo::GeodeticPosition> receivers{s.attacker_location};
  if (!receivers_text.empty()) {
    receivers.clear();
    std::istringstream groups(receivers_text);
    std::string group;
    while (std::getline(groups, group, ';')) {
      double lat, lon;
      char c;
      std::istringstream ss(group);
      if (!(ss >> lat >> c >> lon)) throw ScenarioError("bad receiver: " + group);
      receivers.push_back({lat, lon, 0.0});
    }
  }
  const auto world = harness::world_coverage(
      receivers, harness::scenario_constellation(s), s.epoch_s, step, s.mask_deg);

  auto csv = open_out(o.out_dir, "world.csv");
  csv << "lat_deg,lon_deg,max_common_count\n";
  for (const auto& p : world.points) {
    csv << p.lat_deg << ',' << p.lon_deg << ',' << p.max_common << '\n';
  }
  json res;
  res["worst_case_common_count"] = world.worst_case.max_common;
  res["worst_case_lat_deg"] = world.worst_case.lat_deg;
  res["worst_case_lon_deg"] = world.worst_case.lon_deg;
  res["spoofable_everywhere"] = world.spoofable_everywhere;
  write_summary(o.out_dir, s, "world", res);
  std::cout << "worst-case common count " << world.worst_case.max_common
            << (world.spoofable_everywhere ? " (spoofable everywhere)\n" : "\n");
  return 0;
}

int traj_cmd(const CommonOpts& o, const std::string& waypoints_text) {
  const harness::Scenario s = load_scenario(o);
  const auto points = harness::trajectory_run(s, parse_waypoints(waypoints_text));

  auto csv = open_out(o.out_dir, "traj.csv");
  csv << "t_s,waypoint_lat_deg,waypoint_lon_deg,error_m\n";
  json res = json::array();
  for (const auto& p : points) {
    csv << p.t_s << ',' << p.waypoint.latitude_deg << ',' << p.waypoint.longitude_deg
        << ',' << p.report.error_to_target_m << '\n';
    res.push_back({{"t_s", p.t_s}, {"error_m", p.report.error_to_target_m}});
  }
  write_summary(o.out_dir, s, "traj", res);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Delay-relay GNSS spoofing simulator"};
  app.require_subcommand(1);

  CommonOpts opts;
  std::vector<double> rates{4e6, 10e6};
  int trials = 50;
  std::string subsets, subset, receivers, waypoints;
  double duration = 300.0, step = 10.0, recompute = 0.0;
  harness::BoundingBox box{5.0, 75.0, -160.0, -40.0};
  double cell_side = 1100e3, grid_step = 10.0;

  auto* spoof = app.add_subcommand("spoof", "Single spoof run with full pipeline");
  add_common(spoof, opts);

  auto* sweep = app.add_subcommand("sweep-fs", "Spoof accuracy vs sampling rate");
  add_common(sweep, opts);
  sweep->add_option("--rates", rates, "Sampling rates to sweep, Hz");
  sweep->add_option("--trials", trials, "Seeded trials per rate");

  auto* gdop = app.add_subcommand("gdop", "Spoof accuracy vs subset GDOP");
  add_common(gdop, opts);
  gdop->add_option("--subsets", subsets, "PRN subsets, e.g. 1,2,3,4;5,6,7,8")->required();
  gdop->add_option("--trials", trials, "Seeded trials per subset");

  auto* drift = app.add_subcommand("drift", "Victim drift under a frozen delay plan");
  add_common(drift, opts);
  drift->add_option("--subset", subset, "PRN subset, e.g. 1,2,3,4 (default: best GDOP)");
  drift->add_option("--duration", duration, "Run length, s");
  drift->add_option("--step", step, "Sample step, s");
  drift->add_option("--recompute", recompute, "Plan refresh interval, s (0 = never)");

  auto* coverage = app.add_subcommand("coverage", "Hexagonal common-visibility grid");
  add_common(coverage, opts);
  coverage->add_option("--lat-min", box.lat_min_deg, "Region south edge, deg");
  coverage->add_option("--lat-max", box.lat_max_deg, "Region north edge, deg");
  coverage->add_option("--lon-min", box.lon_min_deg, "Region west edge, deg");
  coverage->add_option("--lon-max", box.lon_max_deg, "Region east edge, deg");
  coverage->add_option("--cell-side", cell_side, "Hexagon side, m");

  auto* world = app.add_subcommand("world", "Global max-common-count coverage");
  add_common(world, opts);
  world->add_option("--receivers", receivers, "Receiver list, e.g. 0,-90;0,90");
  world->add_option("--grid-step", grid_step, "Grid step, deg");

  auto* traj = app.add_subcommand("traj", "Spoofed trajectory playback");
  add_common(traj, opts);
  traj->add_option("--waypoints", waypoints, "t,lat,lon;t,lat,lon;...")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (spoof->parsed()) return run_spoof_cmd(opts);
    if (sweep->parsed()) return sweep_cmd(opts, rates, trials);
    if (gdop->parsed()) return gdop_cmd(opts, subsets, trials);
    if (drift->parsed()) return drift_cmd(opts, subset, duration, step, recompute);
    if (coverage->parsed()) return coverage_cmd(opts, box, cell_side);
    if (world->parsed()) return world_cmd(opts, receivers, grid_step);
    if (traj->parsed()) return traj_cmd(opts, waypoints);
  } catch (const ScenarioError& e) {
    std::cerr << "scenario error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "pipeline error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
