#include "gnss/receiver.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "gnss/constants.hpp"
#include "gnss/errors.hpp"

namespace gnss::receiver {

using constants::kSpeedOfLight;

ArrivalTimeSet simulate_arrivals(const geo::EcefPosition& rx,
                                 const std::vector<constellation::SatelliteState>& sats,
                                 double clock_offset_s) {
  ArrivalTimeSet out;
  if (!sats.empty()) out.epoch_label_s = sats.front().time_s;
  // Arrivals are kept relative to the epoch label so that sub-ns differences
  // survive double precision regardless of the absolute epoch.
  for (const auto& s : sats) {
    out.arrival_s[s.prn] =
        geo::geometric_range(s.position, rx) / kSpeedOfLight + clock_offset_s;
  }
  return out;
}

PseudorangeSet form_pseudoranges(const ArrivalTimeSet& a, double reference_travel_time_s) {
  if (a.arrival_s.size() < 4) {
    throw TooFewSatellites("form_pseudoranges: need at least 4 arrivals");
  }
  const auto ref = std::min_element(
      a.arrival_s.begin(), a.arrival_s.end(),
      [](const auto& x, const auto& y) { return x.second < y.second; });

  PseudorangeSet out;
  out.reference_prn = ref->first;
  for (const auto& [prn, arrival] : a.arrival_s) {
    const double travel = reference_travel_time_s + (arrival - ref->second);
    out.pseudorange_m[prn] = kSpeedOfLight * travel;
  }
  return out;
}

PositionFix solve_fix(const PseudorangeSet& p,
                      const std::vector<constellation::SatelliteState>& sats,
                      std::optional<geo::EcefPosition> initial_guess) {
  if (p.pseudorange_m.size() < 4) {
    throw TooFewSatellites("solve_fix: need at least 4 pseudoranges");
  }

  // Pair pseudoranges with satellite states by PRN.
  std::vector<const constellation::SatelliteState*> used;
  std::vector<double> rho;
  for (const auto& [prn, range] : p.pseudorange_m) {
    const auto it = std::find_if(sats.begin(), sats.end(),
                                 [prn = prn](const auto& s) { return s.prn == prn; });
    if (it == sats.end()) {
      throw TooFewSatellites("solve_fix: no satellite state for PRN " + std::to_string(prn));
    }
    used.push_back(&*it);
    rho.push_back(range);
  }
  const int n = static_cast<int>(used.size());

  Eigen::Vector4d state = Eigen::Vector4d::Zero();  // x, y, z, bias (m)
  if (initial_guess) {
    state << initial_guess->x, initial_guess->y, initial_guess->z, 0.0;
  }

  auto residuals = [&](const Eigen::Vector4d& st, Eigen::VectorXd& r) {
    for (int i = 0; i < n; ++i) {
      const geo::EcefPosition d = used[i]->position - geo::EcefPosition{st(0), st(1), st(2)};
      r(i) = rho[i] - d.norm() - st(3);
    }
  };

  Eigen::VectorXd r(n);
  Eigen::MatrixXd jac(n, 4);
  residuals(state, r);
  double cost = r.squaredNorm();

  PositionFix fix;
  constexpr int kMaxIterations = 25;
  bool converged = false;
  for (int iter = 1; iter <= kMaxIterations; ++iter) {
    fix.iterations = iter;
    for (int i = 0; i < n; ++i) {
      const geo::EcefPosition d =
          used[i]->position - geo::EcefPosition{state(0), state(1), state(2)};
      const double rng = d.norm();
      // Design matrix of the predicted pseudorange |s_i - x| + b.
      jac(i, 0) = -d.x / rng;
      jac(i, 1) = -d.y / rng;
      jac(i, 2) = -d.z / rng;
      jac(i, 3) = 1.0;
    }
    const Eigen::Matrix4d nrm = jac.transpose() * jac;
    const Eigen::JacobiSVD<Eigen::Matrix4d> svd(nrm);
    const double cond =
        svd.singularValues()(0) / std::max(svd.singularValues()(3), 1e-300);
    if (!(cond < 1e12)) throw SingularGeometry("solve_fix: normal matrix singular");

    // Levenberg damping keeps ill-conditioned geometries from diverging; the
    // damping is raised until the step reduces the cost.
    const double scale = nrm.trace() / 4.0;
    double lambda = 0.0;
    Eigen::Vector4d step;
    Eigen::Vector4d next;
    Eigen::VectorXd r_next(n);
    double next_cost = 0.0;
    for (int attempt = 0; attempt < 24; ++attempt) {
      const Eigen::Matrix4d damped =
          nrm + lambda * scale * Eigen::Matrix4d::Identity();
      step = damped.ldlt().solve(jac.transpose() * r);
      next = state + step;
      residuals(next, r_next);
      next_cost = r_next.squaredNorm();
      if (next_cost <= cost) break;
      lambda = lambda == 0.0 ? 1e-9 : lambda * 10.0;
    }
    state = next;
    r = r_next;
    cost = next_cost;
    if (step.head<3>().norm() < 1e-4) {
      converged = true;
      break;
    }
  }
  if (!converged) throw NoConvergence("solve_fix: Gauss-Newton did not converge");

  fix.position = {state(0), state(1), state(2)};
  fix.clock_bias_m = state(3);
  fix.residual_rms_m = std::sqrt(cost / n);

  std::vector<constellation::SatelliteState> used_states;
  used_states.reserve(used.size());
  for (const auto* s : used) used_states.push_back(*s);
  fix.dop = constellation::dop(used_states, fix.position);
  return fix;
}

}  // namespace gnss::receiver
