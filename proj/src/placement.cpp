#include "springbal/placement.hpp"

#include <cmath>
#include <limits>

#include "springbal/errors.hpp"
#include "springbal/parallel.hpp"

namespace springbal {

namespace {

double mean_norm(const TorqueTable& t) {
  double sum = 0.0;
  for (const Vec3& row : t) sum += row.norm();
  return sum / static_cast<double>(t.size());
}

}  // namespace

std::vector<double> default_candidate_orientations() {
  std::vector<double> out;
  for (int d = -30; d <= 30; d += 10) out.push_back(d * kDegree);
  return out;
}

SolverOptions placement_solver_options() {
  SolverOptions o;
  o.starts = 2;
  o.max_iterations = 200;
  return o;
}

PlacementCandidate evaluate_placement(const Vec2& centre, double gamma, const RobotGeometry& geom,
                                      const MassModel& mass, const TaskSpec& task,
                                      const SolverOptions& solver, double sign_margin) {
  PlacementCandidate c;
  c.centre = centre;
  c.gamma = gamma;
  try {
    const PathSamples samples = sample_path(spiral_path(centre, gamma, task), geom, mass);
    const OptimizationResult r = optimize_springs(samples, BalancingMode::kMode1, SpringSet{}, solver);
    c.mode0_mean_torque = mean_norm(samples.tau_g);
    c.mode1_mean_torque = mean_norm(r.torques);
    c.reduction = c.mode0_mean_torque > 0.0 ? 1.0 - c.mode1_mean_torque / c.mode0_mean_torque : 0.0;
    c.sign_ratio = 1.0;
    for (int i = 0; i < 3; ++i) {
      const double s0 = samples.tau_g.front()(i);
      double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
      for (const Vec3& t : samples.tau_g) {
        const double v = t(i) * (s0 > 0.0 ? 1.0 : -1.0);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      c.sign_ratio = std::min(c.sign_ratio, lo >= kTorqueGuard ? lo / hi : 0.0);
    }
    c.sign_definite = c.sign_ratio > 0.0 && c.sign_ratio >= sign_margin;
    c.ok = true;
  } catch (const Error& e) {
    c.message = e.what();
  }
  return c;
}

PlacementResult optimal_task_location(WorkspaceMap& map, const RobotGeometry& geom,
                                      const MassModel& mass, const TaskSpec& task,
                                      const std::vector<double>& orientations,
                                      const PlacementOptions& options) {
  if (map.grid.empty() || orientations.empty()) {
    throw Error(ErrorCode::kEmptyWorkspace, "no placement candidates");
  }
  const std::size_t n_gamma = orientations.size();
  PlacementResult out;
  out.candidates.resize(map.grid.size() * n_gamma);
  parallel_for(out.candidates.size(), [&](std::size_t k) {
    out.candidates[k] = evaluate_placement(map.grid[k / n_gamma].centre, orientations[k % n_gamma],
                                           geom, mass, task, options.solver, options.sign_margin);
  });

  bool any = false;
  for (std::size_t k = 0; k < out.candidates.size(); ++k) {
    const PlacementCandidate& c = out.candidates[k];
    if (!c.ok) {
      ++out.skipped;
      continue;
    }
    out.sign_definite_only = out.sign_definite_only || (options.prefer_sign_definite && c.sign_definite);
    if (!any) {
      out.max_torque = out.min_torque = k;
      any = true;
      continue;
    }
    if (c.mode0_mean_torque > out.candidates[out.max_torque].mode0_mean_torque) out.max_torque = k;
    if (c.mode0_mean_torque < out.candidates[out.min_torque].mode0_mean_torque) out.min_torque = k;
  }
  if (!any) throw Error(ErrorCode::kEmptyWorkspace, "every placement candidate failed");

  bool have_best = false;
  for (std::size_t k = 0; k < out.candidates.size(); ++k) {
    const PlacementCandidate& c = out.candidates[k];
    if (!c.ok || (out.sign_definite_only && !c.sign_definite)) continue;
    if (!have_best || c.reduction > out.candidates[out.best].reduction) out.best = k;
    have_best = true;
  }

  for (std::size_t p = 0; p < map.grid.size(); ++p) {
    GridPoint& g = map.grid[p];
    for (std::size_t o = 0; o < n_gamma; ++o) {
      const PlacementCandidate& c = out.candidates[p * n_gamma + o];
      if (!c.ok) continue;
      if (std::isnan(g.best_reduction) || c.reduction > g.best_reduction) {
        g.best_reduction = c.reduction;
        g.best_gamma = c.gamma;
        g.mode0_mean_torque = c.mode0_mean_torque;
      }
    }
  }
  out.centre = out.candidates[out.best].centre;
  out.gamma = out.candidates[out.best].gamma;
  return out;
}

}  // namespace springbal
