#pragma once

#include <string>
#include <vector>

#include "springbal/spring_opt.hpp"
#include "springbal/workspace.hpp"

namespace springbal {

struct PlacementCandidate {
  Vec2 centre = Vec2::Zero();
  double gamma = 0.0;
  double mode0_mean_torque = 0.0;  // mean |tau| over the spiral
  double mode1_mean_torque = 0.0;
  double reduction = 0.0;          // 1 - mode1 / mode0
  // Smallest over legs of min|tau0| / max|tau0| along the spiral; 0 if a leg changes sign.
  double sign_ratio = 0.0;
  bool sign_definite = false;  // sign_ratio at or above the placement's margin
  bool ok = false;
  std::string message;             // why the candidate was skipped
};

struct PlacementResult {
  Vec2 centre = Vec2::Zero();
  double gamma = 0.0;
  std::size_t best = 0;
  std::size_t max_torque = 0;  // candidate needing the largest unbalanced torque
  std::size_t min_torque = 0;
  std::size_t skipped = 0;
  bool sign_definite_only = false;  // best was chosen among sign-definite candidates
  std::vector<PlacementCandidate> candidates;  // grid-major, orientation-minor
};

// {-30, -20, ..., 30} deg
std::vector<double> default_candidate_orientations();

// Fewer starts than a final optimisation: the linear seed is usually already optimal.
SolverOptions placement_solver_options();

struct PlacementOptions {
  SolverOptions solver = placement_solver_options();
  // Torque ratios blow up where the unbalanced torque changes sign, and a cam can only
  // supply one-signed torque, so such placements are used only if nothing else is left.
  bool prefer_sign_definite = true;
  double sign_margin = 0.1;
};

// Evaluates Mode 1 against Mode 0 on the spiral at every grid centre and orientation and
// returns the placement with the largest mean torque reduction (ties: lowest index).
// Fills the grid's torque records in `map`. Throws Error(kEmptyWorkspace) if the grid is
// empty or every candidate fails.
PlacementResult optimal_task_location(WorkspaceMap& map, const RobotGeometry& geom,
                                      const MassModel& mass, const TaskSpec& task,
                                      const std::vector<double>& orientations,
                                      const PlacementOptions& options = {});

// Mean torque norm of Mode 0 and optimised Mode 1 on the spiral about one placement.
PlacementCandidate evaluate_placement(const Vec2& centre, double gamma, const RobotGeometry& geom,
                                      const MassModel& mass, const TaskSpec& task,
                                      const SolverOptions& solver, double sign_margin = 0.0);

}  // namespace springbal
