#pragma once

#include <cstdint>
#include <vector>

#include "springbal/statics.hpp"

namespace springbal {

using TorqueTable = std::vector<Vec3>;  // one row per path pose

// Everything along a path that does not depend on the springs.
struct PathSamples {
  std::vector<Vec3> q, phi;
  std::vector<Mat3> J_phiq_t;  // transposed
  std::vector<Vec3> tau_g;

  std::size_t size() const { return q.size(); }
};

// Throws PathError carrying the index of the first pose that fails IK or the Jacobian check.
PathSamples sample_path(const std::vector<Pose>& path, const RobotGeometry& geom,
                        const MassModel& mass);

TorqueTable torque_samples(const PathSamples& samples, const SpringSet& springs);
TorqueTable torque_samples(const std::vector<Pose>& path, const RobotGeometry& geom,
                           const MassModel& mass, const SpringSet& springs);

// M = 1/(2N) sum_j |tau_j|^2
double mean_cost(const PathSamples& samples, const SpringSet& springs);

struct SolverOptions {
  int starts = 8;
  int max_iterations = 500;
  double gradient_tolerance = 1e-10;
  double step_tolerance = 1e-12;
  double stiffness_max = 100.0;  // N m / rad
  double random_stiffness_max = 5.0;
  std::uint64_t seed = 0x5eed5;
  // Optional per-parameter mask in the mode's parameter order; false keeps the init value.
  std::vector<bool> mask;
};

struct OptimizationResult {
  BalancingMode mode = BalancingMode::kMode1;
  SpringSet springs;
  double initial_cost = 0.0;
  double final_cost = 0.0;
  std::vector<double> cost_history;  // accepted iterates of the winning start
  int iterations = 0;
  int best_start = -1;
  bool improved = false;  // false: solver could not reduce the cost and init is returned
  Vec3 e_tau = Vec3::Zero();
  TorqueTable torques;
};

// Parameter order: mode 1 [k_q(3), q_free(3)], mode 2 [k_phi(3), phi_free(3)],
// mode 3 [k_q, q_free, k_phi, phi_free].
std::vector<double> pack_parameters(BalancingMode mode, const SpringSet& springs);
SpringSet unpack_parameters(BalancingMode mode, const std::vector<double>& params);

// Throws Error(kBoundsViolation) for mode 0, an out-of-bounds init or a malformed mask.
OptimizationResult optimize_springs(const PathSamples& samples, BalancingMode mode,
                                    const SpringSet& init, const SolverOptions& options = {});
OptimizationResult optimize_springs(const std::vector<Pose>& path, const RobotGeometry& geom,
                                    const MassModel& mass, BalancingMode mode,
                                    const SpringSet& init, const SolverOptions& options = {});

inline constexpr double kTorqueGuard = 1e-9;  // N m

// Per-leg RMS of mode/baseline torque ratios, skipping baseline entries below the guard.
// Throws Error(kAllGuarded) when a leg has no entry above the guard.
Vec3 e_tau(const TorqueTable& mode_table, const TorqueTable& baseline_table,
           double guard = kTorqueGuard);

}  // namespace springbal
