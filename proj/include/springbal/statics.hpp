#pragma once

#include <array>

#include "springbal/kinematics.hpp"

namespace springbal {

// Where torsional springs are fitted: none, active joints, elbows, or both.
enum class BalancingMode { kMode0 = 0, kMode1 = 1, kMode2 = 2, kMode3 = 3 };

const char* to_string(BalancingMode mode);

// Number of optimisable spring parameters (stiffness + free angle per sprung joint).
int parameter_count(BalancingMode mode);

struct MassModel {
  // link_mass[leg][0] proximal, link_mass[leg][1] distal (kg)
  std::array<std::array<double, 2>, 3> link_mass{};
  // centre of mass along each link, measured from its proximal joint, as a fraction of length
  std::array<double, 2> com_fraction{0.5, 0.5};
  double platform_mass = 0.0;
  double gravity = 9.81;
  Vec2 g_hat{0.0, -1.0};

  void validate() const;

  static MassModel defaults();
  static MassModel massless();
};

// Diagonal torsional springs at the active joints (q) and the elbows (phi).
struct SpringSet {
  Vec3 k_q = Vec3::Zero();       // N m / rad
  Vec3 k_phi = Vec3::Zero();     // N m / rad
  Vec3 q_free = Vec3::Zero();    // rad
  Vec3 phi_free = Vec3::Zero();  // rad

  // Smallest mode whose sprung joints cover every non-zero stiffness.
  BalancingMode mode() const;
};

struct Wrench {
  Vec2 force = Vec2::Zero();  // N
  double moment = 0.0;        // N m about z

  Vec3 as_vector() const { return {force.x(), force.y(), moment}; }
};

// Potential of the links and platform; heights are measured along -g_hat.
double gravity_potential(const Pose& pose, const JointConfig& joints, const RobotGeometry& geom,
                         const MassModel& mass);

// Partial derivatives of the gravity potential treating q, phi and x as independent.
struct PotentialPartials {
  Vec3 dq = Vec3::Zero();
  Vec3 dphi = Vec3::Zero();
  Vec3 dx = Vec3::Zero();
};

PotentialPartials gravity_partials(const JointConfig& joints, const RobotGeometry& geom,
                                   const MassModel& mass);

// dV_g/dq along the loop-closure manifold.
Vec3 gravity_torque(const Pose& pose, const JointConfig& joints, const JacobianBundle& jac,
                    const RobotGeometry& geom, const MassModel& mass);

// Spring deflections wrapped to (-pi, pi].
Vec3 active_deflection(const JointConfig& joints, const SpringSet& springs);
Vec3 passive_deflection(const JointConfig& joints, const SpringSet& springs);

double elastic_energy(const JointConfig& joints, const SpringSet& springs);

// dV_e/dq = K_q dq + J_phiq' K_phi dphi
Vec3 elastic_torque(const JointConfig& joints, const SpringSet& springs, const JacobianBundle& jac);

// Actuator torque that holds the robot in equilibrium against gravity, springs and an
// external wrench acting on the platform (work of the environment on the robot).
Vec3 actuator_torque(const Pose& pose, const JointConfig& joints, const JacobianBundle& jac,
                     const RobotGeometry& geom, const MassModel& mass, const SpringSet& springs,
                     const Wrench& wrench = {});

}  // namespace springbal
