#include "springbal/statics.hpp"

#include <cmath>

#include "springbal/errors.hpp"

namespace springbal {

const char* to_string(BalancingMode mode) {
  switch (mode) {
    case BalancingMode::kMode0: return "mode0";
    case BalancingMode::kMode1: return "mode1";
    case BalancingMode::kMode2: return "mode2";
    case BalancingMode::kMode3: return "mode3";
  }
  return "unknown";
}

int parameter_count(BalancingMode mode) {
  switch (mode) {
    case BalancingMode::kMode0: return 0;
    case BalancingMode::kMode1: return 6;
    case BalancingMode::kMode2: return 6;
    case BalancingMode::kMode3: return 12;
  }
  return 0;
}

void MassModel::validate() const {
  for (const auto& leg : link_mass) {
    for (double m : leg) {
      if (!(m >= 0.0)) throw ConfigError(0, "link masses must be non-negative");
    }
  }
  if (!(platform_mass >= 0.0)) throw ConfigError(0, "platform mass must be non-negative");
  for (double c : com_fraction) {
    if (!(c >= 0.0 && c <= 1.0)) throw ConfigError(0, "com_fraction must lie in [0, 1]");
  }
  if (std::abs(g_hat.norm() - 1.0) > 1e-12) throw ConfigError(0, "g_hat must be a unit vector");
  if (!(gravity >= 0.0)) throw ConfigError(0, "gravity magnitude must be non-negative");
}

MassModel MassModel::defaults() {
  MassModel m;
  for (auto& leg : m.link_mass) leg = {0.10, 0.08};
  m.platform_mass = 0.20;
  return m;
}

MassModel MassModel::massless() {
  MassModel m;
  for (auto& leg : m.link_mass) leg = {0.0, 0.0};
  m.platform_mass = 0.0;
  return m;
}

BalancingMode SpringSet::mode() const {
  const bool active = (k_q.array() != 0.0).any();
  const bool passive = (k_phi.array() != 0.0).any();
  if (active && passive) return BalancingMode::kMode3;
  if (passive) return BalancingMode::kMode2;
  if (active) return BalancingMode::kMode1;
  return BalancingMode::kMode0;
}

double gravity_potential(const Pose& pose, const JointConfig& joints, const RobotGeometry& geom,
                         const MassModel& mass) {
  const Vec2 up = -mass.g_hat;
  const double l1 = geom.proximal_length;
  const double l2 = geom.distal_length;
  double v = 0.0;
  for (int i = 0; i < 3; ++i) {
    const Vec2 elbow = geom.base[i] + l1 * joints.s_hat[i];
    const Vec2 com1 = geom.base[i] + mass.com_fraction[0] * l1 * joints.s_hat[i];
    const Vec2 com2 = elbow + mass.com_fraction[1] * l2 * joints.n_hat[i];
    v += mass.link_mass[i][0] * up.dot(com1) + mass.link_mass[i][1] * up.dot(com2);
  }
  v += mass.platform_mass * up.dot(pose.t);
  return mass.gravity * v;
}

PotentialPartials gravity_partials(const JointConfig& joints, const RobotGeometry& geom,
                                   const MassModel& mass) {
  const Vec2 up = -mass.g_hat;
  const double l1 = geom.proximal_length;
  const double l2 = geom.distal_length;
  PotentialPartials p;
  for (int i = 0; i < 3; ++i) {
    // The distal centre of mass rides on the elbow, so it also moves with q.
    const double arm_q = mass.link_mass[i][0] * mass.com_fraction[0] * l1 + mass.link_mass[i][1] * l1;
    p.dq(i) = mass.gravity * arm_q * up.dot(perp(joints.s_hat[i]));
    p.dphi(i) = mass.gravity * mass.link_mass[i][1] * mass.com_fraction[1] * l2 *
                up.dot(perp(joints.n_hat[i]));
  }
  p.dx << mass.gravity * mass.platform_mass * up.x(), mass.gravity * mass.platform_mass * up.y(), 0.0;
  return p;
}

Vec3 gravity_torque(const Pose& pose, const JointConfig& joints, const JacobianBundle& jac,
                    const RobotGeometry& geom, const MassModel& mass) {
  (void)pose;
  const PotentialPartials p = gravity_partials(joints, geom, mass);
  return p.dq + jac.J_phiq.transpose() * p.dphi + jac.J_xq.transpose() * p.dx;
}

Vec3 active_deflection(const JointConfig& joints, const SpringSet& springs) {
  Vec3 d;
  for (int i = 0; i < 3; ++i) d(i) = normalize_angle(joints.q[i] - springs.q_free(i));
  return d;
}

Vec3 passive_deflection(const JointConfig& joints, const SpringSet& springs) {
  Vec3 d;
  for (int i = 0; i < 3; ++i) d(i) = normalize_angle(joints.phi[i] - springs.phi_free(i));
  return d;
}

double elastic_energy(const JointConfig& joints, const SpringSet& springs) {
  const Vec3 dq = active_deflection(joints, springs);
  const Vec3 dphi = passive_deflection(joints, springs);
  return 0.5 * (dq.dot(springs.k_q.cwiseProduct(dq)) + dphi.dot(springs.k_phi.cwiseProduct(dphi)));
}

Vec3 elastic_torque(const JointConfig& joints, const SpringSet& springs, const JacobianBundle& jac) {
  const Vec3 dq = active_deflection(joints, springs);
  const Vec3 dphi = passive_deflection(joints, springs);
  return springs.k_q.cwiseProduct(dq) + jac.J_phiq.transpose() * springs.k_phi.cwiseProduct(dphi);
}

Vec3 actuator_torque(const Pose& pose, const JointConfig& joints, const JacobianBundle& jac,
                     const RobotGeometry& geom, const MassModel& mass, const SpringSet& springs,
                     const Wrench& wrench) {
  return gravity_torque(pose, joints, jac, geom, mass) + elastic_torque(joints, springs, jac) +
         jac.J_xq.transpose() * wrench.as_vector();
}

}  // namespace springbal
