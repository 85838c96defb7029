#pragma once

#include <array>

#include <Eigen/Dense>

namespace springbal {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

enum class Layout { kWide, kNarrow };
// Sign of cross2(s_hat, n_hat), i.e. which side of the base-anchor line the elbow sits on.
enum class ElbowBranch { kPositive, kNegative };

const char* to_string(Layout layout);

inline double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

// z-hat cross v: v rotated by +90 degrees.
inline Vec2 perp(const Vec2& v) { return {-v.y(), v.x()}; }

inline Vec2 unit(double angle) { return {std::cos(angle), std::sin(angle)}; }

// Wraps to (-pi, pi].
double normalize_angle(double angle);

// Planar 3RRR geometry. Leg i runs base[i] -> elbow -> platform anchor i.
struct RobotGeometry {
  std::array<Vec2, 3> base;      // m, world frame
  std::array<Vec2, 3> platform;  // m, platform frame
  double proximal_length = 0.15;
  double distal_length = 0.15;
  Layout layout = Layout::kWide;
  ElbowBranch branch = ElbowBranch::kPositive;  // shared by all legs

  // Throws ConfigError when an invariant does not hold.
  void validate() const;

  // Base joints on a 0.25 m circle at 90/210/330 deg.
  static RobotGeometry wide_default();
  // Base joints stacked on the line x = -0.25 m.
  static RobotGeometry narrow_default();
};

struct Pose {
  Vec2 t = Vec2::Zero();
  double gamma = 0.0;  // (-pi, pi]

  Pose() = default;
  Pose(const Vec2& position, double rotation) : t(position), gamma(normalize_angle(rotation)) {}
  Pose(double x, double y, double rotation) : Pose(Vec2(x, y), rotation) {}

  Eigen::Matrix2d rotation() const;
  Vec3 as_vector() const { return {t.x(), t.y(), gamma}; }
};

// Anchor point of leg i expressed in the world frame.
Vec2 anchor_world(const Pose& pose, const RobotGeometry& geom, int leg);

struct JointConfig {
  std::array<double, 3> q{};    // active base joints
  std::array<double, 3> phi{};  // absolute forearm angles
  std::array<Vec2, 3> s_hat;    // along proximal links
  std::array<Vec2, 3> n_hat;    // elbow -> platform anchor
  ElbowBranch branch = ElbowBranch::kPositive;

  Vec3 q_vector() const { return {q[0], q[1], q[2]}; }
  Vec3 phi_vector() const { return {phi[0], phi[1], phi[2]}; }
  Vec2 elbow(const RobotGeometry& geom, int leg) const {
    return geom.base[leg] + geom.proximal_length * s_hat[leg];
  }
};

// Closed-form per-leg inverse kinematics. The branch fixes the sign of cross2(s_hat, n_hat).
// Throws UnreachableError naming the first leg whose anchor is out of reach.
JointConfig inverse_kinematics(const Pose& pose, const RobotGeometry& geom, ElbowBranch branch);
inline JointConfig inverse_kinematics(const Pose& pose, const RobotGeometry& geom) {
  return inverse_kinematics(pose, geom, geom.branch);
}

// Both branches share the same reach annulus, so reachability ignores the branch.
bool is_reachable(const Pose& pose, const RobotGeometry& geom) noexcept;

// A xdot = B qdot and C xdot = D phidot, with xdot = [tx, ty, gamma]'.
struct JacobianBundle {
  Mat3 A, B, C, D;
  Mat3 J_qx;    // qdot = J_qx xdot
  Mat3 J_phix;  // phidot = J_phix xdot
  Mat3 J_phiq;  // phidot = J_phiq qdot
  Mat3 J_xq;    // inverse of J_qx
};

inline constexpr double kDefaultSingularThreshold = 1e8;

// Throws SingularError when B, D or J_qx has a condition estimate above the threshold.
JacobianBundle jacobians(const Pose& pose, const JointConfig& joints, const RobotGeometry& geom,
                         double singular_threshold = kDefaultSingularThreshold);

}  // namespace springbal
