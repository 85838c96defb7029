#include "springbal/kinematics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "springbal/errors.hpp"

namespace springbal {

namespace {

// Relative slack on the reach annulus so that exactly stretched legs stay reachable.
constexpr double kReachSlack = 1e-12;

double diagonal_condition(const Mat3& m) {
  const Vec3 d = m.diagonal().cwiseAbs();
  const double lo = d.minCoeff();
  if (lo == 0.0) return std::numeric_limits<double>::infinity();
  return d.maxCoeff() / lo;
}

}  // namespace

const char* to_string(Layout layout) { return layout == Layout::kWide ? "WL" : "NL"; }

double normalize_angle(double angle) {
  double a = std::remainder(angle, 2.0 * std::numbers::pi);
  if (a <= -std::numbers::pi) a += 2.0 * std::numbers::pi;
  return a;
}

void RobotGeometry::validate() const {
  if (!(proximal_length > 0.0) || !(distal_length > 0.0)) {
    throw ConfigError(0, "link lengths must be positive");
  }
  for (int i = 0; i < 3; ++i) {
    for (int j = i + 1; j < 3; ++j) {
      if ((base[i] - base[j]).norm() == 0.0) throw ConfigError(0, "base joints must be distinct");
      if ((platform[i] - platform[j]).norm() == 0.0) {
        throw ConfigError(0, "platform anchors must be distinct");
      }
    }
  }
}

RobotGeometry RobotGeometry::wide_default() {
  RobotGeometry g;
  constexpr double kDeg = std::numbers::pi / 180.0;
  const std::array<double, 3> angles{90.0 * kDeg, 210.0 * kDeg, 330.0 * kDeg};
  for (int i = 0; i < 3; ++i) {
    g.base[i] = 0.25 * unit(angles[i]);
    g.platform[i] = 0.05 * unit(angles[i]);
  }
  g.proximal_length = 0.15;
  g.distal_length = 0.15;
  g.layout = Layout::kWide;
  return g;
}

RobotGeometry RobotGeometry::narrow_default() {
  RobotGeometry g;
  constexpr double kDeg = std::numbers::pi / 180.0;
  const std::array<double, 3> angles{90.0 * kDeg, 210.0 * kDeg, 330.0 * kDeg};
  // Top base joint drives the top anchor so the legs do not cross.
  const std::array<double, 3> heights{0.12, 0.0, -0.12};
  for (int i = 0; i < 3; ++i) {
    g.base[i] = Vec2(-0.25, heights[i]);
    g.platform[i] = 0.05 * unit(angles[i]);
  }
  g.proximal_length = 0.2;
  g.distal_length = 0.2;
  g.layout = Layout::kNarrow;
  g.branch = ElbowBranch::kNegative;  // elbows above the legs, which reach to the right
  return g;
}

Eigen::Matrix2d Pose::rotation() const {
  const double c = std::cos(gamma);
  const double s = std::sin(gamma);
  Eigen::Matrix2d r;
  r << c, -s, s, c;
  return r;
}

Vec2 anchor_world(const Pose& pose, const RobotGeometry& geom, int leg) {
  return pose.t + pose.rotation() * geom.platform[leg];
}

JointConfig inverse_kinematics(const Pose& pose, const RobotGeometry& geom, ElbowBranch branch) {
  const double l1 = geom.proximal_length;
  const double l2 = geom.distal_length;
  const Eigen::Matrix2d rot = pose.rotation();

  JointConfig out;
  out.branch = branch;
  for (int i = 0; i < 3; ++i) {
    const Vec2 anchor = pose.t + rot * geom.platform[i];
    const Vec2 d = anchor - geom.base[i];
    const double rho = d.norm();
    const double outer = l1 + l2;
    const double inner = std::abs(l1 - l2);
    if (!std::isfinite(rho) || rho > outer * (1.0 + kReachSlack) ||
        rho < inner * (1.0 - kReachSlack) || rho == 0.0) {
      throw UnreachableError(i, rho);
    }
    const double cos_beta = std::clamp((l1 * l1 + rho * rho - l2 * l2) / (2.0 * l1 * rho), -1.0, 1.0);
    const double beta = std::acos(cos_beta);
    const double psi = std::atan2(d.y(), d.x());
    // Rotating s_hat clockwise from d puts the elbow on the side where s x n > 0.
    const double q = branch == ElbowBranch::kPositive ? psi - beta : psi + beta;
    const Vec2 s = unit(q);
    const Vec2 n = (d - l1 * s) / l2;
    out.q[i] = normalize_angle(q);
    out.phi[i] = std::atan2(n.y(), n.x());
    out.s_hat[i] = s;
    out.n_hat[i] = unit(out.phi[i]);
  }
  return out;
}

bool is_reachable(const Pose& pose, const RobotGeometry& geom) noexcept {
  const double outer = geom.proximal_length + geom.distal_length;
  const double inner = std::abs(geom.proximal_length - geom.distal_length);
  const Eigen::Matrix2d rot = pose.rotation();
  for (int i = 0; i < 3; ++i) {
    const double rho = (pose.t + rot * geom.platform[i] - geom.base[i]).norm();
    if (!std::isfinite(rho) || rho > outer * (1.0 + kReachSlack) ||
        rho < inner * (1.0 - kReachSlack) || rho == 0.0) {
      return false;
    }
  }
  return true;
}

JacobianBundle jacobians(const Pose& pose, const JointConfig& joints, const RobotGeometry& geom,
                         double singular_threshold) {
  const Eigen::Matrix2d rot = pose.rotation();
  JacobianBundle jb;
  jb.B.setZero();
  jb.D.setZero();
  for (int i = 0; i < 3; ++i) {
    const Vec2 r = rot * geom.platform[i];
    const Vec2& s = joints.s_hat[i];
    const Vec2& n = joints.n_hat[i];
    jb.A.row(i) << n.x(), n.y(), cross2(r, n);
    jb.C.row(i) << s.x(), s.y(), cross2(r, s);
    jb.B(i, i) = geom.proximal_length * n.dot(perp(s));
    jb.D(i, i) = geom.distal_length * s.dot(perp(n));
  }

  const double cond_b = diagonal_condition(jb.B);
  if (!(cond_b <= singular_threshold)) throw SingularError("B", cond_b);
  const double cond_d = diagonal_condition(jb.D);
  if (!(cond_d <= singular_threshold)) throw SingularError("D", cond_d);

  const Vec3 b_inv = jb.B.diagonal().cwiseInverse();
  const Vec3 d_inv = jb.D.diagonal().cwiseInverse();
  jb.J_qx = b_inv.asDiagonal() * jb.A;
  jb.J_phix = d_inv.asDiagonal() * jb.C;

  const Eigen::JacobiSVD<Mat3> svd(jb.J_qx);
  const Vec3 sv = svd.singularValues();
  const double cond_j = sv(2) == 0.0 ? std::numeric_limits<double>::infinity() : sv(0) / sv(2);
  if (!(cond_j <= singular_threshold)) throw SingularError("J_qx", cond_j);

  jb.J_xq = jb.A.partialPivLu().solve(jb.B);
  jb.J_phiq = jb.J_phix * jb.J_xq;
  return jb;
}

}  // namespace springbal
