#pragma once

#include <array>
#include <functional>
#include <limits>
#include <vector>

#include <boost/math/interpolators/cubic_hermite.hpp>

#include "springbal/spring_opt.hpp"

namespace springbal {

// Cam at the origin, idler centre at (a, 0). Lengths in m, k in N/m.
struct WireCamGeometry {
  double a = 0.25;
  double r = 0.04;
  double k = 0.0;  // 0: no spring for forward evaluation, chosen automatically by synthesis
  double u_t = 0.05;
  double q0 = 0.0;  // cam mounting angle on the joint

  Vec2 idler() const { return {a, 0.0}; }
  void validate() const;
};

// Wire cases by contact half-plane and idler side:
//   1: lower half, same side    2: upper half, same side
//   3: lower half, crossed      4: upper half, crossed
// kAuto picks 1 or 2 from the sign of the required torque.
enum class WireCase { kAuto = 0, k1 = 1, k2 = 2, k3 = 3, k4 = 4 };

// Polar cam outline g(angle) in the cam frame, cubic Hermite between samples.
class CamProfile {
 public:
  CamProfile(std::vector<double> angles, std::vector<double> radii, std::vector<double> slopes,
             bool periodic = false);
  static CamProfile circle(double radius, int samples = 721);

  double radius(double angle) const;
  double slope(double angle) const;
  bool periodic() const { return periodic_; }
  double front() const { return angles_.front(); }
  double back() const { return angles_.back(); }
  const std::vector<double>& angles() const { return angles_; }
  const std::vector<double>& radii() const { return radii_; }

  // Arc length of the outline between two cam-frame angles (signed).
  double arc_length(double from, double to) const;

 private:
  double wrap(double angle) const;

  std::vector<double> angles_, radii_, slopes_;
  bool periodic_;
  boost::math::interpolators::cubic_hermite<std::vector<double>> spline_;
};

struct Tangency {
  double phi = 0.0;     // world polar angle of the contact
  double lambda = 0.0;  // free span, > 0
  Vec2 tangent, normal, contact, idler_point;
  Vec2 direction;  // wire travel from cam to idler
  double length_rate = 0.0;  // dL/dtheta
};

// Residual at world angle phi; zero where the wire is tangent to cam and idler. Rotations are
// taken modulo whole turns when matching phi to the profile.
double tangency_residual(const CamProfile& profile, double theta, const WireCamGeometry& geom,
                         WireCase wire_case, double phi);

// Throws NoTangent or MultipleTangentsError.
Tangency wire_tangency(const CamProfile& profile, double theta, const WireCamGeometry& geom,
                       WireCase wire_case);

// Free span + idler wrap + wrapped cam arc from the attachment angle.
double wire_length(const CamProfile& profile, double theta, const WireCamGeometry& geom,
                   WireCase wire_case, double attach);

// k (u_t + L - L_ref) dL/dtheta. Throws SlackWire when the extension goes negative.
double cam_torque_forward(const CamProfile& profile, double theta, const WireCamGeometry& geom,
                          WireCase wire_case, double attach, double length_ref);

// Polynomial in the cam angle, lowest power first.
struct ModalTorque {
  std::vector<double> coeffs;

  int order() const { return static_cast<int>(coeffs.size()) - 1; }
  double operator()(double alpha) const;
  double slope(double alpha) const;
};

inline constexpr int kModalOrder = 4;

double cam_angle(double q, double q0);

// Least squares through the pseudo-inverse; throws RankDeficient.
ModalTorque fit_modal_torque(const std::vector<double>& alphas, const std::vector<double>& torques,
                             int order = kModalOrder);

ModalTorque desired_cam_torque(const ModalTorque& fit);

// Torque as a function of cam rotation, with its derivative.
struct TorqueFunction {
  std::function<double(double)> value;
  std::function<double(double)> slope;
};

struct SynthesisOptions {
  WireCase wire_case = WireCase::kAuto;
  // Rotation in [lo, hi] where the spring sits at u_t; NaN searches it together with k.
  double reference = std::numeric_limits<double>::quiet_NaN();
  int samples = 721;
  double margin = 0.05;  // range extension on each side, as a fraction of the range
  double round_trip_tolerance = 0.005;
};

struct CamDesign {
  WireCamGeometry geom;  // k filled in
  CamProfile profile = CamProfile::circle(0.01, 3);
  WireCase wire_case = WireCase::k1;
  double attach = 0.0;
  double length_ref = 0.0;
  double theta_lo = 0.0, theta_hi = 0.0;  // design range of the cam rotation
  double theta_ref = 0.0;
  double round_trip_error = 0.0;  // relative RMS

  double torque(double theta) const;
  double length(double theta) const;
};

// Profile whose forward torque reproduces desired(theta) on [lo, hi].
// Throws InfeasibleTorque, GeometryInfeasible or SynthesisDiverged.
CamDesign synthesize_cam_profile(const TorqueFunction& desired, double lo, double hi,
                                 const WireCamGeometry& geom, const SynthesisOptions& options = {});

// Cam rotation for a joint angle: q - q0 = pi/2 - alpha, unwrapped next to `near`.
double cam_rotation(double q, double q0, double near = 0.0);

struct JointCam {
  ModalTorque fit;  // required torque vs cam angle
  CamDesign design;
};

// Fits the leg's required torque along a path and synthesises its cam.
JointCam design_joint_cam(const std::vector<double>& q, const std::vector<double>& torque,
                          const WireCamGeometry& geom, const SynthesisOptions& options = {},
                          int order = kModalOrder);
std::array<JointCam, 3> design_cams(const PathSamples& samples,
                                    const std::array<WireCamGeometry, 3>& geoms,
                                    const SynthesisOptions& options = {}, int order = kModalOrder);

struct CamBalance {
  TorqueTable cam_torques;  // desired cam torque at each joint
  TorqueTable torques;      // required torque with cams
  Vec3 e_tau = Vec3::Zero();
};

// Required torque with each cam supplying -fit(alpha). Throws RangeExceeded when a joint leaves
// its cam's design range.
CamBalance balance_with_cams(const PathSamples& samples, const std::array<const JointCam*, 3>& cams);

}  // namespace springbal
