#include "springbal/wirecam.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include <Eigen/Geometry>
#include <Eigen/SVD>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include "springbal/errors.hpp"
#include "springbal/parallel.hpp"

namespace springbal {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * kPi;
constexpr double kArcTolerance = 1e-10;  // relative to max(1 m, arc length)

using Spline = boost::math::interpolators::cubic_hermite<std::vector<double>>;

bool upper_half(WireCase c) { return c == WireCase::k2 || c == WireCase::k4; }
bool crossed(WireCase c) { return c == WireCase::k3 || c == WireCase::k4; }
// Sign of r in the residual.
double idler_sign(WireCase c) { return crossed(c) ? 1.0 : -1.0; }
// The free span leaves along +tangent in the lower half-plane cases, -tangent otherwise.
double travel_sign(WireCase c) { return upper_half(c) ? -1.0 : 1.0; }

void check_case(WireCase c) {
  const int v = static_cast<int>(c);
  if (v < 1 || v > 4) throw Error(ErrorCode::kConfig, "wire case must be 1..4");
}

Spline make_spline(const std::vector<double>& x, const std::vector<double>& y,
                   const std::vector<double>& dy) {
  if (x.size() < 2 || y.size() != x.size() || dy.size() != x.size()) {
    throw Error(ErrorCode::kConfig, "cam profile needs matching samples, at least two");
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(dy[i]) || !(y[i] > 0.0) || !std::isfinite(y[i])) {
      throw Error(ErrorCode::kConfig, "cam profile radius must be finite and > 0");
    }
    if (i > 0 && !(x[i] > x[i - 1])) {
      throw Error(ErrorCode::kConfig, "cam profile angles must increase");
    }
  }
  return Spline(std::vector<double>(x), std::vector<double>(y), std::vector<double>(dy));
}

struct ContactFrame {
  Vec2 c, t, n;
};

// Contact point and frame at world angle phi for a cam rotated by theta.
ContactFrame frame_at(const CamProfile& profile, double theta, double phi) {
  const double s = phi - theta;
  const double g = profile.radius(s), gp = profile.slope(s);
  const Vec2 u = unit(phi);
  const Vec2 dc = gp * u + g * perp(u);
  ContactFrame f;
  f.c = g * u;
  f.t = dc.normalized();
  f.n = perp(f.t);
  return f;
}

double residual_at(const CamProfile& profile, double theta, const WireCamGeometry& geom,
                   WireCase wire_case, double phi) {
  const ContactFrame f = frame_at(profile, theta, phi);
  return f.n.dot(geom.idler() - f.c) + idler_sign(wire_case) * geom.r;
}

struct Root {
  double phi;
  double theta_eff;  // theta shifted by whole turns so that phi - theta_eff lies on the profile
};

std::vector<Root> tangency_roots(const CamProfile& profile, double theta,
                                 const WireCamGeometry& geom, WireCase wire_case) {
  const double dom_lo = upper_half(wire_case) ? 0.0 : -kPi;
  const double dom_hi = dom_lo + kPi;

  std::vector<std::pair<double, double>> windows;  // (lo, hi) in phi, paired shift below
  std::vector<double> shifts;
  if (profile.periodic()) {
    windows.emplace_back(dom_lo, dom_hi);
    shifts.push_back(theta);
  } else {
    for (int k = -2; k <= 2; ++k) {
      const double t = theta + kTwoPi * k;
      const double lo = std::max(dom_lo, profile.front() + t);
      const double hi = std::min(dom_hi, profile.back() + t);
      if (hi > lo) {
        windows.emplace_back(lo, hi);
        shifts.push_back(t);
      }
    }
  }

  std::vector<Root> roots;
  for (std::size_t w = 0; w < windows.size(); ++w) {
    const auto [lo, hi] = windows[w];
    const double t = shifts[w];
    auto h = [&](double phi) { return residual_at(profile, t, geom, wire_case, phi); };
    const int n = std::max(64, static_cast<int>(std::ceil((hi - lo) / kPi * 1024)));
    double x0 = lo, h0 = h(lo);
    if (h0 == 0.0) roots.push_back({lo, t});
    for (int i = 1; i <= n; ++i) {
      const double x1 = i == n ? hi : lo + (hi - lo) * i / n;
      const double h1 = h(x1);
      if (h1 == 0.0) {
        roots.push_back({x1, t});
      } else if (h0 != 0.0 && (h0 < 0.0) != (h1 < 0.0)) {
        boost::uintmax_t iters = 200;
        const auto r = boost::math::tools::toms748_solve(
            h, x0, x1, h0, h1, boost::math::tools::eps_tolerance<double>(), iters);
        const double a = std::abs(h(r.first)), b = std::abs(h(r.second));
        roots.push_back({a <= b ? r.first : r.second, t});
      }
      x0 = x1;
      h0 = h1;
    }
  }

  // The free span must run from the cam towards the idler.
  std::vector<Root> kept;
  for (const Root& r : roots) {
    const ContactFrame f = frame_at(profile, r.theta_eff, r.phi);
    if (travel_sign(wire_case) * f.t.dot(geom.idler() - f.c) > 0.0) kept.push_back(r);
  }
  return kept;
}

struct Solved {
  Tangency tangency;
  double profile_angle;
};

Solved solve_tangency(const CamProfile& profile, double theta, const WireCamGeometry& geom,
                      WireCase wire_case) {
  check_case(wire_case);
  const std::vector<Root> roots = tangency_roots(profile, theta, geom, wire_case);
  if (roots.empty()) {
    throw Error(ErrorCode::kNoTangent, "no wire tangency at cam rotation " + std::to_string(theta));
  }
  if (roots.size() > 1) {
    std::vector<double> phis;
    for (const Root& r : roots) phis.push_back(r.phi);
    throw MultipleTangentsError(phis);
  }
  const Root& root = roots.front();
  const ContactFrame f = frame_at(profile, root.theta_eff, root.phi);
  Solved s;
  Tangency& tg = s.tangency;
  tg.phi = root.phi;
  tg.contact = f.c;
  tg.tangent = f.t;
  tg.normal = f.n;
  tg.direction = travel_sign(wire_case) * f.t;
  tg.lambda = tg.direction.dot(geom.idler() - f.c);
  tg.idler_point = f.c + tg.lambda * tg.direction;
  tg.length_rate = -cross2(f.c, tg.direction);
  s.profile_angle = root.phi - root.theta_eff;
  return s;
}

double horner(const std::vector<double>& c, double x) {
  double v = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) v = v * x + *it;
  return v;
}

double gk_integral(const std::function<double(double)>& f, double a, double b, double* err) {
  double e = 0.0;
  const double v = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, 3, 1e-12, &e);
  if (err) *err += e;
  return v;
}

}  // namespace

void WireCamGeometry::validate() const {
  if (!(r > 0.0) || !(a > r) || !std::isfinite(a)) {
    throw Error(ErrorCode::kConfig, "cam geometry needs a > r > 0");
  }
  if (!(k >= 0.0) || !std::isfinite(k)) throw Error(ErrorCode::kConfig, "spring constant must be >= 0");
  if (!(u_t >= 0.0) || !std::isfinite(u_t)) throw Error(ErrorCode::kConfig, "pre-extension must be >= 0");
  if (!std::isfinite(q0)) throw Error(ErrorCode::kConfig, "cam mounting angle must be finite");
}

CamProfile::CamProfile(std::vector<double> angles, std::vector<double> radii,
                       std::vector<double> slopes, bool periodic)
    : angles_(std::move(angles)),
      radii_(std::move(radii)),
      slopes_(std::move(slopes)),
      periodic_(periodic),
      spline_(make_spline(angles_, radii_, slopes_)) {
  if (periodic_ && std::abs(back() - front() - kTwoPi) > 1e-12) {
    throw Error(ErrorCode::kConfig, "periodic cam profile must span one turn");
  }
}

CamProfile CamProfile::circle(double radius, int samples) {
  samples = std::max(samples, 3);
  std::vector<double> a(samples), g(samples, radius), dg(samples, 0.0);
  for (int i = 0; i < samples; ++i) a[i] = -kPi + kTwoPi * i / (samples - 1);
  a.back() = kPi;
  return CamProfile(std::move(a), std::move(g), std::move(dg), true);
}

double CamProfile::wrap(double angle) const {
  if (periodic_) {
    double s = std::fmod(angle - front(), kTwoPi);
    if (s < 0.0) s += kTwoPi;
    return front() + s;
  }
  constexpr double kSlack = 1e-12;
  if (angle < front() - kSlack || angle > back() + kSlack) {
    throw Error(ErrorCode::kRangeExceeded,
                "cam profile evaluated outside its samples at " + std::to_string(angle));
  }
  return std::clamp(angle, front(), back());
}

double CamProfile::radius(double angle) const { return spline_(wrap(angle)); }
double CamProfile::slope(double angle) const { return spline_.prime(wrap(angle)); }

double CamProfile::arc_length(double from, double to) const {
  if (from > to) return -arc_length(to, from);
  if (from == to) return 0.0;
  // Break at the knots so every piece is a single smooth cubic.
  std::vector<double> cuts{from};
  if (periodic_) {
    const long k0 = static_cast<long>(std::floor((from - front()) / kTwoPi));
    const long k1 = static_cast<long>(std::ceil((to - front()) / kTwoPi));
    for (long k = k0; k <= k1; ++k) {
      for (double x : angles_) {
        const double v = x + kTwoPi * static_cast<double>(k);
        if (v > from && v < to) cuts.push_back(v);
      }
    }
    std::sort(cuts.begin(), cuts.end());
  } else {
    for (double x : angles_) {
      if (x > from && x < to) cuts.push_back(x);
    }
  }
  cuts.push_back(to);

  auto speed = [this](double s) {
    const double g = radius(s), gp = slope(s);
    return std::sqrt(g * g + gp * gp);
  };
  double total = 0.0, err = 0.0;
  for (std::size_t i = 1; i < cuts.size(); ++i) {
    if (cuts[i] > cuts[i - 1]) total += gk_integral(speed, cuts[i - 1], cuts[i], &err);
  }
  if (!(err <= kArcTolerance * std::max(1.0, std::abs(total))) || !std::isfinite(total)) {
    std::ostringstream msg;
    msg << "cam arc length error estimate " << err << " m over " << total << " m";
    throw Error(ErrorCode::kQuadratureFailure, msg.str());
  }
  return total;
}

double tangency_residual(const CamProfile& profile, double theta, const WireCamGeometry& geom,
                         WireCase wire_case, double phi) {
  check_case(wire_case);
  if (!profile.periodic()) {
    // Same whole-turn shift as the root search; outside every shift the profile throws.
    const double turns = std::round((phi - theta - 0.5 * (profile.front() + profile.back())) / kTwoPi);
    theta += kTwoPi * turns;
  }
  return residual_at(profile, theta, geom, wire_case, phi);
}

Tangency wire_tangency(const CamProfile& profile, double theta, const WireCamGeometry& geom,
                       WireCase wire_case) {
  geom.validate();
  return solve_tangency(profile, theta, geom, wire_case).tangency;
}

namespace {

struct WireState {
  double length, rate;
};

WireState wire_state(const CamProfile& profile, double theta, const WireCamGeometry& geom,
                     WireCase wire_case, double attach) {
  geom.validate();
  const Solved s = solve_tangency(profile, theta, geom, wire_case);
  const Tangency& tg = s.tangency;
  // Idler wrap measured along the travel direction up to the exit at angle 0.
  const Vec2 e = tg.idler_point - geom.idler();
  const double sense = cross2(e, tg.direction) >= 0.0 ? 1.0 : -1.0;
  const double idler = geom.r * sense * (0.0 - std::atan2(e.y(), e.x()));
  const double wrapped = upper_half(wire_case) ? profile.arc_length(s.profile_angle, attach)
                                               : profile.arc_length(attach, s.profile_angle);
  return {tg.lambda + idler + wrapped, tg.length_rate};
}

}  // namespace

double wire_length(const CamProfile& profile, double theta, const WireCamGeometry& geom,
                   WireCase wire_case, double attach) {
  return wire_state(profile, theta, geom, wire_case, attach).length;
}

double cam_torque_forward(const CamProfile& profile, double theta, const WireCamGeometry& geom,
                          WireCase wire_case, double attach, double length_ref) {
  const WireState w = wire_state(profile, theta, geom, wire_case, attach);
  const double extension = geom.u_t + w.length - length_ref;
  if (extension < 0.0) {
    throw Error(ErrorCode::kSlackWire, "wire slack at cam rotation " + std::to_string(theta));
  }
  return geom.k * extension * w.rate;
}

double CamDesign::torque(double theta) const {
  return cam_torque_forward(profile, theta, geom, wire_case, attach, length_ref);
}

double CamDesign::length(double theta) const {
  return wire_length(profile, theta, geom, wire_case, attach);
}

double ModalTorque::operator()(double alpha) const { return horner(coeffs, alpha); }

double ModalTorque::slope(double alpha) const {
  double v = 0.0;
  for (int i = order(); i >= 1; --i) v = v * alpha + i * coeffs[i];
  return v;
}

double cam_angle(double q, double q0) { return kPi / 2.0 - (q - q0); }

ModalTorque fit_modal_torque(const std::vector<double>& alphas, const std::vector<double>& torques,
                             int order) {
  if (order < 0) throw Error(ErrorCode::kConfig, "modal order must be >= 0");
  if (alphas.size() != torques.size()) {
    throw Error(ErrorCode::kConfig, "modal fit needs one torque per angle");
  }
  const Eigen::Index n = static_cast<Eigen::Index>(alphas.size()), m = order + 1;
  if (n < m) {
    throw Error(ErrorCode::kRankDeficient, "modal fit of order " + std::to_string(order) +
                                               " needs at least " + std::to_string(m) + " samples");
  }
  Eigen::MatrixXd vander(n, m);
  Eigen::VectorXd rhs(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double p = 1.0;
    for (Eigen::Index i = 0; i < m; ++i) {
      vander(j, i) = p;
      p *= alphas[j];
    }
    rhs(j) = torques[j];
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(vander, Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(1e-12);
  if (svd.rank() < m) {
    throw Error(ErrorCode::kRankDeficient,
                "Vandermonde rank " + std::to_string(svd.rank()) + " < " + std::to_string(m));
  }
  const Eigen::VectorXd b = svd.solve(rhs);
  return ModalTorque{std::vector<double>(b.data(), b.data() + m)};
}

ModalTorque desired_cam_torque(const ModalTorque& fit) {
  ModalTorque g = fit;
  for (double& c : g.coeffs) c = -c;
  return g;
}

namespace {

// Scores of the synthesis search for candidates that fail a hard condition.
constexpr double kCuspScore = -1.0, kConcaveScore = -2.0, kClashScore = -3.0, kStarScore = -4.0;

std::string failure_reason(double score) {
  if (score == kCuspScore) return "cusp-free envelope";
  if (score == kConcaveScore) return "convex envelope";
  if (score == kClashScore) return "contact clear of the idler";
  if (score == kStarScore) return "profile that is polar about the cam axis";
  if (score == -std::numeric_limits<double>::infinity()) return "taut wire";
  return "moment arm inside the idler limits";
}

}  // namespace

CamDesign synthesize_cam_profile(const TorqueFunction& desired, double lo, double hi,
                                 const WireCamGeometry& geom, const SynthesisOptions& options) {
  geom.validate();
  if (!desired.value) throw Error(ErrorCode::kConfig, "desired torque function missing");
  if (!(hi > lo) || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw Error(ErrorCode::kConfig, "cam design range must be non-empty");
  }
  if (options.samples < 5 || !(options.margin >= 0.0)) {
    throw Error(ErrorCode::kConfig, "synthesis needs >= 5 samples and a margin >= 0");
  }

  const int n = options.samples;
  const double ext_lo = lo - options.margin * (hi - lo);
  const double ext_hi = hi + options.margin * (hi - lo);
  auto slope = [&](double t) {
    if (desired.slope) return desired.slope(t);
    const double h = 1e-6 * (1.0 + std::abs(t));
    return (desired.value(t + h) - desired.value(t - h)) / (2.0 * h);
  };

  std::vector<double> theta(n), value(n), rate(n), cumulative(n, 0.0);
  for (int j = 0; j < n; ++j) {
    theta[j] = j == n - 1 ? ext_hi : ext_lo + (ext_hi - ext_lo) * j / (n - 1);
    value[j] = desired.value(theta[j]);
    rate[j] = slope(theta[j]);
  }
  const std::function<double(double)> f = desired.value;
  for (int j = 1; j < n; ++j) {
    cumulative[j] = cumulative[j - 1] + gk_integral(f, theta[j - 1], theta[j], nullptr);
  }

  const bool positive = value.front() > 0.0;
  for (int j = 0; j < n; ++j) {
    if (!(std::abs(value[j]) > 0.0) || (value[j] > 0.0) != positive) {
      throw Error(ErrorCode::kGeometryInfeasible,
                  "required cam torque changes sign near rotation " + std::to_string(theta[j]));
    }
  }
  WireCase wire_case = options.wire_case;
  if (wire_case == WireCase::kAuto) wire_case = positive ? WireCase::k2 : WireCase::k1;
  check_case(wire_case);
  if (upper_half(wire_case) != positive) {
    throw Error(ErrorCode::kGeometryInfeasible,
                "wire case " + std::to_string(static_cast<int>(wire_case)) +
                    " cannot produce torque of this sign");
  }

  if (!std::isnan(options.reference) && (options.reference < lo || options.reference > hi)) {
    throw Error(ErrorCode::kConfig, "spring reference rotation outside the design range");
  }
  // Stored energy above the spring's reference rotation.
  auto energy_above = [&](double ref) {
    const double c_ref = gk_integral(f, ext_lo, ref, nullptr);
    std::vector<double> w(n);
    for (int j = 0; j < n; ++j) w[j] = cumulative[j] - c_ref;
    return w;
  };

  const double lower = geom.r;
  const double upper = crossed(wire_case) ? geom.a - geom.r : geom.a;
  const double ut2 = geom.u_t * geom.u_t;
  const double s_r = idler_sign(wire_case), side = upper_half(wire_case) ? -1.0 : 1.0;
  const double sign = positive ? 1.0 : -1.0;
  struct Line {
    double arm, arm_rate, beta, turn;  // turn: rotation rate of the line in the cam frame
  };
  // Wire line at sample j for stiffness kk: distance from the cam axis and its direction.
  auto line = [&](const std::vector<double>& work, double kk, int j) {
    const double tension = std::sqrt(kk * kk * ut2 + 2.0 * kk * work[j]);
    Line l;
    l.arm = sign * value[j] / tension;
    l.arm_rate = sign * (rate[j] * tension - value[j] * kk * value[j] / tension) / (tension * tension);
    const double cb = (-l.arm - s_r * geom.r) / geom.a;
    const double sb = side * std::sqrt(std::max(0.0, 1.0 - cb * cb));
    l.beta = std::atan2(sb, cb);
    l.turn = l.arm_rate / (geom.a * sb) - 1.0;
    return l;
  };
  // Log-margin of the worst sample: arm inside (lower, upper), no cusp, a convex envelope
  // (support distance plus its second derivative in the line angle stays positive), and a
  // contact point that neither hits the idler nor lies past it.
  constexpr double kMinTurn = 0.02, kMinCurvature = 0.05, kMinSpan = 0.05;
  auto score = [&](const std::vector<double>& work, double kk) {
    if (kk * ut2 + 2.0 * *std::min_element(work.begin(), work.end()) <= 0.0) {
      return -std::numeric_limits<double>::infinity();  // slack
    }
    std::vector<Line> ls(n);
    double m = std::numeric_limits<double>::infinity();
    for (int j = 0; j < n; ++j) {
      ls[j] = line(work, kk, j);
      if (!std::isfinite(ls[j].arm)) return -std::numeric_limits<double>::infinity();
      m = std::min({m, std::log(ls[j].arm / lower), std::log(upper / ls[j].arm)});
    }
    if (m <= 0.0) return m;
    for (const Line& l : ls) {
      if (!(l.turn * ls[0].turn > 0.0)) return kCuspScore;
      m = std::min(m, std::log(std::abs(l.turn) / kMinTurn));
    }
    for (int j = 1; j + 1 < n; ++j) {
      const double d_next = ls[j + 1].arm_rate / ls[j + 1].turn;
      const double d_prev = ls[j - 1].arm_rate / ls[j - 1].turn;
      const double curv = ls[j].arm + (d_next - d_prev) / (theta[j + 1] - theta[j - 1]) / ls[j].turn;
      if (!(curv > 0.0)) return kConcaveScore;
      m = std::min(m, std::log(curv / (kMinCurvature * ls[j].arm)));
    }
    // The contact must lie ahead of the idler along the wire, and no profile point may sweep
    // through the idler over the rotation range.
    std::vector<Vec2> cam_pts(n);
    for (int j = 0; j < n; ++j) {
      const Vec2 nw = unit(ls[j].beta), tw(nw.y(), -nw.x());
      const Vec2 x = -ls[j].arm * nw + (ls[j].arm_rate / ls[j].turn) * tw;
      const double span = travel_sign(wire_case) * tw.dot(geom.idler() - x);
      if (!(span > 0.0)) return kClashScore;
      m = std::min(m, std::log(span / (kMinSpan * geom.a)));
      cam_pts[j] = Eigen::Rotation2Dd(-theta[j]) * x;
    }
    // Polar outline: the contact angle about the cam axis must advance one way only.
    const double turning = cross2(cam_pts[0], cam_pts[n - 1] - cam_pts[0]);
    for (int j = 1; j < n; ++j) {
      if (!(cross2(cam_pts[j - 1], cam_pts[j]) * turning > 0.0)) return kStarScore;
    }
    const int stride = std::max(1, n / 60);
    for (int j = 0; j < n; j += stride) {
      const Eigen::Rotation2Dd rot(theta[j]);
      for (int i = 0; i < n; i += stride) {
        if (!((rot * cam_pts[i] - geom.idler()).norm() > geom.r)) return kClashScore;
      }
    }
    return m;
  };

  auto slack_bound = [&](const std::vector<double>& work) {
    const double w_min = *std::min_element(work.begin(), work.end());
    if (w_min >= 0.0) return 0.0;
    if (ut2 == 0.0) {
      throw Error(ErrorCode::kInfeasibleTorque, "spring goes slack below its reference rotation");
    }
    return -2.0 * w_min / ut2;
  };

  // Search the stiffness (and the reference, unless given) for the widest feasibility margin.
  // At the reference the arm is |desired| / (k u_t), which brackets k for arms in (lower, upper).
  std::vector<double> refs;
  if (!std::isnan(options.reference)) {
    refs.push_back(options.reference);
  } else {
    constexpr int kRefs = 21;
    for (int i = 0; i < kRefs; ++i) refs.push_back(lo + (hi - lo) * i / (kRefs - 1));
  }
  double k = geom.k, ref = refs.front(), best_score = -std::numeric_limits<double>::infinity();
  std::vector<double> work;
  for (double candidate : refs) {
    std::vector<double> w = energy_above(candidate);
    const double k_min = slack_bound(w);
    double kk = geom.k, v;
    if (kk > 0.0) {
      if (kk <= k_min) {
        if (refs.size() > 1) continue;
        throw Error(ErrorCode::kInfeasibleTorque,
                    "spring of " + std::to_string(kk) + " N/m goes slack; needs more than " +
                        std::to_string(k_min));
      }
      v = score(w, kk);
    } else {
      constexpr int kGrid = 1001;
      const double d_ref = std::abs(desired.value(candidate));
      double lk_lo = std::log(std::max(k_min * (1.0 + 1e-6), 1e-6)), lk_hi = std::log(1e9);
      if (geom.u_t > 0.0) {
        lk_lo = std::max(lk_lo, std::log(0.5 * d_ref / (upper * geom.u_t)));
        lk_hi = std::max(lk_lo, std::log(2.0 * d_ref / (lower * geom.u_t)));
      }
      auto at = [&](int i) { return lk_lo + (lk_hi - lk_lo) * i / (kGrid - 1); };
      int best = 0;
      v = -std::numeric_limits<double>::infinity();
      for (int i = 0; i < kGrid; ++i) {
        const double s_i = score(w, std::exp(at(i)));
        if (s_i > v) {
          v = s_i;
          best = i;
        }
      }
      kk = std::exp(at(best));
      if (v > 0.0) {
        const auto r = boost::math::tools::brent_find_minima(
            [&](double lk) { return -score(w, std::exp(lk)); }, at(std::max(best - 1, 0)),
            at(std::min(best + 1, kGrid - 1)), 40);
        if (-r.second > v) {
          v = -r.second;
          kk = std::exp(r.first);
        }
      }
    }
    if (work.empty() || v > best_score) {
      best_score = v;
      k = kk;
      ref = candidate;
      work = std::move(w);
    }
  }

  double arm_lo = std::numeric_limits<double>::infinity(), arm_hi = 0.0;
  for (int j = 0; j < n; ++j) {
    const double arm = line(work, k, j).arm;
    arm_lo = std::min(arm_lo, arm);
    arm_hi = std::max(arm_hi, arm);
  }
  if (!(arm_lo > lower) || !(arm_hi < upper)) {
    std::ostringstream msg;
    msg << "moment arm range [" << arm_lo << ", " << arm_hi << "] m does not fit in (" << lower
        << ", " << upper << ") m";
    throw Error(ErrorCode::kGeometryInfeasible, msg.str());
  }
  if (!(best_score > 0.0)) {
    throw Error(ErrorCode::kGeometryInfeasible,
                std::string("no spring realises this torque with a ") + failure_reason(best_score));
  }

  // Envelope of the wire lines in the cam frame.
  std::vector<double> ang(n), rad(n), drad(n);
  std::vector<double> psi_rate(n);
  for (int j = 0; j < n; ++j) {
    const Line l = line(work, k, j);
    psi_rate[j] = l.turn;
    const Vec2 p = unit(l.beta - theta[j]), pp = perp(p);
    const Vec2 x = -l.arm * p + (-l.arm_rate / l.turn) * pp;
    rad[j] = x.norm();
    ang[j] = std::atan2(x.y(), x.x());
    const Vec2 xh = x / rad[j];
    const double den = perp(xh).dot(pp);
    if (std::abs(den) < 1e-9) {
      throw Error(ErrorCode::kSynthesisDiverged, "wire line passes through the cam axis");
    }
    drad[j] = rad[j] * xh.dot(pp) / den;
  }
  for (int j = 0; j < n; ++j) {
    if (!(psi_rate[j] * psi_rate[0] > 0.0) || std::abs(psi_rate[j]) < 1e-3) {
      throw Error(ErrorCode::kSynthesisDiverged,
                  "profile envelope has a cusp near rotation " + std::to_string(theta[j]));
    }
  }
  for (int j = 1; j < n; ++j) ang[j] = ang[j - 1] + normalize_angle(ang[j] - ang[j - 1]);
  if (ang.back() < ang.front()) {
    std::reverse(ang.begin(), ang.end());
    std::reverse(rad.begin(), rad.end());
    std::reverse(drad.begin(), drad.end());
  }
  for (int j = 1; j < n; ++j) {
    if (!(ang[j] > ang[j - 1])) {
      throw Error(ErrorCode::kSynthesisDiverged, "contact angle does not advance monotonically");
    }
  }
  if (ang.back() - ang.front() >= kTwoPi) {
    throw Error(ErrorCode::kSynthesisDiverged, "profile wraps more than one turn");
  }
  const double shift = kTwoPi * std::round(0.5 * (ang.front() + ang.back()) / kTwoPi);
  for (double& v : ang) v -= shift;

  CamDesign design;
  design.geom = geom;
  design.geom.k = k;
  design.profile = CamProfile(std::move(ang), std::move(rad), std::move(drad));
  design.wire_case = wire_case;
  design.attach = upper_half(wire_case) ? design.profile.back() : design.profile.front();
  design.theta_lo = lo;
  design.theta_hi = hi;
  design.theta_ref = ref;
  try {
    design.length_ref = design.length(ref);

    constexpr int kCheck = 241;
    std::vector<double> err(kCheck), want(kCheck);
    parallel_for(kCheck, [&](std::size_t i) {
      const double t = lo + (hi - lo) * static_cast<double>(i) / (kCheck - 1);
      want[i] = desired.value(t);
      err[i] = design.torque(t) - want[i];
    });
    double num = 0.0, den = 0.0;
    for (int i = 0; i < kCheck; ++i) {
      num += err[i] * err[i];
      den += want[i] * want[i];
    }
    design.round_trip_error = std::sqrt(num / den);
  } catch (const Error& e) {
    throw Error(ErrorCode::kSynthesisDiverged, std::string("forward check failed: ") + e.what());
  }
  if (!(design.round_trip_error <= options.round_trip_tolerance)) {
    throw Error(ErrorCode::kSynthesisDiverged,
                "round-trip torque error " + std::to_string(design.round_trip_error));
  }
  return design;
}

double cam_rotation(double q, double q0, double near) {
  return near + normalize_angle(q - q0 - near);
}

JointCam design_joint_cam(const std::vector<double>& q, const std::vector<double>& torque,
                          const WireCamGeometry& geom, const SynthesisOptions& options, int order) {
  if (q.empty() || q.size() != torque.size()) {
    throw Error(ErrorCode::kConfig, "cam design needs one torque per joint angle");
  }
  double c = 0.0, s = 0.0;
  for (double v : q) {
    c += std::cos(v - geom.q0);
    s += std::sin(v - geom.q0);
  }
  const double centre = std::atan2(s, c);
  std::vector<double> alphas(q.size());
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t j = 0; j < q.size(); ++j) {
    const double t = cam_rotation(q[j], geom.q0, centre);
    lo = std::min(lo, t);
    hi = std::max(hi, t);
    alphas[j] = kPi / 2.0 - t;
  }

  JointCam out;
  out.fit = fit_modal_torque(alphas, torque, order);
  const ModalTorque g = desired_cam_torque(out.fit);
  TorqueFunction desired{[g](double t) { return g(kPi / 2.0 - t); },
                         [g](double t) { return -g.slope(kPi / 2.0 - t); }};
  out.design = synthesize_cam_profile(desired, lo, hi, geom, options);
  return out;
}

std::array<JointCam, 3> design_cams(const PathSamples& samples,
                                    const std::array<WireCamGeometry, 3>& geoms,
                                    const SynthesisOptions& options, int order) {
  std::array<JointCam, 3> out;
  for (int i = 0; i < 3; ++i) {
    std::vector<double> q(samples.size()), tau(samples.size());
    for (std::size_t j = 0; j < samples.size(); ++j) {
      q[j] = samples.q[j](i);
      tau[j] = samples.tau_g[j](i);
    }
    try {
      out[i] = design_joint_cam(q, tau, geoms[i], options, order);
    } catch (const Error& e) {
      throw Error(e.code(), "cam " + std::to_string(i + 1) + ": " + e.detail());
    }
  }
  return out;
}

CamBalance balance_with_cams(const PathSamples& samples, const std::array<const JointCam*, 3>& cams) {
  for (const JointCam* c : cams) {
    if (!c) throw Error(ErrorCode::kConfig, "missing cam design");
  }
  const std::size_t n = samples.size();
  CamBalance out;
  out.cam_torques.assign(n, Vec3::Zero());
  out.torques.assign(n, Vec3::Zero());
  constexpr double kRangeSlack = 1e-9;
  auto rotation = [&](std::size_t j, int i) {
    const CamDesign& d = cams[i]->design;
    return cam_rotation(samples.q[j](i), d.geom.q0, 0.5 * (d.theta_lo + d.theta_hi));
  };
  for (std::size_t j = 0; j < n; ++j) {
    for (int i = 0; i < 3; ++i) {
      const CamDesign& d = cams[i]->design;
      const double t = rotation(j, i);
      if (t < d.theta_lo - kRangeSlack || t > d.theta_hi + kRangeSlack) {
        std::ostringstream msg;
        msg << "pose " << j << " drives cam " << i + 1 << " to " << t << " rad, outside ["
            << d.theta_lo << ", " << d.theta_hi << "]";
        throw Error(ErrorCode::kRangeExceeded, msg.str());
      }
    }
  }
  // The cam supplies its desired torque; synthesis already bounds the realised deviation.
  parallel_for(n, [&](std::size_t j) {
    for (int i = 0; i < 3; ++i) {
      out.cam_torques[j](i) = -cams[i]->fit(kPi / 2.0 - rotation(j, i));
    }
    out.torques[j] = samples.tau_g[j] + out.cam_torques[j];
  });
  out.e_tau = e_tau(out.torques, samples.tau_g);
  return out;
}

}  // namespace springbal
