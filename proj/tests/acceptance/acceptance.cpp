// Acceptance gate: one PASS/FAIL line per criterion, non-zero exit if any fails.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>

#include "springbal/errors.hpp"
#include "springbal/report.hpp"
#include "support/oracles.hpp"

using namespace springbal;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;
const fs::path kConfigs = fs::path(SPRINGBAL_SOURCE_DIR) / "configs";
const fs::path kWorkDir = fs::path(SPRINGBAL_WORK_DIR);
// Difference step: near-singular poses need it small; roundoff stays below 1e-8 relative.
constexpr double kStep = 2e-6;

using Clock = std::chrono::steady_clock;
double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Central difference refined by one Richardson step; `quotient(h)` is the plain central quotient.
template <class F>
auto richardson(F&& quotient, double h) {
  using T = std::decay_t<decltype(quotient(h))>;
  return T((4.0 * quotient(0.5 * h) - quotient(h)) / 3.0);  // evaluated before temporaries die
}

Pose pose_of(const Vec3& x) { return Pose(Vec2(x(0), x(1)), x(2)); }

const std::array<RobotGeometry, 2>& layouts() {
  static const std::array<RobotGeometry, 2> g{RobotGeometry::wide_default(), RobotGeometry::narrow_default()};
  return g;
}

// Quantity along direct kinematics, differentiated in joint c.
template <class F>
std::optional<double> joint_derivative(const RobotGeometry& g, const Pose& pose, int c, F&& value) {
  const Vec3 q = inverse_kinematics(pose, g).q_vector();
  bool ok = true;
  auto quotient = [&](double h) {
    Vec3 qp = q, qm = q;
    qp(c) += h;
    qm(c) -= h;
    const auto xp = oracle::forward_kinematics(g, qp, pose);
    const auto xm = oracle::forward_kinematics(g, qm, pose);
    if (!xp || !xm) {
      ok = false;
      return 0.0;
    }
    return (value(*xp) - value(*xm)) / (2.0 * h);
  };
  const double d = richardson(quotient, kStep);
  if (!ok) return std::nullopt;
  return d;
}

SpringSet random_springs(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> k(0.05, 5.0), a(-3.0, 3.0);
  SpringSet s;
  for (int i = 0; i < 3; ++i) {
    s.k_q(i) = k(rng);
    s.k_phi(i) = k(rng);
    s.q_free(i) = a(rng);
    s.phi_free(i) = a(rng);
  }
  return s;
}

// ---------------------------------------------------------------------------------------------
// Shared pipeline runs.

struct CliRun {
  fs::path dir;
  int status = -1;
  double seconds = 0.0;
};

CliRun run_cli(const std::string& verb, const fs::path& config, const fs::path& out) {
  fs::remove_all(out);
  fs::create_directories(out.parent_path());
  const fs::path log = out.string() + ".log";
  const std::string cmd = std::string("\"") + SPRINGBAL_CLI + "\" " + verb + " --strict --config \"" +
                          config.string() + "\" --out \"" + out.string() + "\" > \"" + log.string() +
                          "\" 2>&1";
  const auto t0 = Clock::now();
  const int raw = std::system(cmd.c_str());
  CliRun r{out, WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, seconds_since(t0)};
  if (r.status != 0) std::cerr << slurp(log);
  return r;
}

struct Studies {
  std::optional<CliRun> wl_first;
  std::optional<ReportBundle> nl;
  std::optional<std::array<JointCam, 3>> wl_cams;
  PathSamples wl_samples;
};
Studies g_studies;

const CliRun& wl_first_run() {
  if (!g_studies.wl_first) {
    g_studies.wl_first = run_cli("run", kConfigs / "wl_default.cfg", kWorkDir / "wl_run_1");
    if (g_studies.wl_first->status != 0) {
      throw std::runtime_error("wl_default run exited with " + std::to_string(g_studies.wl_first->status));
    }
  }
  return *g_studies.wl_first;
}

const ReportBundle& nl_study() {
  if (!g_studies.nl) {
    StudyConfig c = load_config(kConfigs / "nl_default.cfg", true);
    c.output_dir = kWorkDir / "nl_run";
    fs::remove_all(c.output_dir);
    g_studies.nl = run_study(c);
  }
  return *g_studies.nl;
}

std::map<std::string, Vec3> e_tau_rows(const fs::path& dir) {
  const CsvTable t = read_csv(dir / "e_tau.csv");
  std::map<std::string, Vec3> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) out[t.labels[r]] = Vec3(t.rows[r][0], t.rows[r][1], t.rows[r][2]);
  return out;
}

// WL cams from the shipped constants on the spiral about the placement the pipeline chose.
const std::array<JointCam, 3>& wl_cams() {
  if (!g_studies.wl_cams) {
    const StudyConfig c = load_config(kConfigs / "wl_default.cfg", true);
    const CsvTable placement = read_csv(wl_first_run().dir / "placement.csv");
    const auto& best = placement.rows.at(0);
    if (placement.labels.at(0) != "best") throw std::runtime_error("placement.csv: no best row");
    const std::vector<Pose> path = spiral_path(Vec2(best[0], best[1]), best[2], c.task);
    g_studies.wl_samples = sample_path(path, c.geometry, c.mass);
    g_studies.wl_cams = design_cams(g_studies.wl_samples, c.cams, c.synthesis, c.modal_order);
  }
  return *g_studies.wl_cams;
}

// e_tau with each cam's forward torque evaluated on its synthesised profile.
Vec3 realised_cam_e_tau(const PathSamples& s, const std::array<JointCam, 3>& cams) {
  TorqueTable with(s.size());
  for (std::size_t j = 0; j < s.size(); ++j) {
    for (int i = 0; i < 3; ++i) {
      const CamDesign& d = cams[i].design;
      const double t = cam_rotation(s.q[j](i), d.geom.q0, 0.5 * (d.theta_lo + d.theta_hi));
      with[j](i) = s.tau_g[j](i) + d.torque(t);
    }
  }
  return e_tau(with, s.tau_g);
}

// ---------------------------------------------------------------------------------------------

Outcome jacobian_suite() {
  const auto t0 = Clock::now();
  Vec3 worst = Vec3::Zero();  // J_qx, J_phix, J_phiq columns
  double worst_product = 0.0;
  int fk_failures = 0;
  for (std::size_t l = 0; l < 2; ++l) {
    const RobotGeometry& g = layouts()[l];
    std::mt19937_64 rng(1000 + l);
    for (int n = 0; n < 1000; ++n) {
      const Pose pose = oracle::random_pose(g, rng, Vec2::Zero(), 0.12, 30.0 * kDegree);
      const JointConfig j = inverse_kinematics(pose, g);
      const JacobianBundle jb = jacobians(pose, j, g);
      const Vec3 x = pose.as_vector();
      for (int c = 0; c < 3; ++c) {
        auto dq = [&](double h) {
          Vec3 xp = x, xm = x;
          xp(c) += h;
          xm(c) -= h;
          return Vec3(oracle::wrapped_difference(inverse_kinematics(pose_of(xp), g).q_vector(),
                                                 inverse_kinematics(pose_of(xm), g).q_vector()) /
                      (2.0 * h));
        };
        auto dphi = [&](double h) {
          Vec3 xp = x, xm = x;
          xp(c) += h;
          xm(c) -= h;
          return Vec3(oracle::wrapped_difference(inverse_kinematics(pose_of(xp), g).phi_vector(),
                                                 inverse_kinematics(pose_of(xm), g).phi_vector()) /
                      (2.0 * h));
        };
        worst(0) = std::max(worst(0), oracle::relative_error(richardson(dq, kStep), jb.J_qx.col(c)));
        worst(1) = std::max(worst(1), oracle::relative_error(richardson(dphi, kStep), jb.J_phix.col(c)));

        Vec3 dphi_dq;
        for (int r = 0; r < 3; ++r) {
          const auto d = joint_derivative(g, pose, c, [&](const Pose& p) {
            return normalize_angle(inverse_kinematics(p, g).phi_vector()(r) - j.phi_vector()(r));
          });
          if (!d) {
            ++fk_failures;
            dphi_dq(r) = std::numeric_limits<double>::quiet_NaN();
          } else {
            dphi_dq(r) = *d;
          }
        }
        if (dphi_dq.allFinite()) {
          worst(2) = std::max(worst(2), oracle::relative_error(dphi_dq, jb.J_phiq.col(c)));
        }
      }
      worst_product = std::max(worst_product, (jb.J_phiq * jb.J_qx - jb.J_phix).norm());
    }
  }
  const double t = seconds_since(t0);
  return {worst.maxCoeff() <= 1e-5 && worst_product <= 1e-10 && fk_failures == 0 && t < 10.0,
          "2000 poses, worst column errors J_qx " + fmt(worst(0)) + ", J_phix " + fmt(worst(1)) + ", J_phiq " +
              fmt(worst(2)) + ", product residual " + fmt(worst_product) +
              ", direct-kinematics failures " + std::to_string(fk_failures) + ", " + fmt(t) + " s"};
}

Outcome energy_gradient_suite() {
  const MassModel mass = MassModel::defaults();
  double worst_g = 0.0, worst_e = 0.0, worst_power = 0.0;
  int configs = 0, fk_failures = 0;
  std::normal_distribution<double> nd;
  for (std::size_t l = 0; l < 2; ++l) {
    const RobotGeometry& g = layouts()[l];
    std::mt19937_64 rng(2000 + l);
    for (int n = 0; n < 250; ++n, ++configs) {
      const Pose pose = oracle::random_pose(g, rng, Vec2::Zero(), 0.12, 30.0 * kDegree);
      const JointConfig j = inverse_kinematics(pose, g);
      const JacobianBundle jb = jacobians(pose, j, g);
      const SpringSet springs = random_springs(rng);
      Vec3 fd_g, fd_e;
      bool ok = true;
      for (int c = 0; c < 3; ++c) {
        const auto vg = joint_derivative(g, pose, c, [&](const Pose& p) {
          return gravity_potential(p, inverse_kinematics(p, g), g, mass);
        });
        const auto ve = joint_derivative(g, pose, c, [&](const Pose& p) {
          return elastic_energy(inverse_kinematics(p, g), springs);
        });
        ok = ok && vg && ve;
        fd_g(c) = vg.value_or(0.0);
        fd_e(c) = ve.value_or(0.0);
      }
      if (!ok) {
        ++fk_failures;
        continue;
      }
      worst_g = std::max(worst_g, oracle::relative_error(fd_g, gravity_torque(pose, j, jb, g, mass)));
      worst_e = std::max(worst_e, oracle::relative_error(fd_e, elastic_torque(j, springs, jb)));

      Wrench w;
      w.force = Vec2(nd(rng), nd(rng));
      w.moment = nd(rng);
      const Vec3 tau = actuator_torque(pose, j, jb, g, MassModel::massless(), SpringSet{}, w);
      const Vec3 twist(nd(rng), nd(rng), nd(rng));
      const double out = w.as_vector().dot(twist);
      worst_power = std::max(worst_power, std::abs(tau.dot(jb.J_qx * twist) - out) / std::max(1.0, std::abs(out)));
    }
  }
  return {worst_g <= 1e-5 && worst_e <= 1e-5 && worst_power <= 1e-9 && fk_failures == 0,
          std::to_string(configs) + " configs, gravity " + fmt(worst_g) + ", elastic " + fmt(worst_e) +
              ", power balance " + fmt(worst_power) + ", direct-kinematics failures " +
              std::to_string(fk_failures)};
}

// Smooth closed-form task-space path through the workspace centre.
std::function<Pose(double)> random_path(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double ax = 0.04 * u(rng), ay = 0.04 * u(rng), ag = 0.4 * u(rng);
  const double fx = 1.0 + 2.0 * std::abs(u(rng)), fy = 1.0 + 2.0 * std::abs(u(rng));
  const double px = kPi * u(rng), py = kPi * u(rng);
  return [=](double s) {
    return Pose(Vec2(ax * std::sin(fx * s + px), ay * std::sin(fy * s + py)), ag * std::sin(s));
  };
}

Outcome balance_energy_property() {
  double worst_balanced_tau = 0.0, worst_flatness = 0.0, worst_identity = 0.0;
  int balanced_paths = 0, identity_paths = 0;
  // Every mass sits on a base joint: torque vanishes identically while V_g stays non-zero.
  MassModel pinned = MassModel::massless();
  for (auto& leg : pinned.link_mass) leg = {0.3, 0.0};
  pinned.com_fraction = {0.0, 0.5};
  for (std::size_t l = 0; l < 2; ++l) {
    const RobotGeometry& g = layouts()[l];
    std::mt19937_64 rng(3000 + l);
    for (int n = 0; n < 50; ++n, ++balanced_paths) {
      const auto path = random_path(rng);
      double tau_max = 0.0, v_min = 1e300, v_max = -1e300;
      for (int k = 0; k <= 400; ++k) {
        const Pose p = path(2.0 * kPi * k / 400);
        const JointConfig j = inverse_kinematics(p, g);
        tau_max = std::max(tau_max, actuator_torque(p, j, jacobians(p, j, g), g, pinned, SpringSet{}).norm());
        const double v = oracle::total_potential(p, g, pinned, SpringSet{});
        v_min = std::min(v_min, v);
        v_max = std::max(v_max, v);
      }
      worst_balanced_tau = std::max(worst_balanced_tau, tau_max);
      if (tau_max <= 1e-8) {
        worst_flatness = std::max(worst_flatness, (v_max - v_min) / std::max(std::abs(v_max), std::abs(v_min)));
      }
    }
    // General law behind the property: the work of the actuator torque equals the potential change.
    for (int n = 0; n < 10; ++n, ++identity_paths) {
      const auto path = random_path(rng);
      // Free angles near the start keep deflections off the +-pi wrap, where energy has a corner.
      SpringSet springs = random_springs(rng);
      const JointConfig start = inverse_kinematics(path(0.0), g);
      std::uniform_real_distribution<double> near(-1.0, 1.0);
      for (int i = 0; i < 3; ++i) {
        springs.q_free(i) = start.q[i] + near(rng);
        springs.phi_free(i) = start.phi[i] + near(rng);
      }
      const MassModel mass = MassModel::defaults();
      constexpr int kIntervals = 4000;
      constexpr double span = 3.0, h = span / kIntervals;
      double work = 0.0;
      for (int k = 0; k <= kIntervals; ++k) {
        const double s = k * h;
        const Pose p = path(s);
        const JointConfig j = inverse_kinematics(p, g);
        const Vec3 tau = actuator_torque(p, j, jacobians(p, j, g), g, mass, springs);
        auto dq = [&](double d) {
          return Vec3(oracle::wrapped_difference(inverse_kinematics(path(s + d), g).q_vector(),
                                                 inverse_kinematics(path(s - d), g).q_vector()) /
                      (2.0 * d));
        };
        const double w = (k == 0 || k == kIntervals) ? 1.0 : (k % 2 ? 4.0 : 2.0);
        work += w * tau.dot(richardson(dq, kStep));
      }
      work *= h / 3.0;
      const double dv = oracle::total_potential(path(span), g, mass, springs) -
                        oracle::total_potential(path(0.0), g, mass, springs);
      worst_identity = std::max(worst_identity, std::abs(work - dv) / std::max(std::abs(dv), 1e-12));
    }
  }
  return {worst_balanced_tau <= 1e-8 && worst_flatness <= 1e-6 && worst_identity <= 1e-6,
          std::to_string(balanced_paths) + " balanced paths: max |tau| " + fmt(worst_balanced_tau) +
              ", relative V variation " + fmt(worst_flatness) + "; " + std::to_string(identity_paths) +
              " sprung paths: work vs potential change " + fmt(worst_identity)};
}

bool feasible_everywhere(const RobotGeometry& g, const std::vector<double>& gammas, const Vec2& p) {
  for (double gamma : gammas) {
    if (!is_reachable(Pose(p, gamma), g)) return false;
  }
  return true;
}

Outcome workspace_oracle() {
  std::string detail;
  bool pass = true;
  for (std::size_t l = 0; l < 2; ++l) {
    const RobotGeometry& g = layouts()[l];
    const TaskSpec task;
    const ScanOptions opts = ScanOptions::for_layout(g.layout);
    const auto t0 = Clock::now();
    const WorkspaceMap map = scan_dexterous_workspace(g, task, opts);
    const WorkspaceMap sub = compute_sub_workspace(map, task, 0.01, opts.radial_tolerance);
    const double t = seconds_since(t0);

    double worst = 0.0;
    bool all_orientations = true;
    for (const PolarSample& s : map.boundary) {
      const Vec2 dir = unit(s.azimuth);
      int k = 0;
      while (feasible_everywhere(g, map.orientations, (k + 1) * 1e-4 * dir)) ++k;
      worst = std::max(worst, std::abs(s.radius - k * 1e-4));
      for (double gamma : {-30.0 * kDegree, 30.0 * kDegree}) {
        all_orientations = all_orientations && is_reachable(Pose(s.radius * dir, gamma), g);
      }
    }
    const bool ends = std::abs(map.orientations.front() + 30.0 * kDegree) < 1e-12 &&
                      std::abs(map.orientations.back() - 30.0 * kDegree) < 1e-12;

    // Dropping the orientation requirement must enlarge the region somewhere.
    TaskSpec fixed = task;
    fixed.orientation_range = 1e-9;
    const WorkspaceMap loose = scan_dexterous_workspace(g, fixed, opts);
    bool shrinks = false, nested = true;
    for (std::size_t a = 0; a < map.boundary.size(); ++a) {
      nested = nested && map.boundary[a].radius <= loose.boundary[a].radius + 2e-4;
      shrinks = shrinks || map.boundary[a].radius < loose.boundary[a].radius - 1e-3;
    }

    TaskSpec point = task;
    point.task_radius = 0.0;
    const WorkspaceMap same = compute_sub_workspace(map, point);
    bool identity = same.sub_boundary.size() == map.boundary.size();
    for (std::size_t a = 0; identity && a < map.boundary.size(); ++a) {
      identity = same.sub_boundary[a].valid && same.sub_boundary[a].inner == 0.0 &&
                 same.sub_boundary[a].outer == map.boundary[a].radius;
    }

    const bool ok = worst <= 2e-4 && identity && ends && all_orientations && shrinks && nested && t < 60.0 &&
                    !sub.grid.empty();
    pass = pass && ok;
    detail += std::string(l ? "; " : "") + (l ? "NL" : "WL") + ": " + std::to_string(map.boundary.size()) +
              " azimuths, worst gap " + fmt(worst) + " m, erosion identity " + (identity ? "yes" : "no") +
              ", +-30 deg enforced " + (ends && all_orientations && shrinks && nested ? "yes" : "no") +
              ", " + fmt(t) + " s";
  }
  return {pass, detail};
}

Outcome spring_trends() {
  const auto wl = e_tau_rows(wl_first_run().dir);
  const ReportBundle& nl = nl_study();
  const Vec3 wl1 = wl.at("mode1"), wl2 = wl.at("mode2");
  Vec3 nl1, nl2;
  for (const ModeOutcome& m : nl.modes) {
    if (m.result.mode == BalancingMode::kMode1) nl1 = m.result.e_tau;
    if (m.result.mode == BalancingMode::kMode2) nl2 = m.result.e_tau;
  }
  const int nl_below = (nl1.array() < 1.0).count();
  const bool trends = (wl1.array() < 1.0).all() && nl_below >= 2 && wl1.mean() < wl2.mean() && nl1.mean() < nl2.mean();

  // Two free parameters against an exhaustive grid.
  const RobotGeometry g = RobotGeometry::wide_default();
  TaskSpec task;
  task.spiral_points = 300;
  const PathSamples samples = sample_path(spiral_path(Vec2(0.02, 0.01), -30.0 * kDegree, task), g,
                                          MassModel::defaults());
  SpringSet init;
  init.k_q = Vec3(0.0, 0.15, 0.25);
  init.q_free = Vec3(0.0, 0.8, -1.2);
  SolverOptions opts;
  opts.mask = {true, false, false, true, false, false};
  const OptimizationResult r = optimize_springs(samples, BalancingMode::kMode1, init, opts);
  constexpr int n = 200;
  const double k_max = 0.5, dk = k_max / (n - 1), da = 2.0 * kPi / (n - 1);
  double best = std::numeric_limits<double>::infinity(), best_k = 0.0, best_a = 0.0;
  SpringSet trial = init;
  for (int a = 0; a < n; ++a) {
    for (int k = 0; k < n; ++k) {
      trial.k_q(0) = k * dk;
      trial.q_free(0) = -kPi + a * da;
      const double c = mean_cost(samples, trial);
      if (c < best) {
        best = c;
        best_k = trial.k_q(0);
        best_a = trial.q_free(0);
      }
    }
  }
  const bool grid = best_k < k_max - dk && r.final_cost <= best && std::abs(r.springs.k_q(0) - best_k) <= dk &&
                    std::abs(normalize_angle(r.springs.q_free(0) - best_a)) <= da;
  return {trends && grid,
          "WL Mode 1 " + fmt(wl1(0)) + "/" + fmt(wl1(1)) + "/" + fmt(wl1(2)) + " (mean " + fmt(wl1.mean()) +
              " < Mode 2 " + fmt(wl2.mean()) + "); NL Mode 1 " + fmt(nl1(0)) + "/" + fmt(nl1(1)) + "/" +
              fmt(nl1(2)) + " (" + std::to_string(nl_below) + " legs < 1, mean " + fmt(nl1.mean()) +
              " < Mode 2 " + fmt(nl2.mean()) + "); grid search k " + fmt(best_k) + " vs " +
              fmt(r.springs.k_q(0)) + ", free angle " + fmt(best_a) + " vs " + fmt(r.springs.q_free(0))};
}

Outcome modal_fit() {
  std::mt19937_64 rng(6000);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst_exact = 0.0, worst_oracle = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const int degree = trial % 5;
    std::vector<double> coeffs(degree + 1);
    for (double& c : coeffs) c = u(rng);
    const double lo = -0.8 + 0.5 * u(rng);
    std::vector<double> a, t, noisy;
    for (int i = 0; i < 120; ++i) {
      a.push_back(lo + 1.2 * (0.5 + 0.5 * u(rng)));
      double v = 0.0;
      for (int p = degree; p >= 0; --p) v = v * a.back() + coeffs[p];
      t.push_back(v);
      noisy.push_back(v + 0.05 * u(rng) + 0.3 * std::sin(4.0 * a.back()));
    }
    const ModalTorque exact = fit_modal_torque(a, t, 4);
    for (int p = 0; p <= 4; ++p) {
      const double want = p <= degree ? coeffs[p] : 0.0;
      worst_exact = std::max(worst_exact, std::abs(exact.coeffs[p] - want));
    }

    const ModalTorque fit = fit_modal_torque(a, noisy, 4);
    Eigen::MatrixXd m(a.size(), 5);
    Eigen::VectorXd y(a.size()), b(5);
    for (std::size_t i = 0; i < a.size(); ++i) {
      for (int p = 0; p < 5; ++p) m(i, p) = std::pow(a[i], p);
      y(i) = noisy[i];
    }
    const Eigen::VectorXd oracle = (m.transpose() * m).ldlt().solve(m.transpose() * y);
    for (int p = 0; p < 5; ++p) b(p) = fit.coeffs[p];
    worst_oracle = std::max(worst_oracle, (b - oracle).norm() / oracle.norm());
  }
  return {worst_exact <= 1e-10 && worst_oracle <= 1e-8,
          "200 data sets, exact-data coefficient error " + fmt(worst_exact) + ", normal-equations gap " +
              fmt(worst_oracle)};
}

// Root of the residual nearest `guess` from a sign scan of [lo, lo + pi] refined by bisection.
double dense_scan_root(const CamProfile& p, double theta, const WireCamGeometry& geom, WireCase c,
                       double guess) {
  const double lo = (c == WireCase::k2 || c == WireCase::k4) ? 0.0 : -kPi;
  auto h = [&](double phi) {
    try {
      return tangency_residual(p, theta, geom, c, phi);
    } catch (const Error&) {
      return std::numeric_limits<double>::quiet_NaN();
    }
  };
  constexpr int n = 10000;
  double best = std::numeric_limits<double>::quiet_NaN();
  for (int i = 0; i < n; ++i) {
    double a = lo + kPi * i / n, b = lo + kPi * (i + 1) / n;
    double ha = h(a), hb = h(b);
    if (std::isnan(ha) || std::isnan(hb) || (ha < 0.0) == (hb < 0.0)) continue;
    for (int it = 0; it < 200 && b - a > 1e-15; ++it) {
      const double m = 0.5 * (a + b), hm = h(m);
      if ((hm < 0.0) == (ha < 0.0)) {
        a = m;
        ha = hm;
      } else {
        b = m;
      }
    }
    const double r = 0.5 * (a + b);
    if (std::isnan(best) || std::abs(r - guess) < std::abs(best - guess)) best = r;
  }
  return best;
}

Outcome cam_kernel() {
  const auto& cams = wl_cams();  // pipeline placement is shared with criterion 9; not timed here
  const auto t0 = Clock::now();
  WireCamGeometry geom;
  geom.k = 100.0;

  double worst_capstan = 0.0;
  for (double g0 : {0.05, 0.08, 0.12, 0.2}) {
    const CamProfile c = CamProfile::circle(g0);
    for (int cs = 1; cs <= 4; ++cs) {
      const auto wc = static_cast<WireCase>(cs);
      if (cs >= 3 && g0 + geom.r >= geom.a) continue;
      const double attach = cs % 2 == 1 ? -3.0 : 3.0;
      for (double theta : {-0.9, -0.2, 0.4, 1.3}) {
        auto rate = [&](double h) {
          return (wire_length(c, theta + h, geom, wc, attach) - wire_length(c, theta - h, geom, wc, attach)) /
                 (2.0 * h);
        };
        worst_capstan = std::max(worst_capstan, std::abs(std::abs(rate(1e-5)) - g0) / g0);
      }
    }
  }

  double worst_residual = 0.0, worst_scan = 0.0;
  int roots = 0;
  auto check_root = [&](const CamProfile& p, const WireCamGeometry& gm, WireCase wc, double theta) {
    const Tangency t = wire_tangency(p, theta, gm, wc);
    worst_residual = std::max(worst_residual, std::abs(tangency_residual(p, theta, gm, wc, t.phi)));
    worst_scan = std::max(worst_scan, std::abs(dense_scan_root(p, theta, gm, wc, t.phi) - t.phi));
    ++roots;
  };
  {
    std::vector<double> a(1441), g(1441), dg(1441);
    for (int i = 0; i < 1441; ++i) {
      a[i] = i == 1440 ? kPi : -kPi + 2.0 * kPi * i / 1440;
      g[i] = 0.06 + 0.01 * std::cos(a[i]) + 0.002 * std::sin(2.0 * a[i]);
      dg[i] = -0.01 * std::sin(a[i]) + 0.004 * std::cos(2.0 * a[i]);
    }
    const CamProfile lobed(a, g, dg, true);
    for (int cs = 1; cs <= 4; ++cs) {
      for (double theta : {-2.0, -0.7, 0.0, 0.9, 2.6}) check_root(lobed, geom, static_cast<WireCase>(cs), theta);
    }
  }
  for (const JointCam& jc : cams) {
    const CamDesign& d = jc.design;
    for (int k = 0; k <= 8; ++k) check_root(d.profile, d.geom, d.wire_case, d.theta_lo + (d.theta_hi - d.theta_lo) * k / 8);
  }

  double worst_trip = 0.0, worst_dense = 0.0;
  for (const JointCam& jc : cams) {
    const CamDesign& d = jc.design;
    worst_trip = std::max(worst_trip, d.round_trip_error);
    double num = 0.0, den = 0.0;
    for (int k = 0; k <= 400; ++k) {
      const double t = d.theta_lo + (d.theta_hi - d.theta_lo) * k / 400;
      const double want = -jc.fit(kPi / 2.0 - t);
      num += std::pow(d.torque(t) - want, 2);
      den += want * want;
    }
    worst_dense = std::max(worst_dense, std::sqrt(num / den));
  }
  const double t = seconds_since(t0);
  return {worst_capstan <= 1e-6 && worst_residual <= 1e-10 && worst_scan <= 1e-8 && worst_trip <= 0.005 &&
              worst_dense <= 0.005 && t < 30.0,
          "capstan " + fmt(worst_capstan) + ", " + std::to_string(roots) + " roots |h| " + fmt(worst_residual) +
              " scan gap " + fmt(worst_scan) + " rad, WL round trip " + fmt(worst_trip) + " (dense " +
              fmt(worst_dense) + "), " + fmt(t) + " s"};
}

Outcome cam_trends() {
  const auto wl = e_tau_rows(wl_first_run().dir);
  const Vec3 wl1 = wl.at("mode1"), wlc = wl.at("cam");
  const Vec3 wl_real = realised_cam_e_tau(g_studies.wl_samples, wl_cams());

  const ReportBundle& nl = nl_study();
  Vec3 nl1;
  for (const ModeOutcome& m : nl.modes) {
    if (m.result.mode == BalancingMode::kMode1) nl1 = m.result.e_tau;
  }
  const Vec3 nlc = nl.cam_balance.e_tau;
  const StudyConfig nl_cfg = load_config(kConfigs / "nl_default.cfg", true);
  const PathSamples nl_samples = sample_path(nl.path, nl_cfg.geometry, nl_cfg.mass);
  const Vec3 nl_real = realised_cam_e_tau(nl_samples, *nl.cams);

  const bool wl_ok = (wlc.array() <= wl1.array() + 0.05).all() && (wl_real.array() <= wl1.array() + 0.05).all();
  const bool nl_ok = nlc.mean() < nl1.mean() && nl_real.mean() < nl1.mean();
  return {wl_ok && nl_ok,
          "WL cam " + fmt(wlc(0)) + "/" + fmt(wlc(1)) + "/" + fmt(wlc(2)) + " (realised " + fmt(wl_real(0)) + "/" +
              fmt(wl_real(1)) + "/" + fmt(wl_real(2)) + ") vs Mode 1 + 0.05 " + fmt(wl1(0) + 0.05) + "/" +
              fmt(wl1(1) + 0.05) + "/" + fmt(wl1(2) + 0.05) + "; NL cam mean " + fmt(nlc.mean()) +
              " (realised " + fmt(nl_real.mean()) + ") vs Mode 1 mean " + fmt(nl1.mean())};
}

Outcome determinism() {
  const CliRun& a = wl_first_run();
  const CliRun b = run_cli("run", kConfigs / "wl_default.cfg", kWorkDir / "wl_run_2");
  if (b.status != 0) return {false, "second run exited with " + std::to_string(b.status)};
  int compared = 0, differing = 0;
  std::string first_diff;
  for (const auto& entry : fs::directory_iterator(a.dir)) {
    const fs::path name = entry.path().filename();
    if (name.extension() != ".csv") continue;
    ++compared;
    if (!fs::exists(b.dir / name) || slurp(a.dir / name) != slurp(b.dir / name)) {
      if (differing++ == 0) first_diff = name.string();
    }
  }
  for (const auto& entry : fs::directory_iterator(b.dir)) {
    if (entry.path().extension() == ".csv" && !fs::exists(a.dir / entry.path().filename())) ++differing;
  }
  const double longest = std::max(a.seconds, b.seconds);
  return {differing == 0 && compared > 0 && longest < 600.0,
          std::to_string(compared) + " CSV files, " + std::to_string(differing) + " differ" +
              (first_diff.empty() ? "" : " (first " + first_diff + ")") + ", runs took " + fmt(a.seconds) +
              " s and " + fmt(b.seconds) + " s"};
}

}  // namespace

// Optional arguments select criteria by number; all run by default.
int main(int argc, char** argv) {
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));
  fs::create_directories(kWorkDir);
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"Jacobian suite", jacobian_suite},
      {"energy-gradient suite", energy_gradient_suite},
      {"balance implies constant energy", balance_energy_property},
      {"workspace oracle", workspace_oracle},
      {"spring-optimisation trends", spring_trends},
      {"modal fit", modal_fit},
      {"cam kernel", cam_kernel},
      {"cam-balancing trend", cam_trends},
      {"determinism", determinism},
  };
  int failures = 0, index = 0;
  for (const auto& [name, check] : criteria) {
    ++index;
    if (!only.empty() && std::find(only.begin(), only.end(), index) == only.end()) continue;
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failures += o.pass ? 0 : 1;
    std::cout << "criterion " << index << " " << (o.pass ? "PASS" : "FAIL") << "  " << name << ": " << o.detail
              << std::endl;
  }
  std::cout << (failures ? std::to_string(failures) + " criteria failed" : "all criteria passed") << std::endl;
  return failures ? 1 : 0;
}
