#include "springbal/spring_opt.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>

#include "springbal/errors.hpp"
#include "springbal/parallel.hpp"

namespace springbal {

namespace {

constexpr double kPi = std::numbers::pi;

// Full parameter vector: [k_q(3), q_free(3), k_phi(3), phi_free(3)].
using Full = std::array<double, 12>;

Full to_full(const SpringSet& s) {
  Full f{};
  for (int i = 0; i < 3; ++i) {
    f[i] = s.k_q(i);
    f[3 + i] = s.q_free(i);
    f[6 + i] = s.k_phi(i);
    f[9 + i] = s.phi_free(i);
  }
  return f;
}

SpringSet from_full(const Full& f) {
  SpringSet s;
  for (int i = 0; i < 3; ++i) {
    s.k_q(i) = f[i];
    s.q_free(i) = f[3 + i];
    s.k_phi(i) = f[6 + i];
    s.phi_free(i) = f[9 + i];
  }
  return s;
}

// Indices into Full used by a mode, in the mode's parameter order.
std::vector<int> mode_indices(BalancingMode mode) {
  switch (mode) {
    case BalancingMode::kMode0: return {};
    case BalancingMode::kMode1: return {0, 1, 2, 3, 4, 5};
    case BalancingMode::kMode2: return {6, 7, 8, 9, 10, 11};
    case BalancingMode::kMode3: return {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11};
  }
  return {};
}

bool is_stiffness(int full_index) { return full_index < 3 || (full_index >= 6 && full_index < 9); }

Vec3 torque_at(const PathSamples& s, std::size_t j, const Full& f) {
  Vec3 tau = s.tau_g[j];
  Vec3 passive;
  for (int i = 0; i < 3; ++i) {
    tau(i) += f[i] * normalize_angle(s.q[j](i) - f[3 + i]);
    passive(i) = f[6 + i] * normalize_angle(s.phi[j](i) - f[9 + i]);
  }
  return tau + s.J_phiq_t[j] * passive;
}

double cost_of(const PathSamples& s, const Full& f) {
  double sum = 0.0;
  for (std::size_t j = 0; j < s.size(); ++j) sum += torque_at(s, j, f).squaredNorm();
  return 0.5 * sum / static_cast<double>(s.size());
}

// Gauss-Newton pieces of M over the free indices: H = J'J / N, g = J'r / N.
void normal_equations(const PathSamples& s, const Full& f, const std::vector<int>& free,
                      Eigen::MatrixXd& H, Eigen::VectorXd& g) {
  const int p = static_cast<int>(free.size());
  H.setZero(p, p);
  g.setZero(p);
  Eigen::Matrix<double, 3, Eigen::Dynamic> Jr(3, p);
  for (std::size_t j = 0; j < s.size(); ++j) {
    Vec3 dq, dphi;
    for (int i = 0; i < 3; ++i) {
      dq(i) = normalize_angle(s.q[j](i) - f[3 + i]);
      dphi(i) = normalize_angle(s.phi[j](i) - f[9 + i]);
    }
    Vec3 passive = Vec3(f[6], f[7], f[8]).cwiseProduct(dphi);
    const Vec3 tau = s.tau_g[j] + Vec3(f[0], f[1], f[2]).cwiseProduct(dq) + s.J_phiq_t[j] * passive;
    for (int c = 0; c < p; ++c) {
      const int k = free[c];
      const int i = k % 3;
      Jr.col(c).setZero();
      if (k < 3) {
        Jr(i, c) = dq(i);
      } else if (k < 6) {
        Jr(i, c) = -f[i];
      } else if (k < 9) {
        Jr.col(c) = s.J_phiq_t[j].col(i) * dphi(i);
      } else {
        Jr.col(c) = -f[6 + i] * s.J_phiq_t[j].col(i);
      }
    }
    H.noalias() += Jr.transpose() * Jr;
    g.noalias() += Jr.transpose() * tau;
  }
  const double n = static_cast<double>(s.size());
  H /= n;
  g /= n;
}

// Stiffnesses live in a box; free angles are periodic because deflections are wrapped, so
// they are kept in (-pi, pi] by wrapping rather than clamping.
struct Bounds {
  double k_max;
  double lower(int k) const { return is_stiffness(k) ? 0.0 : -kPi; }
  double upper(int k) const { return is_stiffness(k) ? k_max : kPi; }
  double clamp(int k, double v) const {
    return is_stiffness(k) ? std::clamp(v, 0.0, k_max) : normalize_angle(v);
  }
  bool pinned(int k, double v, double gradient) const {
    if (!is_stiffness(k)) return false;
    return (v <= 0.0 && gradient > 0.0) || (v >= k_max && gradient < 0.0);
  }
};

struct Run {
  Full x{};
  double cost = 0.0;
  std::vector<double> history;
  int iterations = 0;
};

// Levenberg-Marquardt with Marquardt scaling; stiffness bounds are handled by projection,
// and stiffnesses pinned at a bound with an outward gradient are frozen for the step.
Run levenberg_marquardt(const PathSamples& s, Full x, const std::vector<int>& vars,
                        const Bounds& bounds, const SolverOptions& opt) {
  for (int k : vars) x[k] = bounds.clamp(k, x[k]);
  Run run;
  double cost = cost_of(s, x);
  run.history.push_back(cost);

  Eigen::MatrixXd H;
  Eigen::VectorXd g;
  double mu = -1.0;
  for (int iter = 0; iter < opt.max_iterations; ++iter) {
    run.iterations = iter + 1;
    normal_equations(s, x, vars, H, g);

    std::vector<int> active;
    double pg2 = 0.0;
    for (int c = 0; c < static_cast<int>(vars.size()); ++c) {
      if (!bounds.pinned(vars[c], x[vars[c]], g(c))) {
        active.push_back(c);
        pg2 += g(c) * g(c);
      }
    }
    if (std::sqrt(pg2) < opt.gradient_tolerance || active.empty()) break;

    const int m = static_cast<int>(active.size());
    Eigen::MatrixXd Ha(m, m);
    Eigen::VectorXd ga(m), scale(m);
    double diag_max = 0.0;
    for (int a = 0; a < m; ++a) {
      ga(a) = g(active[a]);
      for (int b = 0; b < m; ++b) Ha(a, b) = H(active[a], active[b]);
      diag_max = std::max(diag_max, Ha(a, a));
    }
    const double floor = std::max(diag_max * 1e-12, 1e-300);
    for (int a = 0; a < m; ++a) scale(a) = std::max(Ha(a, a), floor);
    if (mu < 0.0) mu = 1e-3;

    bool accepted = false;
    double step = 0.0;
    while (mu < 1e20) {
      Eigen::MatrixXd lhs = Ha;
      lhs.diagonal() += mu * scale;
      const Eigen::VectorXd delta = lhs.ldlt().solve(-ga);
      Full trial = x;
      for (int a = 0; a < m; ++a) {
        const int k = vars[active[a]];
        trial[k] = bounds.clamp(k, x[k] + delta(a));
      }
      const double trial_cost = cost_of(s, trial);
      if (std::isfinite(trial_cost) && trial_cost < cost) {
        step = 0.0;
        for (int k : vars) {
          const double d = is_stiffness(k) ? trial[k] - x[k] : normalize_angle(trial[k] - x[k]);
          step += d * d;
        }
        step = std::sqrt(step);
        x = trial;
        cost = trial_cost;
        run.history.push_back(cost);
        mu = std::max(mu / 3.0, 1e-12);
        accepted = true;
        break;
      }
      mu *= 4.0;
    }
    if (!accepted || step < opt.step_tolerance) break;
  }
  run.x = x;
  run.cost = cost;
  return run;
}

// Circular mean of each column, so a path crossing +-pi unwraps around a stable reference.
Vec3 circular_mean(const std::vector<Vec3>& rows) {
  Vec3 c = Vec3::Zero(), s = Vec3::Zero();
  for (const Vec3& r : rows) {
    c += r.array().cos().matrix();
    s += r.array().sin().matrix();
  }
  Vec3 m;
  for (int i = 0; i < 3; ++i) m(i) = std::atan2(s(i), c(i));
  return m;
}

// With the wrap cut kept off the path, torque is linear in (k, k * free): a spring whose
// free angle is fitted contributes k * q - b with b = k * free. Keeping every deflection in
// (-pi, pi] bounds b between k * (q_max - pi) and k * (q_min + pi), so the seed is a small
// convex QP. Its optimum is the best feasible stationary point over all active sets, and
// each spring has four: interior, k = 0, or b on either edge.
Full linear_seed(const PathSamples& s, const Full& init, const std::vector<int>& vars,
                 const Bounds& bounds) {
  const auto in = [&](int k) { return std::find(vars.begin(), vars.end(), k) != vars.end(); };
  constexpr double kEdgeMargin = 1e-6;

  struct Unknown {
    int block;  // 0 active, 1 passive
    int leg;
    bool with_free;
    double b_per_k_low = 0.0, b_per_k_high = 0.0;
  };
  std::vector<Unknown> unknowns;
  Full base = init;
  for (int block = 0; block < 2; ++block) {
    for (int i = 0; i < 3; ++i) {
      const int kk = 6 * block + i;
      if (!in(kk)) continue;
      unknowns.push_back({block, i, in(kk + 3)});
      base[kk] = 0.0;
    }
  }
  if (unknowns.empty()) return init;

  const Vec3 q_ref = circular_mean(s.q), phi_ref = circular_mean(s.phi);
  auto unwrapped = [&](const Unknown& u, std::size_t j) {
    const double ref = u.block == 0 ? q_ref(u.leg) : phi_ref(u.leg);
    const double a = u.block == 0 ? s.q[j](u.leg) : s.phi[j](u.leg);
    return ref + normalize_angle(a - ref);
  };
  for (Unknown& u : unknowns) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t j = 0; j < s.size(); ++j) {
      lo = std::min(lo, unwrapped(u, j));
      hi = std::max(hi, unwrapped(u, j));
    }
    u.b_per_k_low = hi - kPi + kEdgeMargin;
    u.b_per_k_high = lo + kPi - kEdgeMargin;
  }

  // Full column set: per unknown a stiffness column, then (if fitted) a b column.
  std::vector<int> first_col;
  int cols = 0;
  for (const Unknown& u : unknowns) {
    first_col.push_back(cols);
    cols += u.with_free ? 2 : 1;
  }
  Eigen::MatrixXd AtA = Eigen::MatrixXd::Zero(cols, cols);
  Eigen::VectorXd Atb = Eigen::VectorXd::Zero(cols);
  Eigen::Matrix<double, 3, Eigen::Dynamic> row(3, cols);
  for (std::size_t j = 0; j < s.size(); ++j) {
    for (std::size_t n = 0; n < unknowns.size(); ++n) {
      const Unknown& u = unknowns[n];
      const Vec3 dir = u.block == 0 ? Vec3::Unit(u.leg) : Vec3(s.J_phiq_t[j].col(u.leg));
      const double angle = u.with_free ? unwrapped(u, j)
                                       : normalize_angle((u.block == 0 ? s.q[j](u.leg) : s.phi[j](u.leg)) -
                                                         init[6 * u.block + 3 + u.leg]);
      row.col(first_col[n]) = dir * angle;
      if (u.with_free) row.col(first_col[n] + 1) = -dir;
    }
    AtA.noalias() += row.transpose() * row;
    Atb.noalias() -= row.transpose() * torque_at(s, j, base);
  }

  const std::size_t n_unknowns = unknowns.size();
  std::size_t combos = 1;
  for (const Unknown& u : unknowns) combos *= u.with_free ? 4 : 2;

  Eigen::VectorXd sol = Eigen::VectorXd::Zero(cols);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t code = 0; code < combos; ++code) {
    // Reduced variables y with x = T y.
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(cols, 2 * static_cast<int>(n_unknowns));
    std::vector<int> option(n_unknowns);
    int m = 0;
    std::size_t rest = code;
    for (std::size_t n = 0; n < n_unknowns; ++n) {
      const Unknown& u = unknowns[n];
      const std::size_t radix = u.with_free ? 4 : 2;
      option[n] = static_cast<int>(rest % radix);
      rest /= radix;
      const int c = first_col[n];
      switch (option[n]) {
        case 0:
          T(c, m++) = 1.0;
          if (u.with_free) T(c + 1, m++) = 1.0;
          break;
        case 1:
          break;
        case 2:
          T(c, m) = 1.0;
          T(c + 1, m++) = u.b_per_k_low;
          break;
        case 3:
          T(c, m) = 1.0;
          T(c + 1, m++) = u.b_per_k_high;
          break;
      }
    }
    Eigen::VectorXd x = Eigen::VectorXd::Zero(cols);
    if (m > 0) {
      const Eigen::MatrixXd Tm = T.leftCols(m);
      const Eigen::VectorXd y =
          (Tm.transpose() * AtA * Tm).completeOrthogonalDecomposition().solve(Tm.transpose() * Atb);
      x = Tm * y;
    }
    bool feasible = true;
    for (std::size_t n = 0; n < n_unknowns && feasible; ++n) {
      const double k = x(first_col[n]);
      feasible = k >= 0.0;
      if (feasible && unknowns[n].with_free && option[n] == 0) {
        const double b = x(first_col[n] + 1);
        feasible = b >= k * unknowns[n].b_per_k_low && b <= k * unknowns[n].b_per_k_high;
      }
    }
    if (!feasible) continue;
    const double cost = x.dot(AtA * x) - 2.0 * x.dot(Atb);
    if (cost < best) {
      best = cost;
      sol = x;
    }
  }

  Full out = init;
  for (std::size_t n = 0; n < n_unknowns; ++n) {
    const Unknown& u = unknowns[n];
    const int kk = 6 * u.block + u.leg;
    const double k = sol(first_col[n]);
    out[kk] = bounds.clamp(kk, k);
    if (u.with_free) out[kk + 3] = k > 1e-12 ? normalize_angle(sol(first_col[n] + 1) / k) : init[kk + 3];
  }
  return out;
}

}  // namespace

PathSamples sample_path(const std::vector<Pose>& path, const RobotGeometry& geom,
                        const MassModel& mass) {
  const std::size_t n = path.size();
  PathSamples s;
  s.q.resize(n);
  s.phi.resize(n);
  s.J_phiq_t.resize(n);
  s.tau_g.resize(n);
  parallel_for(n, [&](std::size_t j) {
    try {
      const JointConfig joints = inverse_kinematics(path[j], geom);
      const JacobianBundle jac = jacobians(path[j], joints, geom);
      s.q[j] = joints.q_vector();
      s.phi[j] = joints.phi_vector();
      s.J_phiq_t[j] = jac.J_phiq.transpose();
      s.tau_g[j] = gravity_torque(path[j], joints, jac, geom, mass);
    } catch (const PathError&) {
      throw;
    } catch (const Error& e) {
      throw PathError(j, e);
    }
  });
  return s;
}

TorqueTable torque_samples(const PathSamples& samples, const SpringSet& springs) {
  const Full f = to_full(springs);
  TorqueTable out(samples.size());
  for (std::size_t j = 0; j < samples.size(); ++j) out[j] = torque_at(samples, j, f);
  return out;
}

TorqueTable torque_samples(const std::vector<Pose>& path, const RobotGeometry& geom,
                           const MassModel& mass, const SpringSet& springs) {
  return torque_samples(sample_path(path, geom, mass), springs);
}

double mean_cost(const PathSamples& samples, const SpringSet& springs) {
  if (samples.size() == 0) return 0.0;
  return cost_of(samples, to_full(springs));
}

std::vector<double> pack_parameters(BalancingMode mode, const SpringSet& springs) {
  const Full f = to_full(springs);
  std::vector<double> out;
  for (int k : mode_indices(mode)) out.push_back(f[k]);
  return out;
}

SpringSet unpack_parameters(BalancingMode mode, const std::vector<double>& params) {
  const std::vector<int> idx = mode_indices(mode);
  if (params.size() != idx.size()) {
    throw Error(ErrorCode::kBoundsViolation, "parameter vector has the wrong length");
  }
  Full f{};
  for (std::size_t c = 0; c < idx.size(); ++c) f[idx[c]] = params[c];
  return from_full(f);
}

OptimizationResult optimize_springs(const PathSamples& samples, BalancingMode mode,
                                    const SpringSet& init, const SolverOptions& options) {
  if (mode == BalancingMode::kMode0) {
    throw Error(ErrorCode::kBoundsViolation, "mode0 has no spring parameters");
  }
  if (samples.size() == 0) throw Error(ErrorCode::kBoundsViolation, "empty path");
  const std::vector<int> idx = mode_indices(mode);
  if (!options.mask.empty() && options.mask.size() != idx.size()) {
    throw Error(ErrorCode::kBoundsViolation, "mask length does not match the mode");
  }
  const Bounds bounds{options.stiffness_max};

  // Parameters outside the mode are cleared; the rest must start inside the box.
  Full start0 = to_full(init);
  Full cleared{};
  for (int k : idx) {
    const double v = start0[k];
    if (!std::isfinite(v) || v < bounds.lower(k) || v > bounds.upper(k)) {
      throw Error(ErrorCode::kBoundsViolation,
                  "initial parameter " + std::to_string(k) + " = " + std::to_string(v) + " out of bounds");
    }
    cleared[k] = v;
  }
  start0 = cleared;

  std::vector<int> vars;
  for (std::size_t c = 0; c < idx.size(); ++c) {
    if (options.mask.empty() || options.mask[c]) vars.push_back(idx[c]);
  }

  const int starts = std::max(1, options.starts);
  std::vector<Full> seeds(starts, start0);
  if (starts > 1) seeds[1] = linear_seed(samples, start0, vars, bounds);
  for (int n = 2; n < starts; ++n) {
    std::mt19937_64 rng(options.seed + static_cast<std::uint64_t>(n));
    std::uniform_real_distribution<double> k(0.0, std::min(options.random_stiffness_max, bounds.k_max));
    std::uniform_real_distribution<double> a(-kPi, kPi);
    for (int v : vars) seeds[n][v] = is_stiffness(v) ? k(rng) : a(rng);
  }

  std::vector<Run> runs(starts);
  parallel_for(static_cast<std::size_t>(starts), [&](std::size_t n) {
    runs[n] = levenberg_marquardt(samples, seeds[n], vars, bounds, options);
  });

  int best = 0;
  for (int n = 1; n < starts; ++n) {
    if (runs[n].cost < runs[best].cost) best = n;
  }

  OptimizationResult result;
  result.mode = mode;
  result.initial_cost = cost_of(samples, start0);
  if (runs[best].cost < result.initial_cost) {
    result.springs = from_full(runs[best].x);
    result.final_cost = runs[best].cost;
    result.cost_history = runs[best].history;
    result.iterations = runs[best].iterations;
    result.best_start = best;
    result.improved = true;
  } else {
    result.springs = from_full(start0);
    result.final_cost = result.initial_cost;
    result.cost_history = {result.initial_cost};
  }
  result.torques = torque_samples(samples, result.springs);
  try {
    result.e_tau = e_tau(result.torques, samples.tau_g);
  } catch (const Error&) {
    result.e_tau = Vec3::Constant(std::numeric_limits<double>::quiet_NaN());
  }
  return result;
}

OptimizationResult optimize_springs(const std::vector<Pose>& path, const RobotGeometry& geom,
                                    const MassModel& mass, BalancingMode mode,
                                    const SpringSet& init, const SolverOptions& options) {
  return optimize_springs(sample_path(path, geom, mass), mode, init, options);
}

Vec3 e_tau(const TorqueTable& mode_table, const TorqueTable& baseline_table, double guard) {
  if (mode_table.size() != baseline_table.size()) {
    throw Error(ErrorCode::kBoundsViolation, "torque tables differ in length");
  }
  Vec3 out;
  for (int i = 0; i < 3; ++i) {
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t j = 0; j < mode_table.size(); ++j) {
      const double base = baseline_table[j](i);
      if (std::abs(base) < guard) continue;
      const double ratio = mode_table[j](i) / base;
      sum += ratio * ratio;
      ++count;
    }
    if (count == 0) {
      throw Error(ErrorCode::kAllGuarded,
                  "every baseline torque of leg " + std::to_string(i + 1) + " is below the guard");
    }
    out(i) = std::sqrt(sum / static_cast<double>(count));
  }
  return out;
}

}  // namespace springbal
