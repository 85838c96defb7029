#include "springbal/workspace.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "springbal/errors.hpp"
#include "springbal/parallel.hpp"

namespace springbal {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  const double s = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
  return (p - (a + s * ab)).norm();
}

std::vector<double> azimuth_samples(const ScanOptions& o) {
  std::vector<double> out;
  if (o.azimuth_half_width >= std::numbers::pi) {
    const int n = std::max(3, static_cast<int>(std::lround(kTwoPi / o.azimuth_resolution)));
    for (int k = 0; k < n; ++k) out.push_back(-std::numbers::pi + kTwoPi * k / n);
  } else {
    const int n =
        std::max(1, static_cast<int>(std::lround(2.0 * o.azimuth_half_width / o.azimuth_resolution)));
    for (int k = 0; k <= n; ++k) out.push_back(-o.azimuth_half_width + 2.0 * o.azimuth_half_width * k / n);
  }
  return out;
}

// Upper bound on any reachable platform radius; the exponential search never goes past it.
double reach_bound(const RobotGeometry& g) {
  double r = 0.0;
  for (int i = 0; i < 3; ++i) r = std::max(r, g.base[i].norm() + g.platform[i].norm());
  return r + g.proximal_length + g.distal_length;
}

}  // namespace

void TaskSpec::validate() const {
  if (!(task_radius >= 0.0)) throw Error(ErrorCode::kConfig, "task_radius must be >= 0");
  if (!(orientation_range > 0.0)) throw Error(ErrorCode::kConfig, "orientation_range must be > 0");
  if (spiral_points < 2) throw Error(ErrorCode::kConfig, "spiral_points must be >= 2");
  if (!(spiral_turns >= 0.0)) throw Error(ErrorCode::kConfig, "spiral_turns must be >= 0");
}

ScanOptions ScanOptions::for_layout(Layout layout) {
  ScanOptions o;
  if (layout == Layout::kNarrow) o.azimuth_half_width = 120.0 * kDegree;
  return o;
}

std::vector<double> orientation_samples(double range, double resolution) {
  const int n = std::max(1, static_cast<int>(std::ceil(2.0 * range / resolution - 1e-9)));
  std::vector<double> out;
  for (int k = 0; k <= n; ++k) out.push_back(-range + 2.0 * range * k / n);
  return out;
}

double max_reachable_radius(const RobotGeometry& geom, double azimuth, double gamma,
                            double tolerance) {
  const Vec2 dir = unit(azimuth);
  auto ok = [&](double r) { return is_reachable(Pose(r * dir, gamma), geom); };
  if (!ok(0.0)) return -1.0;

  const double bound = reach_bound(geom);
  double lo = 0.0, hi = tolerance;
  while (ok(hi)) {
    lo = hi;
    hi *= 2.0;
    if (hi > bound) {
      hi = bound;
      if (ok(hi)) return hi;
      break;
    }
  }
  while (hi - lo > tolerance) {
    const double mid = 0.5 * (lo + hi);
    (ok(mid) ? lo : hi) = mid;
  }
  return lo;
}

WorkspaceMap scan_dexterous_workspace(const RobotGeometry& geom, const TaskSpec& task,
                                      const ScanOptions& options) {
  geom.validate();
  task.validate();
  if (!(options.azimuth_resolution > 0.0) || !(options.orientation_resolution > 0.0) ||
      !(options.radial_tolerance > 0.0)) {
    throw Error(ErrorCode::kConfig, "scan resolutions must be > 0");
  }

  WorkspaceMap map;
  map.full_circle = options.azimuth_half_width >= std::numbers::pi;
  map.orientations = orientation_samples(task.orientation_range, options.orientation_resolution);
  const std::vector<double> az = azimuth_samples(options);
  const std::size_t n_or = map.orientations.size(), n_az = az.size();

  std::vector<double> radii(n_or * n_az);
  parallel_for(radii.size(), [&](std::size_t idx) {
    const std::size_t o = idx / n_az, a = idx % n_az;
    radii[idx] = max_reachable_radius(geom, az[a], map.orientations[o], options.radial_tolerance);
  });

  map.per_orientation.assign(n_or, {});
  map.boundary.resize(n_az);
  for (std::size_t a = 0; a < n_az; ++a) map.boundary[a] = {az[a], std::numeric_limits<double>::infinity()};
  for (std::size_t o = 0; o < n_or; ++o) {
    for (std::size_t a = 0; a < n_az; ++a) {
      const double r = radii[o * n_az + a];
      if (r < 0.0) {
        throw Error(ErrorCode::kEmptyWorkspace,
                    "origin unreachable at orientation " + std::to_string(map.orientations[o]));
      }
      map.per_orientation[o].push_back({az[a], r});
      map.boundary[a].radius = std::min(map.boundary[a].radius, r);
    }
  }
  return map;
}

std::vector<Vec2> WorkspaceMap::boundary_polygon() const {
  std::vector<Vec2> poly;
  if (!full_circle) poly.push_back(Vec2::Zero());
  for (const auto& s : boundary) poly.push_back(s.radius * unit(s.azimuth));
  return poly;
}

bool WorkspaceMap::contains(const Vec2& p) const {
  const std::vector<Vec2> poly = boundary_polygon();
  bool inside = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[j];
    if ((a.y() > p.y()) != (b.y() > p.y())) {
      const double x = a.x() + (p.y() - a.y()) * (b.x() - a.x()) / (b.y() - a.y());
      if (p.x() < x) inside = !inside;
    }
  }
  return inside || distance_to_boundary(p) == 0.0;
}

double WorkspaceMap::distance_to_boundary(const Vec2& p) const {
  const std::vector<Vec2> poly = boundary_polygon();
  double d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    d = std::min(d, segment_distance(p, poly[j], poly[i]));
  }
  return d;
}

bool WorkspaceMap::disk_fits(const Vec2& c, double radius) const {
  return contains(c) && distance_to_boundary(c) >= radius;
}

WorkspaceMap compute_sub_workspace(const WorkspaceMap& map, const TaskSpec& task,
                                   double grid_spacing, double radial_tolerance) {
  task.validate();
  if (map.boundary.empty()) throw Error(ErrorCode::kEmptyWorkspace, "no dexterous boundary");
  if (!(grid_spacing > 0.0) || !(radial_tolerance > 0.0)) {
    throw Error(ErrorCode::kConfig, "grid spacing and tolerance must be > 0");
  }

  WorkspaceMap out = map;
  out.eroded_by = task.task_radius;
  out.sub_boundary.assign(map.boundary.size(), {});
  out.grid.clear();
  const double rho = task.task_radius;

  parallel_for(map.boundary.size(), [&](std::size_t a) {
    const PolarSample& b = map.boundary[a];
    SubBoundarySample& s = out.sub_boundary[a];
    s.azimuth = b.azimuth;
    if (rho == 0.0) {
      s = {b.azimuth, 0.0, b.radius, true};
      return;
    }
    const Vec2 dir = unit(b.azimuth);
    auto fits = [&](double r) { return map.disk_fits(r * dir, rho); };

    constexpr double kCoarse = 1e-3;
    const int n = static_cast<int>(std::ceil(b.radius / kCoarse));
    int first = -1, last = -1;
    for (int k = 0; k <= n; ++k) {
      if (fits(std::min(k * kCoarse, b.radius))) {
        if (first < 0) first = k;
        last = k;
      }
    }
    if (first < 0) return;

    auto refine = [&](double in, double outside) {
      while (std::abs(outside - in) > radial_tolerance) {
        const double mid = 0.5 * (in + outside);
        (fits(mid) ? in : outside) = mid;
      }
      return in;
    };
    s.inner = first == 0 ? 0.0 : refine(first * kCoarse, (first - 1) * kCoarse);
    s.outer = std::min(last * kCoarse, b.radius);
    if (last < n) s.outer = refine(s.outer, (last + 1) * kCoarse);
    s.valid = true;
  });

  double extent = 0.0;
  for (const auto& b : map.boundary) extent = std::max(extent, b.radius);
  const int m = static_cast<int>(std::floor(extent / grid_spacing));
  for (int iy = -m; iy <= m; ++iy) {
    for (int ix = -m; ix <= m; ++ix) {
      const Vec2 c(ix * grid_spacing, iy * grid_spacing);
      if (map.disk_fits(c, rho)) out.grid.push_back({c});
    }
  }
  if (out.grid.empty()) {
    throw Error(ErrorCode::kEmptyWorkspace,
                "no task centre fits with task radius " + std::to_string(rho));
  }
  return out;
}

std::vector<Pose> spiral_path(const Vec2& centre, double gamma, const TaskSpec& task) {
  task.validate();
  const int n = task.spiral_points;
  const double last = n - 1;
  std::vector<Pose> path;
  path.reserve(n);
  for (int j = 0; j < n; ++j) {
    const double r = task.task_radius * j / last;
    const double angle = kTwoPi * std::fmod(task.spiral_turns * j, last) / last;
    path.emplace_back(centre + r * Vec2(std::cos(angle), std::sin(angle)), gamma);
  }
  return path;
}

}  // namespace springbal
