#pragma once

#include <limits>
#include <numbers>
#include <vector>

#include "springbal/kinematics.hpp"

namespace springbal {

inline constexpr double kDegree = std::numbers::pi / 180.0;

struct TaskSpec {
  double task_radius = 0.05;                  // m
  double orientation_range = 30.0 * kDegree;  // platform must reach +-range
  int spiral_points = 1500;
  double spiral_turns = 12.0;

  void validate() const;
};

struct ScanOptions {
  double azimuth_resolution = 1.0 * kDegree;
  double orientation_resolution = 5.0 * kDegree;
  double radial_tolerance = 1e-4;  // m
  // Azimuth window scanned from the origin; a full circle when half_width >= pi.
  double azimuth_half_width = std::numbers::pi;

  // Full circle for WL, +-120 deg for NL.
  static ScanOptions for_layout(Layout layout);
};

struct PolarSample {
  double azimuth = 0.0;
  double radius = 0.0;
};

// Feasible task-centre interval along one azimuth ray.
struct SubBoundarySample {
  double azimuth = 0.0;
  double inner = 0.0;
  double outer = 0.0;
  bool valid = false;
};

// Candidate task centre. Torque fields are NaN until placement evaluates the centre.
struct GridPoint {
  Vec2 centre = Vec2::Zero();
  double mode0_mean_torque = std::numeric_limits<double>::quiet_NaN();  // over the spiral, best gamma
  double best_reduction = std::numeric_limits<double>::quiet_NaN();
  double best_gamma = std::numeric_limits<double>::quiet_NaN();
};

struct WorkspaceMap {
  std::vector<double> orientations;
  std::vector<std::vector<PolarSample>> per_orientation;  // [orientation][azimuth]
  std::vector<PolarSample> boundary;                      // dexterous: min over orientations
  bool full_circle = true;

  double eroded_by = 0.0;
  std::vector<SubBoundarySample> sub_boundary;
  std::vector<GridPoint> grid;  // candidate task centres inside the sub-workspace

  // Closed polygon of the dexterous boundary; includes the origin for partial scans.
  std::vector<Vec2> boundary_polygon() const;
  bool contains(const Vec2& p) const;
  double distance_to_boundary(const Vec2& p) const;
  // True if a disk of the given radius about c fits inside the dexterous polygon.
  bool disk_fits(const Vec2& c, double radius) const;
};

// Orientation samples covering [-range, range] at the given resolution, both ends included.
std::vector<double> orientation_samples(double range, double resolution);

// Largest radius along the azimuth at which the pose stays reachable; exponential growth
// followed by bisection. Returns a negative value when the origin itself is unreachable.
double max_reachable_radius(const RobotGeometry& geom, double azimuth, double gamma,
                            double tolerance);

// Throws Error(kEmptyWorkspace) when no azimuth is reachable at every orientation.
WorkspaceMap scan_dexterous_workspace(const RobotGeometry& geom, const TaskSpec& task,
                                      const ScanOptions& options);

// Erodes the dexterous region by the task disk and lays a candidate grid inside it.
// Throws Error(kEmptyWorkspace) when nothing survives.
WorkspaceMap compute_sub_workspace(const WorkspaceMap& map, const TaskSpec& task,
                                   double grid_spacing = 0.005, double radial_tolerance = 1e-4);

// Archimedean spiral from the centre out to task_radius at constant orientation.
std::vector<Pose> spiral_path(const Vec2& centre, double gamma, const TaskSpec& task);

}  // namespace springbal
