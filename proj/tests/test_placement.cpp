#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "springbal/errors.hpp"
#include "springbal/placement.hpp"

using namespace springbal;

namespace {

TaskSpec short_task() {
  TaskSpec task;
  task.spiral_points = 300;
  return task;
}

}  // namespace

TEST_CASE("single candidate is returned") {
  const RobotGeometry g = RobotGeometry::wide_default();
  WorkspaceMap map;
  map.grid.push_back({Vec2(0.01, 0.02)});
  const PlacementResult r =
      optimal_task_location(map, g, MassModel::defaults(), short_task(), {-10.0 * kDegree});
  CHECK(r.centre == Vec2(0.01, 0.02));
  CHECK(r.gamma == doctest::Approx(-10.0 * kDegree));
  CHECK(r.best == 0);
  CHECK(map.grid[0].best_gamma == doctest::Approx(-10.0 * kDegree));
}

TEST_CASE("empty grid and failed candidates") {
  const RobotGeometry g = RobotGeometry::wide_default();
  WorkspaceMap empty;
  CHECK_THROWS_AS(optimal_task_location(empty, g, MassModel::defaults(), short_task(), {0.0}), Error);

  WorkspaceMap map;
  map.grid.push_back({Vec2(0.5, 0.0)});  // unreachable spiral
  map.grid.push_back({Vec2(0.0, 0.0)});
  const PlacementResult r = optimal_task_location(map, g, MassModel::defaults(), short_task(), {0.0});
  CHECK(r.skipped == 1);
  CHECK_FALSE(r.candidates[0].ok);
  CHECK_FALSE(r.candidates[0].message.empty());
  CHECK(r.best == 1);

  WorkspaceMap bad;
  bad.grid.push_back({Vec2(0.5, 0.0)});
  CHECK_THROWS_AS(optimal_task_location(bad, g, MassModel::defaults(), short_task(), {0.0}), Error);
}

TEST_CASE("placement is the argmax of the recorded reductions") {
  for (const RobotGeometry& g : {RobotGeometry::wide_default(), RobotGeometry::narrow_default()}) {
    const TaskSpec task = short_task();
    WorkspaceMap map = compute_sub_workspace(
        scan_dexterous_workspace(g, task, ScanOptions::for_layout(g.layout)), task, 0.02);
    const auto gammas = default_candidate_orientations();
    const PlacementResult r = optimal_task_location(map, g, MassModel::defaults(), task, gammas);

    REQUIRE(r.candidates.size() == map.grid.size() * gammas.size());
    const PlacementCandidate& best = r.candidates[r.best];
    CHECK(best.ok);
    CHECK(r.centre == best.centre);
    for (const PlacementCandidate& c : r.candidates) {
      if (!c.ok || (r.sign_definite_only && !c.sign_definite)) continue;
      CHECK(c.reduction <= best.reduction);
    }
    for (const PlacementCandidate& c : r.candidates) {
      if (!c.ok) continue;
      CHECK(c.mode0_mean_torque <= r.candidates[r.max_torque].mode0_mean_torque);
      CHECK(c.mode0_mean_torque >= r.candidates[r.min_torque].mode0_mean_torque);
    }

    // Re-evaluate the top three with a full multi-start optimisation; the order must hold.
    std::vector<std::size_t> order;
    for (std::size_t k = 0; k < r.candidates.size(); ++k) {
      const auto& c = r.candidates[k];
      if (c.ok && (!r.sign_definite_only || c.sign_definite)) order.push_back(k);
    }
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return r.candidates[a].reduction > r.candidates[b].reduction;
    });
    REQUIRE(order.size() >= 3);
    std::vector<double> redo;
    for (int t = 0; t < 3; ++t) {
      const auto& c = r.candidates[order[t]];
      redo.push_back(evaluate_placement(c.centre, c.gamma, g, MassModel::defaults(), task, SolverOptions{})
                         .reduction);
      CHECK(redo.back() >= c.reduction - 1e-9);
    }
    CHECK(redo[0] >= redo[1] - 1e-3);
    CHECK(redo[1] >= redo[2] - 1e-3);
  }
}

TEST_CASE("default orientation set contains the reference orientations") {
  const auto gammas = default_candidate_orientations();
  REQUIRE(gammas.size() == 7);
  auto has = [&](double deg) {
    return std::any_of(gammas.begin(), gammas.end(),
                       [&](double v) { return std::abs(v - deg * kDegree) < 1e-12; });
  };
  CHECK(has(-10.0));
  CHECK(has(0.0));
  CHECK(has(-30.0));
  CHECK(has(30.0));
}
