#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "springbal/placement.hpp"
#include "springbal/wirecam.hpp"

namespace springbal {

// One study: robot, task, balancing modes, cams, solver settings and output location.
// Text form: INI sections of `key = value` lines; `#` or `;` start a comment line.
struct StudyConfig {
  std::string name = "study";
  RobotGeometry geometry = RobotGeometry::wide_default();
  MassModel mass = MassModel::defaults();
  TaskSpec task;
  ScanOptions scan = ScanOptions::for_layout(Layout::kWide);
  double grid_spacing = 0.01;  // m, candidate task centres
  std::vector<double> orientations = default_candidate_orientations();
  PlacementOptions placement;
  std::vector<BalancingMode> modes{BalancingMode::kMode1, BalancingMode::kMode2,
                                   BalancingMode::kMode3};
  SolverOptions solver;
  SpringSet initial_springs;  // optimiser start point, also the fallback when nothing improves
  std::array<WireCamGeometry, 3> cams{};
  SynthesisOptions synthesis;
  int modal_order = kModalOrder;
  std::filesystem::path output_dir = "out";
  bool svg = false;

  std::string source;                 // exact text the config was parsed from
  std::vector<std::string> warnings;  // unknown keys tolerated outside strict mode
};

// Throws Error(kConfig) naming the line, section or key at fault. Strict mode requires every
// section and rejects unknown keys; otherwise missing sections keep their defaults.
StudyConfig parse_config(std::string_view text, bool strict = true);
StudyConfig load_config(const std::filesystem::path& path, bool strict = true);

// Sections that strict mode requires.
const std::vector<std::string>& required_sections();

}  // namespace springbal
