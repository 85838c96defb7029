#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "springbal/config.hpp"

namespace springbal {

// Pipeline stages in order; a run executes every stage up to and including the requested one.
enum class Stage { kWorkspace, kPlace, kOptimize, kCam, kReport };
const char* to_string(Stage stage);

// Torque-norm ratio (balanced / unbalanced) at task centres; NaN where it is undefined.
struct ContourGrid {
  std::vector<Vec2> points;
  std::vector<double> ratio;
};

ContourGrid torque_ratio_field(const std::vector<Vec2>& centres, double gamma,
                               const RobotGeometry& geom, const MassModel& mass,
                               const SpringSet& springs);
// Pointwise ratio of two torque tables sampled at `points`.
ContourGrid ratio_grid(const std::vector<Vec2>& points, const TorqueTable& balanced,
                       const TorqueTable& baseline);
ContourGrid cam_ratio_field(const std::vector<Vec2>& centres, double gamma, const RobotGeometry& geom,
                            const MassModel& mass, const std::array<JointCam, 3>& cams);

// Writes `x,y,ratio` rows; with svg set, also a heat map next to it (same stem, .svg).
// Throws Error(kIo) or Error(kConfig) for an empty grid.
void emit_contour(const ContourGrid& grid, const std::filesystem::path& csv, bool svg = false);
ContourGrid read_contour(const std::filesystem::path& csv);

struct ModeOutcome {
  OptimizationResult result;
  ContourGrid contour;
};

struct ReportBundle {
  std::string name;
  std::string config_hash;  // SHA-256 of the config text
  Stage last = Stage::kReport;
  WorkspaceMap workspace;
  std::optional<PlacementResult> placement;
  std::vector<Pose> path;  // spiral about the chosen placement
  TorqueTable baseline;    // Mode 0 torque along the path
  std::vector<ModeOutcome> modes;
  std::optional<std::array<JointCam, 3>> cams;
  CamBalance cam_balance;
  ContourGrid cam_contour;
  std::vector<std::string> files;  // relative to the output directory, in write order
  std::vector<std::pair<std::string, double>> timings;  // seconds per stage
};

// Runs the pipeline and writes its CSV bundle, summary and manifest to config.output_dir.
// Errors keep their code and gain the stage name; on failure nothing new is left behind.
ReportBundle run_study(const StudyConfig& config, Stage last = Stage::kReport);

// Human-readable tables at 3 significant digits.
std::string summary_table(const ReportBundle& bundle);
// Re-renders the e_tau table of a finished run from its output directory.
std::string summarize_directory(const std::filesystem::path& dir);

std::string format_significant(double value, int digits = 3);
std::string sha256_hex(std::string_view data);

// Header plus rows of numbers at 17 significant digits, optionally led by a text label column.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::string> labels;  // empty when the first column is numeric
  std::vector<std::vector<double>> rows;
};
void write_csv(const std::filesystem::path& path, const CsvTable& table);
CsvTable read_csv(const std::filesystem::path& path);

}  // namespace springbal
