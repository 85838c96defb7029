#include "springbal/report.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "springbal/errors.hpp"
#include "springbal/parallel.hpp"

namespace springbal {

namespace fs = std::filesystem;

namespace {

constexpr const char* kVersion = "1.0.0";

std::string number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

bool parse_number(const std::string& s, double& v) {
  if (s.empty()) return false;
  char* end = nullptr;
  v = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size();
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  out.close();
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
}

double torque_ratio(const Vec3& balanced, const Vec3& baseline) {
  const double base = baseline.norm();
  return base > kTorqueGuard ? balanced.norm() / base : std::numeric_limits<double>::quiet_NaN();
}

// Blue (low) to red (high) over [0, top].
std::string heat_colour(double v, double top) {
  if (!std::isfinite(v)) return "#cccccc";
  const double s = std::clamp(v / top, 0.0, 1.0);
  const int r = static_cast<int>(std::lround(255.0 * s));
  const int b = static_cast<int>(std::lround(255.0 * (1.0 - s)));
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x40%02x", r, b);
  return buf;
}

std::string contour_svg(const ContourGrid& g) {
  double x0 = g.points[0].x(), x1 = x0, y0 = g.points[0].y(), y1 = y0, top = 0.0;
  for (std::size_t i = 0; i < g.points.size(); ++i) {
    x0 = std::min(x0, g.points[i].x());
    x1 = std::max(x1, g.points[i].x());
    y0 = std::min(y0, g.points[i].y());
    y1 = std::max(y1, g.points[i].y());
    if (std::isfinite(g.ratio[i])) top = std::max(top, g.ratio[i]);
  }
  if (!(top > 0.0)) top = 1.0;
  // Cell size: smallest non-zero spacing between points, or a unit cell for a single point.
  double cell = 0.0;
  for (std::size_t i = 1; i < g.points.size(); ++i) {
    for (double d : {std::abs(g.points[i].x() - g.points[0].x()), std::abs(g.points[i].y() - g.points[0].y())}) {
      if (d > 1e-12 && (cell == 0.0 || d < cell)) cell = d;
    }
  }
  if (cell == 0.0) cell = 0.01;
  constexpr double kScale = 4000.0;  // px per m
  const double w = (x1 - x0 + cell) * kScale, h = (y1 - y0 + cell) * kScale;
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << number(w) << "\" height=\""
    << number(h + 20.0) << "\">\n";
  for (std::size_t i = 0; i < g.points.size(); ++i) {
    const double px = (g.points[i].x() - x0) * kScale;
    const double py = (y1 - g.points[i].y()) * kScale;
    s << "<rect x=\"" << number(px) << "\" y=\"" << number(py) << "\" width=\"" << number(cell * kScale)
      << "\" height=\"" << number(cell * kScale) << "\" fill=\"" << heat_colour(g.ratio[i], top)
      << "\"><title>" << number(g.ratio[i]) << "</title></rect>\n";
  }
  s << "<text x=\"2\" y=\"" << number(h + 15.0) << "\" font-size=\"12\">ratio 0 (blue) to "
    << format_significant(top) << " (red)</text>\n</svg>\n";
  return s.str();
}

CsvTable contour_table(const ContourGrid& g) {
  CsvTable t{{"x", "y", "ratio"}, {}, {}};
  for (std::size_t i = 0; i < g.points.size(); ++i) {
    t.rows.push_back({g.points[i].x(), g.points[i].y(), g.ratio[i]});
  }
  return t;
}

std::string mode_label(BalancingMode m) { return "mode" + std::to_string(static_cast<int>(m)); }

double mean_of(const Vec3& v) { return (v(0) + v(1) + v(2)) / 3.0; }

}  // namespace

const char* to_string(Stage stage) {
  switch (stage) {
    case Stage::kWorkspace: return "workspace";
    case Stage::kPlace: return "place";
    case Stage::kOptimize: return "optimize";
    case Stage::kCam: return "cam";
    case Stage::kReport: return "report";
  }
  return "?";
}

std::string format_significant(double value, int digits) {
  if (std::isnan(value)) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*g", digits, value == 0.0 ? 0.0 : value);
  return buf;
}

std::string sha256_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::kIo, "SHA-256 digest failed");
  }
  std::ostringstream s;
  for (unsigned int i = 0; i < len; ++i) s << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return s.str();
}

void write_csv(const fs::path& path, const CsvTable& table) {
  if (!table.labels.empty() && table.labels.size() != table.rows.size()) {
    throw Error(ErrorCode::kConfig, "csv labels do not match rows");
  }
  std::string text;
  for (std::size_t c = 0; c < table.header.size(); ++c) text += (c ? "," : "") + table.header[c];
  text += '\n';
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    bool first = true;
    if (!table.labels.empty()) {
      text += table.labels[r];
      first = false;
    }
    for (double v : table.rows[r]) {
      if (!first) text += ',';
      text += number(v);
      first = false;
    }
    text += '\n';
  }
  write_file(path, text);
}

CsvTable read_csv(const fs::path& path) {
  std::istringstream in(read_file(path));
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::kIo, path.string() + ": missing header");
  t.header = split(line, ',');
  bool labelled = false;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    std::vector<std::string> cells = split(line, ',');
    if (cells.size() != t.header.size()) {
      throw Error(ErrorCode::kIo, path.string() + ": row " + std::to_string(n) + " has " +
                                      std::to_string(cells.size()) + " fields");
    }
    double v = 0.0;
    if (n == 1) labelled = !parse_number(cells[0], v);
    if (labelled) {
      t.labels.push_back(cells[0]);
      cells.erase(cells.begin());
    }
    std::vector<double> row;
    for (const std::string& c : cells) {
      if (!parse_number(c, v)) throw Error(ErrorCode::kIo, path.string() + ": bad number '" + c + "'");
      row.push_back(v);
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

ContourGrid torque_ratio_field(const std::vector<Vec2>& centres, double gamma,
                               const RobotGeometry& geom, const MassModel& mass,
                               const SpringSet& springs) {
  ContourGrid g{centres, std::vector<double>(centres.size())};
  parallel_for(centres.size(), [&](std::size_t i) {
    try {
      const Pose pose(centres[i], gamma);
      const JointConfig j = inverse_kinematics(pose, geom);
      const JacobianBundle jac = jacobians(pose, j, geom);
      g.ratio[i] = torque_ratio(actuator_torque(pose, j, jac, geom, mass, springs),
                                gravity_torque(pose, j, jac, geom, mass));
    } catch (const Error&) {
      g.ratio[i] = std::numeric_limits<double>::quiet_NaN();
    }
  });
  return g;
}

ContourGrid ratio_grid(const std::vector<Vec2>& points, const TorqueTable& balanced,
                       const TorqueTable& baseline) {
  if (balanced.size() != points.size() || baseline.size() != points.size()) {
    throw Error(ErrorCode::kConfig, "ratio grid: torque tables do not match the points");
  }
  ContourGrid g{points, std::vector<double>(points.size())};
  for (std::size_t i = 0; i < points.size(); ++i) g.ratio[i] = torque_ratio(balanced[i], baseline[i]);
  return g;
}

ContourGrid cam_ratio_field(const std::vector<Vec2>& centres, double gamma, const RobotGeometry& geom,
                            const MassModel& mass, const std::array<JointCam, 3>& cams) {
  ContourGrid g{centres, std::vector<double>(centres.size())};
  parallel_for(centres.size(), [&](std::size_t i) {
    g.ratio[i] = std::numeric_limits<double>::quiet_NaN();
    try {
      const Pose pose(centres[i], gamma);
      const JointConfig j = inverse_kinematics(pose, geom);
      const Vec3 base = gravity_torque(pose, j, jacobians(pose, j, geom), geom, mass);
      Vec3 cam;
      for (int leg = 0; leg < 3; ++leg) {
        const CamDesign& d = cams[leg].design;
        const double t = cam_rotation(j.q[leg], d.geom.q0, 0.5 * (d.theta_lo + d.theta_hi));
        if (t < d.theta_lo || t > d.theta_hi) return;  // outside the cam's design range
        cam(leg) = -cams[leg].fit(std::numbers::pi / 2.0 - t);
      }
      g.ratio[i] = torque_ratio(base + cam, base);
    } catch (const Error&) {
    }
  });
  return g;
}

void emit_contour(const ContourGrid& grid, const fs::path& csv, bool svg) {
  if (grid.points.empty()) throw Error(ErrorCode::kConfig, "contour grid is empty");
  if (grid.points.size() != grid.ratio.size()) {
    throw Error(ErrorCode::kConfig, "contour grid points and values differ in length");
  }
  write_csv(csv, contour_table(grid));
  if (svg) {
    fs::path p = csv;
    write_file(p.replace_extension(".svg"), contour_svg(grid));
  }
}

ContourGrid read_contour(const fs::path& csv) {
  const CsvTable t = read_csv(csv);
  if (t.header != std::vector<std::string>{"x", "y", "ratio"} || !t.labels.empty()) {
    throw Error(ErrorCode::kIo, csv.string() + ": not a contour table");
  }
  ContourGrid g;
  for (const auto& r : t.rows) {
    g.points.emplace_back(r[0], r[1]);
    g.ratio.push_back(r[2]);
  }
  return g;
}

ReportBundle run_study(const StudyConfig& cfg, Stage last) {
  using Clock = std::chrono::steady_clock;
  ReportBundle b;
  b.name = cfg.name;
  b.config_hash = sha256_hex(cfg.source);
  b.last = last;

  auto stage = [&](const char* name, auto&& body) {
    const auto t0 = Clock::now();
    try {
      body();
    } catch (const Error& e) {
      throw Error(e.code(), std::string(name) + ": " + e.detail());
    }
    b.timings.emplace_back(name, std::chrono::duration<double>(Clock::now() - t0).count());
  };

  const RobotGeometry& geom = cfg.geometry;
  stage("workspace", [&] {
    const WorkspaceMap map = scan_dexterous_workspace(geom, cfg.task, cfg.scan);
    b.workspace = compute_sub_workspace(map, cfg.task, cfg.grid_spacing, cfg.scan.radial_tolerance);
  });

  PathSamples samples;
  std::vector<Vec2> centres;
  if (last >= Stage::kPlace) {
    stage("placement", [&] {
      b.placement = optimal_task_location(b.workspace, geom, cfg.mass, cfg.task, cfg.orientations,
                                          cfg.placement);
      b.path = spiral_path(b.placement->centre, b.placement->gamma, cfg.task);
    });
    for (const GridPoint& p : b.workspace.grid) centres.push_back(p.centre);
  }
  if (last >= Stage::kOptimize) {
    stage("optimization", [&] {
      samples = sample_path(b.path, geom, cfg.mass);
      b.baseline = samples.tau_g;
      for (BalancingMode mode : cfg.modes) {
        ModeOutcome m;
        m.result = optimize_springs(samples, mode, cfg.initial_springs, cfg.solver);
        m.contour = torque_ratio_field(centres, b.placement->gamma, geom, cfg.mass, m.result.springs);
        b.modes.push_back(std::move(m));
      }
    });
  }
  if (last >= Stage::kCam) {
    stage("cams", [&] {
      if (samples.size() == 0) samples = sample_path(b.path, geom, cfg.mass);
      b.cams = design_cams(samples, cfg.cams, cfg.synthesis, cfg.modal_order);
      const auto& c = *b.cams;
      b.cam_balance = balance_with_cams(samples, {&c[0], &c[1], &c[2]});
      b.cam_contour = cam_ratio_field(centres, b.placement->gamma, geom, cfg.mass, c);
    });
  }

  stage("output", [&] {
    std::error_code ec;
    fs::create_directories(cfg.output_dir, ec);
    if (ec) throw Error(ErrorCode::kIo, "cannot create " + cfg.output_dir.string() + ": " + ec.message());
    const fs::path staging = cfg.output_dir / ".staging";
    fs::remove_all(staging, ec);
    fs::create_directory(staging, ec);
    if (ec) throw Error(ErrorCode::kIo, "cannot create " + staging.string() + ": " + ec.message());

    try {
      auto csv = [&](const std::string& name, const CsvTable& t) {
        write_csv(staging / name, t);
        b.files.push_back(name);
      };

      CsvTable boundary{{"azimuth", "radius", "x", "y"}, {}, {}};
      for (const PolarSample& s : b.workspace.boundary) {
        boundary.rows.push_back({s.azimuth, s.radius, s.radius * std::cos(s.azimuth),
                                 s.radius * std::sin(s.azimuth)});
      }
      csv("boundary.csv", boundary);
      CsvTable per{{"gamma", "azimuth", "radius"}, {}, {}};
      for (std::size_t o = 0; o < b.workspace.orientations.size(); ++o) {
        for (const PolarSample& s : b.workspace.per_orientation[o]) {
          per.rows.push_back({b.workspace.orientations[o], s.azimuth, s.radius});
        }
      }
      csv("boundary_per_orientation.csv", per);
      CsvTable sub{{"azimuth", "inner", "outer", "valid"}, {}, {}};
      for (const SubBoundarySample& s : b.workspace.sub_boundary) {
        sub.rows.push_back({s.azimuth, s.inner, s.outer, s.valid ? 1.0 : 0.0});
      }
      csv("sub_workspace.csv", sub);

      if (b.placement) {
        CsvTable grid{{"x", "y", "mode0_mean_torque", "best_reduction", "best_gamma"}, {}, {}};
        for (const GridPoint& p : b.workspace.grid) {
          grid.rows.push_back({p.centre.x(), p.centre.y(), p.mode0_mean_torque, p.best_reduction, p.best_gamma});
        }
        csv("grid.csv", grid);
        CsvTable cand{{"x", "y", "gamma", "mode0_mean_torque", "mode1_mean_torque", "reduction",
                       "sign_ratio", "sign_definite", "ok"}, {}, {}};
        for (const PlacementCandidate& c : b.placement->candidates) {
          cand.rows.push_back({c.centre.x(), c.centre.y(), c.gamma, c.mode0_mean_torque,
                               c.mode1_mean_torque, c.reduction, c.sign_ratio,
                               c.sign_definite ? 1.0 : 0.0, c.ok ? 1.0 : 0.0});
        }
        csv("placement_candidates.csv", cand);
        CsvTable chosen{{"role", "x", "y", "gamma", "mode0_mean_torque", "mode1_mean_torque", "reduction"}, {}, {}};
        const std::pair<const char*, std::size_t> roles[] = {{"best", b.placement->best},
                                                             {"max_torque", b.placement->max_torque},
                                                             {"min_torque", b.placement->min_torque}};
        for (const auto& [role, idx] : roles) {
          const PlacementCandidate& c = b.placement->candidates[idx];
          chosen.labels.push_back(role);
          chosen.rows.push_back({c.centre.x(), c.centre.y(), c.gamma, c.mode0_mean_torque,
                                 c.mode1_mean_torque, c.reduction});
        }
        csv("placement.csv", chosen);
      }

      if (!b.baseline.empty()) {
        CsvTable springs{{"mode", "k_q1", "k_q2", "k_q3", "q_free1", "q_free2", "q_free3", "k_phi1",
                          "k_phi2", "k_phi3", "phi_free1", "phi_free2", "phi_free3", "initial_cost",
                          "final_cost", "iterations", "best_start"}, {}, {}};
        CsvTable e{{"balancing", "leg1", "leg2", "leg3", "mean"}, {}, {}};
        for (const ModeOutcome& m : b.modes) {
          const OptimizationResult& r = m.result;
          const SpringSet& s = r.springs;
          springs.labels.push_back(mode_label(r.mode));
          springs.rows.push_back({s.k_q(0), s.k_q(1), s.k_q(2), s.q_free(0), s.q_free(1), s.q_free(2),
                                  s.k_phi(0), s.k_phi(1), s.k_phi(2), s.phi_free(0), s.phi_free(1),
                                  s.phi_free(2), r.initial_cost, r.final_cost,
                                  static_cast<double>(r.iterations), static_cast<double>(r.best_start)});
          e.labels.push_back(mode_label(r.mode));
          e.rows.push_back({r.e_tau(0), r.e_tau(1), r.e_tau(2), mean_of(r.e_tau)});
        }
        if (b.cams) {
          const Vec3& c = b.cam_balance.e_tau;
          e.labels.push_back("cam");
          e.rows.push_back({c(0), c(1), c(2), mean_of(c)});
        }
        csv("springs.csv", springs);
        csv("e_tau.csv", e);

        CsvTable prof{{"index", "x", "y", "gamma", "mode0"}, {}, {}};
        for (const ModeOutcome& m : b.modes) prof.header.push_back(mode_label(m.result.mode));
        if (b.cams) prof.header.push_back("cam");
        for (std::size_t j = 0; j < b.path.size(); ++j) {
          std::vector<double> row{static_cast<double>(j), b.path[j].t.x(), b.path[j].t.y(),
                                  b.path[j].gamma, b.baseline[j].norm()};
          for (const ModeOutcome& m : b.modes) row.push_back(m.result.torques[j].norm());
          if (b.cams) row.push_back(b.cam_balance.torques[j].norm());
          prof.rows.push_back(std::move(row));
        }
        csv("torque_profiles.csv", prof);

        for (const ModeOutcome& m : b.modes) {
          if (m.contour.points.empty()) continue;
          const std::string name = "contour_" + mode_label(m.result.mode) + ".csv";
          emit_contour(m.contour, staging / name, cfg.svg);
          b.files.push_back(name);
          if (cfg.svg) b.files.push_back(fs::path(name).replace_extension(".svg").string());
        }
      }

      if (b.cams) {
        CsvTable designs{{"cam", "q0", "a", "r", "u_t", "k", "wire_case", "theta_lo", "theta_hi",
                          "theta_ref", "length_ref", "attach", "round_trip_error"}, {}, {}};
        for (int p = 0; p <= cfg.modal_order; ++p) designs.header.push_back("b" + std::to_string(p));
        for (int i = 0; i < 3; ++i) {
          const JointCam& jc = (*b.cams)[i];
          const CamDesign& d = jc.design;
          designs.labels.push_back("cam" + std::to_string(i + 1));
          std::vector<double> row{d.geom.q0, d.geom.a, d.geom.r, d.geom.u_t, d.geom.k,
                                  static_cast<double>(static_cast<int>(d.wire_case)), d.theta_lo,
                                  d.theta_hi, d.theta_ref, d.length_ref, d.attach, d.round_trip_error};
          row.insert(row.end(), jc.fit.coeffs.begin(), jc.fit.coeffs.end());
          designs.rows.push_back(std::move(row));

          CsvTable profile{{"phi_tilde", "g", "x", "y"}, {}, {}};
          CsvTable outline{{"x", "y"}, {}, {}};
          const auto& ang = d.profile.angles();
          const auto& rad = d.profile.radii();
          for (std::size_t k = 0; k < ang.size(); ++k) {
            const double x = rad[k] * std::cos(ang[k]), y = rad[k] * std::sin(ang[k]);
            profile.rows.push_back({ang[k], rad[k], x, y});
            outline.rows.push_back({x, y});
          }
          outline.rows.push_back({0.0, 0.0});  // close through the cam axis
          outline.rows.push_back(outline.rows.front());
          csv("cam_profile_" + std::to_string(i + 1) + ".csv", profile);
          csv("cam_outline_" + std::to_string(i + 1) + ".csv", outline);
        }
        csv("cam_designs.csv", designs);
        if (!b.cam_contour.points.empty()) {
          emit_contour(b.cam_contour, staging / "contour_cam.csv", cfg.svg);
          b.files.push_back("contour_cam.csv");
          if (cfg.svg) b.files.push_back("contour_cam.svg");
        }
      }

      write_file(staging / "summary.txt", summary_table(b));
      b.files.push_back("summary.txt");

      nlohmann::ordered_json manifest;
      manifest["name"] = cfg.name;
      manifest["tool_version"] = kVersion;
      manifest["config_sha256"] = b.config_hash;
      manifest["last_stage"] = to_string(last);
      manifest["worker_threads"] = worker_threads();
      manifest["eigen_version"] = std::to_string(EIGEN_WORLD_VERSION) + "." +
                                  std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                  std::to_string(EIGEN_MINOR_VERSION);
      nlohmann::ordered_json files = nlohmann::ordered_json::array();
      for (const std::string& f : b.files) {
        files.push_back({{"file", f}, {"sha256", sha256_hex(read_file(staging / f))}});
      }
      manifest["files"] = files;
      nlohmann::ordered_json times = nlohmann::ordered_json::object();
      for (const auto& [name, sec] : b.timings) times[name] = sec;
      manifest["timings_s"] = times;
      write_file(staging / "manifest.json", manifest.dump(2) + "\n");
      b.files.push_back("manifest.json");

      for (const std::string& f : b.files) fs::rename(staging / f, cfg.output_dir / f);
      fs::remove_all(staging);
    } catch (const fs::filesystem_error& e) {
      fs::remove_all(staging, ec);
      throw Error(ErrorCode::kIo, e.what());
    } catch (...) {
      fs::remove_all(staging, ec);
      throw;
    }
  });
  return b;
}

std::string summary_table(const ReportBundle& b) {
  std::ostringstream s;
  auto cell = [](const std::string& v, int w) {
    std::string out = v;
    if (static_cast<int>(out.size()) < w) out.append(w - out.size(), ' ');
    return out;
  };
  auto sig = [](double v) { return format_significant(v); };
  s << "study " << b.name << "\n";
  s << "config sha256 " << b.config_hash << "\n";
  s << "dexterous sub-workspace: " << b.workspace.grid.size() << " candidate centres\n";
  if (b.placement) {
    const PlacementCandidate& c = b.placement->candidates[b.placement->best];
    s << "placement: centre (" << sig(c.centre.x()) << ", " << sig(c.centre.y()) << ") m, gamma "
      << sig(c.gamma / kDegree) << " deg, Mode 1 torque reduction " << sig(c.reduction) << "\n";
  }
  if (!b.modes.empty() || b.cams) {
    s << "\n" << cell("e_tau", 10) << cell("leg 1", 10) << cell("leg 2", 10) << cell("leg 3", 10)
      << "mean\n";
    auto row = [&](const std::string& label, const Vec3& e) {
      s << cell(label, 10) << cell(sig(e(0)), 10) << cell(sig(e(1)), 10) << cell(sig(e(2)), 10)
        << sig(mean_of(e)) << "\n";
    };
    for (const ModeOutcome& m : b.modes) row("Mode " + std::to_string(static_cast<int>(m.result.mode)), m.result.e_tau);
    if (b.cams) row("Cam", b.cam_balance.e_tau);
  }
  if (b.cams) {
    s << "\n" << cell("cam", 6) << cell("k N/m", 10) << cell("case", 6) << cell("rotation range rad", 22)
      << "round-trip error\n";
    for (int i = 0; i < 3; ++i) {
      const CamDesign& d = (*b.cams)[i].design;
      s << cell(std::to_string(i + 1), 6) << cell(sig(d.geom.k), 10)
        << cell(std::to_string(static_cast<int>(d.wire_case)), 6)
        << cell("[" + sig(d.theta_lo) + ", " + sig(d.theta_hi) + "]", 22) << sig(d.round_trip_error)
        << "\n";
    }
  }
  return s.str();
}

std::string summarize_directory(const fs::path& dir) {
  const CsvTable t = read_csv(dir / "e_tau.csv");
  if (t.labels.size() != t.rows.size() || t.header.size() != 5) {
    throw Error(ErrorCode::kIo, (dir / "e_tau.csv").string() + ": unexpected layout");
  }
  std::ostringstream s;
  s << "e_tau     leg 1     leg 2     leg 3     mean\n";
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    std::string line = t.labels[r];
    line.resize(10, ' ');
    for (std::size_t c = 0; c < 4; ++c) {
      std::string v = format_significant(t.rows[r][c]);
      if (c < 3) v.resize(std::max<std::size_t>(v.size() + 1, 10), ' ');
      line += v;
    }
    s << line << "\n";
  }
  return s.str();
}

}  // namespace springbal
