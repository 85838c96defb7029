#include "springbal/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "springbal/errors.hpp"

namespace springbal {

namespace {

using boost::property_tree::ptree;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ConfigError(0, where + ": " + what);
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  return std::string(s.substr(b, s.find_last_not_of(" \t\r") - b + 1));
}

double to_double(const std::string& where, const std::string& text) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || end != t.data() + t.size() || !std::isfinite(v)) {
    fail(where, "expected a number, got '" + t + "'");
  }
  return v;
}

long to_integer(const std::string& where, const std::string& text) {
  const std::string t = trim(text);
  long v = 0;
  const auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || end != t.data() + t.size()) {
    fail(where, "expected an integer, got '" + t + "'");
  }
  return v;
}

std::vector<double> to_list(const std::string& where, const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(where, item));
  if (out.empty()) fail(where, "expected a comma-separated list");
  return out;
}

Vec3 to_triple(const std::string& where, const std::string& text) {
  const std::vector<double> v = to_list(where, text);
  if (v.size() != 3) fail(where, "expected one value per leg");
  return {v[0], v[1], v[2]};
}

Vec2 to_point(const std::string& where, const std::string& text) {
  const std::vector<double> v = to_list(where, text);
  if (v.size() != 2) fail(where, "expected 'x, y'");
  return {v[0], v[1]};
}

bool to_bool(const std::string& where, const std::string& text) {
  const std::string t = trim(text);
  if (t == "true" || t == "yes" || t == "1") return true;
  if (t == "false" || t == "no" || t == "0") return false;
  fail(where, "expected true or false, got '" + t + "'");
}

// Key handlers of one section; each receives "section.key" and the raw value.
using Handler = std::function<void(const std::string&, const std::string&)>;
using Section = std::map<std::string, Handler>;

}  // namespace

const std::vector<std::string>& required_sections() {
  static const std::vector<std::string> names{"geometry", "mass",  "task", "modes", "solver",
                                              "cam1",     "cam2",  "cam3", "output"};
  return names;
}

StudyConfig parse_config(std::string_view text, bool strict) {
  ptree tree;
  {
    std::istringstream in{std::string(text)};
    try {
      boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
      throw ConfigError(static_cast<int>(e.line()), e.message());
    }
  }

  StudyConfig cfg;
  cfg.source = std::string(text);
  for (const auto& [name, sub] : tree) {
    if (sub.empty() && !sub.data().empty()) fail(name, "key outside any section");
  }

  // The layout picks the default anchors and scan window, so it is read before anything else.
  if (auto geo = tree.get_child_optional("geometry")) {
    if (auto layout = geo->get_optional<std::string>("layout")) {
      const std::string v = trim(*layout);
      if (v == "wide") {
        cfg.geometry = RobotGeometry::wide_default();
      } else if (v == "narrow") {
        cfg.geometry = RobotGeometry::narrow_default();
      } else {
        fail("geometry.layout", "expected wide or narrow, got '" + v + "'");
      }
      cfg.scan = ScanOptions::for_layout(cfg.geometry.layout);
    }
  }

  auto num = [](double& target) {
    return [&target](const std::string& w, const std::string& v) { target = to_double(w, v); };
  };
  auto deg = [](double& target) {
    return [&target](const std::string& w, const std::string& v) { target = to_double(w, v) * kDegree; };
  };
  auto positive_int = [](int& target) {
    return [&target](const std::string& w, const std::string& v) {
      const long n = to_integer(w, v);
      if (n < 1 || n > 100000000) fail(w, "must be a positive integer");
      target = static_cast<int>(n);
    };
  };

  std::map<std::string, Section> sections;
  Section& geo = sections["geometry"];
  geo["layout"] = [](const std::string&, const std::string&) {};
  geo["proximal_length"] = num(cfg.geometry.proximal_length);
  geo["distal_length"] = num(cfg.geometry.distal_length);
  for (int i = 0; i < 3; ++i) {
    geo["base" + std::to_string(i + 1)] = [&cfg, i](const std::string& w, const std::string& v) {
      cfg.geometry.base[i] = to_point(w, v);
    };
    geo["platform" + std::to_string(i + 1)] = [&cfg, i](const std::string& w, const std::string& v) {
      cfg.geometry.platform[i] = to_point(w, v);
    };
  }
  geo["elbow_branch"] = [&cfg](const std::string& w, const std::string& v) {
    const std::string t = trim(v);
    if (t == "positive") {
      cfg.geometry.branch = ElbowBranch::kPositive;
    } else if (t == "negative") {
      cfg.geometry.branch = ElbowBranch::kNegative;
    } else {
      fail(w, "expected positive or negative, got '" + t + "'");
    }
  };

  Section& mass = sections["mass"];
  mass["proximal_mass"] = [&cfg](const std::string& w, const std::string& v) {
    for (auto& leg : cfg.mass.link_mass) leg[0] = to_double(w, v);
  };
  mass["distal_mass"] = [&cfg](const std::string& w, const std::string& v) {
    for (auto& leg : cfg.mass.link_mass) leg[1] = to_double(w, v);
  };
  mass["com_fraction_proximal"] = num(cfg.mass.com_fraction[0]);
  mass["com_fraction_distal"] = num(cfg.mass.com_fraction[1]);
  mass["platform_mass"] = num(cfg.mass.platform_mass);
  mass["gravity"] = num(cfg.mass.gravity);

  Section& task = sections["task"];
  task["task_radius"] = num(cfg.task.task_radius);
  task["orientation_range_deg"] = deg(cfg.task.orientation_range);
  task["spiral_points"] = positive_int(cfg.task.spiral_points);
  task["spiral_turns"] = num(cfg.task.spiral_turns);

  Section& scan = sections["scan"];
  scan["azimuth_resolution_deg"] = deg(cfg.scan.azimuth_resolution);
  scan["orientation_resolution_deg"] = deg(cfg.scan.orientation_resolution);
  scan["azimuth_half_width_deg"] = deg(cfg.scan.azimuth_half_width);
  scan["radial_tolerance"] = num(cfg.scan.radial_tolerance);
  scan["grid_spacing"] = num(cfg.grid_spacing);

  Section& place = sections["placement"];
  place["orientations_deg"] = [&cfg](const std::string& w, const std::string& v) {
    cfg.orientations = to_list(w, v);
    for (double& o : cfg.orientations) o *= kDegree;
  };
  place["sign_margin"] = num(cfg.placement.sign_margin);
  place["prefer_sign_definite"] = [&cfg](const std::string& w, const std::string& v) {
    cfg.placement.prefer_sign_definite = to_bool(w, v);
  };
  place["starts"] = positive_int(cfg.placement.solver.starts);

  sections["modes"]["balance"] = [&cfg](const std::string& w, const std::string& v) {
    cfg.modes.clear();
    for (double m : to_list(w, v)) {
      if (m != 1.0 && m != 2.0 && m != 3.0) fail(w, "modes are 1, 2 or 3");
      const auto mode = static_cast<BalancingMode>(static_cast<int>(m));
      if (std::find(cfg.modes.begin(), cfg.modes.end(), mode) != cfg.modes.end()) {
        fail(w, "mode listed twice");
      }
      cfg.modes.push_back(mode);
    }
  };

  Section& springs = sections["springs"];
  const std::pair<const char*, Vec3*> spring_keys[] = {{"k_q", &cfg.initial_springs.k_q},
                                                       {"q_free", &cfg.initial_springs.q_free},
                                                       {"k_phi", &cfg.initial_springs.k_phi},
                                                       {"phi_free", &cfg.initial_springs.phi_free}};
  for (const auto& [key, dst] : spring_keys) {
    springs[key] = [dst](const std::string& w, const std::string& v) { *dst = to_triple(w, v); };
  }

  Section& solver = sections["solver"];
  solver["starts"] = positive_int(cfg.solver.starts);
  solver["max_iterations"] = positive_int(cfg.solver.max_iterations);
  solver["gradient_tolerance"] = num(cfg.solver.gradient_tolerance);
  solver["step_tolerance"] = num(cfg.solver.step_tolerance);
  solver["stiffness_max"] = num(cfg.solver.stiffness_max);
  solver["random_stiffness_max"] = num(cfg.solver.random_stiffness_max);
  solver["seed"] = [&cfg](const std::string& w, const std::string& v) {
    const long s = to_integer(w, v);
    if (s < 0) fail(w, "seed must be >= 0");
    cfg.solver.seed = static_cast<std::uint64_t>(s);
  };

  for (int i = 0; i < 3; ++i) {
    Section& cam = sections["cam" + std::to_string(i + 1)];
    WireCamGeometry& g = cfg.cams[i];
    cam["q0"] = num(g.q0);
    cam["a"] = num(g.a);
    cam["r"] = num(g.r);
    cam["u_t"] = num(g.u_t);
    cam["k"] = num(g.k);
  }
  Section& cams = sections["cams"];
  cams["wire_case"] = [&cfg](const std::string& w, const std::string& v) {
    const std::string t = trim(v);
    if (t == "auto") {
      cfg.synthesis.wire_case = WireCase::kAuto;
      return;
    }
    const long c = to_integer(w, t);
    if (c < 1 || c > 4) fail(w, "expected auto or 1..4");
    cfg.synthesis.wire_case = static_cast<WireCase>(c);
  };
  cams["modal_order"] = [&cfg](const std::string& w, const std::string& v) {
    const long n = to_integer(w, v);
    if (n < 0 || n > 12) fail(w, "must be in 0..12");
    cfg.modal_order = static_cast<int>(n);
  };
  cams["profile_samples"] = positive_int(cfg.synthesis.samples);
  cams["range_margin"] = num(cfg.synthesis.margin);
  cams["round_trip_tolerance"] = num(cfg.synthesis.round_trip_tolerance);

  Section& out = sections["output"];
  out["name"] = [&cfg](const std::string& w, const std::string& v) {
    cfg.name = trim(v);
    if (cfg.name.empty()) fail(w, "must not be empty");
  };
  out["directory"] = [&cfg](const std::string& w, const std::string& v) {
    if (trim(v).empty()) fail(w, "must not be empty");
    cfg.output_dir = trim(v);
  };
  out["svg"] = [&cfg](const std::string& w, const std::string& v) { cfg.svg = to_bool(w, v); };

  if (strict) {
    for (const std::string& s : required_sections()) {
      if (!tree.get_child_optional(s)) fail("section [" + s + "]", "missing (required in strict mode)");
    }
  }
  for (const auto& [name, sub] : tree) {
    const auto it = sections.find(name);
    if (it == sections.end()) {
      if (strict) fail("section [" + name + "]", "unknown section");
      cfg.warnings.push_back("ignored unknown section [" + name + "]");
      continue;
    }
    for (const auto& [key, value] : sub) {
      const std::string where = name + "." + key;
      if (!value.empty()) fail(where, "nested keys are not supported");
      const auto h = it->second.find(key);
      if (h == it->second.end()) {
        if (strict) fail(where, "unknown key");
        cfg.warnings.push_back("ignored unknown key " + where);
        continue;
      }
      h->second(where, value.data());
    }
  }

  auto checked = [](const std::string& section, const auto& item) {
    try {
      item.validate();
    } catch (const Error& e) {
      fail("section [" + section + "]", e.detail());
    }
  };
  checked("geometry", cfg.geometry);
  checked("mass", cfg.mass);
  checked("task", cfg.task);
  for (int i = 0; i < 3; ++i) checked("cam" + std::to_string(i + 1), cfg.cams[i]);
  if (!(cfg.grid_spacing > 0.0)) fail("scan.grid_spacing", "must be > 0");
  if (cfg.orientations.empty()) fail("placement.orientations_deg", "must not be empty");
  if (!(cfg.synthesis.margin >= 0.0)) fail("cams.range_margin", "must be >= 0");
  if (!(cfg.synthesis.round_trip_tolerance > 0.0)) fail("cams.round_trip_tolerance", "must be > 0");
  if (!(cfg.solver.stiffness_max > 0.0)) fail("solver.stiffness_max", "must be > 0");
  return cfg;
}

StudyConfig load_config(const std::filesystem::path& path, bool strict) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kConfig, "cannot read config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), strict);
}

}  // namespace springbal
