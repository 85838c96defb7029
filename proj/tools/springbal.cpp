// Command-line front end: each verb runs the pipeline up to its stage and writes the bundle.

#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "springbal/errors.hpp"
#include "springbal/parallel.hpp"
#include "springbal/report.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

struct Options {
  std::string config;
  std::string out;
  int threads = 0;
  bool strict = false;
};

int exit_code(const springbal::Error& e) {
  using springbal::ErrorCode;
  return e.code() == ErrorCode::kConfig || e.code() == ErrorCode::kIo ? kExitConfig : kExitNumeric;
}

int run_stage(const Options& o, springbal::Stage stage) {
  springbal::StudyConfig cfg = springbal::load_config(o.config, o.strict);
  for (const std::string& w : cfg.warnings) std::cerr << "warning: " << w << "\n";
  if (!o.out.empty()) cfg.output_dir = o.out;
  const springbal::ReportBundle b = springbal::run_study(cfg, stage);
  std::cout << springbal::summary_table(b);
  std::cout << "wrote " << b.files.size() << " files to " << cfg.output_dir.string() << "\n";
  return 0;
}

int report(const Options& o) {
  std::filesystem::path dir = o.out;
  if (dir.empty()) {
    if (o.config.empty()) {
      throw springbal::Error(springbal::ErrorCode::kConfig, "report needs --out or --config");
    }
    dir = springbal::load_config(o.config, o.strict).output_dir;
  }
  std::cout << springbal::summarize_directory(dir);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Static balancing study for planar 3-RRR parallel robots"};
  app.require_subcommand(1);
  Options opts;

  struct Verb {
    const char* name;
    const char* help;
    springbal::Stage stage;
  };
  const Verb verbs[] = {
      {"workspace", "scan the dexterous workspace and its task sub-workspace", springbal::Stage::kWorkspace},
      {"place", "also choose the task placement", springbal::Stage::kPlace},
      {"optimize", "also optimise springs for every configured mode", springbal::Stage::kOptimize},
      {"cam", "also synthesise and evaluate the wire cams", springbal::Stage::kCam},
      {"run", "full pipeline with report", springbal::Stage::kReport},
  };
  springbal::Stage chosen = springbal::Stage::kReport;
  bool summarize = false;

  auto common = [&opts](CLI::App* sub, bool need_config) {
    auto* c = sub->add_option("--config", opts.config, "study config file")->check(CLI::ExistingFile);
    if (need_config) c->required();
    sub->add_option("--out", opts.out, "output directory (overrides the config)");
    sub->add_option("--threads", opts.threads, "worker thread cap, 0 for all cores")
        ->check(CLI::NonNegativeNumber);
    sub->add_flag("--strict", opts.strict, "require every section and reject unknown keys");
  };
  for (const Verb& v : verbs) {
    CLI::App* sub = app.add_subcommand(v.name, v.help);
    common(sub, true);
    sub->callback([&chosen, stage = v.stage] { chosen = stage; });
  }
  CLI::App* rep = app.add_subcommand("report", "print the e_tau table of a finished run");
  common(rep, false);
  rep->callback([&summarize] { summarize = true; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (opts.threads > 0) springbal::set_worker_threads(opts.threads);
    return summarize ? report(opts) : run_stage(opts, chosen);
  } catch (const springbal::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
}
