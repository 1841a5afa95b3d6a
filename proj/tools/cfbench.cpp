// cfbench: run car-following scenarios and convergence studies.
//
//   cfbench simulate  --preset smooth --scheme rk4 --h 0.1 --out traj.csv
//   cfbench converge  --config study.json --out results/
//   cfbench reference --preset creep
//   cfbench presets
//
// Exit status: 0 success, 1 I/O failure, 2 configuration error, 3 crash.

#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "carfollow/config.hpp"
#include "carfollow/convergence.hpp"
#include "carfollow/error.hpp"
#include "carfollow/io.hpp"

using namespace carfollow;

namespace {

constexpr int kExitIo = 1;
constexpr int kExitConfig = 2;
constexpr int kExitCrash = 3;

struct Source {
  std::string config;
  std::string preset;
};

void add_source(CLI::App* cmd, Source& src) {
  auto* c = cmd->add_option("--config", src.config, "JSON study config");
  auto* p = cmd->add_option("--preset", src.preset, "built-in study (see 'presets')");
  c->excludes(p);
  p->excludes(c);
}

StudyConfig load(const Source& src) {
  if (!src.config.empty()) return load_config(src.config);
  if (!src.preset.empty()) return preset_config(src.preset);
  throw Error(ErrorCode::kConfig, "one of --config or --preset is required");
}

// Compact step label for file names ("0.1", not "0.10000000000000001").
std::string step_label(double h) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", h);
  return buf;
}

std::string join_path(const std::string& dir, const std::string& file) {
  if (dir.empty() || dir == ".") return file;
  return dir.back() == '/' ? dir + file : dir + "/" + file;
}

int cmd_simulate(const Source& src, const std::string& scheme_name, double h,
                 const std::string& out) {
  const StudyConfig cfg = load(src);
  Scheme scheme;
  try {
    scheme = scheme_from_string(scheme_name);
  } catch (const Error& e) {
    throw Error(ErrorCode::kConfig, std::string("--scheme: ") + e.what());
  }
  steps_per_interval(cfg.scenario.record_interval, h);

  const TrajectoryRecord rec = run(cfg.scenario, scheme, h);
  std::ostringstream csv;
  write_trajectory_csv(csv, rec, {{"scenario", cfg.name}});
  std::string path = out;
  if (path.empty()) {
    path = join_path(cfg.output_dir, cfg.name + "_" +
                                         std::string(to_string(scheme)) + "_h" +
                                         step_label(h) + ".csv");
  }
  write_file(path, csv.str());
  std::printf("wrote %s (%zu samples x %zu vehicles)\n", path.c_str(),
              rec.sample_count(), rec.vehicle_count());
  if (rec.crashed) {
    std::fprintf(stderr, "CRASH: %s\n", rec.crash_message.c_str());
    return kExitCrash;
  }
  return 0;
}

int cmd_converge(const Source& src, const std::vector<std::string>& schemes,
                 const std::vector<double>& steps, const std::string& out) {
  StudyConfig cfg = load(src);
  if (!schemes.empty()) {
    cfg.schemes.clear();
    for (const auto& s : schemes) {
      try {
        cfg.schemes.push_back(scheme_from_string(s));
      } catch (const Error& e) {
        throw Error(ErrorCode::kConfig, std::string("--scheme: ") + e.what());
      }
    }
  }
  if (!steps.empty()) cfg.steps = steps;
  if (!out.empty()) cfg.output_dir = out;

  StudyOptions opt;
  opt.schemes = cfg.schemes;
  opt.steps = cfg.steps;
  opt.workers = default_worker_count();
  opt.reference_step = cfg.reference_step;
  for (double h : opt.steps) steps_per_interval(cfg.scenario.record_interval, h);

  const StudyReport report = run_study(cfg.scenario, opt);

  std::ostringstream csv;
  write_convergence_csv(csv, cfg.name, report.results);
  const std::string csv_path = join_path(cfg.output_dir, cfg.name + "_convergence.csv");
  const std::string gp_path = join_path(cfg.output_dir, cfg.name + "_convergence.gp");
  write_file(csv_path, csv.str());
  write_file(gp_path, gnuplot_script(cfg.name, report.results,
                                     cfg.name + "_convergence.png"));
  std::fputs(study_summary(cfg.name, report).c_str(), stdout);
  std::printf("wrote %s and %s\n", csv_path.c_str(), gp_path.c_str());
  return 0;
}

int cmd_reference(const Source& src, const std::string& out) {
  const StudyConfig cfg = load(src);
  const ReferenceSolution ref =
      compute_reference(cfg.scenario, cfg.reference_step, default_worker_count());
  std::ostringstream csv;
  write_trajectory_csv(csv, ref.record,
                       {{"scenario", cfg.name},
                        {"comparator_error", format_double(ref.comparator_error)},
                        {"roundoff_floor", format_double(ref.roundoff_floor)},
                        {"error_vehicle", std::to_string(ref.error_vehicle)}});
  const std::string path =
      out.empty() ? join_path(cfg.output_dir, cfg.name + "_reference.csv") : out;
  write_file(path, csv.str());
  std::printf("wrote %s (comparator_error=%s)\n", path.c_str(),
              format_double(ref.comparator_error).c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fixed-step integration benchmark for car-following models"};
  app.set_help_flag("--help", "print help");  // -h would clash with --h
  app.require_subcommand(1);

  Source sim_src, conv_src, ref_src;
  std::string sim_scheme = "rk4", sim_out, conv_out, ref_out;
  double sim_h = 0.1;
  std::vector<std::string> conv_schemes;
  std::vector<double> conv_steps;

  auto* sim = app.add_subcommand("simulate", "run one scheme at one step and write the trajectory CSV");
  add_source(sim, sim_src);
  sim->add_option("--scheme", sim_scheme, "euler, ballistic, trapezoidal or rk4")
      ->capture_default_str();
  sim->add_option("--h", sim_h, "step size in seconds; must divide 2.4")
      ->capture_default_str();
  sim->add_option("--out", sim_out, "output CSV path");

  auto* conv = app.add_subcommand("converge", "run a convergence study");
  add_source(conv, conv_src);
  conv->add_option("--scheme", conv_schemes, "restrict to these schemes (repeatable)");
  conv->add_option("--h", conv_steps, "step sizes replacing the configured list");
  conv->add_option("--out", conv_out, "output directory");

  auto* ref = app.add_subcommand("reference", "compute and write the reference trajectory");
  add_source(ref, ref_src);
  ref->add_option("--out", ref_out, "output CSV path");

  auto* presets = app.add_subcommand("presets", "list the built-in studies");
  std::string show;
  presets->add_option("name", show, "print this preset's JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*sim) return cmd_simulate(sim_src, sim_scheme, sim_h, sim_out);
    if (*conv) return cmd_converge(conv_src, conv_schemes, conv_steps, conv_out);
    if (*ref) return cmd_reference(ref_src, ref_out);
    if (*presets) {
      if (!show.empty()) {
        std::printf("%s\n", preset_json(show).c_str());
      } else {
        for (const auto& n : preset_names()) std::printf("%s\n", n.c_str());
      }
      return 0;
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "%s: %s\n", to_string(e.code()), e.what());
    switch (e.code()) {
      case ErrorCode::kCrash: return kExitCrash;
      case ErrorCode::kIo: return kExitIo;
      default: return kExitConfig;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitIo;
  }
  return 0;
}
