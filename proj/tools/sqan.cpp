// Batch front-end for the squeezer-analyzer measurement-chain toolkit.
//
// Subcommands map 1:1 onto scenarios; all physics comes from the JSON config,
// with a few common overrides exposed as flags. The worker count is taken from
// the SQAN_WORKERS environment variable only, so that configs stay portable
// and outputs stay byte-identical across machines.

#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "sqan/errors.hpp"
#include "sqan/experiment/config.hpp"
#include "sqan/experiment/runner.hpp"
#include "sqan/version.hpp"

namespace {

int worker_count_from_env() {
  const char* env = std::getenv("SQAN_WORKERS");
  if (!env) return 0;  // 0 -> hardware concurrency
  try {
    const int n = std::stoi(env);
    return n > 0 ? n : 0;
  } catch (...) {
    return 0;
  }
}

struct CommonFlags {
  std::string config_path;
  std::string out_dir;
  std::string seed;
  std::string traj;
  std::string emit;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config_path, "experiment config file (JSON)")->required();
  cmd->add_option("--out", f.out_dir, "output directory (overrides config)");
  cmd->add_option("--seed", f.seed, "master seed (overrides config)");
  cmd->add_option("--traj", f.traj, "trajectories per class (overrides config)");
  cmd->add_option("--emit", f.emit, "comma-separated output formats: csv,json");
}

sqan::ExperimentConfig load_with_overrides(const CommonFlags& f, sqan::Scenario expected) {
  sqan::ExperimentConfig cfg = sqan::load_config(f.config_path);
  if (cfg.scenario != expected)
    throw sqan::config_error(std::string("config scenario '") + sqan::to_string(cfg.scenario) +
                             "' does not match the subcommand ('" + sqan::to_string(expected) +
                             "')");
  if (!f.out_dir.empty()) cfg.output.dir = f.out_dir;
  if (!f.seed.empty()) cfg.controls.seed = std::stoull(f.seed);
  if (!f.traj.empty()) cfg.controls.n_traj = std::stoll(f.traj);
  if (!f.emit.empty()) {
    cfg.output.emit_csv = f.emit.find("csv") != std::string::npos;
    cfg.output.emit_json = f.emit.find("json") != std::string::npos;
    if (!cfg.output.emit_csv && !cfg.output.emit_json)
      throw sqan::config_error("--emit must name at least one of csv,json");
  }
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sqan - two-oscillator measurement-chain simulator and analysis toolkit"};
  app.set_version_flag("--version", std::string(sqan::kVersion));
  app.require_subcommand(1);

  struct Sub {
    const char* name;
    const char* help;
    sqan::Scenario scenario;
  };
  const Sub subs[] = {
      {"simulate", "single-shot classification run (shots + metrics)", sqan::Scenario::classify},
      {"sweep", "two-parameter scan of the normalized metrics", sqan::Scenario::sweep2d},
      {"noise", "classical-noise study over a phase scan", sqan::Scenario::noise_study},
      {"readout", "qubit-readout map over (phi1, chi)", sqan::Scenario::readout_map},
      {"linear", "closed-form linear-chain report", sqan::Scenario::linear_analysis},
      {"convert", "SNAIL <-> effective parameter conversion", sqan::Scenario::convert_params},
  };
  CommonFlags flags[6];
  for (std::size_t k = 0; k < 6; ++k) {
    CLI::App* cmd = app.add_subcommand(subs[k].name, subs[k].help);
    add_common(cmd, flags[k]);
  }

  CLI11_PARSE(app, argc, argv);

  for (std::size_t k = 0; k < 6; ++k) {
    if (!app.get_subcommand(subs[k].name)->parsed()) continue;
    try {
      const sqan::ExperimentConfig cfg = load_with_overrides(flags[k], subs[k].scenario);
      sqan::run_scenario(cfg, worker_count_from_env());
      return 0;
    } catch (const sqan::config_error& e) {
      std::cerr << "config error: " << e.what() << "\n";
      return 2;
    } catch (const std::invalid_argument& e) {
      std::cerr << "config error: " << e.what() << "\n";
      return 2;
    } catch (const sqan::physics_error& e) {
      std::cerr << "physics error: " << e.what() << "\n";
      return 3;
    } catch (const sqan::io_error& e) {
      std::cerr << "io error: " << e.what() << "\n";
      return 4;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 1;
    }
  }
  return 2;
}
