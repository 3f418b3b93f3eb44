// Command-line front end: builds the resting icosahedron, runs the static
// obstacle and adhesion experiments, integrates the penalised dynamics, and
// runs the verification suite. Each subcommand reads a JSON config and writes
// OBJ/CSV/JSON artifacts into the output directory.

#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "capsid/io.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_given = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "JSON run configuration")->required();
  cmd->add_option("--out", args.out_dir, "Output directory (overrides the config)");
  cmd->add_option("--seed", args.seed, "Seed for the randomized verify vectors")
      ->each([&args](const std::string&) { args.seed_given = true; });
}

capsid::RunConfig load(const CommonArgs& args, capsid::Experiment experiment) {
  capsid::RunConfig config = capsid::load_config(args.config_path);
  // The subcommand is authoritative; a conflicting config is a typo.
  if (config.experiment_specified && config.experiment != experiment) {
    throw capsid::ConfigError("config experiment '" + capsid::to_string(config.experiment) +
                              "' does not match subcommand '" + capsid::to_string(experiment) +
                              "'");
  }
  config.experiment = experiment;
  if (!args.out_dir.empty()) config.output_dir = args.out_dir;
  if (args.seed_given) config.seed = args.seed;
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Icosahedral capsid deformation over a rigid plane"};
  app.require_subcommand(1);

  CommonArgs args;
  bool dump_matrices = false;

  CLI::App* geometry = app.add_subcommand("geometry", "Write the reference configuration");
  add_common(geometry, args);
  geometry->add_flag("--dump-matrices", dump_matrices,
                     "Also dump Sigma, Theta, Upsilon as plain-text matrices");

  CLI::App* static_cmd = app.add_subcommand("static", "Obstacle problem under an applied force");
  add_common(static_cmd, args);

  CLI::App* equilibrium = app.add_subcommand("equilibrium", "Released-force adhesion equilibrium");
  add_common(equilibrium, args);

  CLI::App* dynamics = app.add_subcommand("dynamics", "Penalised elastodynamics for one kappa");
  add_common(dynamics, args);

  CLI::App* sweep = app.add_subcommand("sweep", "Penalty continuation over a kappa schedule");
  add_common(sweep, args);

  CLI::App* verify = app.add_subcommand("verify", "Run the invariant suite");
  add_common(verify, args);

  CLI11_PARSE(app, argc, argv);

  try {
    if (geometry->parsed()) {
      return capsid::run_geometry(load(args, capsid::Experiment::Geometry), dump_matrices);
    }
    if (static_cmd->parsed()) {
      return capsid::run_static(load(args, capsid::Experiment::Static));
    }
    if (equilibrium->parsed()) {
      return capsid::run_equilibrium(load(args, capsid::Experiment::Equilibrium));
    }
    if (dynamics->parsed()) {
      return capsid::run_dynamics(load(args, capsid::Experiment::Dynamics));
    }
    if (sweep->parsed()) {
      return capsid::run_sweep(load(args, capsid::Experiment::Sweep));
    }
    if (verify->parsed()) {
      return capsid::run_verify(load(args, capsid::Experiment::Verify));
    }
  } catch (const capsid::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
