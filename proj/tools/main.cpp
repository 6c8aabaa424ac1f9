#include "porestab/runner.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <exception>

namespace {

struct CommonArgs {
  std::string config_path;
  std::string output_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int jobs = 1;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "Path to the JSON run configuration")
      ->required();
  cmd->add_option("--output", args.output_dir, "Output directory (overrides config output_dir)");
  cmd->add_option("--seed", args.seed, "Seed override for randomized starts/perturbations")
      ->each([&args](const std::string&) { args.seed_set = true; });
  cmd->add_option("--jobs", args.jobs, "Concurrent jobs for sweep points")->default_val(1);
}

int dispatch(const CommonArgs& args, porestab::ScenarioType expected) {
  porestab::RunConfig cfg = porestab::load_config_file(args.config_path);
  if (cfg.scenario != expected) {
    throw porestab::ValidationError("config scenario type does not match the subcommand");
  }
  porestab::CliOverrides cli;
  if (!args.output_dir.empty()) cli.output_dir = args.output_dir;
  if (args.seed_set) cli.seed = args.seed;
  cli.jobs = args.jobs;
  porestab::run_scenario(cfg, cli);
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"porestab: pore-scale heterogeneous-catalysis simulator and spectral stability "
               "analyzer"};
  app.set_version_flag("--version", porestab::kToolVersion);
  app.require_subcommand(1);

  CommonArgs a_analyze, a_simulate, a_poincare, a_sweep;
  auto* c_analyze = app.add_subcommand(
      "analyze", "Stability criterion, spectrum, energy identity and instability probe");
  add_common(c_analyze, a_analyze);
  auto* c_simulate =
      app.add_subcommand("simulate", "Nonlinear IMEX time integration and decay-rate fit");
  add_common(c_simulate, a_simulate);
  auto* c_poincare =
      app.add_subcommand("poincare", "Poincare constant of the lateral surface");
  add_common(c_poincare, a_poincare);
  auto* c_sweep = app.add_subcommand("sweep", "Stability verdicts over a parameter grid");
  add_common(c_sweep, a_sweep);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (c_analyze->parsed()) return dispatch(a_analyze, porestab::ScenarioType::analyze);
    if (c_simulate->parsed()) return dispatch(a_simulate, porestab::ScenarioType::simulate);
    if (c_poincare->parsed()) return dispatch(a_poincare, porestab::ScenarioType::poincare);
    if (c_sweep->parsed()) return dispatch(a_sweep, porestab::ScenarioType::sweep);
  } catch (const porestab::ValidationError& e) {
    std::fprintf(stderr, "validation error: %s\n", e.what());
    return 2;
  } catch (const porestab::NumericalError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 0;
}
