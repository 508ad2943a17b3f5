// wcrisk: worst-case CVaR certificates, event-trigger synthesis and Monte
// Carlo validation for discrete-time linear stochastic systems.
//
//   wcrisk certify  [--preset paper-example | --config FILE] [--radius R]
//   wcrisk simulate [...] [--trigger cor1|cor2|cor3|cor4|cor4-rel|sigma=V]
//                   [--sampler gaussian|student_t|uniform|two_point] [--baseline-periodic]
//   wcrisk sweep    [...] --param r|epsilon|sigma --grid v1,v2,...

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "wcrisk/config.hpp"
#include "wcrisk/experiment.hpp"

namespace {

struct CommonOptions {
  std::string config_path;
  std::string preset_name;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> runs;
  std::optional<unsigned> horizon;
  std::optional<unsigned> workers;
  std::optional<double> radius;
  std::optional<double> epsilon;
  std::optional<double> dof;
  std::string out_dir;
  std::string trigger;
  std::string sampler;
  bool baseline_periodic = false;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  auto* cfg = cmd->add_option("--config", o.config_path, "Experiment config (JSON)");
  cmd->add_option("--preset", o.preset_name, "Built-in preset (paper-example)")->excludes(cfg);
  cmd->add_option("--seed", o.seed, "Base RNG seed");
  cmd->add_option("--runs", o.runs, "Monte Carlo runs per ensemble");
  cmd->add_option("--horizon", o.horizon, "Simulation steps");
  cmd->add_option("--workers", o.workers, "Ensemble worker threads");
  cmd->add_option("--radius", o.radius, "Radius r of the ball {|x| <= r}");
  cmd->add_option("--epsilon", o.epsilon, "CVaR level in (0, 1)");
  cmd->add_option("--dof", o.dof, "Student-t degrees of freedom");
  cmd->add_option("--out", o.out_dir, "Output directory");
  cmd->add_option("--trigger", o.trigger, "cor1|cor2|cor3|cor4|cor4-rel|sigma=VALUE");
  cmd->add_option("--sampler", o.sampler, "gaussian|student_t|uniform|two_point");
  cmd->add_flag("--baseline-periodic", o.baseline_periodic, "Also simulate periodic feedback");
}

wcrisk::cli::ExperimentConfig resolve_config(const CommonOptions& o) {
  using namespace wcrisk::cli;
  ExperimentConfig c = o.config_path.empty()
                           ? preset(o.preset_name.empty() ? "paper-example" : o.preset_name)
                           : load_config(o.config_path);
  if (o.seed) c.seed = *o.seed;
  if (o.runs) c.runs = *o.runs;
  if (o.horizon) c.horizon = *o.horizon;
  if (o.workers) c.workers = *o.workers;
  if (o.radius) c.radius = *o.radius;
  if (o.epsilon) c.epsilon = *o.epsilon;
  if (o.dof) c.dof = *o.dof;
  if (!o.out_dir.empty()) c.output_dir = o.out_dir;
  if (!o.trigger.empty()) c.trigger = parse_trigger_flag(o.trigger, c.trigger);
  if (!o.sampler.empty()) c.sampler = wcrisk::parse_sampler_kind(o.sampler);
  if (o.baseline_periodic) c.baseline_periodic = true;
  // Re-validate the merged result.
  return parse_config(serialize(c));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Worst-case CVaR certificates and event-triggered control experiments"};
  app.require_subcommand(1);

  CommonOptions opts;
  std::string sweep_param;
  std::vector<double> grid;

  auto* certify = app.add_subcommand("certify", "Compute certificates and trigger thresholds");
  add_common(certify, opts);
  auto* simulate = app.add_subcommand("simulate", "Run a seeded trajectory and an ensemble");
  add_common(simulate, opts);
  auto* sweep = app.add_subcommand("sweep", "Sweep r, epsilon or sigma");
  add_common(sweep, opts);
  sweep->add_option("--param", sweep_param, "r|epsilon|sigma")->required();
  sweep->add_option("--grid", grid, "Comma-separated grid values")->required()->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return wcrisk::cli::kExitInvalidConfig;
  }

  using namespace wcrisk::cli;
  return run_guarded(
      [&]() -> int {
        const auto config = resolve_config(opts);
        if (certify->parsed()) return cmd_certify(config, std::cout);
        if (simulate->parsed()) return cmd_simulate(config, std::cout);
        return cmd_sweep(config, parse_sweep_parameter(sweep_param), grid, std::cout);
      },
      std::cerr);
}
