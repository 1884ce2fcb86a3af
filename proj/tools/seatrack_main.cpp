#include <cstdint>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "seatrack/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"decentralized multi-UAV sea container tracking simulator"};
  app.require_subcommand(1);

  std::string config;
  std::string out = "out";
  std::string runlog;
  std::uint64_t seed = 0;
  double radius = 5.0;

  CLI::App* run = app.add_subcommand("run", "simulate a scenario and write its run log");
  run->add_option("--config", config, "scenario config (JSON)")->required();
  run->add_option("--out", out, "output directory");
  CLI::Option* seed_opt = run->add_option("--seed-override", seed, "replace the scenario seed");

  CLI::App* report = app.add_subcommand("report", "compute metrics from a run log");
  report->add_option("--runlog", runlog, "run log path (JSONL)")->required();
  report->add_option("--out", out, "output directory");
  report->add_option("--radius", radius, "truth matching radius, meters");

  CLI::App* validate = app.add_subcommand("validate", "check a scenario config");
  validate->add_option("--config", config, "scenario config (JSON)")->required();

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) {
    std::optional<std::uint64_t> seed_override;
    if (seed_opt->count() > 0) seed_override = seed;
    return seatrack::cmd_run(config, out, seed_override);
  }
  if (report->parsed()) return seatrack::cmd_report(runlog, out, radius);
  return seatrack::cmd_validate(config);
}
