#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "cli/commands.hpp"
#include "linkpoison/baselines/baselines.hpp"
#include "linkpoison/errors.hpp"

using namespace linkpoison;

namespace {

constexpr int kOk = 0;
constexpr int kConfigFailure = 1;
constexpr int kRuntimeFailure = 2;

struct Flags {
  std::string config;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> mode;
  std::optional<std::string> poisoned;
  std::optional<std::string> kind;
};

CLI::App* command(CLI::App& app, const std::string& name, const std::string& help, Flags& f) {
  auto* sub = app.add_subcommand(name, help);
  sub->add_option("--config", f.config, "Experiment file (INI)")->required();
  sub->add_option("--out", f.out, "Output directory (overrides [output] dir)");
  sub->add_option("--seed", f.seed, "Run seed (overrides the sweep seed list)");
  sub->add_option("--mode", f.mode, "Attack mode")
      ->check(CLI::IsMember({"first-order", "full-unroll"}));
  return sub;
}

cli::ExperimentConfig configure(const Flags& f) {
  auto cfg = cli::load_config(f.config);
  if (f.out) cfg.out_dir = *f.out;
  if (f.seed) cli::override_seed(cfg, *f.seed);
  if (f.mode) cli::override_mode(cfg, attack::parse_mode(*f.mode));
  if (f.poisoned) {
    if (!std::filesystem::exists(*f.poisoned))
      throw ConfigError("no such file '" + *f.poisoned + "'");
    cfg.poisoned = *f.poisoned;
  }
  if (f.kind) {
    baselines::parse_baseline(*f.kind);
    cfg.baseline = *f.kind;
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Meta-gradient poisoning attacks on link prediction models"};
  app.require_subcommand(1);
  std::string level = "info";
  app.add_option("--log-level", level, "trace, debug, info, warn, error or off")
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}));

  Flags f;
  auto* attack_cmd = command(app, "attack", "Run the meta-gradient attack and poison the graph", f);
  auto* evaluate_cmd = command(app, "evaluate", "Train victims on clean and poisoned graphs", f);
  evaluate_cmd->add_option("--poisoned", f.poisoned, "Poisoned edge list");
  auto* sweep_cmd = command(app, "sweep", "Scheme x budget x seed grid of performance drops", f);
  auto* stats_cmd = command(app, "stats", "Graph statistics", f);
  stats_cmd->add_option("--poisoned", f.poisoned, "Also report this edge list");
  auto* baseline_cmd = command(app, "baseline", "Poison with a heuristic baseline", f);
  baseline_cmd->add_option("--kind", f.kind, "random-flip, dice or null-model");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigFailure;
  }
  spdlog::set_default_logger(spdlog::default_logger()->clone("linkpoison"));
  spdlog::set_level(spdlog::level::from_str(level));

  try {
    const auto cfg = configure(f);
    if (attack_cmd->parsed()) cli::cmd_attack(cfg);
    else if (evaluate_cmd->parsed()) cli::cmd_evaluate(cfg);
    else if (sweep_cmd->parsed()) cli::cmd_sweep(cfg);
    else if (stats_cmd->parsed()) cli::cmd_stats(cfg, std::cout);
    else if (baseline_cmd->parsed()) cli::cmd_baseline(cfg);
  } catch (const ConfigError& e) {
    spdlog::error("{}", e.what());
    return kConfigFailure;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kRuntimeFailure;
  }
  return kOk;
}
