#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <string>

#include "couette/commands.hpp"
#include "couette/config.hpp"

namespace {

struct CliOverrides {
  std::string config_path;
  std::uint64_t seed = 0;
  std::string out_dir;
  int workers = 0;
  bool print_config = false;
};

/// Shared flags; file values are the base, flags override them.
void attach_common(CLI::App* cmd, CliOverrides& overrides) {
  cmd->add_option("--config", overrides.config_path, "experiment config (JSON)")
      ->check(CLI::ExistingFile);
  cmd->add_option("--seed", overrides.seed, "override the base seed");
  cmd->add_option("--out", overrides.out_dir, "override the output directory");
  cmd->add_option("--workers", overrides.workers, "bounded worker count for replica ensembles");
  cmd->add_flag("--print-config", overrides.print_config,
                "echo the resolved config as JSON and exit");
}

couette::harness::ExperimentConfig resolve(const CLI::App* cmd, const CliOverrides& overrides) {
  couette::harness::ExperimentConfig config;
  if (!overrides.config_path.empty())
    config = couette::harness::load_config_file(overrides.config_path);
  if (cmd->count("--seed") > 0) config.seed = overrides.seed;
  if (cmd->count("--out") > 0) config.out_dir = overrides.out_dir;
  if (cmd->count("--workers") > 0) config.workers = overrides.workers;
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"couette: exact simulation, moment closure and stationary profiles for the "
               "three-state exclusion strip"};
  app.require_subcommand(1);

  struct Sub {
    const char* name;
    const char* help;
    int (*run)(const couette::harness::ExperimentConfig&, std::ostream&);
  };
  const Sub subs[] = {
      {"simulate", "event-driven kMC ensemble with time-averaged layer profiles",
       couette::harness::cmd_simulate},
      {"ode", "integrate the closed one-particle moment equations", couette::harness::cmd_ode},
      {"exact", "exact single-column chain: transient law and stationary mixture",
       couette::harness::cmd_exact},
      {"stationary", "closed-form stationary profile, cross-checked by a tridiagonal solve",
       couette::harness::cmd_stationary},
      {"sweep", "profile vs g_K across S under the configured epsilon rule",
       couette::harness::cmd_sweep},
      {"compare", "cross-validate selected methods per layer (exit 2 on tolerance failure)",
       couette::harness::cmd_compare},
  };

  CliOverrides overrides[std::size(subs)];
  CLI::App* cmds[std::size(subs)];
  for (std::size_t i = 0; i < std::size(subs); ++i) {
    cmds[i] = app.add_subcommand(subs[i].name, subs[i].help);
    attach_common(cmds[i], overrides[i]);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;  // usage/config errors map to 1
  }

  for (std::size_t i = 0; i < std::size(subs); ++i) {
    if (!cmds[i]->parsed()) continue;
    try {
      const auto config = resolve(cmds[i], overrides[i]);
      if (overrides[i].print_config) {
        config.validate();
        std::cout << couette::harness::config_to_json(config).dump(2) << '\n';
        return 0;
      }
      return subs[i].run(config, std::cout);
    } catch (const std::exception& e) {
      std::cerr << "couette " << subs[i].name << ": error: " << e.what() << '\n';
      return 1;
    }
  }
  return 1;
}
