#pragma once

#include <iosfwd>

#include "couette/config.hpp"

namespace couette::harness {

/// Experiment drivers behind the CLI subcommands. Each writes its
/// artifacts under config.out_dir, logs a short summary to `log`, and
/// returns the process exit code (0 ok; cmd_compare returns 2 when a
/// comparison exceeds its tolerance). Configuration and I/O problems
/// throw; the CLI maps exceptions to exit code 1.
int cmd_simulate(const ExperimentConfig& config, std::ostream& log);
int cmd_ode(const ExperimentConfig& config, std::ostream& log);
int cmd_exact(const ExperimentConfig& config, std::ostream& log);
int cmd_stationary(const ExperimentConfig& config, std::ostream& log);
int cmd_sweep(const ExperimentConfig& config, std::ostream& log);
int cmd_compare(const ExperimentConfig& config, std::ostream& log);

}  // namespace couette::harness
