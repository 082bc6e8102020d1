#pragma once

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

#include "couette/params.hpp"

namespace couette::harness {

/// How the sweep picks epsilon for each S. Exactly one rule is active.
enum class EpsilonRule { Fixed, KScaling, CustomExponent };

std::string_view to_string(EpsilonRule rule);
EpsilonRule epsilon_rule_from_string(const std::string& name);

struct RunConfig {
  double t_burn = 200.0;
  double t_measure = 2000.0;
  int replicas = 4;
  int batches = 20;
  double vee_share = 0.5;           // Zero/Vee split of the initial particles
  bool include_noop_swaps = false;  // diagnostic simulator variant
};

struct OdeConfig {
  double t_end = 200.0;
  double dt = 0.0;  // 0 = auto (a fifth of the stability bound)
  int samples = 201;
  double vee_share = 0.5;
};

struct ExactConfig {
  double t_end = 10.0;
  double vee_share = 0.5;
  bool dump_generator = false;
};

struct SweepConfig {
  std::vector<int> S_list{64, 128, 256};
  std::vector<double> K_list{0.5, 2.0, 8.0};
  std::vector<double> u_list{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  EpsilonRule rule = EpsilonRule::KScaling;  // epsilon = lambda K^2 / (2 S^2)
  double epsilon_fixed = 1.0;                // rule Fixed: epsilon = epsilon_fixed
  double epsilon_coeff = 1.0;                // rule CustomExponent:
  double epsilon_exponent = 2.0;             //   epsilon = coeff * S^(-exponent)
};

struct CompareConfig {
  std::vector<std::string> methods{"ode", "stationary"};  // of kmc|ode|stationary|oracle
  double abs_tol = 1e-8;  // deterministic-vs-deterministic comparisons
  double z_tol = 3.0;     // comparisons involving kMC estimates
  double t_end = 500.0;   // ODE integration horizon
};

/// Resolved experiment description: one JSON document, overridable by CLI
/// flags. Every output artifact embeds the resolved form plus the seed.
struct ExperimentConfig {
  Params params;
  RunConfig run;
  OdeConfig ode;
  ExactConfig exact;
  SweepConfig sweep;
  CompareConfig compare;
  std::uint64_t seed = 1;
  std::string out_dir = "out";
  int workers = 1;

  /// Throws std::invalid_argument on inconsistent settings.
  void validate() const;
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& config);
ExperimentConfig load_config_file(const std::string& path);

}  // namespace couette::harness
