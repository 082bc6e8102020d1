#include "couette/config.hpp"

#include <fstream>
#include <stdexcept>

#include "couette/io.hpp"

namespace couette::harness {

using nlohmann::json;

std::string_view to_string(EpsilonRule rule) {
  switch (rule) {
    case EpsilonRule::Fixed: return "fixed";
    case EpsilonRule::KScaling: return "k_scaling";
    case EpsilonRule::CustomExponent: return "custom_exponent";
  }
  return "unknown";
}

EpsilonRule epsilon_rule_from_string(const std::string& name) {
  if (name == "fixed") return EpsilonRule::Fixed;
  if (name == "k_scaling") return EpsilonRule::KScaling;
  if (name == "custom_exponent") return EpsilonRule::CustomExponent;
  throw std::invalid_argument("config: unknown epsilon rule \"" + name +
                              "\" (expected fixed | k_scaling | custom_exponent)");
}

void ExperimentConfig::validate() const {
  params.validate();
  auto fail = [](const std::string& message) { throw std::invalid_argument("config: " + message); };
  if (run.t_burn < 0 || run.t_measure < 0) fail("run times must be >= 0");
  if (run.replicas < 1) fail("run.replicas must be >= 1");
  if (run.batches < 2) fail("run.batches must be >= 2");
  if (!(run.vee_share >= 0.0 && run.vee_share <= 1.0)) fail("run.vee_share must lie in [0, 1]");
  if (ode.t_end < 0) fail("ode.t_end must be >= 0");
  if (ode.dt < 0) fail("ode.dt must be >= 0 (0 = auto)");
  if (ode.samples < 2) fail("ode.samples must be >= 2");
  if (exact.t_end < 0) fail("exact.t_end must be >= 0");
  if (sweep.S_list.empty()) fail("sweep.S_list must not be empty");
  for (int S : sweep.S_list)
    if (S < 1) fail("sweep.S_list entries must be >= 1");
  if (sweep.rule == EpsilonRule::KScaling && sweep.K_list.empty())
    fail("sweep.K_list must not be empty under the k_scaling rule");
  for (double K : sweep.K_list)
    if (!(K > 0)) fail("sweep.K_list entries must be > 0");
  if (sweep.u_list.empty()) fail("sweep.u_list must not be empty");
  for (double u : sweep.u_list)
    if (!(u > 0.0 && u < 1.0)) fail("sweep.u_list entries must lie in (0, 1)");
  if (sweep.rule == EpsilonRule::Fixed && sweep.epsilon_fixed < 0)
    fail("sweep.epsilon_fixed must be >= 0");
  if (compare.methods.size() < 2) fail("compare.methods needs at least two methods");
  for (const std::string& m : compare.methods)
    if (m != "kmc" && m != "ode" && m != "stationary" && m != "oracle")
      fail("compare.methods entries must be kmc | ode | stationary | oracle (got \"" + m + "\")");
  if (compare.abs_tol < 0 || compare.z_tol < 0) fail("compare tolerances must be >= 0");
  if (workers < 1) fail("workers must be >= 1");
  if (out_dir.empty()) fail("output dir must not be empty");
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig config;
  if (j.contains("params")) config.params = io::params_from_json(j.at("params"));
  if (j.contains("run")) {
    const json& r = j.at("run");
    config.run.t_burn = r.value("t_burn", config.run.t_burn);
    config.run.t_measure = r.value("t_measure", config.run.t_measure);
    config.run.replicas = r.value("replicas", config.run.replicas);
    config.run.batches = r.value("batches", config.run.batches);
    config.run.vee_share = r.value("vee_share", config.run.vee_share);
    config.run.include_noop_swaps = r.value("include_noop_swaps", config.run.include_noop_swaps);
  }
  if (j.contains("ode")) {
    const json& o = j.at("ode");
    config.ode.t_end = o.value("t_end", config.ode.t_end);
    config.ode.dt = o.value("dt", config.ode.dt);
    config.ode.samples = o.value("samples", config.ode.samples);
    config.ode.vee_share = o.value("vee_share", config.ode.vee_share);
  }
  if (j.contains("exact")) {
    const json& e = j.at("exact");
    config.exact.t_end = e.value("t_end", config.exact.t_end);
    config.exact.vee_share = e.value("vee_share", config.exact.vee_share);
    config.exact.dump_generator = e.value("dump_generator", config.exact.dump_generator);
  }
  if (j.contains("sweep")) {
    const json& s = j.at("sweep");
    config.sweep.S_list = s.value("S_list", config.sweep.S_list);
    config.sweep.K_list = s.value("K_list", config.sweep.K_list);
    config.sweep.u_list = s.value("u_list", config.sweep.u_list);
    if (s.contains("epsilon_rule"))
      config.sweep.rule = epsilon_rule_from_string(s.at("epsilon_rule").get<std::string>());
    config.sweep.epsilon_fixed = s.value("epsilon_fixed", config.sweep.epsilon_fixed);
    config.sweep.epsilon_coeff = s.value("epsilon_coeff", config.sweep.epsilon_coeff);
    config.sweep.epsilon_exponent = s.value("epsilon_exponent", config.sweep.epsilon_exponent);
  }
  if (j.contains("compare")) {
    const json& c = j.at("compare");
    config.compare.methods = c.value("methods", config.compare.methods);
    config.compare.abs_tol = c.value("abs_tol", config.compare.abs_tol);
    config.compare.z_tol = c.value("z_tol", config.compare.z_tol);
    config.compare.t_end = c.value("t_end", config.compare.t_end);
  }
  config.seed = j.value("seed", config.seed);
  if (j.contains("output")) config.out_dir = j.at("output").value("dir", config.out_dir);
  config.workers = j.value("workers", config.workers);
  return config;
}

json config_to_json(const ExperimentConfig& config) {
  return json{
      {"params", io::params_json(config.params)},
      {"run",
       json{{"t_burn", config.run.t_burn},
            {"t_measure", config.run.t_measure},
            {"replicas", config.run.replicas},
            {"batches", config.run.batches},
            {"vee_share", config.run.vee_share},
            {"include_noop_swaps", config.run.include_noop_swaps}}},
      {"ode",
       json{{"t_end", config.ode.t_end},
            {"dt", config.ode.dt},
            {"samples", config.ode.samples},
            {"vee_share", config.ode.vee_share}}},
      {"exact",
       json{{"t_end", config.exact.t_end},
            {"vee_share", config.exact.vee_share},
            {"dump_generator", config.exact.dump_generator}}},
      {"sweep",
       json{{"S_list", config.sweep.S_list},
            {"K_list", config.sweep.K_list},
            {"u_list", config.sweep.u_list},
            {"epsilon_rule", std::string(to_string(config.sweep.rule))},
            {"epsilon_fixed", config.sweep.epsilon_fixed},
            {"epsilon_coeff", config.sweep.epsilon_coeff},
            {"epsilon_exponent", config.sweep.epsilon_exponent}}},
      {"compare",
       json{{"methods", config.compare.methods},
            {"abs_tol", config.compare.abs_tol},
            {"z_tol", config.compare.z_tol},
            {"t_end", config.compare.t_end}}},
      {"seed", config.seed},
      {"output", json{{"dir", config.out_dir}}},
      {"workers", config.workers}};
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("config: cannot open: " + path);
  json j;
  try {
    is >> j;
  } catch (const json::parse_error& e) {
    throw std::runtime_error("config: parse error in " + path + ": " + e.what());
  }
  return config_from_json(j);
}

}  // namespace couette::harness
