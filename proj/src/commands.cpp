#include "couette/commands.hpp"

#include <atomic>
#include <cmath>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>
#include <vector>

#include "couette/io.hpp"
#include "couette/kmc.hpp"
#include "couette/lattice.hpp"
#include "couette/moments.hpp"
#include "couette/oracle.hpp"
#include "couette/stationary.hpp"

namespace couette::harness {

using nlohmann::json;

namespace {

void log_warnings(const ExperimentConfig& config, std::ostream& log) {
  for (const std::string& w : config.params.regime_warnings()) log << "warning: " << w << '\n';
}

std::filesystem::path ensure_out_dir(const ExperimentConfig& config) {
  std::filesystem::path dir(config.out_dir);
  std::filesystem::create_directories(dir);
  return dir;
}

void write_json_file(const std::filesystem::path& path, const json& payload) {
  io::write_file(path.string(), payload.dump(2) + "\n");
}

/// Bounded worker pool; items are claimed atomically, results must be
/// stored by index so the outcome is independent of scheduling.
void parallel_for(int n, int workers, const std::function<void(int)>& body) {
  workers = std::min(workers, n);
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= n) return;
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

/// Replica r draws its initial configuration from stream 2r and its
/// trajectory from stream 2r+1, so ensembles are independent and
/// reproducible from the base seed alone.
kmc::SimReport run_ensemble(const ExperimentConfig& config) {
  const int replicas = config.run.replicas;
  std::vector<kmc::SimReport> reports(replicas);
  kmc::RunOptions options;
  options.batches = config.run.batches;
  options.include_noop_swaps = config.run.include_noop_swaps;
  parallel_for(replicas, config.workers, [&](int r) {
    Params params = config.params;
    Configuration initial = init_product(params, derive_seed(config.seed, 2 * r));
    reports[r] = kmc::run(initial, params, config.run.t_burn, config.run.t_measure,
                          derive_seed(config.seed, 2 * r + 1), options);
  });
  return kmc::merge_reports(reports, config.seed);
}

double auto_dt(const Params& params, double requested) {
  if (requested > 0.0) return requested;
  const double bound = moments::max_stable_dt(params);
  return std::isfinite(bound) ? bound / 5.0 : 1.0;
}

}  // namespace

int cmd_simulate(const ExperimentConfig& config, std::ostream& log) {
  config.validate();
  log_warnings(config, log);
  const auto dir = ensure_out_dir(config);
  const json resolved = config_to_json(config);

  // replica 0 initial state, for reproducibility audits
  save_text(init_product(config.params, derive_seed(config.seed, 0)),
            (dir / "initial_config_rep0.txt").string());

  const kmc::SimReport merged = run_ensemble(config);

  json report = io::sim_report_json(merged);
  report["config"] = resolved;
  write_json_file(dir / "simulate_report.json", report);

  std::ostringstream csv;
  io::write_sim_profile_csv(merged, csv, io::csv_preamble(resolved, config.seed));
  io::write_file((dir / "simulate_profile.csv").string(), csv.str());

  log << "simulate: " << merged.replicas << " replicas, "
      << merged.events.total() << " events, particles_mean = " << merged.mean_particles
      << ", wrote " << (dir / "simulate_report.json").string() << '\n';
  return 0;
}

int cmd_ode(const ExperimentConfig& config, std::ostream& log) {
  config.validate();
  log_warnings(config, log);
  const auto dir = ensure_out_dir(config);
  const json resolved = config_to_json(config);

  const moments::MarginalProfile initial =
      moments::product_profile(config.params, config.ode.vee_share);
  const double dt = auto_dt(config.params, config.ode.dt);
  const moments::Trajectory trajectory =
      moments::integrate(initial, config.params, config.ode.t_end, dt, config.ode.samples);

  std::ostringstream csv;
  io::write_trajectory_csv(trajectory, csv, io::csv_preamble(resolved, config.seed));
  io::write_file((dir / "ode_trajectory.csv").string(), csv.str());

  const moments::MarginalProfile& final_state = trajectory.final_state();
  const double final_residual = moments::residual(final_state, config.params);
  const double mass_drift =
      std::abs(final_state.p_hole.sum() - initial.p_hole.sum());
  write_json_file(dir / "ode_summary.json",
                  json{{"config", resolved},
                       {"seed", config.seed},
                       {"dt", dt},
                       {"t_end", config.ode.t_end},
                       {"samples", trajectory.samples.size()},
                       {"final_residual", final_residual},
                       {"hole_mass_drift", mass_drift}});

  log << "ode: integrated to t = " << config.ode.t_end << " (dt = " << dt
      << "), final residual " << final_residual << '\n';
  return 0;
}

int cmd_exact(const ExperimentConfig& config, std::ostream& log) {
  config.validate();
  log_warnings(config, log);
  const auto dir = ensure_out_dir(config);
  const json resolved = config_to_json(config);
  const std::string preamble = io::csv_preamble(resolved, config.seed);

  const oracle::Generator Q = oracle::build_generator(config.params);
  const Eigen::VectorXd pi0 =
      oracle::product_distribution(config.params, config.exact.vee_share);

  moments::MarginalProfile transient;
  if (config.exact.t_end > 0.0) {
    const Eigen::VectorXd pit = oracle::evolve(pi0, Q, config.exact.t_end);
    transient = oracle::marginals(pit, config.params.S);
    transient.t = config.exact.t_end;
    moments::Trajectory snapshot;
    snapshot.samples.push_back(transient);
    std::ostringstream csv;
    io::write_trajectory_csv(snapshot, csv, preamble);
    io::write_file((dir / "exact_transient.csv").string(), csv.str());
  }

  const Eigen::VectorXd limit = oracle::stationary_mixture(Q, config.params.S, pi0);
  const moments::MarginalProfile limit_marginals = oracle::marginals(limit, config.params.S);
  {
    std::ostringstream csv;
    io::write_marginals_csv(limit_marginals, csv, preamble);
    io::write_file((dir / "exact_stationary.csv").string(), csv.str());
  }

  if (config.exact.dump_generator) {
    std::ostringstream csv;
    oracle::dump_csv(Q, csv);
    io::write_file((dir / "generator.csv").string(), csv.str());
  }

  const Eigen::VectorXd weights = oracle::sector_weights(pi0, config.params.S);
  write_json_file(
      dir / "exact_summary.json",
      json{{"config", resolved},
           {"seed", config.seed},
           {"states", oracle::num_states(config.params.S)},
           {"nonzeros", Q.nonZeros()},
           {"t_end", config.exact.t_end},
           {"sector_weights", std::vector<double>(weights.data(), weights.data() + weights.size())},
           {"stationary_residual", moments::residual(limit_marginals, config.params)}});

  log << "exact: " << oracle::num_states(config.params.S) << " states, wrote "
      << (dir / "exact_stationary.csv").string() << '\n';
  return 0;
}

int cmd_stationary(const ExperimentConfig& config, std::ostream& log) {
  config.validate();
  log_warnings(config, log);
  const auto dir = ensure_out_dir(config);
  const json resolved = config_to_json(config);

  const stationary::StationaryProfile closed = stationary::explicit_profile(config.params);
  const stationary::StationaryProfile solved = stationary::solve_stationary_system(config.params);
  const double cross_check = (closed.mu_v - solved.mu_v).abs().maxCoeff();

  moments::MarginalProfile as_marginals;
  as_marginals.p_hole = closed.mu_hole;
  as_marginals.p_v = closed.mu_v;
  const double balance_residual = moments::residual(as_marginals, config.params);

  std::ostringstream csv;
  io::write_stationary_csv(closed, csv, io::csv_preamble(resolved, config.seed));
  io::write_file((dir / "stationary_profile.csv").string(), csv.str());

  json regime = io::regime_json(stationary::classify_regime(config.params));
  regime["config"] = resolved;
  regime["seed"] = config.seed;
  write_json_file(dir / "regime.json", regime);

  write_json_file(dir / "stationary_summary.json",
                  json{{"config", resolved},
                       {"seed", config.seed},
                       {"closed_vs_tridiagonal_max_abs", cross_check},
                       {"balance_residual", balance_residual},
                       {"regime", std::string(stationary::to_string(closed.regime))},
                       {"K", closed.K}});

  log << "stationary: closed form vs tridiagonal solve max-abs " << cross_check
      << ", balance residual " << balance_residual << '\n';
  return 0;
}

int cmd_sweep(const ExperimentConfig& config, std::ostream& log) {
  config.validate();
  log_warnings(config, log);
  const auto dir = ensure_out_dir(config);
  const json resolved = config_to_json(config);

  struct Case {
    int S;
    double epsilon;
  };
  std::vector<Case> cases;
  for (int S : config.sweep.S_list) {
    switch (config.sweep.rule) {
      case EpsilonRule::Fixed:
        cases.push_back({S, config.sweep.epsilon_fixed});
        break;
      case EpsilonRule::KScaling:
        for (double K : config.sweep.K_list)
          cases.push_back(
              {S, config.params.lambda * K * K / (2.0 * static_cast<double>(S) * S)});
        break;
      case EpsilonRule::CustomExponent:
        cases.push_back({S, config.sweep.epsilon_coeff *
                                std::pow(static_cast<double>(S), -config.sweep.epsilon_exponent)});
        break;
    }
  }

  std::vector<io::SweepRow> rows;
  json summary_cases = json::array();
  // sup-norm errors per (S, K), used for the decreasing-in-S check
  std::map<double, std::map<int, double>> sup_by_K;
  for (const Case& c : cases) {
    Params params = config.params;
    params.S = c.S;
    params.epsilon = c.epsilon;
    params.validate();
    const stationary::StationaryProfile profile = stationary::explicit_profile(params);
    const double K = stationary::reynolds_analog(params);
    double sup = 0.0;
    for (double u : config.sweep.u_list) {
      const int k = static_cast<int>(std::floor(u * c.S));
      const double mu = profile.mu_v(k);
      const double g =
          K > 0.0 ? stationary::limit_profile_gK(K, params.rho, u) : params.rho * u;
      const double err = std::abs(mu - g);
      sup = std::max(sup, err);
      rows.push_back({c.S, K, u, mu, g, err});
    }
    sup_by_K[K][c.S] = sup;
    summary_cases.push_back(json{
        {"S", c.S}, {"K", K}, {"epsilon", c.epsilon}, {"sup_abs_err", sup}});
  }

  json decreasing = json::object();
  for (const auto& [K, by_S] : sup_by_K) {
    bool strictly = by_S.size() >= 2;
    double prev = -1.0;
    bool started = false;
    for (const auto& [S, sup] : by_S) {  // std::map: ascending S
      if (started && sup >= prev) strictly = false;
      prev = sup;
      started = true;
    }
    decreasing[io::format_double(K)] = strictly;
  }

  std::ostringstream csv;
  io::write_sweep_csv(rows, csv, io::csv_preamble(resolved, config.seed));
  io::write_file((dir / "sweep.csv").string(), csv.str());
  write_json_file(dir / "sweep_summary.json", json{{"config", resolved},
                                                   {"seed", config.seed},
                                                   {"cases", summary_cases},
                                                   {"sup_err_decreasing_in_S", decreasing}});

  log << "sweep: " << rows.size() << " rows over " << cases.size() << " cases, wrote "
      << (dir / "sweep.csv").string() << '\n';
  return 0;
}

namespace {

struct MethodProfile {
  std::string name;
  Eigen::ArrayXd mu_v;
  Eigen::ArrayXd se;  // size 0 for deterministic methods
  bool stochastic = false;
};

}  // namespace

int cmd_compare(const ExperimentConfig& config, std::ostream& log) {
  config.validate();
  log_warnings(config, log);
  const auto dir = ensure_out_dir(config);
  const json resolved = config_to_json(config);

  std::vector<MethodProfile> methods;
  json skipped = json::array();
  for (const std::string& name : config.compare.methods) {
    try {
      MethodProfile method;
      method.name = name;
      if (name == "stationary") {
        method.mu_v = stationary::explicit_profile(config.params).mu_v;
      } else if (name == "ode") {
        const auto initial = moments::product_profile(config.params, config.ode.vee_share);
        const double dt = auto_dt(config.params, config.ode.dt);
        method.mu_v = moments::integrate(initial, config.params, config.compare.t_end, dt, 2)
                          .final_state()
                          .p_v;
      } else if (name == "oracle") {
        const oracle::Generator Q = oracle::build_generator(config.params);
        const Eigen::VectorXd pi0 =
            oracle::product_distribution(config.params, config.exact.vee_share);
        method.mu_v =
            oracle::marginals(oracle::stationary_mixture(Q, config.params.S, pi0),
                              config.params.S)
                .p_v;
      } else {  // kmc
        const kmc::SimReport merged = run_ensemble(config);
        if (!merged.measured)
          throw std::runtime_error("kmc report has an empty measurement window");
        method.mu_v = merged.p_v;
        method.se = merged.se_v;
        method.stochastic = true;
      }
      methods.push_back(std::move(method));
    } catch (const std::exception& e) {
      skipped.push_back(json{{"method", name}, {"reason", e.what()}});
      log << "compare: skipping " << name << ": " << e.what() << '\n';
    }
  }
  if (methods.size() < 2)
    throw std::runtime_error("compare: fewer than two methods remain after skips");

  const int layers = config.params.layers();
  json pairs = json::array();
  bool all_pass = true;
  for (std::size_t i = 0; i < methods.size(); ++i) {
    for (std::size_t j = i + 1; j < methods.size(); ++j) {
      const MethodProfile& a = methods[i];
      const MethodProfile& b = methods[j];
      const bool stochastic = a.stochastic || b.stochastic;
      double worst = 0.0;
      json per_layer = json::array();
      for (int k = 0; k < layers; ++k) {
        const double diff = std::abs(a.mu_v(k) - b.mu_v(k));
        double metric = diff;
        if (stochastic) {
          const double var = (a.stochastic ? a.se(k) * a.se(k) : 0.0) +
                             (b.stochastic ? b.se(k) * b.se(k) : 0.0);
          const double se = std::sqrt(var);
          metric = diff == 0.0 ? 0.0 : (se > 0.0 ? diff / se : INFINITY);
        }
        worst = std::max(worst, metric);
        per_layer.push_back(json{{"k", k},
                                 {"a", a.mu_v(k)},
                                 {"b", b.mu_v(k)},
                                 {"discrepancy", metric}});
      }
      const double tol = stochastic ? config.compare.z_tol : config.compare.abs_tol;
      const bool pass = worst <= tol;
      all_pass = all_pass && pass;
      pairs.push_back(json{{"a", a.name},
                           {"b", b.name},
                           {"metric", stochastic ? "z_score" : "max_abs"},
                           {"max_discrepancy", worst},
                           {"tolerance", tol},
                           {"pass", pass},
                           {"per_layer", per_layer}});
      log << "compare: " << a.name << " vs " << b.name << " ("
          << (stochastic ? "z" : "abs") << ") max " << worst << " tol " << tol << " -> "
          << (pass ? "PASS" : "FAIL") << '\n';
    }
  }

  // per-layer table of every available method
  std::ostringstream table;
  table << io::csv_preamble(resolved, config.seed) << "k";
  for (const MethodProfile& m : methods) {
    table << ',' << m.name << "_mu_v";
    if (m.stochastic) table << ',' << m.name << "_se";
  }
  table << '\n';
  for (int k = 0; k < layers; ++k) {
    table << k;
    for (const MethodProfile& m : methods) {
      table << ',' << io::format_double(m.mu_v(k));
      if (m.stochastic) table << ',' << io::format_double(m.se(k));
    }
    table << '\n';
  }
  io::write_file((dir / "compare_table.csv").string(), table.str());

  write_json_file(dir / "compare_report.json", json{{"config", resolved},
                                                    {"seed", config.seed},
                                                    {"skipped", skipped},
                                                    {"pairs", pairs},
                                                    {"pass", all_pass}});

  log << "compare: overall " << (all_pass ? "PASS" : "FAIL") << '\n';
  return all_pass ? 0 : 2;
}

}  // namespace couette::harness
