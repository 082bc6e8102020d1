#include "couette/io.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace couette::io {

using nlohmann::json;

std::string format_double(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

std::string csv_preamble(const json& resolved_config, std::uint64_t seed) {
  std::ostringstream os;
  os << "# config: " << resolved_config.dump() << "\n# seed: " << seed << "\n";
  return os.str();
}

void write_trajectory_csv(const moments::Trajectory& trajectory, std::ostream& os,
                          const std::string& preamble) {
  os << preamble << "t,k,p_hole,p_zero,p_v\n";
  for (const auto& profile : trajectory.samples) {
    const Eigen::ArrayXd zero = profile.p_zero();
    for (int k = 0; k < profile.layers(); ++k)
      os << format_double(profile.t) << ',' << k << ',' << format_double(profile.p_hole(k))
         << ',' << format_double(zero(k)) << ',' << format_double(profile.p_v(k)) << '\n';
  }
}

namespace {

void write_layer_profile(const Eigen::ArrayXd& hole, const Eigen::ArrayXd& vee,
                         std::ostream& os) {
  const int layers = static_cast<int>(hole.size());
  const double span = static_cast<double>(layers - 1);
  for (int k = 0; k < layers; ++k) {
    const double u = layers > 1 ? static_cast<double>(k) / span : 0.0;
    const double zero = 1.0 - hole(k) - vee(k);
    os << k << ',' << format_double(u) << ',' << format_double(hole(k)) << ','
       << format_double(zero) << ',' << format_double(vee(k)) << '\n';
  }
}

}  // namespace

void write_stationary_csv(const stationary::StationaryProfile& profile, std::ostream& os,
                          const std::string& preamble) {
  os << preamble << "k,u,mu_hole,mu_zero,mu_v\n";
  write_layer_profile(profile.mu_hole, profile.mu_v, os);
}

void write_marginals_csv(const moments::MarginalProfile& profile, std::ostream& os,
                         const std::string& preamble) {
  os << preamble << "k,u,mu_hole,mu_zero,mu_v\n";
  write_layer_profile(profile.p_hole, profile.p_v, os);
}

void write_sim_profile_csv(const kmc::SimReport& report, std::ostream& os,
                           const std::string& preamble) {
  os << preamble << "k,p_hole,p_zero,p_v,se_hole,se_zero,se_v\n";
  if (!report.measured) return;
  for (int k = 0; k < report.p_hole.size(); ++k)
    os << k << ',' << format_double(report.p_hole(k)) << ',' << format_double(report.p_zero(k))
       << ',' << format_double(report.p_v(k)) << ',' << format_double(report.se_hole(k)) << ','
       << format_double(report.se_zero(k)) << ',' << format_double(report.se_v(k)) << '\n';
}

void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& os,
                     const std::string& preamble) {
  os << preamble << "S,K,u,mu_v,g_K,abs_err\n";
  for (const SweepRow& row : rows)
    os << row.S << ',' << format_double(row.K) << ',' << format_double(row.u) << ','
       << format_double(row.mu_v) << ',' << format_double(row.g_K) << ','
       << format_double(row.abs_err) << '\n';
}

json params_json(const Params& params) {
  return json{{"S", params.S},         {"W", params.W},
              {"lambda", params.lambda}, {"lambda1", params.lambda1},
              {"beta", params.beta},     {"epsilon", params.epsilon},
              {"rho", params.rho}};
}

Params params_from_json(const json& j) {
  Params params;
  params.S = j.value("S", params.S);
  params.W = j.value("W", params.W);
  params.lambda = j.value("lambda", params.lambda);
  params.lambda1 = j.value("lambda1", params.lambda1);
  params.beta = j.value("beta", params.beta);
  params.epsilon = j.value("epsilon", params.epsilon);
  params.rho = j.value("rho", params.rho);
  return params;
}

json sim_report_json(const kmc::SimReport& report) {
  json profile = json::array();
  if (report.measured) {
    for (int k = 0; k < report.p_hole.size(); ++k)
      profile.push_back(json{{"k", k},
                             {"p_hole", report.p_hole(k)},
                             {"p_zero", report.p_zero(k)},
                             {"p_v", report.p_v(k)},
                             {"se_hole", report.se_hole(k)},
                             {"se_zero", report.se_zero(k)},
                             {"se_v", report.se_v(k)}});
  }
  return json{{"params", params_json(report.params)},
              {"t_burn", report.t_burn},
              {"t_measure", report.t_measure},
              {"seed", report.seed},
              {"replicas", report.replicas},
              {"particles_mean", report.mean_particles},
              {"measured", report.measured},
              {"events",
               json{{"vertical_swap", report.events.vertical_swap},
                    {"horizontal_flow", report.events.horizontal_flow},
                    {"bottom_flip", report.events.bottom_flip},
                    {"top_flip", report.events.top_flip},
                    {"perturb", report.events.perturb}}},
              {"profile", profile}};
}

json regime_json(const stationary::RegimeReport& report) {
  auto finite_or_null = [](double v) {
    return std::isfinite(v) ? json(v) : json(nullptr);
  };
  return json{{"K", finite_or_null(report.K)},
              {"regime", std::string(stationary::to_string(report.regime))},
              {"z1", finite_or_null(report.z1)},
              {"z2", finite_or_null(report.z2)},
              {"rho", report.rho}};
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("io: cannot open for writing: " + path);
  os << contents;
  if (!os) throw std::runtime_error("io: write failed: " + path);
}

std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("io: cannot open for reading: " + path);
  std::ostringstream buffer;
  buffer << is.rdbuf();
  return buffer.str();
}

}  // namespace couette::io
