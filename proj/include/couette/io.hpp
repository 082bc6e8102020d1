#pragma once

#include <json.hpp>

#include <iosfwd>
#include <string>
#include <vector>

#include "couette/kmc.hpp"
#include "couette/moments.hpp"
#include "couette/params.hpp"
#include "couette/stationary.hpp"

namespace couette::io {

/// Shortest exact decimal form of a double ("%.17g"), used for all CSV
/// numeric columns so outputs are byte-stable.
std::string format_double(double value);

/// Comment block embedded at the top of every CSV artifact:
/// "# config: <one-line json>" and "# seed: <n>" lines.
std::string csv_preamble(const nlohmann::json& resolved_config, std::uint64_t seed);

/// CSV schema: t,k,p_hole,p_zero,p_v, one row per (t, k), LF endings.
void write_trajectory_csv(const moments::Trajectory& trajectory, std::ostream& os,
                          const std::string& preamble = "");

/// CSV schema: k,u,mu_hole,mu_zero,mu_v with u = k/(S+1).
void write_stationary_csv(const stationary::StationaryProfile& profile, std::ostream& os,
                          const std::string& preamble = "");

/// Same schema as write_stationary_csv, for marginal profiles treated as
/// stationary estimates.
void write_marginals_csv(const moments::MarginalProfile& profile, std::ostream& os,
                         const std::string& preamble = "");

/// CSV schema: k,p_hole,p_zero,p_v,se_hole,se_zero,se_v.
void write_sim_profile_csv(const kmc::SimReport& report, std::ostream& os,
                           const std::string& preamble = "");

struct SweepRow {
  int S;
  double K, u, mu_v, g_K, abs_err;
};

/// CSV schema: S,K,u,mu_v,g_K,abs_err.
void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& os,
                     const std::string& preamble = "");

nlohmann::json params_json(const Params& params);
Params params_from_json(const nlohmann::json& j);

nlohmann::json sim_report_json(const kmc::SimReport& report);
nlohmann::json regime_json(const stationary::RegimeReport& report);

/// Whole-file helpers; failures throw std::runtime_error naming the path.
void write_file(const std::string& path, const std::string& contents);
std::string read_file(const std::string& path);

}  // namespace couette::io
