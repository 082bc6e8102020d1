#include "couette/stationary.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace couette::stationary {

namespace {

void require(bool ok, const char* message) {
  if (!ok) throw std::invalid_argument(message);
}

/// Scalars shared by all profile constructors.
void attach_derived(StationaryProfile& profile, const Params& params) {
  profile.rho_S = params.rho;
  profile.mu_hole = Eigen::ArrayXd::Constant(params.layers(), 1.0 - params.rho);
  profile.K = params.lambda > 0.0 ? reynolds_analog(params) : 0.0;
}

}  // namespace

std::string_view to_string(Regime regime) {
  switch (regime) {
    case Regime::Laminar: return "laminar";
    case Regime::Critical: return "critical";
    case Regime::Turbulent: return "turbulent";
    case Regime::Finite: return "finite";
  }
  return "unknown";
}

std::pair<double, double> characteristic_roots(double epsilon, double lambda) {
  require(lambda > 0.0 && std::isfinite(lambda), "characteristic_roots: lambda must be > 0");
  require(epsilon >= 0.0 && std::isfinite(epsilon), "characteristic_roots: epsilon must be >= 0");
  const double r = epsilon / lambda;
  const double z1 = 1.0 + r + std::sqrt(r * (r + 2.0));
  return {z1, 1.0 / z1};
}

double boundary_factor(double z, const Params& params) {
  require(z != 0.0, "boundary_factor: z must be nonzero");
  require(params.beta > 0.0, "boundary_factor: beta must be > 0");
  return 1.0 + (2.0 * params.epsilon + params.lambda * (1.0 - 1.0 / z)) / params.beta;
}

StationaryProfile linear_profile(const Params& params) {
  params.validate();
  require(params.beta > 0.0, "linear_profile: beta must be > 0");
  require(params.lambda > 0.0, "linear_profile: lambda must be > 0");

  StationaryProfile profile;
  attach_derived(profile, params);
  const double r = params.lambda / params.beta;
  const double denom = static_cast<double>(params.S + 1) + 2.0 * r;
  profile.mu_v.resize(params.layers());
  for (int k = 0; k < params.layers(); ++k)
    profile.mu_v(k) = params.rho * (static_cast<double>(k) + r) / denom;
  profile.regime = Regime::Laminar;
  return profile;
}

StationaryProfile explicit_profile(const Params& params) {
  params.validate();
  require(params.beta > 0.0, "explicit_profile: beta must be > 0");
  require(params.lambda > 0.0, "explicit_profile: lambda must be > 0");

  const auto [z1, z2] = characteristic_roots(params.epsilon, params.lambda);
  if (params.epsilon / params.lambda < kResonanceThreshold) {
    // Resonant double root z = 1: the closed form is 0/0, its limit is the
    // linear profile.
    StationaryProfile profile = linear_profile(params);
    profile.z1 = z1;
    profile.z2 = z2;
    return profile;
  }

  StationaryProfile profile;
  attach_derived(profile, params);
  profile.z1 = z1;
  profile.z2 = z2;
  profile.regime = Regime::Finite;

  // Closed form rewritten with numerator and denominator divided by
  // b(z1)^2 z1^(S+1): every remaining power is z2^j with j >= 0, so the
  // evaluation cannot overflow for any S.
  const int N = params.S + 1;
  const double b1 = boundary_factor(z1, params);
  const double b2 = boundary_factor(z2, params);
  const double ratio = b2 / (b1 * b1);
  const double denom = 2.0 * (1.0 - (b2 / b1) * (b2 / b1) * std::pow(z2, 2 * N));
  const double rho = params.rho;

  profile.mu_v.resize(params.layers());
  for (int k = 0; k <= N; ++k) {
    const double term = (std::pow(z2, k) - std::pow(z2, N - k)) / b1 +
                        ratio * (std::pow(z2, N + k) - std::pow(z2, 2 * N - k));
    profile.mu_v(k) = 0.5 * rho - rho * term / denom;
  }
  return profile;
}

StationaryProfile solve_stationary_system(const Params& params) {
  params.validate();
  require(params.lambda > 0.0, "solve_stationary_system: lambda must be > 0");
  if (params.beta == 0.0 && params.epsilon == 0.0)
    throw std::invalid_argument(
        "solve_stationary_system: singular at beta = epsilon = 0 (every uniform profile is "
        "stationary; the limit depends on the initial distribution)");

  const int n = params.layers();
  const double lam = params.lambda;
  const double eps = params.epsilon;
  const double beta = params.beta;
  const double rho = params.rho;

  // Tridiagonal balance system, eliminated without pivoting; the matrix is
  // irreducibly diagonally dominant whenever beta > 0 or epsilon > 0.
  Eigen::ArrayXd diag(n), lower(n), upper(n), rhs(n);
  diag(0) = -(lam + 2.0 * eps + beta);
  upper(0) = lam;
  rhs(0) = -eps * rho;
  for (int k = 1; k <= params.S; ++k) {
    lower(k) = lam;
    diag(k) = -(2.0 * lam + 2.0 * eps);
    upper(k) = lam;
    rhs(k) = -eps * rho;
  }
  lower(n - 1) = lam;
  diag(n - 1) = -(lam + 2.0 * eps + beta);
  rhs(n - 1) = -eps * rho - beta * rho;

  Eigen::ArrayXd c(n), d(n);
  c(0) = upper(0) / diag(0);
  d(0) = rhs(0) / diag(0);
  for (int k = 1; k < n; ++k) {
    const double m = diag(k) - lower(k) * c(k - 1);
    c(k) = (k < n - 1) ? upper(k) / m : 0.0;
    d(k) = (rhs(k) - lower(k) * d(k - 1)) / m;
  }

  StationaryProfile profile;
  attach_derived(profile, params);
  profile.mu_v.resize(n);
  profile.mu_v(n - 1) = d(n - 1);
  for (int k = n - 2; k >= 0; --k) profile.mu_v(k) = d(k) - c(k) * profile.mu_v(k + 1);

  if (params.epsilon > 0.0) {
    const auto [z1, z2] = characteristic_roots(params.epsilon, params.lambda);
    profile.z1 = z1;
    profile.z2 = z2;
    profile.regime = Regime::Finite;
  } else {
    profile.regime = Regime::Laminar;
  }
  return profile;
}

double limit_profile_gK(double K, double rho, double u) {
  require(K > 0.0 && std::isfinite(K), "limit_profile_gK: K must be > 0");
  if (!(u > 0.0 && u < 1.0))
    throw std::domain_error("limit_profile_gK: u must lie in the open interval (0, 1)");
  if (K < 1e-6) return rho * u;  // analytic K -> 0 limit
  if (K > 50.0) {
    // sinh ratio rewritten in decaying exponentials; exact, never overflows
    const double sign = (u > 0.5) ? 1.0 : (u < 0.5 ? -1.0 : 0.0);
    const double edge = std::min(u, 1.0 - u);
    const double ratio = std::exp(-K * edge) * (-std::expm1(-K * std::abs(2.0 * u - 1.0))) /
                         (-std::expm1(-K));
    return 0.5 * rho * (1.0 + sign * ratio);
  }
  return 0.5 * rho * (1.0 + std::sinh(K * (u - 0.5)) / std::sinh(0.5 * K));
}

double reynolds_analog(const Params& params) {
  require(params.lambda > 0.0, "reynolds_analog: lambda must be > 0");
  return static_cast<double>(params.S) * std::sqrt(2.0 * params.epsilon / params.lambda);
}

RegimeReport classify_regime(const Params& params) {
  RegimeReport report;
  report.rho = params.rho;
  if (params.lambda > 0.0) {
    report.K = reynolds_analog(params);
    const auto [z1, z2] = characteristic_roots(params.epsilon, params.lambda);
    report.z1 = z1;
    report.z2 = z2;
  } else {
    report.K = params.epsilon > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    report.z1 = std::numeric_limits<double>::quiet_NaN();
    report.z2 = std::numeric_limits<double>::quiet_NaN();
  }
  if (report.K <= kLaminarK)
    report.regime = Regime::Laminar;
  else if (report.K >= kTurbulentK)
    report.regime = Regime::Turbulent;
  else
    report.regime = Regime::Critical;
  return report;
}

}  // namespace couette::stationary
