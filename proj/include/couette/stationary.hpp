#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string_view>
#include <utility>

#include "couette/params.hpp"

namespace couette::stationary {

/// Labels attached to profiles and to the K-based classification.
/// "Finite" marks an exact finite-S profile that is neither of the two
/// asymptotic phases.
enum class Regime { Laminar, Critical, Turbulent, Finite };
std::string_view to_string(Regime regime);

/// Stationary layer profile mu_k^e together with the scalars derived with
/// it. mu_hole is uniform (1 - rho_S) on every layer; mu_zero follows from
/// normalization.
struct StationaryProfile {
  Eigen::ArrayXd mu_hole;
  Eigen::ArrayXd mu_v;
  double rho_S = 0.0;
  std::optional<double> z1, z2;  // characteristic roots; set when epsilon > 0 applies
  double K = 0.0;                // transition parameter (Reynolds analog)
  Regime regime = Regime::Finite;

  Eigen::ArrayXd mu_zero() const { return 1.0 - mu_hole - mu_v; }
  int layers() const { return static_cast<int>(mu_v.size()); }
};

/// Roots of lambda z^2 - 2(lambda + epsilon) z + lambda = 0, returned as
/// (z1, z2) with z1 >= 1 >= z2 > 0 and z1 z2 = 1. z2 is computed as 1/z1,
/// which is cancellation-safe for small epsilon.
std::pair<double, double> characteristic_roots(double epsilon, double lambda);

/// b(z) = 1 + (2 epsilon + lambda (1 - 1/z)) / beta.
double boundary_factor(double z, const Params& params);

/// Zero-perturbation stationary profile:
/// mu_k^V = rho (k + lambda/beta) / (S + 1 + 2 lambda/beta). Requires
/// lambda > 0 and beta > 0.
StationaryProfile linear_profile(const Params& params);

/// Closed-form stationary profile for epsilon > 0, evaluated with every
/// power expressed in z2 <= 1 so large S cannot overflow. Below
/// epsilon/lambda = kResonanceThreshold the closed form degenerates to 0/0
/// (double root z = 1) and the call dispatches to linear_profile.
StationaryProfile explicit_profile(const Params& params);

/// Direct tridiagonal elimination of the stationary balance equations;
/// an independent route used to cross-check explicit_profile. Accepts
/// beta = 0 (free boundaries) as long as epsilon > 0.
StationaryProfile solve_stationary_system(const Params& params);

/// Critical-scaling limit profile
/// g_K(u) = rho/2 (1 + sinh(K(u - 1/2)) / sinh(K/2)), u in (0, 1).
/// Tiny K evaluates the analytic limit rho*u; large K uses an
/// exponential form that cannot overflow.
double limit_profile_gK(double K, double rho, double u);

/// K = S sqrt(2 epsilon / lambda).
double reynolds_analog(const Params& params);

struct RegimeReport {
  double K = 0.0;
  Regime regime = Regime::Laminar;
  double z1 = 1.0;
  double z2 = 1.0;
  double rho = 0.0;
};

/// Desk-scale classification by K: laminar-like up to kLaminarK,
/// turbulent-like from kTurbulentK, critical in between. The thresholds
/// are heuristic (the underlying statement is asymptotic in S) and K is
/// always reported next to the label.
RegimeReport classify_regime(const Params& params);

inline constexpr double kResonanceThreshold = 1e-8;  // on epsilon / lambda
inline constexpr double kLaminarK = 0.3;
inline constexpr double kTurbulentK = 10.0;

}  // namespace couette::stationary
