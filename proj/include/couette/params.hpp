#pragma once

#include <string>
#include <vector>

namespace couette {

/// Model rates and strip geometry.
///
/// Layers are indexed k = 0..S+1: S inner layers plus the two boundary
/// layers driven by the plates. The horizontal direction is a torus of
/// width W, which stands in for the infinite flow direction; W is a
/// convergence knob, not a physical parameter.
struct Params {
  int S = 8;             ///< inner layer count; total layers = S + 2
  int W = 128;           ///< torus circumference in the flow direction
  double lambda = 1.0;   ///< vertical velocity-exchange rate per pair
  double lambda1 = 1.0;  ///< horizontal flow rate per (V, hole) pair
  double beta = 1.0;     ///< boundary flip rate: V->0 at layer 0, 0->V at layer S+1
  double epsilon = 0.0;  ///< random 0<->V perturbation rate per particle
  double rho = 0.5;      ///< target particle density in [0, 1]

  int layers() const { return S + 2; }

  /// Throws std::invalid_argument when geometry or rates are out of range
  /// (S >= 0, W >= 1, rates finite and >= 0, rho in [0,1]).
  void validate() const;

  /// Non-fatal notes for parameter choices outside the regime the
  /// closed-form results assume (lambda, lambda1, beta > 0) and for the
  /// width-1 torus, where horizontal flow is disabled. Empty when no
  /// caveat applies.
  std::vector<std::string> regime_warnings() const;

  bool operator==(const Params&) const = default;
};

}  // namespace couette
