#pragma once

#include <Eigen/Dense>
#include <vector>

#include "couette/params.hpp"

namespace couette::moments {

/// One-particle layer marginals p_k^e(t). Only the hole and V components
/// are stored; p_zero is derived from normalization so it cannot drift.
struct MarginalProfile {
  double t = 0.0;
  Eigen::ArrayXd p_hole;  // size S+2
  Eigen::ArrayXd p_v;     // size S+2

  Eigen::ArrayXd p_zero() const { return 1.0 - p_hole - p_v; }
  int layers() const { return static_cast<int>(p_hole.size()); }
};

/// Marginals of the product ensemble: p_hole = 1-rho and
/// p_v = vee_share * rho on every layer.
MarginalProfile product_profile(const Params& params, double vee_share = 0.5);

struct Derivative {
  Eigen::ArrayXd d_hole, d_v;
};

/// Right-hand side of the closed one-particle equations: the hole block is
/// the vertical-exchange Laplacian with closed (Neumann-like) ends; the V
/// block adds the 0<->V perturbation exchange and the boundary driving.
/// Note the equations contain no lambda1 term.
Derivative derivative(const MarginalProfile& profile, const Params& params);

/// Max-abs over all 2(S+2) derivative components; zero exactly at a
/// stationary profile.
double residual(const MarginalProfile& profile, const Params& params);

/// Largest step accepted by integrate(): 1 / (4 lambda + 4 epsilon + 2 beta).
double max_stable_dt(const Params& params);

struct Trajectory {
  std::vector<MarginalProfile> samples;  // initial state first, final state last
  const MarginalProfile& final_state() const { return samples.back(); }
};

/// Classical 4th-order one-step integration with fixed step dt (the last
/// step is shortened to land exactly on t_end). Rejects dt above
/// max_stable_dt, reporting the bound. At most max_samples states are
/// stored; the initial and final states are always included.
Trajectory integrate(const MarginalProfile& initial, const Params& params, double t_end,
                     double dt, int max_samples = 257);

}  // namespace couette::moments
