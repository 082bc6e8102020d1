#include "couette/moments.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace couette::moments {

namespace {

void check_dimensions(const MarginalProfile& profile, const Params& params) {
  if (profile.layers() != params.layers() || profile.p_v.size() != profile.p_hole.size()) {
    std::ostringstream msg;
    msg << "moments: profile has " << profile.layers() << " layers, params require "
        << params.layers();
    throw std::invalid_argument(msg.str());
  }
}

/// RHS of the closed equations, written into preallocated arrays.
void derivative_into(const Eigen::ArrayXd& h, const Eigen::ArrayXd& v, const Params& params,
                     Eigen::ArrayXd& dh, Eigen::ArrayXd& dv) {
  const int n = static_cast<int>(h.size());
  const int S = n - 2;
  const double lam = params.lambda;
  const double eps = params.epsilon;
  const double beta = params.beta;

  dh(0) = lam * (h(1) - h(0));
  dh(n - 1) = lam * (h(n - 2) - h(n - 1));
  dv(0) = lam * (v(1) - v(0));
  dv(n - 1) = lam * (v(n - 2) - v(n - 1));
  if (S >= 1) {
    dh.segment(1, S) =
        lam * (h.segment(2, S) + h.segment(0, S) - 2.0 * h.segment(1, S));
    dv.segment(1, S) =
        lam * (v.segment(2, S) + v.segment(0, S) - 2.0 * v.segment(1, S));
  }
  // 0 <-> V perturbation exchange on every occupied layer
  dv += eps * (1.0 - h - 2.0 * v);
  // boundary driving
  dv(0) -= beta * v(0);
  dv(n - 1) += beta * (1.0 - h(n - 1) - v(n - 1));
}

}  // namespace

MarginalProfile product_profile(const Params& params, double vee_share) {
  params.validate();
  if (!(vee_share >= 0.0 && vee_share <= 1.0))
    throw std::invalid_argument("moments: vee_share must lie in [0, 1]");
  MarginalProfile profile;
  profile.t = 0.0;
  profile.p_hole = Eigen::ArrayXd::Constant(params.layers(), 1.0 - params.rho);
  profile.p_v = Eigen::ArrayXd::Constant(params.layers(), vee_share * params.rho);
  return profile;
}

Derivative derivative(const MarginalProfile& profile, const Params& params) {
  check_dimensions(profile, params);
  Derivative d;
  d.d_hole.resize(profile.layers());
  d.d_v.resize(profile.layers());
  derivative_into(profile.p_hole, profile.p_v, params, d.d_hole, d.d_v);
  return d;
}

double residual(const MarginalProfile& profile, const Params& params) {
  const Derivative d = derivative(profile, params);
  return std::max(d.d_hole.abs().maxCoeff(), d.d_v.abs().maxCoeff());
}

double max_stable_dt(const Params& params) {
  const double denom = 4.0 * params.lambda + 4.0 * params.epsilon + 2.0 * params.beta;
  if (denom <= 0.0) return std::numeric_limits<double>::infinity();
  return 1.0 / denom;
}

Trajectory integrate(const MarginalProfile& initial, const Params& params, double t_end,
                     double dt, int max_samples) {
  check_dimensions(initial, params);
  if (!(t_end >= 0.0) || !std::isfinite(t_end))
    throw std::invalid_argument("moments: t_end must be finite and >= 0");
  if (!(dt > 0.0) || !std::isfinite(dt))
    throw std::invalid_argument("moments: dt must be finite and > 0");
  const double bound = max_stable_dt(params);
  if (dt > bound) {
    std::ostringstream msg;
    msg << "moments: dt = " << dt << " exceeds the stability bound 1/(4 lambda + 4 epsilon + "
        << "2 beta) = " << bound;
    throw std::invalid_argument(msg.str());
  }
  if (max_samples < 2) max_samples = 2;

  Trajectory trajectory;
  MarginalProfile state = initial;
  state.t = 0.0;
  trajectory.samples.push_back(state);
  if (t_end == 0.0) return trajectory;

  const long steps = std::max<long>(1, static_cast<long>(std::ceil(t_end / dt - 1e-9)));
  const long stride = std::max<long>(1, (steps + max_samples - 2) / (max_samples - 1));

  const int n = state.layers();
  Eigen::ArrayXd k1h(n), k1v(n), k2h(n), k2v(n), k3h(n), k3v(n), k4h(n), k4v(n);
  Eigen::ArrayXd th(n), tv(n);

  for (long i = 1; i <= steps; ++i) {
    const double h = (i < steps) ? dt : t_end - static_cast<double>(steps - 1) * dt;
    auto& ph = state.p_hole;
    auto& pv = state.p_v;
    derivative_into(ph, pv, params, k1h, k1v);
    th = ph + 0.5 * h * k1h;
    tv = pv + 0.5 * h * k1v;
    derivative_into(th, tv, params, k2h, k2v);
    th = ph + 0.5 * h * k2h;
    tv = pv + 0.5 * h * k2v;
    derivative_into(th, tv, params, k3h, k3v);
    th = ph + h * k3h;
    tv = pv + h * k3v;
    derivative_into(th, tv, params, k4h, k4v);
    ph += (h / 6.0) * (k1h + 2.0 * k2h + 2.0 * k3h + k4h);
    pv += (h / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    state.t = (i < steps) ? static_cast<double>(i) * dt : t_end;
    if (i == steps || i % stride == 0) trajectory.samples.push_back(state);
  }
  return trajectory;
}

}  // namespace couette::moments
