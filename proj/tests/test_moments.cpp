#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "couette/moments.hpp"
#include "couette/rng.hpp"
#include "couette/stationary.hpp"

using namespace couette;
using namespace couette::moments;

namespace {

Params make_params(int S, double lambda, double beta, double epsilon, double rho) {
  Params p;
  p.S = S;
  p.W = 1;
  p.lambda = lambda;
  p.beta = beta;
  p.epsilon = epsilon;
  p.rho = rho;
  return p;
}

MarginalProfile random_profile(int layers, Rng& rng) {
  MarginalProfile profile;
  profile.p_hole.resize(layers);
  profile.p_v.resize(layers);
  for (int k = 0; k < layers; ++k) {
    const double h = rng.uniform();
    profile.p_hole(k) = h;
    profile.p_v(k) = (1.0 - h) * rng.uniform();
  }
  return profile;
}

}  // namespace

TEST_CASE("product profile") {
  const MarginalProfile profile = product_profile(make_params(3, 1, 1, 0, 0.4), 0.5);
  CHECK((profile.p_hole == 0.6).all());
  CHECK((profile.p_v == 0.2).all());
  CHECK((profile.p_zero() == 0.2).all());
  CHECK_THROWS_AS(product_profile(make_params(3, 1, 1, 0, 0.4), 1.5), std::invalid_argument);
}

TEST_CASE("uniform holes are a fixed point of the hole block") {
  Rng rng(1);
  for (double c : {0.0, 0.37, 1.0}) {
    MarginalProfile profile = random_profile(7, rng);
    profile.p_hole.setConstant(c);
    const Derivative d = derivative(profile, make_params(5, 1.4, 0.8, 0.2, 0.5));
    CHECK(d.d_hole.abs().maxCoeff() == 0.0);
  }
}

TEST_CASE("the linear profile annihilates the V block at epsilon = 0") {
  const Params p = make_params(6, 1.7, 0.4, 0.0, 0.62);
  MarginalProfile profile;
  profile.p_hole = Eigen::ArrayXd::Constant(p.layers(), 1.0 - p.rho);
  profile.p_v = stationary::linear_profile(p).mu_v;
  const Derivative d = derivative(profile, p);
  CHECK(d.d_v.abs().maxCoeff() <= 1e-12);
}

TEST_CASE("hand-derived S=1 fixed point has zero derivative") {
  // independently solved dense 3x3 balance system for lambda=beta=eps=rho=1
  const Params p = make_params(1, 1.0, 1.0, 1.0, 1.0);
  Eigen::Matrix3d A;
  A << -4, 1, 0, 1, -4, 1, 0, 1, -4;
  Eigen::Vector3d b(-1, -1, -2);
  const Eigen::Vector3d mu = A.fullPivLu().solve(b);
  REQUIRE(std::abs(mu(0) - 0.375) < 1e-14);
  REQUIRE(std::abs(mu(1) - 0.5) < 1e-14);
  REQUIRE(std::abs(mu(2) - 0.625) < 1e-14);

  MarginalProfile profile;
  profile.p_hole = Eigen::ArrayXd::Zero(3);
  profile.p_v = mu.array();
  const Derivative d = derivative(profile, p);
  CHECK(d.d_v.abs().maxCoeff() <= 1e-12);
  CHECK(residual(profile, p) <= 1e-12);
}

TEST_CASE("dimension mismatch is rejected") {
  MarginalProfile profile;
  profile.p_hole = Eigen::ArrayXd::Zero(4);
  profile.p_v = Eigen::ArrayXd::Zero(4);
  CHECK_THROWS_AS(derivative(profile, make_params(5, 1, 1, 0, 0.5)), std::invalid_argument);
}

TEST_CASE("derivative is affine") {
  // affine combinations with weights summing to 1 pass through exactly
  Rng rng(12);
  const Params p = make_params(4, 0.9, 0.3, 0.7, 0.5);
  const MarginalProfile P = random_profile(6, rng);
  const MarginalProfile Q = random_profile(6, rng);
  const MarginalProfile R = random_profile(6, rng);
  const double a = 0.3, b = 0.5, c = 1.0 - a - b;
  MarginalProfile combo;
  combo.p_hole = a * P.p_hole + b * Q.p_hole + c * R.p_hole;
  combo.p_v = a * P.p_v + b * Q.p_v + c * R.p_v;
  const Derivative dc = derivative(combo, p);
  const Derivative dp = derivative(P, p);
  const Derivative dq = derivative(Q, p);
  const Derivative dr = derivative(R, p);
  CHECK((dc.d_hole - (a * dp.d_hole + b * dq.d_hole + c * dr.d_hole)).abs().maxCoeff() <= 1e-13);
  CHECK((dc.d_v - (a * dp.d_v + b * dq.d_v + c * dr.d_v)).abs().maxCoeff() <= 1e-13);
}

TEST_CASE("hole mass is conserved at the derivative level") {
  Rng rng(33);
  const Params p = make_params(9, 2.3, 0.8, 1.1, 0.5);
  for (int i = 0; i < 25; ++i) {
    const MarginalProfile profile = random_profile(11, rng);
    const Derivative d = derivative(profile, p);
    CHECK(std::abs(d.d_hole.sum()) <= 1e-14);
    // d_zero is defined by normalization, so the three blocks cancel
    const Eigen::ArrayXd d_zero = -d.d_hole - d.d_v;
    CHECK(std::abs((d.d_v + d_zero).sum() + d.d_hole.sum()) <= 1e-13);
  }
}

TEST_CASE("residual special cases") {
  SUBCASE("free-boundary uniform profile is exactly stationary") {
    const Params p = make_params(5, 1.0, 0.0, 0.9, 0.6);
    MarginalProfile profile;
    profile.p_hole = Eigen::ArrayXd::Constant(7, 0.4);
    profile.p_v = Eigen::ArrayXd::Constant(7, 0.3);
    CHECK(residual(profile, p) == 0.0);
  }
  SUBCASE("closed-form stationary profile has tiny residual") {
    const Params p = make_params(8, 1.0, 0.7, 0.3, 0.6);
    const auto stationary_profile = stationary::explicit_profile(p);
    MarginalProfile profile;
    profile.p_hole = stationary_profile.mu_hole;
    profile.p_v = stationary_profile.mu_v;
    CHECK(residual(profile, p) <= 1e-12);
  }
  SUBCASE("a point perturbation is visible through a neighbour row") {
    const Params p = make_params(8, 1.0, 0.7, 0.3, 0.6);
    const auto stationary_profile = stationary::explicit_profile(p);
    MarginalProfile profile;
    profile.p_hole = stationary_profile.mu_hole;
    profile.p_v = stationary_profile.mu_v;
    const double delta = 1e-3;
    profile.p_v(4) += delta;
    CHECK(residual(profile, p) >= 0.5 * p.lambda * delta);
  }
}

TEST_CASE("integrate basics") {
  const Params p = make_params(4, 1.0, 0.5, 0.3, 0.5);
  const MarginalProfile initial = product_profile(p);
  SUBCASE("t_end = 0 returns the initial profile") {
    const Trajectory t = integrate(initial, p, 0.0, 0.01);
    CHECK(t.samples.size() == 1);
    CHECK((t.final_state().p_v == initial.p_v).all());
  }
  SUBCASE("dt above the stability bound is rejected, naming the bound") {
    const double bound = max_stable_dt(p);
    CHECK_THROWS_WITH_AS(integrate(initial, p, 1.0, bound * 1.01),
                         doctest::Contains("stability bound"), std::invalid_argument);
    CHECK_NOTHROW(integrate(initial, p, 1.0, bound));
  }
  SUBCASE("trajectory sampling includes endpoints with increasing times") {
    const Trajectory t = integrate(initial, p, 3.0, 0.01, 7);
    REQUIRE(t.samples.size() >= 2);
    CHECK(t.samples.size() <= 8);
    CHECK(t.samples.front().t == 0.0);
    CHECK(t.final_state().t == 3.0);
    for (std::size_t i = 1; i < t.samples.size(); ++i)
      CHECK(t.samples[i].t > t.samples[i - 1].t);
  }
}

TEST_CASE("holes relax to the uniform profile") {
  Params p = make_params(8, 1.3, 0.6, 0.2, 0.5);
  MarginalProfile initial = product_profile(p);
  // non-uniform but admissible hole start
  for (int k = 0; k < initial.layers(); ++k)
    initial.p_hole(k) = 0.1 + 0.06 * k;
  initial.p_v = 0.5 * (1.0 - initial.p_hole);
  // slowest hole mode decays at 2 lambda (1 - cos(pi/(S+2))) ~ 0.098 lambda,
  // so lambda t = 200 leaves ~3e-9 of the initial deviation
  const double t_end = 200.0 / p.lambda;
  const Trajectory t = integrate(initial, p, t_end, max_stable_dt(p) / 4.0);
  const Eigen::ArrayXd holes = t.final_state().p_hole;
  const double mean = holes.mean();
  CHECK((holes - mean).abs().maxCoeff() <= 1e-8);
  // conservation over the whole run
  CHECK(std::abs(holes.sum() - initial.p_hole.sum()) <= 1e-10);
}

TEST_CASE("the full system converges to the closed-form stationary profile") {
  const Params p = make_params(8, 1.0, 0.7, 0.3, 0.6);
  const Trajectory t =
      integrate(product_profile(p), p, 1000.0, max_stable_dt(p) / 2.0, 9);
  const auto expected = stationary::explicit_profile(p);
  CHECK((t.final_state().p_v - expected.mu_v).abs().maxCoeff() <= 1e-8);
  CHECK((t.final_state().p_hole - expected.mu_hole).abs().maxCoeff() <= 1e-8);
}
