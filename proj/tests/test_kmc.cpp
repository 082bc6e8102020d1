#include <doctest.h>

#include <cmath>
#include <map>
#include <stdexcept>
#include <vector>

#include "couette/kmc.hpp"
#include "couette/lattice.hpp"
#include "couette/moments.hpp"
#include "couette/stationary.hpp"

using namespace couette;
using namespace couette::kmc;

namespace {

Params make_params(int S, int W) {
  Params p;
  p.S = S;
  p.W = W;
  return p;
}

Configuration random_config(int S, int W, Rng& rng) {
  Configuration config(S, W);
  for (int k = 0; k < config.layers(); ++k)
    for (int x = 0; x < W; ++x) config.set(k, x, static_cast<Velocity>(rng.below(3)));
  return config;
}

/// z-comparison of two independent estimates with their standard errors.
void check_within_3se(const Eigen::ArrayXd& a, const Eigen::ArrayXd& se_a,
                      const Eigen::ArrayXd& b, const Eigen::ArrayXd& se_b) {
  for (int k = 0; k < a.size(); ++k) {
    const double se = std::sqrt(se_a(k) * se_a(k) + se_b(k) * se_b(k));
    CHECK(std::abs(a(k) - b(k)) <= 3.0 * se);
  }
}

std::vector<SimReport> run_replicas(const Params& params, double t_burn, double t_measure,
                                    std::uint64_t seed, int replicas,
                                    const RunOptions& options = {}, double vee_share = 0.5) {
  std::vector<SimReport> reports;
  reports.reserve(replicas);
  for (int r = 0; r < replicas; ++r) {
    Configuration initial = init_product(params, derive_seed(seed, 2 * r));
    // vee_share != 0.5: reassign occupied sites deterministically
    if (vee_share != 0.5) {
      Rng rng(derive_seed(seed, 1000 + r));
      for (int k = 0; k < initial.layers(); ++k)
        for (int x = 0; x < initial.width(); ++x)
          if (initial.at(k, x) != Velocity::Hole)
            initial.set(k, x,
                        rng.uniform() < vee_share ? Velocity::Vee : Velocity::Zero);
    }
    reports.push_back(
        run(initial, params, t_burn, t_measure, derive_seed(seed, 2 * r + 1), options));
  }
  return reports;
}

}  // namespace

TEST_CASE("total_rate on hand-enumerable configurations") {
  SUBCASE("all holes has rate zero") {
    Params p = make_params(3, 5);
    p.epsilon = 2.0;
    CHECK(total_rate(Configuration(3, 5, Velocity::Hole), p) == 0.0);
  }
  SUBCASE("single column (V,0) with unit rates") {
    // vertical pair unequal (lambda) + bottom V (beta) + top 0 (beta)
    // + two occupied sites (epsilon); no flow on a width-1 torus
    Params p = make_params(0, 1);
    p.lambda = p.lambda1 = p.beta = p.epsilon = 1.0;
    Configuration config(0, 1);
    config.set(0, 0, Velocity::Vee);
    config.set(1, 0, Velocity::Zero);
    CHECK(total_rate(config, p) == doctest::Approx(5.0));
  }
  SUBCASE("doubling all rates doubles the total") {
    Rng rng(17);
    for (int i = 0; i < 10; ++i) {
      const Configuration config = random_config(2, 6, rng);
      Params p = make_params(2, 6);
      p.lambda = rng.uniform();
      p.lambda1 = rng.uniform();
      p.beta = rng.uniform();
      p.epsilon = rng.uniform();
      Params doubled = p;
      doubled.lambda *= 2.0;
      doubled.lambda1 *= 2.0;
      doubled.beta *= 2.0;
      doubled.epsilon *= 2.0;
      CHECK(total_rate(config, doubled) ==
            doctest::Approx(2.0 * total_rate(config, p)).epsilon(1e-12));
    }
  }
}

TEST_CASE("width-1 torus disables horizontal flow") {
  Params p = make_params(1, 1);
  p.lambda1 = 10.0;
  Configuration config(1, 1);
  config.set(0, 0, Velocity::Vee);
  for (const Event& e : enumerate_enabled_events(config, p))
    CHECK(e.kind != Event::Kind::HorizontalFlow);
}

TEST_CASE("simulator tables agree with full scans after many events") {
  Rng rng(23);
  Params p = make_params(3, 16);
  p.lambda = 1.2;
  p.lambda1 = 0.8;
  p.beta = 0.6;
  p.epsilon = 0.4;
  Configuration initial = random_config(3, 16, rng);
  Simulator sim(initial, p, Rng(99));
  const std::int64_t particles = total_particles(initial);
  for (int i = 0; i < 20000; ++i) {
    if (!sim.step()) break;
    if (i % 500 == 0) {
      CHECK(sim.total_rate() == doctest::Approx(total_rate(sim.config(), p)).epsilon(1e-12));
      CHECK(sim.particles() == particles);
      CHECK(total_particles(sim.config()) == particles);
      const LayerCounts counts = layer_histogram(sim.config());
      for (int k = 0; k < sim.config().layers(); ++k) {
        CHECK(sim.layer_holes()[k] == counts.hole(k));
        CHECK(sim.layer_vees()[k] == counts.vee(k));
      }
    }
  }
}

TEST_CASE("a single enabled event is chosen with probability one") {
  Params p = make_params(0, 2);
  p.lambda = 0.0;
  p.lambda1 = 0.0;
  p.epsilon = 0.0;
  p.beta = 2.0;
  Configuration config(0, 2, Velocity::Hole);
  config.set(0, 1, Velocity::Vee);  // only the bottom flip at x=1 is enabled
  Simulator sim(config, p, Rng(5));
  for (int i = 0; i < 10; ++i) {
    auto proposal = sim.propose();
    REQUIRE(proposal.has_value());
    CHECK(proposal->event == Event{Event::Kind::BottomFlip, 0, 1});
  }
  auto result = sim.step();
  REQUIRE(result.has_value());
  CHECK(sim.config().at(0, 1) == Velocity::Zero);
  CHECK_FALSE(sim.step().has_value());  // V->0 used up: nothing left
}

TEST_CASE("event-kind frequencies match the rate proportions") {
  // frozen configuration: propose() repeatedly without committing
  Rng rng(31);
  Params p = make_params(2, 12);
  p.lambda = 1.0;
  p.lambda1 = 0.7;
  p.beta = 1.3;
  p.epsilon = 0.5;
  const Configuration config = random_config(2, 12, rng);
  Simulator sim(config, p, Rng(77));

  // per-kind rates from an independent enumeration
  std::map<Event::Kind, double> rate;
  for (const Event& e : enumerate_enabled_events(config, p)) {
    const double r = e.kind == Event::Kind::VerticalSwap      ? p.lambda
                     : e.kind == Event::Kind::HorizontalFlow  ? p.lambda1
                     : e.kind == Event::Kind::Perturb         ? p.epsilon
                                                              : p.beta;
    rate[e.kind] += r;
  }
  double total = 0.0;
  for (const auto& [kind, r] : rate) total += r;
  CHECK(total == doctest::Approx(total_rate(config, p)).epsilon(1e-12));

  const int n = 100000;
  std::map<Event::Kind, int> counts;
  for (int i = 0; i < n; ++i) {
    auto proposal = sim.propose();
    REQUIRE(proposal.has_value());
    ++counts[proposal->event.kind];
  }
  for (const auto& [kind, r] : rate) {
    const double share = r / total;
    const double mean = n * share;
    const double sd = std::sqrt(n * share * (1.0 - share));
    CHECK(std::abs(counts[kind] - mean) <= 3.0 * sd);
  }
}

TEST_CASE("pure vertical dynamics conserves each column") {
  Rng rng(41);
  Params p = make_params(3, 8);
  p.lambda1 = 0.0;
  p.beta = 0.0;
  p.epsilon = 0.0;
  const Configuration initial = random_config(3, 8, rng);
  std::vector<int> before(p.W, 0);
  for (int x = 0; x < p.W; ++x)
    for (int k = 0; k < initial.layers(); ++k)
      before[x] += initial.at(k, x) != Velocity::Hole;
  Simulator sim(initial, p, Rng(4));
  for (int i = 0; i < 5000; ++i) {
    auto result = sim.step();
    if (!result) break;
    CHECK(result->event.kind == Event::Kind::VerticalSwap);
  }
  for (int x = 0; x < p.W; ++x) {
    int after = 0;
    for (int k = 0; k < sim.config().layers(); ++k)
      after += sim.config().at(k, x) != Velocity::Hole;
    CHECK(after == before[x]);
  }
}

TEST_CASE("absorbing states freeze the measurement") {
  Params p = make_params(1, 4);
  p.rho = 0.0;  // all holes: nothing can ever happen
  const Configuration initial = init_product(p, 3);
  const SimReport report = run(initial, p, 1.0, 10.0, 9);
  REQUIRE(report.measured);
  CHECK((report.p_hole == 1.0).all());
  CHECK((report.p_v == 0.0).all());
  CHECK((report.se_hole == 0.0).all());
  CHECK(report.events.total() == 0);
}

TEST_CASE("zero-duration windows are flagged, not averaged") {
  Params p = make_params(1, 8);
  const SimReport report = run(init_product(p, 3), p, 0.5, 0.0, 9);
  CHECK_FALSE(report.measured);
  CHECK(report.p_hole.size() == 0);
}

TEST_CASE("runs are deterministic in the seed") {
  Params p = make_params(2, 16);
  p.epsilon = 0.3;
  const Configuration initial = init_product(p, 11);
  const SimReport a = run(initial, p, 5.0, 20.0, 123);
  const SimReport b = run(initial, p, 5.0, 20.0, 123);
  CHECK((a.p_v == b.p_v).all());
  CHECK((a.se_v == b.se_v).all());
  CHECK(a.events.total() == b.events.total());
  const SimReport c = run(initial, p, 5.0, 20.0, 124);
  CHECK_FALSE((a.p_v == c.p_v).all());
}

TEST_CASE("report probabilities are normalized and holes add up") {
  Params p = make_params(3, 32);
  p.epsilon = 0.2;
  p.rho = 0.55;
  const Configuration initial = init_product(p, 21);
  const std::int64_t M = total_particles(initial);
  const SimReport report = run(initial, p, 10.0, 100.0, 5);
  REQUIRE(report.measured);
  for (int k = 0; k < report.p_hole.size(); ++k)
    CHECK(std::abs(report.p_hole(k) + report.p_zero(k) + report.p_v(k) - 1.0) <= 1e-12);
  // hole count is conserved, so the time average obeys the exact identity
  const double expected = p.layers() - static_cast<double>(M) / p.W;
  CHECK(std::abs(report.p_hole.sum() - expected) <= 1e-9);
  CHECK(report.mean_particles == doctest::Approx(static_cast<double>(M)));
}

TEST_CASE("stationary kMC profile reproduces the linear law") {
  // rho = 1: no holes, single replica suffices at W = 64
  Params p = make_params(2, 64);
  p.rho = 1.0;
  p.epsilon = 0.0;
  const Configuration initial = init_product(p, 7);
  const SimReport report = run(initial, p, 200.0, 2000.0, 71);
  REQUIRE(report.measured);
  const auto expected = stationary::linear_profile(p);  // 0.2, 0.4, 0.6, 0.8
  for (int k = 0; k < 4; ++k)
    CHECK(std::abs(report.p_v(k) - expected.mu_v(k)) <= 3.0 * report.se_v(k));
}

TEST_CASE("identity-swap elision does not change the law") {
  Params p = make_params(2, 48);
  p.epsilon = 0.4;
  p.rho = 0.6;
  RunOptions noop;
  noop.include_noop_swaps = true;
  const SimReport lean =
      merge_reports(run_replicas(p, 50.0, 400.0, 100, 6), 100);
  const SimReport padded =
      merge_reports(run_replicas(p, 50.0, 400.0, 200, 6, noop), 200);
  check_within_3se(lean.p_v, lean.se_v, padded.p_v, padded.se_v);
  check_within_3se(lean.p_hole, lean.se_hole, padded.p_hole, padded.se_hole);
  // the padded variant really does record extra (identity) swap events
  CHECK(padded.events.vertical_swap > lean.events.vertical_swap);
}

TEST_CASE("layer marginals do not depend on lambda1") {
  Params base = make_params(2, 48);
  base.epsilon = 0.3;
  base.rho = 0.5;
  std::vector<SimReport> merged;
  std::uint64_t seed = 300;
  for (double lambda1 : {0.0, 1.0, 5.0}) {
    Params p = base;
    p.lambda1 = lambda1;
    merged.push_back(merge_reports(run_replicas(p, 50.0, 400.0, seed, 6), seed));
    seed += 100;
  }
  check_within_3se(merged[0].p_v, merged[0].se_v, merged[1].p_v, merged[1].se_v);
  check_within_3se(merged[1].p_v, merged[1].se_v, merged[2].p_v, merged[2].se_v);
  check_within_3se(merged[0].p_hole, merged[0].se_hole, merged[2].p_hole, merged[2].se_hole);
}

TEST_CASE("stationary estimates forget the initial Zero/Vee split") {
  Params p = make_params(2, 48);
  p.epsilon = 0.25;
  p.rho = 0.6;
  const SimReport even =
      merge_reports(run_replicas(p, 60.0, 400.0, 500, 6, {}, 0.5), 500);
  const SimReport skewed =
      merge_reports(run_replicas(p, 60.0, 400.0, 600, 6, {}, 1.0), 600);
  check_within_3se(even.p_v, even.se_v, skewed.p_v, skewed.se_v);
}

TEST_CASE("transient ensemble averages match the integrated moment equations") {
  Params p = make_params(2, 128);
  p.epsilon = 0.4;
  p.beta = 0.8;
  p.rho = 0.5;
  const int replicas = 1000;
  const moments::MarginalProfile initial = moments::product_profile(p);
  for (double t : {1.0, 5.0, 20.0}) {
    Eigen::ArrayXd sum = Eigen::ArrayXd::Zero(p.layers());
    Eigen::ArrayXd sum_sq = Eigen::ArrayXd::Zero(p.layers());
    for (int r = 0; r < replicas; ++r) {
      Configuration config = init_product(p, derive_seed(9000 + r, 0));
      Simulator sim(config, p, Rng(9000 + r, 1));
      sim.advance_to(t);
      const LayerCounts counts = layer_histogram(sim.config());
      for (int k = 0; k < p.layers(); ++k) {
        const double v = static_cast<double>(counts.vee(k)) / p.W;
        sum(k) += v;
        sum_sq(k) += v * v;
      }
    }
    const Eigen::ArrayXd mean = sum / replicas;
    const Eigen::ArrayXd se =
        ((sum_sq / replicas - mean.square()) / (replicas - 1)).max(0.0).sqrt();
    const auto ode =
        moments::integrate(initial, p, t, moments::max_stable_dt(p) / 4.0, 2).final_state();
    for (int k = 0; k < p.layers(); ++k)
      CHECK(std::abs(mean(k) - ode.p_v(k)) <= 3.0 * se(k));
  }
}

TEST_CASE("merge_reports validates and averages") {
  Params p = make_params(1, 16);
  p.epsilon = 0.1;
  const auto reports = run_replicas(p, 5.0, 50.0, 42, 4);
  const SimReport merged = merge_reports(reports, 42);
  CHECK(merged.replicas == 4);
  CHECK(merged.seed == 42);
  Eigen::ArrayXd manual = Eigen::ArrayXd::Zero(p.layers());
  for (const auto& r : reports) manual += r.p_v;
  CHECK((merged.p_v - manual / 4.0).abs().maxCoeff() <= 1e-15);

  SUBCASE("mismatched windows are rejected") {
    auto other = run(init_product(p, 1), p, 5.0, 51.0, 9);
    std::vector<SimReport> bad{reports[0], other};
    CHECK_THROWS_AS(merge_reports(bad, 1), std::invalid_argument);
  }
  SUBCASE("empty input is rejected") {
    CHECK_THROWS_AS(merge_reports({}, 1), std::invalid_argument);
  }
}

TEST_CASE("the one-shot step wrapper advances config and rng") {
  Params p = make_params(1, 6);
  p.epsilon = 0.5;
  Configuration config = init_product(p, 15);
  const Configuration before = config;
  Rng rng(88);
  auto result = step(config, p, rng);
  REQUIRE(result.has_value());
  CHECK(result->dt > 0.0);
  CHECK_FALSE(config == before);
  // rng state moved on: the next draw differs from a fresh generator's first
  CHECK(rng.next_u64() != Rng(88).next_u64());
}
