#include <doctest.h>

#include <cmath>
#include <set>

#include "couette/rng.hpp"

using couette::Rng;

TEST_CASE("identical seeds reproduce the stream") {
  Rng a(42), b(42);
  for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("streams with different ids diverge") {
  Rng a(42, 0), b(42, 1), c(43, 0);
  int equal_ab = 0, equal_ac = 0;
  for (int i = 0; i < 64; ++i) {
    const auto va = a.next_u64();
    equal_ab += (va == b.next_u64());
    equal_ac += (va == c.next_u64());
  }
  CHECK(equal_ab == 0);
  CHECK(equal_ac == 0);
}

TEST_CASE("uniform stays in [0,1) with sane mean") {
  Rng rng(7);
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(std::abs(sum / n - 0.5) < 0.005);
}

TEST_CASE("below(n) covers the full range uniformly") {
  Rng rng(11);
  int counts[7] = {0};
  const int n = 70000;
  for (int i = 0; i < n; ++i) ++counts[rng.below(7)];
  for (int c : counts) {
    // 5 sigma around n/7 for a binomial(n, 1/7)
    const double mean = n / 7.0;
    const double sd = std::sqrt(mean * (1.0 - 1.0 / 7.0));
    CHECK(std::abs(c - mean) < 5.0 * sd);
  }
}

TEST_CASE("exponential has the requested mean") {
  Rng rng(3);
  const double rate = 2.5;
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double t = rng.exponential(rate);
    REQUIRE(t >= 0.0);
    sum += t;
  }
  // SE of the mean is 1/(rate sqrt(n)) ~ 9e-4
  CHECK(std::abs(sum / n - 1.0 / rate) < 5e-3);
}

TEST_CASE("derive_seed separates streams") {
  std::set<std::uint64_t> seen;
  for (int r = 0; r < 1000; ++r) seen.insert(couette::derive_seed(123, r));
  CHECK(seen.size() == 1000);
}
