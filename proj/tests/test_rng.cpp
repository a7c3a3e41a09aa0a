#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "normalizer.hpp"
#include "oracles.hpp"
#include "rng.hpp"

TEST_CASE("same seed reproduces the sequence") {
  qhuber::Rng a(123);
  qhuber::Rng b(123);
  for (int i = 0; i < 5; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("streams decorrelate") {
  qhuber::Rng a = qhuber::Rng::stream(42, 0);
  qhuber::Rng b = qhuber::Rng::stream(42, 1);
  qhuber::Rng c = qhuber::Rng::stream(42, 0);
  CHECK(a.next_u64() != b.next_u64());
  qhuber::Rng a2 = qhuber::Rng::stream(42, 0);
  CHECK(a2.next_u64() == c.next_u64());
}

TEST_CASE("uniform01 stays strictly inside the open interval") {
  qhuber::Rng rng(7);
  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform01();
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(sum / n == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("uniform01 passes a KS check against the uniform cdf") {
  qhuber::Rng rng(42);
  std::vector<double> u(2000);
  for (double& v : u) v = rng.uniform01();
  const double d = oracles::ks_statistic(u, [](double x) { return x; });
  // 1% critical value is about 1.63 / sqrt(n).
  CHECK(d < 1.63 / std::sqrt(2000.0));
}

TEST_CASE("normal draws look standard normal") {
  qhuber::Rng rng(11);
  const int n = 10000;
  double sum = 0.0, sq = 0.0;
  std::vector<double> sample(n);
  for (int i = 0; i < n; ++i) {
    sample[i] = rng.normal();
    sum += sample[i];
    sq += sample[i] * sample[i];
  }
  const double mean = sum / n;
  const double var = sq / n - mean * mean;
  CHECK(std::fabs(mean) < 0.05);
  CHECK(var == doctest::Approx(1.0).epsilon(0.05));
  sample.resize(2000);
  const double d = oracles::ks_statistic(
      sample, [](double x) { return qhuber::std_normal_cdf(x); });
  CHECK(d < 1.63 / std::sqrt(2000.0));
}

TEST_CASE("bounded integers cover the range evenly") {
  qhuber::Rng rng(3);
  std::vector<int> counts(8, 0);
  for (int i = 0; i < 8000; ++i) {
    const std::uint64_t v = rng.bounded(8);
    REQUIRE(v < 8);
    ++counts[static_cast<std::size_t>(v)];
  }
  for (int c : counts) {
    CHECK(c > 800);
    CHECK(c < 1200);
  }
  CHECK_THROWS_AS(rng.bounded(0), std::domain_error);
}

TEST_CASE("splitmix64 scrambles nearby seeds") {
  CHECK(qhuber::splitmix64(0) != qhuber::splitmix64(1));
  CHECK(qhuber::splitmix64(1) != qhuber::splitmix64(2));
}
