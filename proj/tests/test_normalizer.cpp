#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "normalizer.hpp"
#include "oracles.hpp"

using qhuber::LossParams;
using qhuber::NormalizationEval;

TEST_CASE("standard normal cdf pinned values") {
  CHECK(qhuber::std_normal_cdf(0.0) == 0.5);
  CHECK(qhuber::std_normal_cdf(0.5) ==
        doctest::Approx(0.6914624612740131).epsilon(1e-14));
  for (double x : {-2.0, -0.3, 0.0, 1.1, 4.0})
    CHECK(qhuber::std_normal_cdf(x) + qhuber::std_normal_cdf(-x) ==
          doctest::Approx(1.0).epsilon(1e-14));
  CHECK(qhuber::std_normal_cdf(5.0) > 1.0 - 3e-7);
  CHECK(qhuber::std_normal_cdf(5.0) < 1.0);
}

TEST_CASE("normalization constant: exact kappa = 0 values") {
  const NormalizationEval at_half = qhuber::normalization({0.5, 0.0});
  CHECK(at_half.c == 4.0);
  CHECK(at_half.c_prime == 0.0);
  CHECK(at_half.c_double_prime == 32.0);
  CHECK(at_half.d2log_c == 8.0);
  CHECK(qhuber::normalization({0.2, 0.0}).c == 6.25);
  CHECK(qhuber::normalization({0.3, 0.0}).c_prime ==
        doctest::Approx(-9.070294784580497).epsilon(1e-14));
}

TEST_CASE("normalization constant: pinned smoothed values") {
  // Frozen from the quadrature oracle before the closed form was written.
  CHECK(qhuber::normalization({0.5, 1.0}).c ==
        doctest::Approx(4.4898380482581496).epsilon(1e-12));
  CHECK(qhuber::normalization({0.3, 1.0}).c ==
        doctest::Approx(5.24716892310347).epsilon(1e-12));
}

TEST_CASE("closed-form derivatives match finite differences") {
  for (double tau : {0.15, 0.3, 0.5, 0.7})
    for (double kappa : {0.0, 0.5, 1.0}) {
      const NormalizationEval nm = qhuber::normalization({tau, kappa});
      const auto c_of = [&](double t) { return qhuber::normalization({t, kappa}).c; };
      const auto logc_of = [&](double t) {
        return qhuber::normalization({t, kappa}).log_c;
      };
      CHECK(oracles::rel_err(nm.c_prime,
                             oracles::central_diff1(c_of, tau, 1e-6)) < 1e-8);
      CHECK(oracles::rel_err(nm.c_double_prime,
                             oracles::central_diff2(c_of, tau, 1e-4)) < 1e-6);
      CHECK(oracles::rel_err(nm.dlog_c,
                             oracles::central_diff1(logc_of, tau, 1e-6)) < 1e-8);
      CHECK(oracles::rel_err(nm.d2log_c,
                             oracles::central_diff2(logc_of, tau, 1e-4)) < 1e-6);
    }
}

TEST_CASE("quadrature oracle agrees with the closed form") {
  for (const LossParams p :
       {LossParams{0.5, 1.0}, LossParams{0.3, 1.0}, LossParams{0.2, 0.0},
        LossParams{0.05, 0.5}, LossParams{0.9, 0.05}}) {
    const double closed = qhuber::normalization(p).c;
    const double quad = qhuber::c_quadrature_oracle(p, 1e-10);
    CHECK(std::fabs(closed - quad) / closed < 1e-8);
  }
  CHECK(qhuber::c_quadrature_oracle({0.5, 1.0}, 1e-10) ==
        doctest::Approx(4.4898380482581496).epsilon(1e-9));
}

TEST_CASE("normalized loss recomposes from parts") {
  const std::vector<double> r{-2.0, 0.5};
  const LossParams p{0.3, 1.0};
  const qhuber::NormalizedTauCalculus got = qhuber::normalized_loss(r, p);
  const qhuber::TauCalculus raw = qhuber::total_loss(r, p);
  const NormalizationEval nm = qhuber::normalization(p);
  CHECK(got.value ==
        doctest::Approx(raw.value + 2.0 * nm.log_c).epsilon(1e-14));
  CHECK(got.value == doctest::Approx(0.680 + 2.0 * std::log(5.24716892310347))
                         .epsilon(1e-12));
  CHECK(got.d_tau == doctest::Approx(raw.d_tau + 2.0 * nm.dlog_c).epsilon(1e-14));
  CHECK(got.d2_tau ==
        doctest::Approx(raw.d2_tau + 2.0 * nm.d2log_c).epsilon(1e-14));
}

TEST_CASE("normalized loss derivatives match finite differences") {
  const std::vector<double> r{-1.7, -0.4, 0.05, 0.6, 2.3};
  const double kappa = 0.7;
  const double tau = 0.4;  // all breakpoint crossings sit far from 0.4
  const auto value = [&](double t) {
    return qhuber::normalized_loss(r, {t, kappa}).value;
  };
  const qhuber::NormalizedTauCalculus got = qhuber::normalized_loss(r, {tau, kappa});
  CHECK(oracles::rel_err(got.d_tau, oracles::central_diff1(value, tau, 1e-6)) <
        1e-8);
  CHECK(oracles::rel_err(got.d2_tau, oracles::central_diff2(value, tau, 1e-4)) <
        1e-5);
}

TEST_CASE("tau grid construction") {
  const std::vector<double> g = qhuber::make_tau_grid(0.01, 0.99, 0.001);
  CHECK(g.size() == 981);
  CHECK(g.front() == doctest::Approx(0.01).epsilon(1e-15));
  CHECK(g.back() == doctest::Approx(0.99).epsilon(1e-15));
  CHECK(qhuber::make_tau_grid(0.5, 0.5, 0.1) == std::vector<double>{0.5});
  const std::vector<double> two = qhuber::make_tau_grid(0.2, 0.3, 0.5);
  CHECK(two.size() == 2);
  CHECK(two[0] == doctest::Approx(0.2));
  CHECK(two[1] == doctest::Approx(0.3));
  CHECK_THROWS_AS(qhuber::make_tau_grid(0.0, 0.9, 0.1), std::domain_error);
  CHECK_THROWS_AS(qhuber::make_tau_grid(0.1, 1.0, 0.1), std::domain_error);
  CHECK_THROWS_AS(qhuber::make_tau_grid(0.1, 0.9, -0.1), std::domain_error);
}

TEST_CASE("convexity certificate: exact minimum at kappa = 0") {
  const std::vector<double> grid{0.4, 0.5, 0.6};
  CHECK(qhuber::convexity_certificate(0.0, grid) == 8.0);
  // The certificate stays positive for the smoothing levels in routine use.
  const std::vector<double> full = qhuber::make_tau_grid(0.01, 0.99, 0.001);
  for (double kappa : {0.0, 0.5, 1.0})
    CHECK(qhuber::convexity_certificate(kappa, full) > 0.0);
}

TEST_CASE("normalizer domain errors") {
  CHECK_THROWS_AS(qhuber::normalization({0.0, 1.0}), std::domain_error);
  CHECK_THROWS_AS(qhuber::normalization({1.0, 1.0}), std::domain_error);
  CHECK_THROWS_AS(qhuber::normalization({0.5, -0.5}), std::domain_error);
  CHECK_THROWS_AS(qhuber::convexity_certificate(1.0, {}), std::domain_error);
  CHECK_THROWS_AS(qhuber::c_quadrature_oracle({0.5, 1.0}, 0.0),
                  std::domain_error);
  const std::vector<double> mid{0.5};
  CHECK_THROWS_AS(qhuber::convexity_certificate(-1.0, mid), std::domain_error);
}
