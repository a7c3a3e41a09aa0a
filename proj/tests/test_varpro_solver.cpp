#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "datasets.hpp"
#include "oracles.hpp"
#include "rng.hpp"
#include "varpro_solver.hpp"

using qhuber::AffineModel;
using qhuber::JointSolution;
using qhuber::Matrix;
using qhuber::SolverConfig;

namespace {

AffineModel noisy_instance(std::uint64_t seed, std::size_t n, std::size_t p,
                           double pos_fraction) {
  qhuber::Rng rng(seed);
  std::vector<double> x_true(p);
  for (std::size_t j = 0; j < p; ++j)
    x_true[j] = static_cast<double>(j + 1) * 1.5;
  const qhuber::LinearDemo demo =
      qhuber::gen_linear_demo(rng, n, x_true, {2.0, pos_fraction});
  return demo.model;
}

}  // namespace

TEST_CASE("objective pinned value on the unit instance") {
  AffineModel m;
  m.design = Matrix(1, 1);
  m.design(0, 0) = 1.0;
  m.response = {0.0};
  const std::vector<double> x{0.0};
  CHECK(qhuber::objective(m, x, 0.5, 0.0) ==
        doctest::Approx(std::log(4.0)).epsilon(1e-15));
}

TEST_CASE("projected gradient matches finite differences of the projection") {
  const AffineModel m = noisy_instance(3, 30, 2, 0.7);
  const std::vector<double> x{0.3, -0.2};
  const double kappa = 0.8;
  const qhuber::ProjectedGradient g = qhuber::projected_gradient(m, x, kappa);
  for (std::size_t j = 0; j < 2; ++j) {
    const auto proj = [&](double xj) {
      std::vector<double> xt = x;
      xt[j] = xj;
      std::vector<double> r(m.response);
      std::vector<double> ax(m.design.rows);
      qhuber::matvec(m.design, xt, ax);
      for (std::size_t i = 0; i < r.size(); ++i) r[i] -= ax[i];
      return qhuber::solve_tau(r, kappa).value;
    };
    const double fd = oracles::central_diff1(proj, x[j], 1e-5);
    CHECK(oracles::rel_err(g.grad[j], fd) < 1e-4);
  }
}

TEST_CASE("joint solve recovers a noiseless linear model") {
  qhuber::Rng rng(5);
  const std::vector<double> x_true{2.0, 5.0};
  const qhuber::LinearDemo demo =
      qhuber::gen_linear_demo(rng, 40, x_true, {0.0, 0.5});
  const JointSolution sol = qhuber::solve_joint(demo.model);
  REQUIRE(sol.converged);
  CHECK(sol.err <= 1e-6);
  CHECK(std::fabs(sol.x[0] - 2.0) < 1e-4);
  CHECK(std::fabs(sol.x[1] - 5.0) < 1e-4);
  // Zero residuals leave only the normalizer, whose minimum sits at 0.5.
  CHECK(sol.tau == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("joint solve invariants on noisy instances") {
  for (std::uint64_t seed : {21, 22, 23, 24, 25}) {
    const AffineModel m = noisy_instance(seed, 60, 3, 0.8);
    const JointSolution sol = qhuber::solve_joint(m);
    REQUIRE(sol.converged);
    CHECK(sol.err <= 1e-6);
    for (std::size_t i = 1; i < sol.trace.size(); ++i)
      CHECK(sol.trace[i] <= sol.trace[i - 1] + 1e-12);
    // Stationarity at the reported solution.
    const qhuber::ProjectedGradient g =
        qhuber::projected_gradient(m, sol.x, 1.0);
    const std::vector<double> zero(m.design.cols, 0.0);
    const qhuber::ProjectedGradient g0 =
        qhuber::projected_gradient(m, zero, 1.0);
    CHECK(qhuber::norm2(g.grad) <=
          1e-6 * (1.0 + qhuber::norm2(g0.grad)) + 1e-12);
    CHECK(sol.objective ==
          doctest::Approx(qhuber::objective(m, sol.x, sol.tau, 1.0))
              .epsilon(1e-12));
  }
}

TEST_CASE("trace starts at the x = 0 objective") {
  const AffineModel m = noisy_instance(9, 50, 2, 0.6);
  const JointSolution sol = qhuber::solve_joint(m);
  const qhuber::TauSolveResult at_zero = qhuber::solve_tau(m.response, 1.0);
  CHECK(sol.trace.front() == doctest::Approx(at_zero.value).epsilon(1e-13));
}

TEST_CASE("fixed-tau solve beats least squares on its own objective") {
  const AffineModel m = noisy_instance(17, 40, 2, 0.9);
  const double tau = 0.7;
  SolverConfig cfg;
  cfg.kappa = 0.5;
  const JointSolution sol = qhuber::solve_fixed_tau(m, tau, cfg);
  REQUIRE(sol.converged);
  CHECK(sol.tau == tau);
  const std::vector<double> ls = qhuber::least_squares(m);
  CHECK(sol.objective <= qhuber::objective(m, ls, tau, 0.5) + 1e-9);
}

TEST_CASE("least squares matches the normal-equations oracle") {
  const AffineModel m = noisy_instance(31, 45, 3, 0.5);
  const std::vector<double> got = qhuber::least_squares(m);
  const std::vector<double> want =
      oracles::normal_equations_ls(m.design, m.response);
  for (std::size_t j = 0; j < got.size(); ++j)
    CHECK(got[j] == doctest::Approx(want[j]).epsilon(1e-10));
}

TEST_CASE("bordered determinant is minus one for any curvature") {
  for (double h : {-5.0, 0.0, 3.7, 1e6})
    CHECK(qhuber::bordered_determinant(h) == -1.0);
  CHECK_THROWS_AS(qhuber::bordered_determinant(std::nan("")),
                  std::domain_error);
}

TEST_CASE("solver validation") {
  AffineModel empty;
  CHECK_THROWS_AS(qhuber::solve_joint(empty), std::domain_error);

  AffineModel m = noisy_instance(1, 10, 2, 0.5);
  SolverConfig bad;
  bad.kappa = 0.0;
  CHECK_THROWS_AS(qhuber::solve_joint(m, bad), std::domain_error);
  SolverConfig neg_eps;
  neg_eps.epsilon = -1.0;
  CHECK_THROWS_AS(qhuber::solve_joint(m, neg_eps), std::domain_error);
  CHECK_THROWS_AS(qhuber::solve_fixed_tau(m, 0.0), std::domain_error);
  CHECK_THROWS_AS(qhuber::solve_fixed_tau(m, 1.0), std::domain_error);

  m.response.pop_back();
  CHECK_THROWS_AS(qhuber::solve_joint(m), std::domain_error);
}
