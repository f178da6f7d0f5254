#include <cmath>
#include <numbers>

#include "doctest.h"
#include "eigenflow/assignment.hpp"
#include "eigenflow/oracle.hpp"
#include "helpers.hpp"

using namespace eigenflow;
using testutil::rel;

TEST_SUITE("oracle") {
  TEST_CASE("Bessel zeros and disc modes") {
    CHECK(oracle::bessel_j_zero(0, 1) == doctest::Approx(2.404825557695773).epsilon(1e-14));
    CHECK(oracle::bessel_j_zero(1, 1) == doctest::Approx(3.831705970207512).epsilon(1e-14));
    const oracle::DiscMode m = oracle::analytic_disc(1);
    CHECK(m.lambda == doctest::Approx(5.78318596).epsilon(1e-8));
    for (double th : {0.0, 0.9, 2.5, 4.0}) CHECK(std::abs(m.value(Vec2(std::cos(th), std::sin(th)))) <= 1e-12);
    CHECK(oracle::disc_mode_norm2(m) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(oracle::rellich_ratio(m) - 1.0) <= 1e-10);
    CHECK(std::abs(oracle::rellich_ratio(oracle::analytic_disc_mode(2, 1)) - 1.0) <= 1e-10);
  }

  TEST_CASE("square table") {
    const auto t = oracle::analytic_square(3);
    const double pi2 = std::numbers::pi * std::numbers::pi;
    CHECK(t[0].lambda == doctest::Approx(2 * pi2));
    CHECK(t[0].multiplicity == 1);
    CHECK(t[1].lambda == doctest::Approx(5 * pi2));
    CHECK(t[1].multiplicity == 2);
    // Midpoint rule is exact for these trigonometric products.
    const int n = 64;
    for (const auto& mode : t[1].modes) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          const double v = mode.value(Vec2((i + 0.5) / n - 0.5, (j + 0.5) / n - 0.5));
          s += v * v;
        }
      }
      CHECK(std::abs(s / (n * n) - 1.0) <= 1e-12);
    }
  }

  TEST_CASE("Richardson table removes even powers") {
    const std::vector<double> h{1e-2, 5e-3, 2.5e-3};
    std::vector<double> v;
    for (double s : h) v.push_back(3.0 + 2.0 * s * s - 7.0 * s * s * s * s);
    const Matrix t = oracle::richardson_table(h, v);
    CHECK(std::abs(t(2, 2) - 3.0) <= 1e-13);
  }

  TEST_CASE("FD branches for exact families") {
    const Problem pr = testutil::dirichlet(make_disc(1.0), 0.15);
    const double t0 = 0.8;
    const auto fd = oracle::fd_branch_derivatives(pr, t0, 0, 1);
    const double lam = fd.branches[0].lambda;
    CHECK(rel(fd.branches[0].dlam, -2 * lam / t0) <= 1e-8);

    const double c = 2.0;
    const Problem pc = testutil::dirichlet(make_disc(1.0), 0.15, scalar_potential(constant_field(c)));
    const auto fc = oracle::fd_branch_derivatives(pc, 1.0, 0, 1);
    const double mu = fc.branches[0].lambda - c;
    CHECK(rel(0.5 * fc.branches[0].d2lam, 3 * mu) <= 1e-6);
  }

  TEST_CASE("FD oracle separates a split double eigenvalue") {
    const Problem pr = testutil::dirichlet(make_square(1.0), 0.1, scalar_potential(linear_field(Vec2(1.0, 0.0))));
    const auto fd = oracle::fd_branch_derivatives(pr, 1.0, 1, 2);
    REQUIRE(fd.branches.size() == 2);
    CHECK(fd.branches[0].dlam != fd.branches[1].dlam);
    CHECK(fd.pairing_runner_up > fd.pairing_cost);
  }

  TEST_CASE("spectral count") {
    const Problem pr = testutil::dirichlet(make_disc(1.0), 0.15);
    const double big = solve_lowest(pr.assemble(1.0), 2).values[1];
    // lambda_j(t) = Lambda_j / t^2 for V = 0: count crossings of big/0.6^2 on [0.5, 1).
    const double lambda0 = big / 0.36;
    int expect = 0;
    const auto s = solve_lowest(pr.assemble(1.0), 12);
    REQUIRE(s.values.back() > lambda0);
    for (double v : s.values) {
      if (v < lambda0 && v / 0.25 >= lambda0) ++expect;
    }
    CHECK(expect > 0);
    CHECK(oracle::spectral_count(pr, lambda0, 0.5, 1.0) == expect);
  }

  TEST_CASE("assignment") {
    Matrix c(3, 3);
    c << 4, 1, 3, 2, 0, 5, 3, 2, 2;
    const Assignment a = solve_assignment(c);
    CHECK(a.cost == doctest::Approx(5.0));
    CHECK(a.cols == std::vector<int>{1, 0, 2});
    const Assignment b = second_best_assignment(c, a);
    CHECK(b.cost >= a.cost);
    CHECK(b.cols != a.cols);
    CHECK(std::isinf(second_best_assignment(Matrix::Constant(1, 1, 2.0), solve_assignment(Matrix::Constant(1, 1, 2.0))).cost));
  }
}
