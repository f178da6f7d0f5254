#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "eigenflow/oracle.hpp"
#include "eigenflow/perturbation.hpp"
#include "helpers.hpp"

using namespace eigenflow;
using testutil::rel;

namespace {


struct Setup {
  Problem pr;
  AssembledOperator op;
  EigenCluster c;
  PerturbationInputs in;
  Matrix T1, T2;
};

Setup setup(Problem pr, double t0, int branch, double tol = 0.0) {
  AssembledOperator op = pr.assemble(t0);
  EigenCluster c = cluster_of_branch(op, branch, tol);
  PerturbationInputs in = perturbation_inputs(pr, op, true);
  Matrix T1 = build_T1(op, c, in);
  Matrix T2 = build_T2(op, c, in);
  return {std::move(pr), std::move(op), std::move(c), std::move(in), std::move(T1), std::move(T2)};
}

Matrix random_symmetric(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Matrix a(n, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) a(i, j) = g(rng);
  }
  return 0.5 * (a + a.transpose());
}

}  // namespace

TEST_SUITE("perturbation") {
  TEST_CASE("T1 and T2 for a constant potential") {
    const double c = 2.5;
    for (bool robin : {false, true}) {
      const auto v = scalar_potential(constant_field(c));
      Setup s = robin ? setup(testutil::robin(make_disc(1.0), 0.15, 0.0, v), 1.0, 1)
                      : setup(testutil::dirichlet(make_disc(1.0), 0.15, v), 1.0, 1);
      const int m = s.c.m;
      CHECK(m == 2);
      CHECK((s.T1 - 2 * c * Matrix::Identity(m, m)).cwiseAbs().maxCoeff() <= 1e-9);
      CHECK((s.T2 - c * Matrix::Identity(m, m)).cwiseAbs().maxCoeff() <= 1e-8);
    }
  }

  TEST_CASE("T1 and T2 vanish for V = 0 and theta = 0") {
    Setup s = setup(testutil::robin(make_square(1.0), 0.1, 0.0), 0.8, 1, 0.5);
    CHECK(s.T1.cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(s.T2.cwiseAbs().maxCoeff() <= 1e-10);
  }

  TEST_CASE("T1 off-diagonal vs direct quadrature") {
    Setup s = setup(testutil::dirichlet(make_square(1.0), 0.05, scalar_potential(linear_field(Vec2(1.0, 0.0)))), 1.0, 1, 0.5);
    REQUIRE(s.c.m == 2);
    const TriMesh& mesh = s.pr.mesh();
    const Vector u1 = s.c.U.col(0), u2 = s.c.U.col(1);
    // Same 3-point rule as the assembly, evaluated pointwise.
    const double bary[3][3] = {{2.0 / 3, 1.0 / 6, 1.0 / 6}, {1.0 / 6, 2.0 / 3, 1.0 / 6}, {1.0 / 6, 1.0 / 6, 2.0 / 3}};
    double integral = 0.0;
    for (std::size_t k = 0; k < mesh.triangles.size(); ++k) {
      const auto& t = mesh.triangles[k];
      for (const auto& b : bary) {
        const Vec2 x = b[0] * mesh.nodes[t[0]] + b[1] * mesh.nodes[t[1]] + b[2] * mesh.nodes[t[2]];
        const double vdot = 3.0 * x.x();  // d/dt t^2 (t x1) at t = 1
        const double a = b[0] * u1[t[0]] + b[1] * u1[t[1]] + b[2] * u1[t[2]];
        const double c = b[0] * u2[t[0]] + b[1] * u2[t[1]] + b[2] * u2[t[2]];
        integral += mesh.triangle_area(k) / 3.0 * vdot * a * c;
      }
    }
    CHECK(std::abs(s.T1(0, 1) - integral) <= 1e-12 * std::max(1.0, std::abs(integral)));
    CHECK(std::abs(s.T1(0, 1) - s.T1(1, 0)) <= 1e-12);
  }

  TEST_CASE("T2 collapse identity on random dense inputs") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
      const int n = 3 + trial % 7;
      const Matrix q = Eigen::HouseholderQR<Matrix>(random_symmetric(n, rng)).householderQ();
      const Matrix P = q.leftCols(2) * q.leftCols(2).transpose();
      const Matrix S = random_symmetric(n, rng);
      const Matrix a = random_symmetric(n, rng), b = random_symmetric(n, rng), th = random_symmetric(n, rng);
      const Matrix x = dense::t2_collapsed(P, S, a, b, th);
      const Matrix y = dense::t2_expanded(P, S, a, b, th);
      CHECK((x - y).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, y.cwiseAbs().maxCoeff()));
    }
  }

  TEST_CASE("T2 expanded vs collapsed on an assembled Robin operator") {
    Setup s = setup(testutil::robin(make_disc(1.0), 0.15, 1.5, scalar_potential(gaussian_field(8.0, Vec2(0.25, 0.1), 0.35))), 0.9, 0);
    const Matrix e = build_T2(s.op, s.c, s.in, true);
    CHECK((e - s.T2).cwiseAbs().maxCoeff() <= 1e-9 * std::max(1.0, s.T2.cwiseAbs().maxCoeff()));
    CHECK((s.T2 - s.T2.transpose()).cwiseAbs().maxCoeff() <= 1e-10 * std::max(1.0, s.T2.cwiseAbs().maxCoeff()));
  }

  TEST_CASE("first derivatives: pure scaling for V = 0") {
    const double t0 = 0.7;
    Setup s = setup(testutil::dirichlet(make_flower(1.0, 0.1, 3), 0.12), t0, 0);
    const DerivativeReport r = first_derivatives(s.c, s.T1);
    for (double d : r.dlam) CHECK(std::abs(d + 2 * s.c.lambda_omega / t0) <= 1e-8 * s.c.lambda_omega);
  }

  TEST_CASE("first derivatives: constant shift and FD oracle") {
    const double c = 3.0;
    const Problem base = testutil::dirichlet(make_square(1.0), 0.1);
    const double mu = solve_lowest(base.assemble(1.0), 1).values[0];
    Setup s = setup(testutil::dirichlet(make_square(1.0), 0.1, scalar_potential(constant_field(c))), 1.0, 0);
    const DerivativeReport r = first_derivatives(s.c, s.T1);
    CHECK(rel(r.dlam[0], -2 * mu) <= 1e-8);
    const auto fd = oracle::fd_branch_derivatives(s.pr, 1.0, 0, 1);
    CHECK(rel(r.dlam[0], fd.branches[0].dlam) <= 1e-6);
  }

  TEST_CASE("asymptotic coefficients") {
    const double c = 1.5;
    Setup s = setup(testutil::dirichlet(make_disc(1.0), 0.15, scalar_potential(constant_field(c))), 1.0, 0);
    const AsymptoticReport a = asymptotic_expansion(s.c, s.T1, s.T2);
    REQUIRE(a.branches.size() == 1);
    const double lam = s.c.lambda_omega;
    CHECK(a.groups.size() == 1);
    CHECK(rel(a.branches[0].a1, 2 * c - 2 * lam) <= 1e-8);
    CHECK(rel(a.branches[0].a2, 3 * (lam - c)) <= 1e-7);

    Setup z = setup(testutil::dirichlet(make_disc(1.0), 0.15), 1.0, 0);
    const AsymptoticReport b = asymptotic_expansion(z.c, z.T1, z.T2);
    CHECK(rel(b.branches[0].a1, -2 * z.c.lambda_omega) <= 1e-8);
    CHECK(rel(b.branches[0].a2, 3 * z.c.lambda_omega) <= 1e-7);
  }

  TEST_CASE("near-degenerate square level: per-branch and cluster routes vs FD") {
    const Problem pr = testutil::dirichlet(make_square(1.0), 0.1, scalar_potential(linear_field(Vec2(1.0, 0.0))));
    const AssembledOperator op = pr.assemble(1.0);
    const auto fd = oracle::fd_branch_derivatives(pr, 1.0, 1, 2);
    REQUIRE(fd.branches.size() == 2);
    const PerturbationInputs in = perturbation_inputs(pr, op, true);

    // Default tolerance resolves the two discrete branches separately.
    for (int j = 0; j < 2; ++j) {
      const EigenCluster c = cluster_of_branch(op, 1 + j);
      REQUIRE(c.m == 1);
      const AsymptoticReport a = asymptotic_expansion(c, build_T1(op, c, in), build_T2(op, c, in));
      CHECK(rel(a.branches[0].a1, fd.branches[j].dlam) <= 1e-6);
      CHECK(rel(a.branches[0].a2, 0.5 * fd.branches[j].d2lam) <= 1e-6);
    }

    // The lumped m = 2 cluster agrees up to the discrete splitting.
    const EigenCluster c = cluster_of_branch(op, 1, 0.5);
    REQUIRE(c.m == 2);
    const DerivativeReport r = first_derivatives(c, build_T1(op, c, in));
    const bool swap = std::abs(r.dlam[0] - fd.branches[0].dlam) > std::abs(r.dlam[0] - fd.branches[1].dlam);
    for (int i = 0; i < 2; ++i) CHECK(rel(r.dlam[i], fd.branches[swap ? 1 - i : i].dlam) <= 1e-4);
  }
}
