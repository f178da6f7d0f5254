#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "eigenflow/error.hpp"
#include "eigenflow/oracle.hpp"
#include "eigenflow/spectra.hpp"
#include "helpers.hpp"

using namespace eigenflow;
using testutil::rel;

namespace {

constexpr double kPi2 = std::numbers::pi * std::numbers::pi;

Matrix random_matrix(int rows, int cols, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Matrix a(rows, cols);
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) a(i, j) = g(rng);
  }
  return a;
}

}  // namespace

TEST_SUITE("spectra") {
  TEST_CASE("unit square, lowest four") {
    const Problem pr = testutil::dirichlet(make_square(1.0), 0.05);
    const auto s = solve_lowest(pr.assemble(1.0), 4);
    const double expect[] = {2 * kPi2, 5 * kPi2, 5 * kPi2, 8 * kPi2};
    REQUIRE(s.size() == 4);
    for (int i = 0; i < 4; ++i) CHECK(rel(s.values[i], expect[i]) < 0.02);
    CHECK(s.count_below == 0);
  }

  TEST_CASE("unit disc, lowest") {
    const Problem pr = testutil::dirichlet(make_disc(1.0), 0.05);
    const auto s = solve_lowest(pr.assemble(1.0), 1);
    CHECK(rel(s.values[0], 5.78318596) < 0.02);
  }

  TEST_CASE("identity pencil") {
    const Problem pr = testutil::robin(make_disc(1.0), 0.2, 0.0);
    const SparseMatrix& M = pr.mass();
    const auto s = solve_pencil(M, M, 3, 0.3);
    for (double v : s.values) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
  }

  TEST_CASE("Lanczos agrees with the dense path") {
    const Problem pr = testutil::dirichlet(make_disc(1.0), 0.1, scalar_potential(gaussian_field(8.0, Vec2(0.25, 0.1), 0.35)));
    const AssembledOperator op = pr.assemble(0.8);
    SolverOptions lanczos;
    lanczos.dense_threshold = 0;
    SolverOptions dense;
    dense.dense_threshold = 1 << 30;
    const auto a = solve_spectrum(op, 4, 60.0, lanczos);
    const auto b = solve_spectrum(op, 4, 60.0, dense);
    REQUIRE(a.size() == b.size());
    CHECK(a.count_below == b.count_below);
    for (int i = 0; i < a.size(); ++i) CHECK(rel(a.values[i], b.values[i]) < 1e-10);
    // M-orthonormal columns.
    const Matrix g = a.vectors.transpose() * op.M * a.vectors;
    CHECK((g - Matrix::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff() < 1e-10);
  }

  TEST_CASE("refinement order on the disc") {
    std::vector<double> v;
    // h = 0.1 is still preasymptotic; start one level finer.
    for (double h : {0.05, 0.025, 0.0125}) {
      const Problem pr = testutil::dirichlet(make_disc(1.0), h);
      v.push_back(solve_lowest(pr.assemble(1.0), 1).values[0]);
    }
    const double order = std::log2(std::abs(v[0] - v[1]) / std::abs(v[1] - v[2]));
    CHECK(order >= 1.8);
  }

  TEST_CASE("clusters") {
    const Problem sq = testutil::dirichlet(make_square(1.0), 0.05);
    const AssembledOperator op = sq.assemble(1.0);
    const EigenCluster c1 = cluster_of_branch(op, 0);
    CHECK(c1.m == 1);
    const EigenCluster c2 = cluster_near(op, 5 * kPi2, 0.5);
    CHECK(c2.m == 2);
    const Matrix g = c2.U.transpose() * op.M * c2.U;
    CHECK((g - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(cluster_of_branch(op, 2, 0.5).m == 2);
    try {
      cluster_near(op, 3.5 * kPi2);
      FAIL("expected NoEigenvalueNear");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::NoEigenvalueNear);
    }
  }

  TEST_CASE("reduced resolvent") {
    const Problem pr = testutil::dirichlet(make_square(1.0), 0.1, scalar_potential(linear_field(Vec2(1.0, 0.3))));
    const AssembledOperator op = pr.assemble(0.9);
    const EigenCluster c = cluster_of_branch(op, 1);
    const ReducedResolvent S(op, c);

    const Vector in_range = op.M * c.U.col(0);
    CHECK(S.apply(in_range).norm() <= 1e-10 * c.U.col(0).norm());

    const auto s = solve_lowest(op, 5);
    const Vector v = s.vectors.col(4);
    const Vector w = S.apply(Vector(op.M * v));
    const Vector expect = v / (s.values[4] - c.lambda_big);
    CHECK((w - expect).norm() <= 1e-9 * expect.norm());

    const Matrix r = op.prolong(random_matrix(op.free_count(), 3, 7));
    const Matrix W = S.apply(r);
    const Matrix rhs = r - op.M * c.U * (c.U.transpose() * r);
    const Matrix res = op.restrict(Matrix(op.A_full() * W - c.lambda_big * (op.M * W) - rhs));
    CHECK(res.norm() <= 1e-10 * (rhs.norm() + c.lambda_big * W.norm()));
    CHECK((c.U.transpose() * op.M * W).cwiseAbs().maxCoeff() <= 1e-10 * W.norm());
  }

  TEST_CASE("Riesz projection and transformation operator") {
    const Problem pr = testutil::dirichlet(make_disc(1.0), 0.2, scalar_potential(gaussian_field(8.0, Vec2(0.25, 0.1), 0.35)));
    const double t0 = 0.9;
    const AssembledOperator op = pr.assemble(t0);
    const EigenCluster c = cluster_of_branch(op, 0);
    const Projector P = cluster_projector(op, c);

    const RieszResult at = riesz_projection(op, c);
    const Matrix Pd = at.P.dense();
    CHECK(m_operator_norm(Matrix(Pd * Pd - Pd), op.M) <= 1e-10);
    CHECK(projector_distance(at.P, P) <= 1e-10);

    const TransformationOperator Uid(P, at.P);
    const Matrix x = op.prolong(random_matrix(op.free_count(), 2, 3));
    CHECK((Uid.apply(x) - x).norm() <= 1e-9 * x.norm());
    CHECK((Uid.apply_inverse(x) - x).norm() <= 1e-9 * x.norm());

    std::vector<double> ratios;
    for (double d : {2e-2, 1e-2}) {
      const RieszResult r = riesz_projection(pr.assemble(t0 + d), c);
      ratios.push_back(projector_distance(r.P, P) / d);
      const TransformationOperator U(P, r.P);
      CHECK(U.d_norm() < 1.0);
      const Matrix ux = U.apply(x);
      CHECK((U.apply(P.apply(x)) - r.P.apply(ux)).norm() <= 1e-9 * x.norm());
      CHECK((U.apply(U.apply_inverse(x)) - x).norm() <= 1e-9 * x.norm());
    }
    CHECK(std::abs(ratios[1] / ratios[0] - 1.0) < 0.1);
  }
}
