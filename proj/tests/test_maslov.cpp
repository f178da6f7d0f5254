#include <cmath>

#include "doctest.h"
#include "eigenflow/error.hpp"
#include "eigenflow/maslov.hpp"
#include "eigenflow/oracle.hpp"
#include "helpers.hpp"

using namespace eigenflow;
using testutil::rel;

namespace {

MatrixPotential bump() { return scalar_potential(gaussian_field(8.0, Vec2(0.25, 0.1), 0.35)); }

CrossingReport report_of(const Matrix& form, double t0) {
  CrossingReport r;
  r.t0 = t0;
  r.dim = static_cast<int>(form.rows());
  r.form_matrix = form;
  classify_form(r);
  return r;
}

}  // namespace

TEST_SUITE("maslov") {
  TEST_CASE("classification and endpoint rules") {
    const CrossingReport neg = report_of(Matrix::Identity(2, 2) * -3.0, 0.7);
    CHECK(neg.n_minus == 2);
    CHECK(neg.regular);
    CHECK(crossing_contribution(neg, 0.5, 1.0) == -2);
    CHECK(crossing_contribution(report_of(Matrix::Identity(2, 2) * -3.0, 0.5), 0.5, 1.0) == -2);
    CHECK(crossing_contribution(report_of(Matrix::Identity(2, 2) * -3.0, 1.0), 0.5, 1.0) == 0);
    Matrix mixed(2, 2);
    mixed << 2.0, 0.0, 0.0, -1.0;
    CHECK(crossing_contribution(report_of(mixed, 0.7), 0.5, 1.0) == 0);
    CHECK(crossing_contribution(report_of(mixed, 0.5), 0.5, 1.0) == -1);
    CHECK(crossing_contribution(report_of(mixed, 1.0), 0.5, 1.0) == 1);
    Matrix degenerate(2, 2);
    degenerate << -1.0, 0.0, 0.0, 1e-12;
    CHECK_FALSE(report_of(degenerate, 0.7).regular);
  }

  TEST_CASE("no crossings below the spectrum") {
    const Problem pr = testutil::dirichlet(make_disc(1.0), 0.15, bump());
    const MaslovResult r = maslov_index(pr, 1.0, 0.5, 1.0, 10);
    CHECK(r.crossings.empty());
    REQUIRE(r.index);
    CHECK(*r.index == 0);
  }

  TEST_CASE("V = 0 disc: crossings land on the endpoints") {
    const Problem pr = testutil::dirichlet(make_disc(1.0), 0.15);
    const double big = solve_lowest(pr.assemble(1.0), 1).values[0];
    const auto at_b = find_crossings(pr, big, 0.5, 1.0, 10);
    REQUIRE(at_b.size() == 1);
    CHECK(at_b[0].t == doctest::Approx(1.0).epsilon(1e-12));
    // tau = 0.8 keeps the next branch (lambda_2 > lambda_1 / 0.64) out of the window.
    const auto at_a = find_crossings(pr, big / 0.64, 0.8, 1.0, 10);
    REQUIRE(at_a.size() == 1);
    CHECK(at_a[0].t == doctest::Approx(0.8).epsilon(1e-12));
    const MaslovResult r = maslov_index(pr, big / 0.64, 0.8, 1.0, 10);
    REQUIRE(r.index);
    CHECK(*r.index == -1);
  }

  TEST_CASE("mqq form for Dirichlet V = 0") {
    const Problem pr = testutil::dirichlet(make_square(1.0), 0.1);
    const double t0 = 0.8;
    const AssembledOperator op = pr.assemble(t0);
    const EigenCluster c = cluster_of_branch(op, 0);
    const CrossingReport r = crossing_form_mqq(pr, op, c, c.lambda_omega);
    CHECK(rel(r.form_matrix(0, 0), -2 * c.lambda_omega) <= 1e-10);
    CHECK(r.n_minus == 1);
  }

  TEST_CASE("mqq form for Neumann matches t0 times the FD derivative") {
    const Problem pr = testutil::robin(make_disc(1.0), 0.05, 0.0, bump());
    const double t0 = 0.9;
    const AssembledOperator op = pr.assemble(t0);
    const EigenCluster c = cluster_of_branch(op, 0);
    const CrossingReport r = crossing_form_mqq(pr, op, c, c.lambda_omega);
    const auto fd = oracle::fd_branch_derivatives(pr, t0, 0, 1);
    CHECK(rel(r.eigenvalues[0], t0 * fd.branches[0].dlam) <= 1e-4);
  }

  TEST_CASE("boundary route: sign, Rellich value, agreement with mqq") {
    const Problem pr = testutil::dirichlet(make_disc(1.0), 0.05);
    const AssembledOperator op = pr.assemble(1.0);
    const EigenCluster c = cluster_of_branch(op, 0);
    const CrossingReport b = crossing_form_boundary(pr, op, c, c.lambda_omega);
    const CrossingReport q = crossing_form_mqq(pr, op, c, c.lambda_omega);
    CHECK(b.eigenvalues[0] < 0.0);
    CHECK(rel(b.eigenvalues[0], -2 * c.lambda_omega) <= 0.10);
    CHECK(rel(b.eigenvalues[0], q.eigenvalues[0]) <= 0.10);

    const Problem gp = testutil::dirichlet(make_flower(1.0, 0.1, 4), 0.1, bump());
    const AssembledOperator gop = gp.assemble(0.7);
    for (int j : {0, 1, 3}) {
      const EigenCluster gc = cluster_of_branch(gop, j);
      const CrossingReport gb = crossing_form_boundary(gp, gop, gc, gc.lambda_omega);
      CHECK(gb.n_minus == gc.m);
    }
  }

  TEST_CASE("Dirichlet sweep: index is minus the crossing count and matches the spectral count") {
    const Problem pr = testutil::dirichlet(make_flower(1.0, 0.12, 3), 0.12, bump());
    const double lambda0 = 60.0;
    const MaslovResult r = maslov_index(pr, lambda0, 0.5, 1.0, 16);
    REQUIRE(r.index);
    int mult = 0;
    for (const auto& c : r.crossings) {
      CHECK(c.n_minus == c.dim);
      if (std::abs(c.t0 - 1.0) > 1e-8) mult += c.dim;
    }
    CHECK(*r.index == -mult);
    CHECK(-*r.index == oracle::spectral_count(pr, lambda0, 0.5, 1.0));

    // Additivity across a non-crossing split point.
    double split = 0.75;
    for (const auto& c : r.crossings) {
      if (std::abs(c.t0 - split) < 1e-3) split += 0.01;
    }
    const MaslovResult left = maslov_index(pr, lambda0, 0.5, split, 10);
    const MaslovResult right = maslov_index(pr, lambda0, split, 1.0, 10);
    REQUIRE(left.index);
    REQUIRE(right.index);
    CHECK(*left.index + *right.index == *r.index);
  }
}
