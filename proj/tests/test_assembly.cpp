#include <cmath>
#include <numbers>

#include "doctest.h"
#include "eigenflow/assembly.hpp"
#include "eigenflow/config.hpp"
#include "eigenflow/error.hpp"
#include "eigenflow/oracle.hpp"
#include "eigenflow/spectra.hpp"
#include "helpers.hpp"

using namespace eigenflow;
using testutil::rel;

namespace {

/// t^2 V(t x) evaluated directly.
Matrix rescaled(const MatrixPotential& v, double t, const Vec2& x) { return t * t * v.value(t * x); }

double sparse_max_abs(const SparseMatrix& a) {
  double m = 0.0;
  for (int k = 0; k < a.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(a, k); it; ++it) m = std::max(m, std::abs(it.value()));
  }
  return m;
}

}  // namespace

TEST_SUITE("assembly") {
  TEST_CASE("potential t-derivatives, closed forms") {
    const auto c = potential_t_derivatives(scalar_potential(constant_field(1.7)), 1.0, Vec2(0.3, -0.4));
    CHECK(c.first(0, 0) == doctest::Approx(2 * 1.7));
    CHECK(c.second(0, 0) == doctest::Approx(2 * 1.7));
    const auto l = potential_t_derivatives(scalar_potential(linear_field(Vec2(1.0, 0.0))), 1.0, Vec2(1.0, 0.0));
    CHECK(l.first(0, 0) == doctest::Approx(3.0).epsilon(1e-15));
  }

  TEST_CASE("potential t-derivatives vs central differences") {
    std::vector<MatrixPotential> pots;
    pots.push_back(scalar_potential(gaussian_field(8.0, Vec2(0.25, 0.1), 0.35)));
    pots.push_back(scalar_potential(quadratic_field((Mat2() << 1.0, 0.4, 0.4, -2.0).finished())));
    PotentialConfig coupled;
    coupled.type = "coupled2";
    pots.push_back(build_potential(coupled));
    const std::vector<Vec2> xs{{0.3, 0.2}, {-0.6, 0.5}, {0.9, -0.1}};
    const double s = 1e-5;
    for (const auto& v : pots) {
      for (double t0 : {0.6, 1.0}) {
        for (const Vec2& x : xs) {
          const auto d = potential_t_derivatives(v, t0, x);
          const Matrix fd = (rescaled(v, t0 + s, x) - rescaled(v, t0 - s, x)) / (2 * s);
          CHECK((d.first - fd).norm() <= 1e-8 * std::max(1.0, d.first.norm()));
          CHECK((d.value - rescaled(v, t0, x)).norm() <= 1e-14 * std::max(1.0, d.value.norm()));
        }
      }
    }
  }

  TEST_CASE("unit square lowest Dirichlet eigenvalue") {
    const Problem pr = testutil::dirichlet(make_square(1.0), 0.05);
    const auto s = solve_lowest(pr.assemble(1.0), 1);
    CHECK(rel(s.values[0], 2 * std::numbers::pi * std::numbers::pi) < 0.02);
  }

  TEST_CASE("Robin with zero theta has no boundary term") {
    const Problem pr = testutil::robin(make_disc(1.0), 0.15, 0.0, scalar_potential(linear_field(Vec2(1.0, 0.5))));
    const AssembledOperator op = pr.assemble(0.7);
    CHECK(sparse_max_abs(op.B) == 0.0);
    CHECK(sparse_max_abs(op.A_full() - (op.K + op.MV)) == 0.0);
  }

  TEST_CASE("boundary mass integrates to the perimeter") {
    for (const StarDomain& d : {make_disc(1.0), make_square(1.0), make_flower(1.0, 0.1, 3)}) {
      const TriMesh mesh = build_mesh(d, 0.1);
      const SparseMatrix b = boundary_mass_matrix(mesh, 1);
      const Vector one = Vector::Ones(b.cols());
      CHECK(std::abs(one.dot(b * one) - d.perimeter()) <= 1e-12);
      const Problem pr = testutil::robin(d, 0.1, 2.5);
      CHECK(sparse_max_abs(pr.assemble(1.0).B - 2.5 * b) <= 1e-12);
    }
  }

  TEST_CASE("theta_d matrix") {
    const Problem zero = testutil::robin(make_disc(1.0), 0.15, 0.0);
    CHECK(sparse_max_abs(theta_d_matrix(zero.assemble(1.0))) == 0.0);

    const Problem pr = testutil::robin(make_square(1.0), 0.1, 1.3);
    const SparseMatrix th = theta_d_matrix(pr.assemble(1.0));
    CHECK(sparse_max_abs(th - SparseMatrix(th.transpose())) == 0.0);
    const Vector one = Vector::Ones(th.cols());
    CHECK(std::abs(one.dot(th * one) - 1.3 * 4.0) <= 1e-10);
    // Boundary-supported.
    const TriMesh& m = pr.mesh();
    for (int k = 0; k < th.outerSize(); ++k) {
      for (SparseMatrix::InnerIterator it(th, k); it; ++it) {
        CHECK(m.is_boundary_node(static_cast<int>(it.row())));
        CHECK(m.is_boundary_node(static_cast<int>(it.col())));
      }
    }

    const Problem dir = testutil::dirichlet(make_disc(1.0), 0.2);
    try {
      theta_d_matrix(dir.assemble(1.0));
      FAIL("expected WrongBC");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::WrongBC);
    }
  }

  TEST_CASE("traces: Dirichlet eigenfunction vanishes on the boundary") {
    const Problem pr = testutil::dirichlet(make_disc(1.0), 0.1);
    const AssembledOperator op = pr.assemble(1.0);
    const auto s = solve_lowest(op, 1);
    const TraceData tr = traces(op, s.vectors.col(0), s.values[0]);
    CHECK(tr.dirichlet.cwiseAbs().maxCoeff() == 0.0);
  }

  TEST_CASE("traces: strong Neumann of a linear function") {
    const Problem pr = testutil::robin(make_flower(1.0, 0.12, 5), 0.1, 0.0);
    const AssembledOperator op = pr.assemble(1.0);
    const TriMesh& m = pr.mesh();
    const double a = 0.7, b = -0.2;
    Vector u(m.node_count());
    for (std::size_t i = 0; i < m.node_count(); ++i) u[i] = a * m.nodes[i].x() + b;
    const TraceData tr = traces(op, u, 0.0);
    for (std::size_t e = 0; e < m.boundary_edges.size(); ++e) {
      CHECK(std::abs(tr.strong_neumann[e][0] - a * m.boundary_edges[e].normal.x()) <= 1e-12);
    }
  }

  TEST_CASE("traces: weak vs strong Neumann on the disc") {
    // Weak trace as nodal values via the lumped boundary mass, compared to the
    // edgewise strong trace in L2 of the boundary.
    auto difference = [](double h) {
      const Problem pr = testutil::dirichlet(make_disc(1.0), h);
      const AssembledOperator op = pr.assemble(1.0);
      const auto s = solve_lowest(op, 1);
      const TraceData tr = traces(op, s.vectors.col(0), s.values[0]);
      const TriMesh& m = pr.mesh();
      std::vector<double> lumped(m.node_count(), 0.0), weak(m.node_count(), 0.0);
      for (const auto& e : m.boundary_edges) {
        lumped[e.nodes[0]] += 0.5 * e.length;
        lumped[e.nodes[1]] += 0.5 * e.length;
      }
      for (std::size_t i = 0; i < tr.boundary_dofs.size(); ++i) {
        weak[tr.boundary_dofs[i]] = tr.weak_neumann[i] / lumped[tr.boundary_dofs[i]];
      }
      double diff = 0.0, norm = 0.0;
      for (std::size_t e = 0; e < m.boundary_edges.size(); ++e) {
        const auto& be = m.boundary_edges[e];
        const double w = 0.5 * (weak[be.nodes[0]] + weak[be.nodes[1]]);
        const double st = tr.strong_neumann[e][0];
        diff += be.length * (w - st) * (w - st);
        norm += be.length * st * st;
      }
      return std::sqrt(diff / norm);
    };
    const double d1 = difference(0.05);
    const double d2 = difference(0.025);
    CHECK(d1 <= 0.10);
    CHECK(d2 <= 0.6 * d1);
  }

  TEST_CASE("operator at t=1 and dof bookkeeping") {
    const Problem pr = testutil::dirichlet(make_square(1.0), 0.2, scalar_potential(constant_field(2.0)));
    const AssembledOperator op = pr.assemble(1.0);
    CHECK(op.free_count() == static_cast<int>(pr.mesh().node_count() - pr.mesh().boundary_nodes.size()));
    for (int b : pr.mesh().boundary_nodes) CHECK(op.free_index[b] == -1);
    CHECK(sparse_max_abs(op.MV - 2.0 * op.M) <= 1e-13);
  }
}
