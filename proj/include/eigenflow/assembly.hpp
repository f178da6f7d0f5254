#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <vector>

#include "eigenflow/geometry.hpp"
#include "eigenflow/potential.hpp"
#include "eigenflow/types.hpp"

namespace eigenflow {

enum class BcKind { Dirichlet, Robin };

/// Boundary function pair (f, g) contributing <u, f> g to Theta.
struct FiniteRankPair {
  std::function<Vector(const Vec2&)> f;
  std::function<Vector(const Vec2&)> g;
};

/// Dirichlet, or the Robin-type condition gamma_N u = t Theta gamma_D u with
/// Theta = multiplication by theta(y) plus an optional finite-rank term.
struct BoundaryCondition {
  BcKind kind = BcKind::Dirichlet;
  std::function<Matrix(const Vec2&)> theta;  // empty means zero
  std::vector<FiniteRankPair> finite_rank;

  static BoundaryCondition dirichlet();
  static BoundaryCondition robin(std::function<Matrix(const Vec2&)> theta, std::vector<FiniteRankPair> finite_rank = {});
  static BoundaryCondition robin_constant(double s, int components);
};

/// Degrees of freedom are node-major: dof = node * N + component.
SparseMatrix stiffness_matrix(const TriMesh& mesh, int components);
/// int W(x) u.v with W sampled at the 3-point Gauss rule of each triangle.
SparseMatrix weighted_mass_matrix(const TriMesh& mesh, int components, const std::function<Matrix(const Vec2&)>& weight);
SparseMatrix mass_matrix(const TriMesh& mesh, int components);
/// int_{boundary} u.v ds (2-point Gauss per edge).
SparseMatrix boundary_mass_matrix(const TriMesh& mesh, int components);

struct BoundaryForm {
  SparseMatrix matrix;
  /// Max eigenvalue of theta(y) over the boundary quadrature points.
  double theta_bound = 0.0;
};
BoundaryForm boundary_form_matrix(const TriMesh& mesh, int components, const BoundaryCondition& bc);

class Problem;

/// Discrete realization of the rescaled form at one scale t:
///   A(t) = K + MV(t) - t B,  MV(t) = int t^2 V(tx) u.v.
/// Full-space matrices live on all nodal dofs; the reduced pencil (A, M) on
/// the free dofs (Dirichlet dofs eliminated) is what the eigensolver sees.
class AssembledOperator {
 public:
  double t = 1.0;
  int components = 1;
  BcKind kind = BcKind::Dirichlet;
  std::shared_ptr<const TriMesh> mesh;

  SparseMatrix K;
  SparseMatrix M;
  SparseMatrix MV;
  SparseMatrix B;
  double theta_bound = 0.0;

  std::vector<int> free_dofs;
  std::vector<int> free_index;  // -1 for eliminated dofs

  SparseMatrix A_reduced;
  SparseMatrix M_reduced;

  int dof_count() const { return static_cast<int>(free_index.size()); }
  int free_count() const { return static_cast<int>(free_dofs.size()); }

  /// K + MV(t) - t B on the full dof space.
  SparseMatrix A_full() const;

  Vector restrict(const Vector& full) const;
  Matrix restrict(const Matrix& full) const;
  Vector prolong(const Vector& reduced) const;
  Matrix prolong(const Matrix& reduced) const;
  SparseMatrix restrict(const SparseMatrix& full) const;
};

/// Mesh, potential and boundary condition. The t-independent matrices
/// (K, M, B) are assembled once at construction; assemble(t) only rebuilds
/// the potential block. Immutable and shareable across threads.
class Problem {
 public:
  Problem(std::shared_ptr<const TriMesh> mesh, MatrixPotential potential, BoundaryCondition bc);

  const TriMesh& mesh() const { return *mesh_; }
  std::shared_ptr<const TriMesh> mesh_ptr() const { return mesh_; }
  const MatrixPotential& potential() const { return potential_; }
  const BoundaryCondition& bc() const { return bc_; }
  int components() const { return potential_.components(); }

  const SparseMatrix& stiffness() const { return K_; }
  const SparseMatrix& mass() const { return M_; }
  const SparseMatrix& boundary() const { return B_; }
  double theta_bound() const { return theta_bound_; }

  AssembledOperator assemble(double t) const;

  /// int Vdot u.v and int Vddot u.v at t0 (second is empty if not requested).
  struct DerivativeMatrices {
    SparseMatrix first;
    SparseMatrix second;
  };
  DerivativeMatrices derivative_matrices(double t0, bool with_second = true) const;

 private:
  std::shared_ptr<const TriMesh> mesh_;
  MatrixPotential potential_;
  BoundaryCondition bc_;
  SparseMatrix K_;
  SparseMatrix M_;
  SparseMatrix B_;
  double theta_bound_ = 0.0;
  std::vector<int> free_dofs_;
  std::vector<int> free_index_;
};

/// Shorthand used throughout the suites.
AssembledOperator assemble(const Problem& problem, double t);

/// Theta_D = gamma_D^* Theta gamma_D as a full-space matrix (zero off the
/// boundary block). Throws WrongBC for Dirichlet operators.
SparseMatrix theta_d_matrix(const AssembledOperator& op);

struct TraceData {
  double t = 1.0;
  std::vector<int> boundary_dofs;
  Vector dirichlet;
  /// (K + MV - lambda M) u restricted to boundary test functions.
  Vector weak_neumann;
  /// Element gradient (N x 2, row c = grad u_c) of the triangle owning each boundary edge.
  std::vector<Matrix> edge_gradient;
  /// nu . grad u per boundary edge (N values each).
  std::vector<Vector> strong_neumann;
};

TraceData traces(const AssembledOperator& op, const Vector& u_full, double lambda);

/// Coordinate text dump, one "row col value" per stored entry.
void write_coo(std::ostream& out, const SparseMatrix& matrix);

}  // namespace eigenflow
