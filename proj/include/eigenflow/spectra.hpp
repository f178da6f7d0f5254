#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <vector>

#include "eigenflow/assembly.hpp"
#include "eigenflow/types.hpp"

namespace eigenflow {

struct SolverOptions {
  /// Pencils with at most this many free dofs go to the dense solver.
  int dense_threshold = 500;
  int max_restarts = 60;
  /// Residual bound relative to (|A|_1 + |Lambda| |M|_1) |x|.
  double tolerance = 1e-10;
  std::uint64_t seed = 0x5eed;
};

/// k eigenpairs of a pencil nearest a shift, ascending, M-orthonormal.
struct SpectrumSlice {
  double shift = 0.0;
  std::vector<double> values;
  /// One column per value. Full nodal coordinates when produced from an
  /// AssembledOperator (zero on eliminated dofs).
  Matrix vectors;
  /// Number of eigenvalues strictly below the shift (Sylvester inertia).
  int count_below = 0;

  int size() const { return static_cast<int>(values.size()); }
  /// Global ascending index of values[i].
  int global_index(int i) const;
};

/// Shift-invert block Lanczos on (A, M) with full M-reorthogonalization,
/// or a dense solve for small pencils.
SpectrumSlice solve_pencil(const SparseMatrix& A, const SparseMatrix& M, int k, double shift,
                           const SolverOptions& options = {});

SpectrumSlice solve_spectrum(const AssembledOperator& op, int k, double shift, const SolverOptions& options = {});

/// Lowest k eigenpairs; the shift is lowered until the inertia count below it is zero.
SpectrumSlice solve_lowest(const AssembledOperator& op, int k, const SolverOptions& options = {});

/// Eigenvalues of the reduced pencil strictly below sigma (LDLT inertia).
int count_below(const SparseMatrix& A, const SparseMatrix& M, double sigma);
int count_below(const AssembledOperator& op, double sigma);

/// Same as count_below but nudges sigma away from an eigenvalue that breaks the factorization.
int count_below_robust(const AssembledOperator& op, double sigma);

struct EigenCluster {
  double t0 = 1.0;
  /// Eigenvalue of the rescaled pencil at t0.
  double lambda_big = 0.0;
  /// lambda_big / t0^2, the eigenvalue on the shrunken domain.
  double lambda_omega = 0.0;
  int m = 0;
  /// n x m, full nodal coordinates, U^T M U = I.
  Matrix U;
  std::vector<double> members;
  double cluster_tol = 0.0;
  /// Distance from lambda_big to the nearest eigenvalue outside the cluster.
  double gap = std::numeric_limits<double>::infinity();
};

double default_cluster_tol(double lambda);

/// Groups the eigenvalues of `pairs` within cluster_tol of target.
EigenCluster form_cluster(const AssembledOperator& op, const SpectrumSlice& pairs, double target, double cluster_tol);

/// Solves near `target` with enough neighbours to measure the gap, then forms the cluster.
/// cluster_tol <= 0 selects the default.
EigenCluster cluster_near(const AssembledOperator& op, double target, double cluster_tol = 0.0,
                          const SolverOptions& options = {});

/// Lowest-index cluster containing branch j (0-based) of the pencil.
EigenCluster cluster_of_branch(const AssembledOperator& op, int j, double cluster_tol = 0.0,
                               const SolverOptions& options = {});

/// Re-orthonormalizes the columns of U in the M inner product (symmetric orthogonalization).
Matrix m_orthonormalize(const Matrix& U, const SparseMatrix& M);

/// Deflated solve on the complement of the cluster:
///   [A - Lambda M, M U; U^T M, 0] [w; mu] = [r - M U U^T r; 0].
/// The saddle matrix is factorized once; apply() may be called repeatedly.
class ReducedResolvent {
 public:
  ReducedResolvent(const AssembledOperator& op, const EigenCluster& cluster);
  ~ReducedResolvent();
  ReducedResolvent(const ReducedResolvent&) = delete;
  ReducedResolvent& operator=(const ReducedResolvent&) = delete;

  /// r is a full-space load vector; returns w in full nodal coordinates.
  Vector apply(const Vector& r) const;
  Matrix apply(const Matrix& r) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

Vector reduced_resolvent_apply(const AssembledOperator& op, const EigenCluster& cluster, const Vector& r);

/// P = U U^T M acting on full nodal vectors.
struct Projector {
  Matrix U;
  SparseMatrix M;

  Vector apply(const Vector& x) const { return U * (U.transpose() * (M * x)); }
  Matrix apply(const Matrix& x) const { return U * (U.transpose() * (M * x)); }
  /// Dense n x n matrix (small problems only).
  Matrix dense() const;
};

struct RieszResult {
  Projector P;
  std::vector<double> values;
  /// Isolating interval [lo, hi] used for the count.
  double lo = 0.0;
  double hi = 0.0;
};

/// P(t) for the eigenvalues of op_t inside [Lambda - g/2, Lambda + g/2] around
/// the cluster fixed at t0. Throws ClusterSplitLeak if the count differs from m.
RieszResult riesz_projection(const AssembledOperator& op_t, const EigenCluster& cluster,
                             const SolverOptions& options = {});

Projector cluster_projector(const AssembledOperator& op, const EigenCluster& cluster);

/// ||P1 - P2|| in the M-norm for two rank-m M-orthogonal projectors
/// (largest sine of the principal angles).
double projector_distance(const Projector& a, const Projector& b);

/// U(t) = (I - D^2)^{-1/2} ((I - P(t))(I - P) + P(t) P), D = P(t) - P, and its
/// inverse, applied through a truncated binomial series.
class TransformationOperator {
 public:
  TransformationOperator(Projector P, Projector Pt);

  double d_norm() const { return d_; }
  int series_terms() const { return terms_; }

  Vector apply(const Vector& x) const;
  Vector apply_inverse(const Vector& x) const;
  Matrix apply(const Matrix& x) const;
  Matrix apply_inverse(const Matrix& x) const;

 private:
  Matrix inv_sqrt(const Matrix& x) const;
  Matrix d_squared(const Matrix& x) const;

  Projector P_;
  Projector Pt_;
  double d_ = 0.0;
  int terms_ = 0;
};

/// M-norm of a dense operator X on full nodal space: ||L^T X L^{-T}||_2, M = L L^T.
double m_operator_norm(const Matrix& X, const SparseMatrix& M);

}  // namespace eigenflow
