#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "eigenflow/assembly.hpp"
#include "eigenflow/spectra.hpp"

namespace eigenflow {

/// Load-form derivative data at t0: int Vdot u.v, int Vddot u.v and, for
/// Robin conditions, Theta_D.
struct PerturbationInputs {
  SparseMatrix vdot;
  SparseMatrix vddot;
  std::optional<SparseMatrix> theta_d;
};

PerturbationInputs perturbation_inputs(const Problem& problem, const AssembledOperator& op, bool with_second = true);

/// T1_jk = u_j^T (M[Vdot] - Theta_D) u_k on the cluster basis.
Matrix build_T1(const AssembledOperator& op, const EigenCluster& cluster, const PerturbationInputs& in);

/// T2_jk = 1/2 u_j^T M[Vddot] u_k - (W u_j)^T S (W u_k), W = M[Vdot] - Theta_D.
/// With `expanded` the four S-terms are evaluated separately.
Matrix build_T2(const AssembledOperator& op, const EigenCluster& cluster, const PerturbationInputs& in,
                const ReducedResolvent& S, bool expanded = false);
Matrix build_T2(const AssembledOperator& op, const EigenCluster& cluster, const PerturbationInputs& in,
                bool expanded = false);

/// Dense forms of T2 on an n-dimensional space (P, S, Vdot, Vddot, Theta all n x n).
namespace dense {
Matrix t2_collapsed(const Matrix& P, const Matrix& S, const Matrix& vdot, const Matrix& vddot, const Matrix& theta);
Matrix t2_expanded(const Matrix& P, const Matrix& S, const Matrix& vdot, const Matrix& vddot, const Matrix& theta);
}  // namespace dense

struct DerivativeReport {
  double t0 = 1.0;
  double lambda_omega = 0.0;
  double lambda_big = 0.0;
  int m = 0;
  /// Eigenvalues of T1, ascending.
  std::vector<double> lambda1;
  /// d lambda_j / dt at t0 = (lambda1_j - 2 t0 lambda) / t0^2.
  std::vector<double> dlam;
  /// Cluster basis rotated to the T1 eigenbasis (full nodal coordinates).
  Matrix basis;
  /// m x m rotation with basis = U * rotation.
  Matrix rotation;
  std::map<std::string, std::string> route_tags;
};

DerivativeReport first_derivatives(const EigenCluster& cluster, const Matrix& T1);

struct ExpansionBranch {
  int group = 0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  /// lambda(t) = lambda(t0) + a1 (t - t0) + a2 (t - t0)^2 + o((t - t0)^2)
  double a1 = 0.0;
  double a2 = 0.0;
};

struct ExpansionGroup {
  double lambda1 = 0.0;
  int multiplicity = 0;
  std::vector<double> lambda2;
};

struct AsymptoticReport {
  double t0 = 1.0;
  double lambda_omega = 0.0;
  double group_tol = 0.0;
  std::vector<ExpansionGroup> groups;
  /// Sorted by (a1, a2).
  std::vector<ExpansionBranch> branches;
};

double default_group_tol(double lambda_big);

/// group_tol <= 0 selects the default.
AsymptoticReport asymptotic_expansion(const EigenCluster& cluster, const Matrix& T1, const Matrix& T2,
                                      double group_tol = 0.0);

}  // namespace eigenflow
