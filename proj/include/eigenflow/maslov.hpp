#pragma once

#include <optional>
#include <string>
#include <vector>

#include "eigenflow/assembly.hpp"
#include "eigenflow/spectra.hpp"

namespace eigenflow {

struct CrossingOptions {
  /// <= 0 selects default_cluster_tol at each crossing.
  double cluster_tol = 0.0;
  /// Eigenvalues requested around t^2 lambda0 at each grid point.
  int window = 6;
  SolverOptions solver;
};

struct Crossing {
  double t = 0.0;
  /// Global branch indices (ascending order of the pencil) that cross here.
  std::vector<int> branches;
  int multiplicity() const { return static_cast<int>(branches.size()); }
};

/// Conjugate times in [a, b]: zeros of Lambda_j(t) - t^2 lambda0 over all
/// branches, bracketed on a uniform grid of grid_n points and refined to
/// |Lambda_j - t^2 lambda0| <= 1e-10 max(1, |Lambda_j|).
std::vector<Crossing> find_crossings(const Problem& problem, double lambda0, double a, double b, int grid_n,
                                     const CrossingOptions& options = {});

enum class FormRoute { Mqq, Boundary };

struct CrossingReport {
  double t0 = 0.0;
  double lambda0 = 0.0;
  int dim = 0;
  Matrix form_matrix;
  std::vector<double> eigenvalues;
  int n_plus = 0;
  int n_minus = 0;
  int signature = 0;
  bool regular = true;
  FormRoute route = FormRoute::Mqq;
  /// max |F - F^T| before symmetrization.
  double asymmetry = 0.0;
};

/// Fills eigenvalues, n_plus, n_minus, signature and regularity from form_matrix.
void classify_form(CrossingReport& report);

/// m(q_j, q_k) = (1/t0) u_j^T M[Vdot - 2 t0 lambda0] u_k - (1/t0^2) <g(u_j), gamma_D u_k>.
CrossingReport crossing_form_mqq(const Problem& problem, const AssembledOperator& op, const EigenCluster& cluster,
                                 double lambda0);

/// Boundary-integral route with strong traces; off-diagonal entries by polarization.
CrossingReport crossing_form_boundary(const Problem& problem, const AssembledOperator& op, const EigenCluster& cluster,
                                      double lambda0);

struct MaslovResult {
  double a = 0.0;
  double b = 1.0;
  double lambda0 = 0.0;
  std::vector<CrossingReport> crossings;
  /// Empty when some crossing is degenerate.
  std::optional<int> index;
  std::string warning;
};

MaslovResult maslov_index(const Problem& problem, double lambda0, double a, double b, int grid_n,
                          const CrossingOptions& options = {});

/// The index, or DegenerateCrossing when it was withheld.
int require_index(const MaslovResult& result);

/// Contribution of one crossing given its position in [a, b].
int crossing_contribution(const CrossingReport& c, double a, double b);

}  // namespace eigenflow
