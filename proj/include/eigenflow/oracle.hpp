#pragma once

#include <vector>

#include "eigenflow/assembly.hpp"
#include "eigenflow/spectra.hpp"
#include "eigenflow/types.hpp"

namespace eigenflow::oracle {

struct FdOptions {
  /// Absolute steps, descending. Empty selects {1e-2, 5e-3, 2.5e-3} * t0.
  std::vector<double> steps;
  SolverOptions solver;
};

struct FdBranch {
  /// Position of the branch at t0 (0-based within the requested window).
  int index = 0;
  /// Window index on the right side that continues this branch.
  int right_index = 0;
  double lambda = 0.0;
  double dlam = 0.0;
  double d2lam = 0.0;
  double dlam_error = 0.0;
  double d2lam_error = 0.0;
  /// Richardson tables, row q = step q, column l = extrapolation level.
  Matrix table1;
  Matrix table2;
};

struct FdResult {
  double t0 = 1.0;
  std::vector<double> steps;
  std::vector<FdBranch> branches;
  /// Best and second-best pairing costs.
  double pairing_cost = 0.0;
  double pairing_runner_up = 0.0;
};

/// Central differences of lambda_j(t) = Lambda_j(t) / t^2 for the branches
/// first, ..., first + count - 1 (ascending order at t0), Richardson
/// extrapolated. Branches are paired across t0 by optimal assignment.
FdResult fd_branch_derivatives(const Problem& problem, double t0, int first, int count, const FdOptions& options = {});

/// Richardson extrapolation of central differences with error ~ h^2, h^4, ...
/// Returns the triangular table; the last diagonal entry is the estimate.
Matrix richardson_table(const std::vector<double>& steps, const std::vector<double>& values);

// Bessel functions of the first kind (integer order).
double bessel_j(int n, double x);
double bessel_j_derivative(int n, double x);
/// k-th positive zero of J_n (k >= 1), bisection to machine precision.
double bessel_j_zero(int n, int k);

/// Dirichlet Laplacian mode on the unit disc, u = J_n(j r) cos(n theta) / norm.
struct DiscMode {
  int n = 0;
  int k = 1;
  double j = 0.0;
  double lambda = 0.0;
  /// 1 for radial modes, 2 for angular ones (cos and sin partners).
  int multiplicity = 1;

  double value(const Vec2& x) const;
  Vec2 gradient(const Vec2& x) const;
};

/// k-th radial mode (n = 0); k = 1 gives j_{0,1}^2.
DiscMode analytic_disc(int k);
DiscMode analytic_disc_mode(int n, int k);
/// The lowest `count` distinct modes (angular orders included), ascending.
std::vector<DiscMode> disc_modes(int count);

/// int_{|x|=1} (d_nu u)^2 (x.nu) ds / (2 lambda |u|^2) by dense quadrature.
double rellich_ratio(const DiscMode& mode, int angular_points = 4096, int radial_points = 64);
/// |u|^2_{L2} by dense quadrature.
double disc_mode_norm2(const DiscMode& mode, int angular_points = 512, int radial_points = 64);

/// Dirichlet mode on the centred unit square: 2 sin(m pi (x + 1/2)) sin(n pi (y + 1/2)).
struct SquareMode {
  int m = 1;
  int n = 1;
  double lambda = 0.0;
  double value(const Vec2& x) const;
};

struct SquareCluster {
  double lambda = 0.0;
  int multiplicity = 0;
  std::vector<SquareMode> modes;
};

/// Eigen-table of the lowest `count` clusters.
std::vector<SquareCluster> analytic_square(int count = 8);

/// Number of (t, j) with lambda_j(t) = lambda0 for t in [a, b), counted with
/// multiplicity, from inertia counts at the endpoints (Dirichlet branches are
/// decreasing in t).
int spectral_count(const Problem& problem, double lambda0, double a, double b);

}  // namespace eigenflow::oracle
