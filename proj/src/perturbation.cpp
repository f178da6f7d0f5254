#include "eigenflow/perturbation.hpp"

#include <algorithm>
#include <cmath>

#include "eigenflow/error.hpp"

namespace eigenflow {
namespace {

Matrix symmetrize(const Matrix& a) { return 0.5 * (a + a.transpose()); }

void check_bc(const AssembledOperator& op, const PerturbationInputs& in) {
  const bool robin = op.kind == BcKind::Robin;
  if (robin != in.theta_d.has_value()) fail(ErrorKind::WrongBC, "Theta_D does not match the operator's boundary condition");
}

Matrix w_times_u(const EigenCluster& cluster, const PerturbationInputs& in) {
  Matrix wu = in.vdot * cluster.U;
  if (in.theta_d) wu -= *in.theta_d * cluster.U;
  return wu;
}

}  // namespace

PerturbationInputs perturbation_inputs(const Problem& problem, const AssembledOperator& op, bool with_second) {
  PerturbationInputs in;
  const auto d = problem.derivative_matrices(op.t, with_second);
  in.vdot = d.first;
  in.vddot = d.second;
  if (op.kind == BcKind::Robin) in.theta_d = theta_d_matrix(op);
  return in;
}

Matrix build_T1(const AssembledOperator& op, const EigenCluster& cluster, const PerturbationInputs& in) {
  check_bc(op, in);
  return symmetrize(cluster.U.transpose() * w_times_u(cluster, in));
}

Matrix build_T2(const AssembledOperator& op, const EigenCluster& cluster, const PerturbationInputs& in,
                const ReducedResolvent& S, bool expanded) {
  check_bc(op, in);
  if (in.vddot.size() == 0) fail(ErrorKind::MissingDerivative, "second t-derivative of the potential was not assembled");
  const Matrix& U = cluster.U;
  Matrix half = 0.5 * (U.transpose() * (in.vddot * U));
  if (!expanded) {
    const Matrix wu = w_times_u(cluster, in);
    return symmetrize(half - wu.transpose() * S.apply(wu));
  }
  const Matrix vu = in.vdot * U;
  const Matrix svu = S.apply(vu);
  Matrix t2 = half - vu.transpose() * svu;
  if (in.theta_d) {
    const Matrix tu = *in.theta_d * U;
    const Matrix stu = S.apply(tu);
    t2 += -tu.transpose() * stu + vu.transpose() * stu + tu.transpose() * svu;
  }
  return symmetrize(t2);
}

Matrix build_T2(const AssembledOperator& op, const EigenCluster& cluster, const PerturbationInputs& in, bool expanded) {
  const ReducedResolvent S(op, cluster);
  return build_T2(op, cluster, in, S, expanded);
}

namespace dense {

Matrix t2_collapsed(const Matrix& P, const Matrix& S, const Matrix& vdot, const Matrix& vddot, const Matrix& theta) {
  const Matrix w = vdot - theta;
  return P * (0.5 * vddot - w * S * w) * P;
}

Matrix t2_expanded(const Matrix& P, const Matrix& S, const Matrix& vdot, const Matrix& vddot, const Matrix& theta) {
  return P * (0.5 * vddot - vdot * S * vdot - theta * S * theta + vdot * S * theta + theta * S * vdot) * P;
}

}  // namespace dense

DerivativeReport first_derivatives(const EigenCluster& cluster, const Matrix& T1) {
  if (T1.rows() != cluster.m || T1.cols() != cluster.m) fail(ErrorKind::InvalidArgument, "T1 size does not match the cluster");
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(T1));
  DerivativeReport r;
  r.t0 = cluster.t0;
  r.lambda_omega = cluster.lambda_omega;
  r.lambda_big = cluster.lambda_big;
  r.m = cluster.m;
  r.rotation = es.eigenvectors();
  r.basis = cluster.U * r.rotation;
  const double t0 = cluster.t0;
  for (int j = 0; j < cluster.m; ++j) {
    const double l1 = es.eigenvalues()[j];
    r.lambda1.push_back(l1);
    r.dlam.push_back((l1 - 2.0 * t0 * cluster.lambda_omega) / (t0 * t0));
  }
  r.route_tags["lambda1"] = "T1";
  r.route_tags["dlam"] = "T1";
  return r;
}

double default_group_tol(double lambda_big) { return 1e-5 * std::max(1.0, std::abs(lambda_big)); }

AsymptoticReport asymptotic_expansion(const EigenCluster& cluster, const Matrix& T1, const Matrix& T2, double group_tol) {
  const int m = cluster.m;
  if (T1.rows() != m || T2.rows() != m || T1.cols() != m || T2.cols() != m) {
    fail(ErrorKind::InvalidArgument, "T1/T2 size does not match the cluster");
  }
  AsymptoticReport r;
  r.t0 = cluster.t0;
  r.lambda_omega = cluster.lambda_omega;
  r.group_tol = group_tol > 0.0 ? group_tol : default_group_tol(cluster.lambda_big);

  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(T1));
  const Vector& l1 = es.eigenvalues();
  std::vector<std::pair<int, int>> ranges;  // [begin, end) in ascending order
  int begin = 0;
  for (int j = 1; j <= m; ++j) {
    if (j == m || l1[j] - l1[j - 1] > r.group_tol) {
      ranges.emplace_back(begin, j);
      begin = j;
    }
  }
  for (std::size_t g = 1; g < ranges.size(); ++g) {
    const double gap = l1[ranges[g].first] - l1[ranges[g - 1].second - 1];
    if (gap < 3.0 * r.group_tol) {
      fail(ErrorKind::GroupingUnstable, "gap " + std::to_string(gap) + " between first-order groups is below 3 x group_tol");
    }
  }

  const double t0 = cluster.t0;
  const double lam = cluster.lambda_omega;
  const Matrix t2 = symmetrize(T2);
  for (std::size_t g = 0; g < ranges.size(); ++g) {
    const auto [b, e] = ranges[g];
    const Matrix Y = es.eigenvectors().middleCols(b, e - b);
    ExpansionGroup grp;
    grp.multiplicity = e - b;
    grp.lambda1 = l1.segment(b, e - b).mean();
    Eigen::SelfAdjointEigenSolver<Matrix> es2(symmetrize(Y.transpose() * t2 * Y));
    for (int k = 0; k < grp.multiplicity; ++k) {
      const double l2 = es2.eigenvalues()[k];
      grp.lambda2.push_back(l2);
      ExpansionBranch br;
      br.group = static_cast<int>(g);
      br.lambda1 = grp.lambda1;
      br.lambda2 = l2;
      br.a1 = grp.lambda1 / (t0 * t0) - 2.0 * lam / t0;
      br.a2 = l2 / (t0 * t0) - 2.0 * grp.lambda1 / (t0 * t0 * t0) + 3.0 * lam / (t0 * t0);
      r.branches.push_back(br);
    }
    r.groups.push_back(std::move(grp));
  }
  std::stable_sort(r.branches.begin(), r.branches.end(), [](const ExpansionBranch& x, const ExpansionBranch& y) {
    return x.a1 != y.a1 ? x.a1 < y.a1 : x.a2 < y.a2;
  });
  return r;
}

}  // namespace eigenflow
