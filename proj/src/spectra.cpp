#include "eigenflow/spectra.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "eigenflow/error.hpp"

namespace eigenflow {
namespace {

double norm1(const SparseMatrix& a) {
  double best = 0.0;
  for (int col = 0; col < a.outerSize(); ++col) {
    double s = 0.0;
    for (SparseMatrix::InnerIterator it(a, col); it; ++it) s += std::abs(it.value());
    best = std::max(best, s);
  }
  return best;
}

using Ldlt = Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>>;

/// Factorizes A - sigma M; returns the number of negative pivots.
int factorize_shifted(Ldlt& solver, const SparseMatrix& A, const SparseMatrix& M, double sigma) {
  SparseMatrix shifted = A - sigma * M;
  solver.compute(shifted);
  if (solver.info() != Eigen::Success) fail(ErrorKind::FactorizationFailure, "LDLT of A - sigma M failed");
  const Vector d = solver.vectorD();
  const double dmax = d.cwiseAbs().maxCoeff();
  if (!(dmax > 0.0) || d.cwiseAbs().minCoeff() <= 1e-14 * dmax || !d.allFinite()) {
    fail(ErrorKind::FactorizationFailure, "shift coincides with an eigenvalue (tiny pivot)");
  }
  return static_cast<int>((d.array() < 0.0).count());
}

SpectrumSlice select_nearest(const Vector& lambdas, const Matrix& vectors, int k, double shift) {
  const int n = static_cast<int>(lambdas.size());
  std::vector<int> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
    return std::abs(lambdas[a] - shift) < std::abs(lambdas[b] - shift);
  });
  idx.resize(static_cast<std::size_t>(std::min(k, n)));
  std::sort(idx.begin(), idx.end(), [&](int a, int b) { return lambdas[a] < lambdas[b]; });
  SpectrumSlice s;
  s.shift = shift;
  s.vectors.resize(vectors.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) {
    s.values.push_back(lambdas[idx[i]]);
    s.vectors.col(static_cast<Eigen::Index>(i)) = vectors.col(idx[i]);
  }
  return s;
}

SpectrumSlice dense_solve(const SparseMatrix& A, const SparseMatrix& M, int k, double shift) {
  const Matrix a = Matrix(A);
  const Matrix m = Matrix(M);
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(0.5 * (a + a.transpose()), 0.5 * (m + m.transpose()));
  if (es.info() != Eigen::Success) fail(ErrorKind::ConvergenceFailure, "dense generalized eigensolver failed");
  const Vector& ev = es.eigenvalues();
  SpectrumSlice s = select_nearest(ev, es.eigenvectors(), k, shift);
  s.count_below = static_cast<int>((ev.array() < shift).count());
  return s;
}

class MGramSchmidt {
 public:
  explicit MGramSchmidt(const SparseMatrix& M) : M_(M) {}

  /// Orthogonalizes w against Q (twice) and within itself; columns that
  /// vanish are replaced by fresh random directions.
  void orthonormalize(Matrix& w, const Matrix& Q, const Matrix& MQ, int cur, std::mt19937_64& rng) const {
    std::normal_distribution<double> nd;
    for (int pass = 0; pass < 2; ++pass) {
      if (cur > 0) w -= Q.leftCols(cur) * (MQ.leftCols(cur).transpose() * w);
    }
    for (Eigen::Index c = 0; c < w.cols(); ++c) {
      for (int attempt = 0; attempt < 5; ++attempt) {
        Vector v = w.col(c);
        const double before = std::sqrt(std::max(0.0, v.dot(M_ * v)));
        for (int pass = 0; pass < 2; ++pass) {
          if (cur > 0) v -= Q.leftCols(cur) * (MQ.leftCols(cur).transpose() * v);
          for (Eigen::Index p = 0; p < c; ++p) v -= w.col(p) * w.col(p).dot(M_ * v);
        }
        const double after = std::sqrt(std::max(0.0, v.dot(M_ * v)));
        if (after > 1e-8 * before && after > 0.0) {
          w.col(c) = v / after;
          break;
        }
        for (Eigen::Index i = 0; i < v.size(); ++i) w(i, c) = nd(rng);
        if (attempt == 4) fail(ErrorKind::ConvergenceFailure, "Krylov basis lost rank");
      }
    }
  }

 private:
  const SparseMatrix& M_;
};

/// One shift-invert sweep near lambda_big followed by Rayleigh-Ritz on the
/// block: brings Lanczos-accuracy vectors to working precision.
void polish_cluster(const AssembledOperator& op, EigenCluster& c, const Matrix& U_full) {
  const Matrix U = op.restrict(U_full);
  const double step = std::isfinite(c.gap) ? 1e-2 * c.gap : 1e-2 * std::max(1.0, std::abs(c.lambda_big));
  Ldlt solver;
  bool ok = false;
  for (double off : {step, -1.7 * step, 2.3 * step}) {
    try {
      factorize_shifted(solver, op.A_reduced, op.M_reduced, c.lambda_big + off);
      ok = true;
      break;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::FactorizationFailure) throw;
    }
  }
  Matrix V = ok ? Matrix(solver.solve(op.M_reduced * U)) : U;
  V = m_orthonormalize(V, op.M_reduced);
  Matrix H = V.transpose() * (op.A_reduced * V);
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (H + H.transpose()));
  V *= es.eigenvectors();
  c.members.assign(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  c.lambda_big = es.eigenvalues().mean();
  c.lambda_omega = c.lambda_big / (op.t * op.t);
  c.U = op.prolong(V);
}

}  // namespace

int SpectrumSlice::global_index(int i) const {
  const int below = static_cast<int>(std::count_if(values.begin(), values.end(), [&](double v) { return v < shift; }));
  return count_below - below + i;
}

SpectrumSlice solve_pencil(const SparseMatrix& A, const SparseMatrix& M, int k, double shift,
                           const SolverOptions& options) {
  const int n = static_cast<int>(A.rows());
  if (k < 1) fail(ErrorKind::InvalidArgument, "k must be at least 1");
  if (A.rows() != A.cols() || M.rows() != A.rows() || M.cols() != A.cols()) {
    fail(ErrorKind::InvalidArgument, "pencil matrices have mismatched sizes");
  }
  k = std::min(k, n);
  // Two extra Ritz pairs absorb the ordering difference between distance to
  // the pole and distance to the shift.
  const int want = std::min(k + 2, n);
  const int b = std::max(want + 2, 4);
  int p = std::max(6 * b, 40);
  if (n <= options.dense_threshold || p >= n / 2) return dense_solve(A, M, k, shift);

  // Lanczos runs on an offset factorization: a pole on (or within rounding
  // of) an eigenvalue makes that Ritz value dwarf the others, which then
  // stall at |H| eps. The inertia is taken at the requested shift separately.
  Ldlt solver;
  const double delta = 1e-4 * std::max(1.0, std::abs(shift));
  bool factored = false;
  double pole = shift;
  for (double off : {delta, -2.0 * delta, 5.0 * delta}) {
    try {
      factorize_shifted(solver, A, M, shift + off);
      pole = shift + off;
      factored = true;
      break;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::FactorizationFailure) throw;
    }
  }
  if (!factored) fail(ErrorKind::FactorizationFailure, "no usable factorization near the shift");
  int negatives = -1;
  try {
    negatives = count_below(A, M, shift);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::FactorizationFailure) throw;
  }
  const double anorm = norm1(A);
  const double mnorm = norm1(M);
  MGramSchmidt gs(M);
  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> nd;

  Matrix Q(n, p), MQ(n, p), Z(n, p);
  int cur = 0;
  Matrix block(n, b);
  for (Eigen::Index j = 0; j < block.cols(); ++j) {
    for (Eigen::Index i = 0; i < n; ++i) block(i, j) = nd(rng);
  }

  int src = 0;
  int src_cols = 0;
  auto append = [&](Matrix w) {
    gs.orthonormalize(w, Q, MQ, cur, rng);
    const int take = std::min<int>(static_cast<int>(w.cols()), p - cur);
    src = cur;
    src_cols = take;
    for (int c = 0; c < take; ++c) {
      Q.col(cur) = w.col(c);
      MQ.col(cur) = M * Q.col(cur);
      Z.col(cur) = solver.solve(MQ.col(cur));
      ++cur;
    }
  };

  append(block);
  for (int restart = 0; restart <= options.max_restarts; ++restart) {
    while (cur < p) append(Z.middleCols(src, src_cols));

    Matrix H = MQ.leftCols(cur).transpose() * Z.leftCols(cur);
    H = 0.5 * (H + H.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Matrix> es(H);
    const Vector& theta = es.eigenvalues();
    std::vector<int> order(static_cast<std::size_t>(cur));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int c) { return std::abs(theta[a]) > std::abs(theta[c]); });

    bool converged = true;
    Vector lambdas(want);
    Matrix X(n, want);
    for (int i = 0; i < want; ++i) {
      const int j = order[i];
      if (theta[j] == 0.0) {
        converged = false;
        break;
      }
      lambdas[i] = pole + 1.0 / theta[j];
      X.col(i) = Q.leftCols(cur) * es.eigenvectors().col(j);
      const Vector r = A * X.col(i) - lambdas[i] * (M * X.col(i));
      if (r.norm() > options.tolerance * (anorm + std::abs(lambdas[i]) * mnorm) * X.col(i).norm()) converged = false;
    }
    if (converged) {
      SpectrumSlice s = select_nearest(lambdas, X, k, shift);
      if (negatives < 0) {
        // The shift is an eigenvalue: count below a point just under it.
        const double lo = shift - 1e-8 * std::max(1.0, std::abs(shift));
        negatives = count_below(A, M, lo) + static_cast<int>(std::count_if(s.values.begin(), s.values.end(), [&](double v) {
                      return v >= lo && v < shift;
                    }));
      }
      s.count_below = negatives;
      return s;
    }

    // Thick restart from the best Ritz vectors.
    const int keep = std::min(p - b, 2 * b);
    Matrix Y(cur, keep);
    for (int i = 0; i < keep; ++i) Y.col(i) = es.eigenvectors().col(order[i]);
    const Matrix Qn = Q.leftCols(cur) * Y;
    const Matrix MQn = MQ.leftCols(cur) * Y;
    const Matrix Zn = Z.leftCols(cur) * Y;
    Q.leftCols(keep) = Qn;
    MQ.leftCols(keep) = MQn;
    Z.leftCols(keep) = Zn;
    cur = keep;
    src = 0;
    src_cols = b;
  }
  fail(ErrorKind::ConvergenceFailure, "block Lanczos hit the restart cap");
}

SpectrumSlice solve_spectrum(const AssembledOperator& op, int k, double shift, const SolverOptions& options) {
  SpectrumSlice s = solve_pencil(op.A_reduced, op.M_reduced, k, shift, options);
  s.vectors = op.prolong(s.vectors);
  return s;
}

SpectrumSlice solve_lowest(const AssembledOperator& op, int k, const SolverOptions& options) {
  // Lumped estimate of |V^t|_inf as a starting point; the inertia count certifies it.
  double vmax = 0.0;
  const SparseMatrix& mv = op.MV;
  const Vector mrow = op.M * Vector::Ones(op.dof_count());
  for (int col = 0; col < mv.outerSize(); ++col) {
    double s = 0.0;
    for (SparseMatrix::InnerIterator it(mv, col); it; ++it) s += std::abs(it.value());
    if (mrow[col] > 0.0) vmax = std::max(vmax, s / mrow[col]);
  }
  double sigma = -1.0 - 1.01 * vmax - op.t * std::max(0.0, op.theta_bound);
  for (int attempt = 0; attempt < 80; ++attempt) {
    int below = 0;
    try {
      below = count_below(op, sigma);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::FactorizationFailure) throw;
      below = 1;
    }
    if (below == 0) {
      SpectrumSlice s = solve_spectrum(op, k, sigma, options);
      s.count_below = 0;
      return s;
    }
    sigma -= 2.0 * (std::abs(sigma) + 1.0);
  }
  fail(ErrorKind::ConvergenceFailure, "could not find a shift below the spectrum");
}

int count_below(const SparseMatrix& A, const SparseMatrix& M, double sigma) {
  Ldlt solver;
  return factorize_shifted(solver, A, M, sigma);
}

int count_below(const AssembledOperator& op, double sigma) { return count_below(op.A_reduced, op.M_reduced, sigma); }

int count_below_robust(const AssembledOperator& op, double sigma) {
  double eps = 1e-11 * std::max(1.0, std::abs(sigma));
  for (int attempt = 0; attempt < 8; ++attempt) {
    try {
      return count_below(op, attempt == 0 ? sigma : sigma + eps);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::FactorizationFailure) throw;
      eps = (attempt % 2 == 0 ? -1.0 : 2.0) * std::abs(eps) * 3.0;
    }
  }
  fail(ErrorKind::FactorizationFailure, "no usable shift near " + std::to_string(sigma));
}

double default_cluster_tol(double lambda) { return 1e-6 * std::max(1.0, std::abs(lambda)); }

Matrix m_orthonormalize(const Matrix& U, const SparseMatrix& M) {
  const Matrix g = U.transpose() * (M * U);
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (g + g.transpose()));
  if (es.eigenvalues().minCoeff() <= 1e-14 * std::max(1.0, es.eigenvalues().maxCoeff())) {
    fail(ErrorKind::InvalidArgument, "basis is rank deficient");
  }
  return U * es.operatorInverseSqrt();
}

EigenCluster form_cluster(const AssembledOperator& op, const SpectrumSlice& pairs, double target, double cluster_tol) {
  if (!(cluster_tol > 0.0)) fail(ErrorKind::InvalidArgument, "cluster_tol must be positive");
  std::vector<int> in;
  for (int i = 0; i < pairs.size(); ++i) {
    if (std::abs(pairs.values[i] - target) <= cluster_tol) in.push_back(i);
  }
  if (in.empty()) fail(ErrorKind::NoEigenvalueNear, "no eigenvalue within " + std::to_string(cluster_tol) + " of " + std::to_string(target));
  EigenCluster c;
  c.t0 = op.t;
  c.m = static_cast<int>(in.size());
  c.cluster_tol = cluster_tol;
  double sum = 0.0;
  Matrix U(pairs.vectors.rows(), c.m);
  for (int i = 0; i < c.m; ++i) {
    sum += pairs.values[in[i]];
    c.members.push_back(pairs.values[in[i]]);
    U.col(i) = pairs.vectors.col(in[i]);
  }
  c.lambda_big = sum / c.m;
  c.lambda_omega = c.lambda_big / (op.t * op.t);
  for (int i = 0; i < pairs.size(); ++i) {
    if (std::find(in.begin(), in.end(), i) == in.end()) c.gap = std::min(c.gap, std::abs(pairs.values[i] - c.lambda_big));
  }
  if (c.gap < 3.0 * cluster_tol) {
    fail(ErrorKind::AmbiguousCluster, "cluster gap " + std::to_string(c.gap) + " is below 3 x cluster_tol");
  }
  polish_cluster(op, c, U);
  return c;
}

EigenCluster cluster_near(const AssembledOperator& op, double target, double cluster_tol, const SolverOptions& options) {
  const double tol = cluster_tol > 0.0 ? cluster_tol : default_cluster_tol(target);
  int k = 6;
  for (;;) {
    double shift = target;
    SpectrumSlice s;
    try {
      s = solve_spectrum(op, k, shift, options);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::FactorizationFailure) throw;
      shift = target + 0.25 * tol;
      s = solve_spectrum(op, k, shift, options);
    }
    const bool all_inside = std::all_of(s.values.begin(), s.values.end(), [&](double v) { return std::abs(v - target) <= tol; });
    if (!all_inside || k >= op.free_count()) return form_cluster(op, s, target, tol);
    k *= 2;
  }
}

EigenCluster cluster_of_branch(const AssembledOperator& op, int j, double cluster_tol, const SolverOptions& options) {
  if (j < 0) fail(ErrorKind::InvalidArgument, "branch index must be non-negative");
  const SpectrumSlice low = solve_lowest(op, j + 1, options);
  return cluster_near(op, low.values[j], cluster_tol, options);
}

// ---------------------------------------------------------------------------

struct ReducedResolvent::Impl {
  const AssembledOperator* op = nullptr;
  double lambda = 0.0;
  Matrix U;   // reduced coordinates
  Matrix MU;  // reduced coordinates
  SparseMatrix shifted;
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
  double scale = 1.0;
};

ReducedResolvent::ReducedResolvent(const AssembledOperator& op, const EigenCluster& cluster) : impl_(std::make_unique<Impl>()) {
  Impl& d = *impl_;
  d.op = &op;
  d.lambda = cluster.lambda_big;
  if (cluster.U.rows() != op.dof_count()) fail(ErrorKind::InvalidArgument, "cluster basis has the wrong size");
  d.U = op.restrict(cluster.U);
  d.MU = op.M_reduced * d.U;
  d.shifted = op.A_reduced - d.lambda * op.M_reduced;
  d.scale = norm1(op.A_reduced) + std::abs(d.lambda) * norm1(op.M_reduced);

  // Completeness: the pencil must have exactly m eigenvalues near lambda.
  const double tol = cluster.cluster_tol > 0.0 ? cluster.cluster_tol : default_cluster_tol(d.lambda);
  double half = 2.5 * tol;
  if (std::isfinite(cluster.gap)) half = std::min(half, 0.5 * cluster.gap);
  const int inside = count_below_robust(op, d.lambda + half) - count_below_robust(op, d.lambda - half);
  if (inside != cluster.m) {
    fail(ErrorKind::SingularSystem, "cluster holds " + std::to_string(cluster.m) + " vectors but the pencil has " +
                                        std::to_string(inside) + " eigenvalues there");
  }

  const int n = op.free_count();
  const int m = static_cast<int>(d.U.cols());
  std::vector<Triplet> trip;
  trip.reserve(static_cast<std::size_t>(d.shifted.nonZeros() + 2 * n * m));
  for (int col = 0; col < d.shifted.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(d.shifted, col); it; ++it) trip.emplace_back(it.row(), it.col(), it.value());
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) {
      if (d.MU(i, j) != 0.0) {
        trip.emplace_back(i, n + j, d.MU(i, j));
        trip.emplace_back(n + j, i, d.MU(i, j));
      }
    }
  }
  SparseMatrix saddle(n + m, n + m);
  saddle.setFromTriplets(trip.begin(), trip.end());
  saddle.makeCompressed();
  d.lu.analyzePattern(saddle);
  d.lu.factorize(saddle);
  if (d.lu.info() != Eigen::Success) fail(ErrorKind::SingularSystem, "bordered system is singular");
}

ReducedResolvent::~ReducedResolvent() = default;

Matrix ReducedResolvent::apply(const Matrix& r) const {
  const Impl& d = *impl_;
  if (r.rows() != d.op->dof_count()) fail(ErrorKind::InvalidArgument, "load has the wrong size");
  const int n = d.op->free_count();
  const int m = static_cast<int>(d.U.cols());
  const Matrix rf = d.op->restrict(r);
  const Matrix rhs = rf - d.MU * (d.U.transpose() * rf);
  Matrix big = Matrix::Zero(n + m, r.cols());
  big.topRows(n) = rhs;
  const Matrix sol = d.lu.solve(big);
  if (d.lu.info() != Eigen::Success) fail(ErrorKind::SingularSystem, "bordered solve failed");
  const Matrix w = sol.topRows(n);
  for (Eigen::Index c = 0; c < r.cols(); ++c) {
    const double res = (d.shifted * w.col(c) - rhs.col(c)).norm();
    // Relative to the load itself: rhs may be pure cancellation noise.
    const double ref = d.scale * w.col(c).norm() + rf.col(c).norm();
    const double orth = (d.MU.transpose() * w.col(c)).norm();
    if (!std::isfinite(res) || res > 1e-10 * ref || orth > 1e-10 * std::max(1.0, w.col(c).norm() * d.MU.norm())) {
      fail(ErrorKind::SingularSystem, "deflated solve residual too large");
    }
  }
  return d.op->prolong(w);
}

Vector ReducedResolvent::apply(const Vector& r) const {
  const Matrix out = apply(Matrix(r));
  return out.col(0);
}

Vector reduced_resolvent_apply(const AssembledOperator& op, const EigenCluster& cluster, const Vector& r) {
  return ReducedResolvent(op, cluster).apply(r);
}

// ---------------------------------------------------------------------------

Matrix Projector::dense() const { return U * (U.transpose() * Matrix(M)); }

Projector cluster_projector(const AssembledOperator& op, const EigenCluster& cluster) { return {cluster.U, op.M}; }

RieszResult riesz_projection(const AssembledOperator& op_t, const EigenCluster& cluster, const SolverOptions& options) {
  const double tol = cluster.cluster_tol > 0.0 ? cluster.cluster_tol : default_cluster_tol(cluster.lambda_big);
  const double half = std::isfinite(cluster.gap) ? 0.5 * cluster.gap : 10.0 * tol;
  RieszResult out;
  out.lo = cluster.lambda_big - half;
  out.hi = cluster.lambda_big + half;
  const int inside = count_below_robust(op_t, out.hi) - count_below_robust(op_t, out.lo);
  if (inside != cluster.m) {
    fail(ErrorKind::ClusterSplitLeak, std::to_string(inside) + " eigenvalues in the isolating interval, expected " +
                                          std::to_string(cluster.m));
  }
  const SpectrumSlice s = solve_spectrum(op_t, cluster.m + 2, cluster.lambda_big, options);
  std::vector<int> cols;
  for (int i = 0; i < s.size(); ++i) {
    if (s.values[i] > out.lo && s.values[i] < out.hi) cols.push_back(i);
  }
  if (static_cast<int>(cols.size()) != cluster.m) fail(ErrorKind::ClusterSplitLeak, "solver and inertia disagree on the interval");
  Matrix U(s.vectors.rows(), cluster.m);
  for (int i = 0; i < cluster.m; ++i) {
    U.col(i) = s.vectors.col(cols[i]);
    out.values.push_back(s.values[cols[i]]);
  }
  out.P = {m_orthonormalize(U, op_t.M), op_t.M};
  return out;
}

double projector_distance(const Projector& a, const Projector& b) {
  if (a.U.cols() != b.U.cols()) return 1.0;
  // sin of the largest principal angle: |(I - Pb) Ua|_M.
  const Matrix r = a.U - b.U * (b.U.transpose() * (b.M * a.U));
  const Matrix g = r.transpose() * (a.M * r);
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (g + g.transpose()), Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

TransformationOperator::TransformationOperator(Projector P, Projector Pt) : P_(std::move(P)), Pt_(std::move(Pt)) {
  d_ = projector_distance(P_, Pt_);
  if (!(d_ < 1.0)) fail(ErrorKind::ProjectionsTooFar, "|P(t) - P| = " + std::to_string(d_) + " is not below 1");
  // Binomial coefficients of (1 - z)^{-1/2}; stop once the tail bound is below 1e-12.
  const double d2 = d_ * d_;
  double c = 1.0;
  double power = 1.0;
  terms_ = 0;
  for (;;) {
    const double next_c = c * (2.0 * terms_ + 1.0) / (2.0 * terms_ + 2.0);
    const double next_power = power * d2;
    if (next_c * next_power / (1.0 - d2) < 1e-12) break;
    c = next_c;
    power = next_power;
    ++terms_;
    if (terms_ > 100000) fail(ErrorKind::ProjectionsTooFar, "binomial series does not converge fast enough");
  }
}

Matrix TransformationOperator::d_squared(const Matrix& x) const {
  const Matrix dx = Pt_.apply(x) - P_.apply(x);
  return Pt_.apply(dx) - P_.apply(dx);
}

Matrix TransformationOperator::inv_sqrt(const Matrix& x) const {
  Matrix term = x;
  Matrix sum = x;
  double c = 1.0;
  for (int k = 0; k < terms_; ++k) {
    c *= (2.0 * k + 1.0) / (2.0 * k + 2.0);
    term = d_squared(term);
    sum += c * term;
  }
  return sum;
}

Matrix TransformationOperator::apply(const Matrix& x) const {
  // (I - Pt)(I - P) x + Pt P x
  const Matrix px = P_.apply(x);
  const Matrix q = x - px;
  const Matrix y = (q - Pt_.apply(q)) + Pt_.apply(px);
  return inv_sqrt(y);
}

Matrix TransformationOperator::apply_inverse(const Matrix& x) const {
  // ((I - P)(I - Pt) + P Pt) (I - D^2)^{-1/2} x
  const Matrix z = inv_sqrt(x);
  const Matrix ptz = Pt_.apply(z);
  const Matrix q = z - ptz;
  return (q - P_.apply(q)) + P_.apply(ptz);
}

Vector TransformationOperator::apply(const Vector& x) const { return apply(Matrix(x)).col(0); }
Vector TransformationOperator::apply_inverse(const Vector& x) const { return apply_inverse(Matrix(x)).col(0); }

double m_operator_norm(const Matrix& X, const SparseMatrix& M) {
  const Matrix dense_m(M);
  Eigen::LLT<Matrix> llt(dense_m);
  if (llt.info() != Eigen::Success) fail(ErrorKind::InvalidArgument, "mass matrix is not positive definite");
  const Matrix L = llt.matrixL();
  const Matrix Y = L.transpose() * X;
  // Y L^{-T} = (L^{-1} Y^T)^T
  const Matrix Z = L.triangularView<Eigen::Lower>().solve(Y.transpose()).transpose();
  Eigen::BDCSVD<Matrix> svd(Z);
  return svd.singularValues().size() ? svd.singularValues()[0] : 0.0;
}

}  // namespace eigenflow
