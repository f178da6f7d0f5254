#include "eigenflow/maslov.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "eigenflow/error.hpp"
#include "eigenflow/parallel.hpp"

namespace eigenflow {
namespace {

constexpr double kMergeTol = 1e-8;

double zero_tol(double value) { return 1e-10 * std::max(1.0, std::abs(value)); }

double norm1(const SparseMatrix& a) {
  double best = 0.0;
  for (int col = 0; col < a.outerSize(); ++col) {
    double s = 0.0;
    for (SparseMatrix::InnerIterator it(a, col); it; ++it) s += std::abs(it.value());
    best = std::max(best, s);
  }
  return best;
}

/// Eigenvalues of A(t) near sigma with global indices; widens until the
/// window reaches past the zero band on both sides where possible.
struct Sample {
  double t = 0.0;
  double sigma = 0.0;
  std::vector<double> values;
  std::vector<int> index;
  Matrix vectors;
  int below = 0;  // branches strictly below sigma - tol
  std::vector<int> zeros;
};

SpectrumSlice slice_near(const AssembledOperator& op, int k, double sigma, const SolverOptions& solver) {
  double shift = sigma;
  double nudge = 1e-9 * std::max(1.0, std::abs(sigma));
  for (int attempt = 0; attempt < 6; ++attempt) {
    try {
      return solve_spectrum(op, k, shift, solver);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::FactorizationFailure) throw;
      shift = sigma + nudge;
      nudge *= -3.0;
    }
  }
  fail(ErrorKind::FactorizationFailure, "no usable shift near " + std::to_string(sigma));
}

Sample sample_at(const Problem& problem, double t, double lambda0, int window, const SolverOptions& solver) {
  const AssembledOperator op = problem.assemble(t);
  Sample s;
  s.t = t;
  s.sigma = t * t * lambda0;
  const double tol = zero_tol(s.sigma);
  int k = std::max(window, 2);
  for (;;) {
    const SpectrumSlice slice = slice_near(op, k, s.sigma, solver);
    const bool all_zero = std::all_of(slice.values.begin(), slice.values.end(), [&](double v) { return std::abs(v - s.sigma) <= tol; });
    if (all_zero && k < op.free_count()) {
      k *= 2;
      continue;
    }
    s.values = slice.values;
    s.vectors = slice.vectors;
    s.index.clear();
    for (int i = 0; i < slice.size(); ++i) s.index.push_back(slice.global_index(i));
    s.below = s.index.empty() ? 0 : s.index.front();
    s.zeros.clear();
    for (int i = 0; i < slice.size(); ++i) {
      if (slice.values[i] < s.sigma - tol) s.below = s.index[i] + 1;
      if (std::abs(slice.values[i] - s.sigma) <= tol) s.zeros.push_back(s.index[i]);
    }
    return s;
  }
}

int sign_of(const Sample& s, int j) {
  if (j < s.below) return -1;
  if (std::find(s.zeros.begin(), s.zeros.end(), j) != s.zeros.end()) return 0;
  return 1;
}

/// Lambda_j(t) - t^2 lambda0.
double branch_value(const Problem& problem, double t, int j, double lambda0, const CrossingOptions& options) {
  const AssembledOperator op = problem.assemble(t);
  const double sigma = t * t * lambda0;
  int k = std::max(options.window, 2);
  for (;;) {
    const SpectrumSlice slice = slice_near(op, k, sigma, options.solver);
    for (int i = 0; i < slice.size(); ++i) {
      if (slice.global_index(i) == j) return slice.values[i] - sigma;
    }
    if (k >= op.free_count()) fail(ErrorKind::ConvergenceFailure, "branch index outside the spectrum");
    k *= 2;
  }
}

bool branch_below(const Problem& problem, double t, int j, double lambda0) {
  const AssembledOperator op = problem.assemble(t);
  return count_below_robust(op, t * t * lambda0) > j;
}

double refine_crossing(const Problem& problem, double lo, double hi, int j, double lambda0, const CrossingOptions& options) {
  // lo side: branch j below sigma iff below_lo.
  const bool below_lo = branch_below(problem, lo, j, lambda0);
  const double width = 1e-6 * std::max(hi - lo, 1e-12);
  double a = lo, b = hi;
  for (int it = 0; it < 200 && b - a > width; ++it) {
    const double mid = 0.5 * (a + b);
    if (branch_below(problem, mid, j, lambda0) == below_lo) {
      a = mid;
    } else {
      b = mid;
    }
  }
  // Illinois on the branch value.
  double fa = branch_value(problem, a, j, lambda0, options);
  double fb = branch_value(problem, b, j, lambda0, options);
  auto done = [&](double t, double f) { return std::abs(f) <= zero_tol(t * t * lambda0 + f); };
  if (done(a, fa)) return a;
  if (done(b, fb)) return b;
  int side = 0;
  for (int it = 0; it < 200; ++it) {
    double t = (fa * b - fb * a) / (fa - fb);
    if (!(t > a && t < b)) t = 0.5 * (a + b);
    const double f = branch_value(problem, t, j, lambda0, options);
    if (done(t, f)) return t;
    if ((f < 0.0) == (fa < 0.0)) {
      a = t;
      fa = f;
      if (side == -1) fb *= 0.5;
      side = -1;
    } else {
      b = t;
      fb = f;
      if (side == 1) fa *= 0.5;
      side = 1;
    }
    if (b - a <= 4.0 * std::numeric_limits<double>::epsilon() * b) break;
  }
  const double t = std::abs(fa) < std::abs(fb) ? a : b;
  const double f = std::abs(fa) < std::abs(fb) ? fa : fb;
  if (!done(t, f)) fail(ErrorKind::ConvergenceFailure, "crossing refinement stalled");
  return t;
}

/// Hermite cubic sign test between two samples for a simple branch.
std::optional<double> hermite_dip(double ta, double fa, double da, double tb, double fb, double db) {
  const double h = tb - ta;
  double best_t = 0.0;
  double best = 0.0;
  for (int i = 1; i < 64; ++i) {
    const double s = i / 64.0;
    const double h00 = 2 * s * s * s - 3 * s * s + 1, h10 = s * s * s - 2 * s * s + s;
    const double h01 = -2 * s * s * s + 3 * s * s, h11 = s * s * s - s * s;
    const double f = h00 * fa + h10 * h * da + h01 * fb + h11 * h * db;
    if ((f < 0.0) != (fa < 0.0) && std::abs(f) > best) {
      best = std::abs(f);
      best_t = ta + s * h;
    }
  }
  if (best > 0.0) return best_t;
  return std::nullopt;
}

}  // namespace

std::vector<Crossing> find_crossings(const Problem& problem, double lambda0, double a, double b, int grid_n,
                                     const CrossingOptions& options) {
  if (grid_n < 8) fail(ErrorKind::InvalidArgument, "grid_n must be at least 8");
  if (!(a > 0.0) || !(b > a)) fail(ErrorKind::InvalidArgument, "interval must satisfy 0 < a < b");
  std::vector<double> ts(static_cast<std::size_t>(grid_n));
  for (int i = 0; i < grid_n; ++i) ts[i] = a + (b - a) * i / (grid_n - 1);
  ts.back() = b;

  std::vector<Sample> samples(ts.size());
  std::vector<Vector> slopes(ts.size());
  parallel_for(ts.size(), [&](std::size_t i) {
    samples[i] = sample_at(problem, ts[i], lambda0, options.window, options.solver);
    // Hellmann-Feynman slopes of the sampled branches.
    const AssembledOperator op = problem.assemble(ts[i]);
    SparseMatrix w = problem.derivative_matrices(ts[i], false).first;
    if (op.kind == BcKind::Robin) w -= op.B;
    const Matrix& X = samples[i].vectors;
    Vector d(X.cols());
    for (Eigen::Index c = 0; c < X.cols(); ++c) d[c] = X.col(c).dot(w * X.col(c)) - 2.0 * ts[i] * lambda0;
    slopes[i] = d;
  });

  std::vector<std::pair<double, int>> hits;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    for (int j : samples[i].zeros) hits.emplace_back(samples[i].t, j);
  }
  for (std::size_t i = 0; i + 1 < samples.size(); ++i) {
    const Sample& sa = samples[i];
    const Sample& sb = samples[i + 1];
    const int lo = std::min(sa.below, sb.below);
    const int hi = std::max(sa.below + static_cast<int>(sa.zeros.size()), sb.below + static_cast<int>(sb.zeros.size()));
    for (int j = lo; j < hi; ++j) {
      const int s0 = sign_of(sa, j);
      const int s1 = sign_of(sb, j);
      if (s0 != 0 && s1 != 0 && s0 != s1) hits.emplace_back(refine_crossing(problem, sa.t, sb.t, j, lambda0, options), j);
    }
    // Double crossings hidden between two samples of equal sign.
    for (std::size_t p = 0; p < sa.index.size(); ++p) {
      const int j = sa.index[p];
      const auto q = std::find(sb.index.begin(), sb.index.end(), j);
      if (q == sb.index.end()) continue;
      const std::size_t qi = static_cast<std::size_t>(q - sb.index.begin());
      const double fa = sa.values[p] - sa.sigma;
      const double fb = sb.values[qi] - sb.sigma;
      if (sign_of(sa, j) == 0 || sign_of(sa, j) != sign_of(sb, j)) continue;
      auto simple = [](const Sample& s, std::size_t k) {
        const double tol = 1e-6 * std::max(1.0, std::abs(s.values[k]));
        const bool left_ok = k == 0 || s.values[k] - s.values[k - 1] > tol;
        const bool right_ok = k + 1 == s.values.size() || s.values[k + 1] - s.values[k] > tol;
        return left_ok && right_ok && k > 0 && k + 1 < s.values.size();
      };
      if (!simple(sa, p) || !simple(sb, qi)) continue;
      const auto dip = hermite_dip(sa.t, fa, slopes[i][static_cast<Eigen::Index>(p)], sb.t, fb, slopes[i + 1][static_cast<Eigen::Index>(qi)]);
      if (dip && branch_below(problem, *dip, j, lambda0) != (fa < 0.0)) {
        fail(ErrorKind::GridTooCoarse, "branch " + std::to_string(j) + " crosses twice between t = " + std::to_string(sa.t) +
                                           " and " + std::to_string(sb.t) + "; increase grid_n");
      }
    }
  }

  std::sort(hits.begin(), hits.end());
  std::vector<Crossing> out;
  for (const auto& [t, j] : hits) {
    if (!out.empty() && t - out.back().t <= kMergeTol) {
      auto& br = out.back().branches;
      if (std::find(br.begin(), br.end(), j) == br.end()) br.push_back(j);
      continue;
    }
    out.push_back({t, {j}});
  }
  for (auto& c : out) std::sort(c.branches.begin(), c.branches.end());
  return out;
}

void classify_form(CrossingReport& r) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(r.form_matrix, Eigen::EigenvaluesOnly);
  r.eigenvalues.assign(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  const double scale = es.eigenvalues().size() ? es.eigenvalues().cwiseAbs().maxCoeff() : 0.0;
  const double thresh = 1e-8 * scale;
  r.n_plus = r.n_minus = 0;
  r.regular = scale > 0.0;
  for (double e : r.eigenvalues) {
    if (std::abs(e) < thresh || e == 0.0) {
      r.regular = false;
    } else if (e > 0.0) {
      ++r.n_plus;
    } else {
      ++r.n_minus;
    }
  }
  r.signature = r.n_plus - r.n_minus;
}

namespace {

void check_kernel(const AssembledOperator& op, const EigenCluster& cluster, double lambda0) {
  const double sigma = op.t * op.t * lambda0;
  const SparseMatrix shifted = op.A_reduced - sigma * op.M_reduced;
  const double scale = norm1(op.A_reduced) + std::abs(sigma) * norm1(op.M_reduced);
  const Matrix Uf = op.restrict(cluster.U);
  for (Eigen::Index c = 0; c < Uf.cols(); ++c) {
    const double res = (shifted * Uf.col(c)).norm();
    if (!(res <= 1e-6 * scale * Uf.col(c).norm())) {
      fail(ErrorKind::NotACrossing, "t0^2 lambda0 is not an eigenvalue at t0 (residual " + std::to_string(res) + ")");
    }
  }
}

}  // namespace

CrossingReport crossing_form_mqq(const Problem& problem, const AssembledOperator& op, const EigenCluster& cluster,
                                 double lambda0) {
  check_kernel(op, cluster, lambda0);
  const double t0 = op.t;
  const double sigma = t0 * t0 * lambda0;
  const Matrix& U = cluster.U;
  const SparseMatrix vdot = problem.derivative_matrices(t0, false).first;
  Matrix F = (U.transpose() * (vdot * U) - 2.0 * t0 * lambda0 * (U.transpose() * (op.M * U))) / t0;
  if (op.kind == BcKind::Robin) {
    const int m = cluster.m;
    Matrix G(m, m);
    std::vector<TraceData> tr;
    for (int j = 0; j < m; ++j) tr.push_back(traces(op, U.col(j), sigma));
    for (int j = 0; j < m; ++j) {
      for (int k = 0; k < m; ++k) G(j, k) = tr[j].weak_neumann.dot(tr[k].dirichlet);
    }
    F -= G / (t0 * t0);
  }
  CrossingReport r;
  r.t0 = t0;
  r.lambda0 = lambda0;
  r.dim = cluster.m;
  r.route = FormRoute::Mqq;
  r.asymmetry = (F - F.transpose()).cwiseAbs().maxCoeff();
  r.form_matrix = 0.5 * (F + F.transpose());
  classify_form(r);
  return r;
}

CrossingReport crossing_form_boundary(const Problem& problem, const AssembledOperator& op, const EigenCluster& cluster,
                                      double lambda0) {
  check_kernel(op, cluster, lambda0);
  const TriMesh& mesh = *op.mesh;
  for (const auto& e : mesh.boundary_edges) {
    if (e.triangle < 0) fail(ErrorKind::StrongTraceUnavailable, "boundary edge without an owning triangle");
  }
  const double t0 = op.t;
  const int nc = op.components;
  const MatrixPotential& V = problem.potential();
  const double g = 0.5 / std::sqrt(3.0);
  const std::array<double, 2> xi = {0.5 - g, 0.5 + g};

  // Potential samples are shared by every quadratic value.
  std::vector<Matrix> wq;
  wq.reserve(mesh.boundary_edges.size() * 2);
  for (const auto& e : mesh.boundary_edges) {
    for (double s : xi) {
      const Vec2 y = (1.0 - s) * mesh.nodes[e.nodes[0]] + s * mesh.nodes[e.nodes[1]];
      wq.push_back(t0 * t0 * (V.value(t0 * y) - lambda0 * Matrix::Identity(nc, nc)));
    }
  }

  auto quad = [&](const Vector& u) {
    const TraceData tr = traces(op, u, t0 * t0 * lambda0);
    double sum = 0.0;
    for (std::size_t k = 0; k < mesh.boundary_edges.size(); ++k) {
      const auto& e = mesh.boundary_edges[k];
      const Matrix& G = tr.edge_gradient[k];
      const Vector& dn = tr.strong_neumann[k];
      for (int q = 0; q < 2; ++q) {
        const Vec2 y = (1.0 - xi[q]) * mesh.nodes[e.nodes[0]] + xi[q] * mesh.nodes[e.nodes[1]];
        Vector uy(nc);
        for (int c = 0; c < nc; ++c) uy[c] = (1.0 - xi[q]) * u[e.nodes[0] * nc + c] + xi[q] * u[e.nodes[1] * nc + c];
        const double nux = e.normal.dot(y);
        const double grad2 = G.squaredNorm();
        const double gx_dn = (G * y).dot(dn);
        const double dn_u = dn.dot(uy);
        const double wuu = uy.dot(wq[2 * k + q] * uy);
        sum += 0.5 * e.length * (grad2 * nux - 2.0 * gx_dn - dn_u + wuu * nux);
      }
    }
    return sum / (t0 * t0);
  };

  const int m = cluster.m;
  const Matrix& U = cluster.U;
  Matrix F(m, m);
  for (int j = 0; j < m; ++j) F(j, j) = quad(U.col(j));
  for (int j = 0; j < m; ++j) {
    for (int k = j + 1; k < m; ++k) {
      F(j, k) = F(k, j) = 0.25 * (quad(U.col(j) + U.col(k)) - quad(U.col(j) - U.col(k)));
    }
  }
  CrossingReport r;
  r.t0 = t0;
  r.lambda0 = lambda0;
  r.dim = m;
  r.route = FormRoute::Boundary;
  r.asymmetry = 0.0;
  r.form_matrix = F;
  classify_form(r);
  return r;
}

int crossing_contribution(const CrossingReport& c, double a, double b) {
  if (std::abs(c.t0 - a) <= kMergeTol) return -c.n_minus;
  if (std::abs(c.t0 - b) <= kMergeTol) return c.n_plus;
  return c.n_plus - c.n_minus;
}

MaslovResult maslov_index(const Problem& problem, double lambda0, double a, double b, int grid_n,
                          const CrossingOptions& options) {
  MaslovResult r;
  r.a = a;
  r.b = b;
  r.lambda0 = lambda0;
  const std::vector<Crossing> crossings = find_crossings(problem, lambda0, a, b, grid_n, options);
  int index = 0;
  bool degenerate = false;
  for (const auto& c : crossings) {
    const AssembledOperator op = problem.assemble(c.t);
    const double target = c.t * c.t * lambda0;
    const EigenCluster cluster = cluster_near(op, target, options.cluster_tol, options.solver);
    CrossingReport rep = crossing_form_mqq(problem, op, cluster, lambda0);
    if (rep.dim != c.multiplicity()) {
      r.warning += "crossing at t=" + std::to_string(c.t) + ": cluster dimension " + std::to_string(rep.dim) +
                   " differs from branch count " + std::to_string(c.multiplicity()) + ". ";
    }
    if (!rep.regular) degenerate = true;
    index += crossing_contribution(rep, a, b);
    r.crossings.push_back(std::move(rep));
  }
  if (degenerate) {
    r.warning += "DegenerateCrossing: a crossing form is singular; index withheld.";
  } else {
    r.index = index;
  }
  return r;
}

int require_index(const MaslovResult& result) {
  if (!result.index) fail(ErrorKind::DegenerateCrossing, result.warning);
  return *result.index;
}

}  // namespace eigenflow
