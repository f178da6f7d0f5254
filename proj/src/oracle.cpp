#include "eigenflow/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "eigenflow/assignment.hpp"
#include "eigenflow/error.hpp"
#include "eigenflow/parallel.hpp"

namespace eigenflow::oracle {
namespace {

std::vector<double> window(const Problem& problem, double t, int first, int count, const SolverOptions& solver) {
  const AssembledOperator op = problem.assemble(t);
  const SpectrumSlice s = solve_lowest(op, first + count, solver);
  if (s.size() < first + count) fail(ErrorKind::InvalidArgument, "mesh has fewer eigenvalues than requested");
  std::vector<double> out;
  for (int i = first; i < first + count; ++i) out.push_back(s.values[i] / (t * t));
  return out;
}

/// Least-squares residual of a low-degree polynomial through (x, y).
double poly_fit_residual(const std::vector<double>& x, const std::vector<double>& y, int degree) {
  const auto n = static_cast<Eigen::Index>(x.size());
  Matrix V(n, degree + 1);
  Vector b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double p = 1.0;
    for (int d = 0; d <= degree; ++d) {
      V(i, d) = p;
      p *= x[i];
    }
    b[i] = y[i];
  }
  const Vector c = V.colPivHouseholderQr().solve(b);
  return (V * c - b).norm();
}

}  // namespace

Matrix richardson_table(const std::vector<double>& steps, const std::vector<double>& values) {
  const int n = static_cast<int>(steps.size());
  Matrix T = Matrix::Zero(n, n);
  for (int q = 0; q < n; ++q) {
    T(q, 0) = values[q];
    for (int l = 1; l <= q; ++l) {
      const double r = steps[q - l] / steps[q];
      const double ratio = r * r;
      T(q, l) = T(q, l - 1) + (T(q, l - 1) - T(q - 1, l - 1)) / (ratio - 1.0);
    }
  }
  return T;
}

FdResult fd_branch_derivatives(const Problem& problem, double t0, int first, int count, const FdOptions& options) {
  if (!(t0 > 0.0)) fail(ErrorKind::InvalidArgument, "t0 must be positive");
  if (first < 0 || count < 1) fail(ErrorKind::InvalidArgument, "invalid branch window");
  std::vector<double> steps = options.steps;
  if (steps.empty()) steps = {1e-2 * t0, 5e-3 * t0, 2.5e-3 * t0};
  for (std::size_t q = 0; q < steps.size(); ++q) {
    if (!(steps[q] > 0.0) || steps[q] > 1e-2 * t0 * (1.0 + 1e-12) || (q > 0 && !(steps[q] < steps[q - 1]))) {
      fail(ErrorKind::InvalidArgument, "FD steps must be positive, descending and at most 1e-2 t0");
    }
  }
  const int ns = static_cast<int>(steps.size());

  // Sample index 0 is t0, then (t0 - s_q, t0 + s_q) pairs.
  std::vector<double> ts = {t0};
  for (double s : steps) {
    ts.push_back(t0 - s);
    ts.push_back(t0 + s);
  }
  std::vector<std::vector<double>> vals(ts.size());
  parallel_for(ts.size(), [&](std::size_t i) { vals[i] = window(problem, ts[i], first, count, options.solver); });
  const std::vector<double>& C = vals[0];
  auto left = [&](int q) -> const std::vector<double>& { return vals[1 + 2 * q]; };
  auto right = [&](int q) -> const std::vector<double>& { return vals[2 + 2 * q]; };

  FdResult out;
  out.t0 = t0;
  out.steps = steps;

  Assignment best;
  best.cols = {0};
  if (count > 1) {
    const int degree = std::min(4, 2 * ns - 1);
    Matrix cost(count, count);
    for (int i = 0; i < count; ++i) {
      for (int j = 0; j < count; ++j) {
        std::vector<double> x = {0.0};
        std::vector<double> y = {0.5 * (C[i] + C[j])};
        for (int q = 0; q < ns; ++q) {
          x.push_back(-steps[q] / steps[0]);
          y.push_back(left(q)[i]);
          x.push_back(steps[q] / steps[0]);
          y.push_back(right(q)[j]);
        }
        cost(i, j) = poly_fit_residual(x, y, degree);
      }
    }
    best = solve_assignment(cost);
    const Assignment second = second_best_assignment(cost, best);
    out.pairing_cost = best.cost;
    out.pairing_runner_up = second.cost;
    const double floor = 1e-9 * std::max(1.0, std::abs(C[0]));
    if (second.cost >= floor && second.cost < 2.0 * best.cost) {
      fail(ErrorKind::BranchPairingAmbiguous, "pairing cost ratio " + std::to_string(second.cost / best.cost) + " is below 2");
    }
  } else {
    out.pairing_runner_up = std::numeric_limits<double>::infinity();
  }

  for (int i = 0; i < count; ++i) {
    const int j = best.cols[i];
    FdBranch br;
    br.index = i;
    br.right_index = j;
    br.lambda = 0.5 * (C[i] + C[j]);
    std::vector<double> d1, d2;
    for (int q = 0; q < ns; ++q) {
      const double s = steps[q];
      d1.push_back((right(q)[j] - left(q)[i]) / (2.0 * s));
      d2.push_back((right(q)[j] - 2.0 * br.lambda + left(q)[i]) / (s * s));
    }
    br.table1 = richardson_table(steps, d1);
    br.table2 = richardson_table(steps, d2);
    br.dlam = br.table1(ns - 1, ns - 1);
    br.d2lam = br.table2(ns - 1, ns - 1);
    if (ns > 1) {
      br.dlam_error = std::abs(br.dlam - br.table1(ns - 1, ns - 2));
      br.d2lam_error = std::abs(br.d2lam - br.table2(ns - 1, ns - 2));
    }
    out.branches.push_back(std::move(br));
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

double bessel_series(int n, double x) {
  const double half = 0.5 * x;
  double term = 1.0;
  for (int k = 1; k <= n; ++k) term *= half / k;
  double sum = term;
  const double q = -half * half;
  for (int m = 1; m < 200; ++m) {
    term *= q / (static_cast<double>(m) * (m + n));
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum)) break;
  }
  return sum;
}

/// Miller's backward recurrence normalized by J_0 + 2 sum J_{2k} = 1.
double bessel_miller(int n, double x) {
  const int top = 2 * ((std::max(n, static_cast<int>(x)) + 30 + static_cast<int>(std::sqrt(60.0 * std::max<double>(n, x)))) / 2);
  double jp1 = 0.0;
  double j = 1e-300;
  double result = 0.0;
  double norm = 0.0;
  for (int k = top; k >= 1; --k) {
    const double jm1 = (2.0 * k / x) * j - jp1;
    jp1 = j;
    j = jm1;
    // j now holds J_{k-1}
    if (k - 1 == n) result = j;
    if ((k - 1) % 2 == 0 && k - 1 > 0) norm += 2.0 * j;
    if (std::abs(j) > 1e200) {
      j *= 1e-200;
      jp1 *= 1e-200;
      result *= 1e-200;
      norm *= 1e-200;
    }
  }
  norm += j;
  return result / norm;
}

}  // namespace

double bessel_j(int n, double x) {
  if (n < 0) return (n % 2 == 0 ? 1.0 : -1.0) * bessel_j(-n, x);
  if (x < 0.0) return (n % 2 == 0 ? 1.0 : -1.0) * bessel_j(n, -x);
  if (x == 0.0) return n == 0 ? 1.0 : 0.0;
  if (x < 1.0) return bessel_series(n, x);
  return bessel_miller(n, x);
}

double bessel_j_derivative(int n, double x) {
  if (n == 0) return -bessel_j(1, x);
  return 0.5 * (bessel_j(n - 1, x) - bessel_j(n + 1, x));
}

double bessel_j_zero(int n, int k) {
  if (n < 0 || k < 1) fail(ErrorKind::InvalidArgument, "bessel_j_zero needs n >= 0, k >= 1");
  const double dx = 0.05;
  double a = n == 0 ? dx : static_cast<double>(n);
  double fa = bessel_j(n, a);
  int found = 0;
  for (int it = 0; it < 2000000; ++it) {
    const double b = a + dx;
    const double fb = bessel_j(n, b);
    if ((fa < 0.0) != (fb < 0.0) || fb == 0.0) {
      if (++found == k) {
        double lo = a, hi = b, flo = fa;
        for (int bis = 0; bis < 200; ++bis) {
          const double mid = 0.5 * (lo + hi);
          if (mid <= lo || mid >= hi) break;
          const double fm = bessel_j(n, mid);
          if (fm == 0.0) return mid;
          if ((fm < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fm;
          } else {
            hi = mid;
          }
        }
        return 0.5 * (lo + hi);
      }
    }
    a = b;
    fa = fb;
  }
  fail(ErrorKind::ConvergenceFailure, "Bessel zero search did not terminate");
}

namespace {

double disc_norm_constant(const DiscMode& m) {
  const double jn1 = bessel_j(m.n + 1, m.j);
  return std::sqrt(m.n == 0 ? std::numbers::pi : 0.5 * std::numbers::pi) * std::abs(jn1);
}

/// Gauss-Legendre nodes and weights on [0, 1].
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    x[i] = 0.5 * (1.0 - z);
    w[i] = 1.0 / ((1.0 - z * z) * dp * dp);
  }
}

}  // namespace

double DiscMode::value(const Vec2& x) const {
  const double r = x.norm();
  const double th = std::atan2(x.y(), x.x());
  return bessel_j(n, j * r) * std::cos(n * th) / disc_norm_constant(*this);
}

Vec2 DiscMode::gradient(const Vec2& x) const {
  const double r = x.norm();
  const double th = std::atan2(x.y(), x.x());
  const double c = disc_norm_constant(*this);
  const double ur = j * bessel_j_derivative(n, j * r) * std::cos(n * th) / c;
  double ut_over_r = 0.0;
  if (n > 0) {
    ut_over_r = r > 0.0 ? -n * bessel_j(n, j * r) * std::sin(n * th) / (r * c) : 0.0;
  }
  const Vec2 er(std::cos(th), std::sin(th));
  const Vec2 et(-std::sin(th), std::cos(th));
  return ur * er + ut_over_r * et;
}

DiscMode analytic_disc_mode(int n, int k) {
  DiscMode m;
  m.n = n;
  m.k = k;
  m.j = bessel_j_zero(n, k);
  m.lambda = m.j * m.j;
  m.multiplicity = n == 0 ? 1 : 2;
  return m;
}

DiscMode analytic_disc(int k) {
  if (k < 1) fail(ErrorKind::InvalidArgument, "k must be at least 1");
  return analytic_disc_mode(0, k);
}

std::vector<DiscMode> disc_modes(int count) {
  std::vector<DiscMode> all;
  for (int n = 0; n <= count + 2; ++n) {
    for (int k = 1; k <= count; ++k) all.push_back(analytic_disc_mode(n, k));
  }
  std::sort(all.begin(), all.end(), [](const DiscMode& a, const DiscMode& b) { return a.lambda < b.lambda; });
  all.resize(static_cast<std::size_t>(std::min<int>(count, static_cast<int>(all.size()))));
  return all;
}

double disc_mode_norm2(const DiscMode& mode, int angular_points, int radial_points) {
  std::vector<double> rx, rw;
  gauss_legendre(radial_points, rx, rw);
  double sum = 0.0;
  for (int a = 0; a < angular_points; ++a) {
    const double th = 2.0 * std::numbers::pi * a / angular_points;
    for (int i = 0; i < radial_points; ++i) {
      const Vec2 x(rx[i] * std::cos(th), rx[i] * std::sin(th));
      const double u = mode.value(x);
      sum += rw[i] * rx[i] * u * u;
    }
  }
  return sum * 2.0 * std::numbers::pi / angular_points;
}

double rellich_ratio(const DiscMode& mode, int angular_points, int radial_points) {
  double boundary = 0.0;
  for (int a = 0; a < angular_points; ++a) {
    const double th = 2.0 * std::numbers::pi * a / angular_points;
    const Vec2 nu(std::cos(th), std::sin(th));
    const double dn = mode.gradient(nu).dot(nu);
    boundary += dn * dn * nu.dot(nu);
  }
  boundary *= 2.0 * std::numbers::pi / angular_points;
  return boundary / (2.0 * mode.lambda * disc_mode_norm2(mode, std::max(64, angular_points / 8), radial_points));
}

double SquareMode::value(const Vec2& x) const {
  return 2.0 * std::sin(m * std::numbers::pi * (x.x() + 0.5)) * std::sin(n * std::numbers::pi * (x.y() + 0.5));
}

std::vector<SquareCluster> analytic_square(int count) {
  std::vector<SquareMode> modes;
  const int top = count + 2;
  for (int m = 1; m <= top; ++m) {
    for (int n = 1; n <= top; ++n) modes.push_back({m, n, std::numbers::pi * std::numbers::pi * (m * m + n * n)});
  }
  std::sort(modes.begin(), modes.end(), [](const SquareMode& a, const SquareMode& b) {
    return a.lambda != b.lambda ? a.lambda < b.lambda : a.m < b.m;
  });
  std::vector<SquareCluster> out;
  for (const auto& md : modes) {
    if (out.empty() || md.m * md.m + md.n * md.n != out.back().modes.front().m * out.back().modes.front().m +
                                                         out.back().modes.front().n * out.back().modes.front().n) {
      if (static_cast<int>(out.size()) == count) break;
      out.push_back({md.lambda, 0, {}});
    }
    out.back().modes.push_back(md);
    out.back().multiplicity += 1;
  }
  return out;
}

int spectral_count(const Problem& problem, double lambda0, double a, double b) {
  if (!(a > 0.0) || !(b > a)) fail(ErrorKind::InvalidArgument, "interval must satisfy 0 < a < b");
  const AssembledOperator opa = problem.assemble(a);
  const AssembledOperator opb = problem.assemble(b);
  return count_below_robust(opb, b * b * lambda0) - count_below_robust(opa, a * a * lambda0);
}

}  // namespace eigenflow::oracle
