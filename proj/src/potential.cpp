#include "eigenflow/potential.hpp"

#include <cmath>

#include "eigenflow/error.hpp"

namespace eigenflow {

ScalarField constant_field(double c) {
  return {[c](const Vec2&) { return c; }, [](const Vec2&) { return Vec2::Zero().eval(); },
          [](const Vec2&) { return Mat2::Zero().eval(); }};
}

ScalarField linear_field(const Vec2& a) {
  return {[a](const Vec2& x) { return a.dot(x); }, [a](const Vec2&) { return a; },
          [](const Vec2&) { return Mat2::Zero().eval(); }};
}

ScalarField quadratic_field(const Mat2& q) {
  const Mat2 s = 0.5 * (q + q.transpose());
  return {[s](const Vec2& x) { return x.dot(s * x); }, [s](const Vec2& x) { return (2.0 * s * x).eval(); },
          [s](const Vec2&) { return (2.0 * s).eval(); }};
}

ScalarField gaussian_field(double amplitude, const Vec2& center, double width) {
  const double inv = 1.0 / (width * width);
  auto g = [=](const Vec2& x) { return amplitude * std::exp(-0.5 * (x - center).squaredNorm() * inv); };
  return {g, [=](const Vec2& x) { return (-inv * g(x) * (x - center)).eval(); },
          [=](const Vec2& x) {
            const Vec2 d = x - center;
            return (g(x) * (inv * inv * d * d.transpose() - inv * Mat2::Identity())).eval();
          }};
}

ScalarField polynomial_field(std::vector<Monomial> terms) {
  auto pw = [](double b, int e) { return e <= 0 ? 1.0 : std::pow(b, e); };
  ScalarField f;
  f.value = [terms, pw](const Vec2& x) {
    double s = 0.0;
    for (const auto& m : terms) s += m.coefficient * pw(x.x(), m.px) * pw(x.y(), m.py);
    return s;
  };
  f.gradient = [terms, pw](const Vec2& x) {
    Vec2 g = Vec2::Zero();
    for (const auto& m : terms) {
      if (m.px > 0) g.x() += m.coefficient * m.px * pw(x.x(), m.px - 1) * pw(x.y(), m.py);
      if (m.py > 0) g.y() += m.coefficient * m.py * pw(x.x(), m.px) * pw(x.y(), m.py - 1);
    }
    return g;
  };
  f.hessian = [terms, pw](const Vec2& x) {
    Mat2 hs = Mat2::Zero();
    for (const auto& m : terms) {
      const double c = m.coefficient;
      if (m.px > 1) hs(0, 0) += c * m.px * (m.px - 1) * pw(x.x(), m.px - 2) * pw(x.y(), m.py);
      if (m.py > 1) hs(1, 1) += c * m.py * (m.py - 1) * pw(x.x(), m.px) * pw(x.y(), m.py - 2);
      if (m.px > 0 && m.py > 0) {
        const double v = c * m.px * m.py * pw(x.x(), m.px - 1) * pw(x.y(), m.py - 1);
        hs(0, 1) += v;
        hs(1, 0) += v;
      }
    }
    return hs;
  };
  return f;
}

ScalarField sum_fields(std::vector<ScalarField> fields) {
  ScalarField f;
  f.value = [fields](const Vec2& x) {
    double s = 0.0;
    for (const auto& g : fields) s += g.value(x);
    return s;
  };
  bool all_grad = true;
  bool all_hess = true;
  for (const auto& g : fields) {
    all_grad = all_grad && static_cast<bool>(g.gradient);
    all_hess = all_hess && static_cast<bool>(g.hessian);
  }
  if (all_grad) {
    f.gradient = [fields](const Vec2& x) {
      Vec2 s = Vec2::Zero();
      for (const auto& g : fields) s += g.gradient(x);
      return s;
    };
  }
  if (all_hess) {
    f.hessian = [fields](const Vec2& x) {
      Mat2 s = Mat2::Zero();
      for (const auto& g : fields) s += g.hessian(x);
      return s;
    };
  }
  return f;
}

MatrixPotential::MatrixPotential(int components, std::function<Matrix(const Vec2&)> value,
                                 std::function<MatrixGradient(const Vec2&)> gradient,
                                 std::function<MatrixHessian(const Vec2&)> hessian)
    : components_(components), value_(std::move(value)), gradient_(std::move(gradient)), hessian_(std::move(hessian)) {
  if (components_ < 1) fail(ErrorKind::InvalidArgument, "potential needs at least one component");
  if (!value_) fail(ErrorKind::InvalidArgument, "potential value callable is empty");
}

Matrix MatrixPotential::value(const Vec2& x) const { return value_(x); }

MatrixGradient MatrixPotential::gradient(const Vec2& x) const {
  if (gradient_) return gradient_(x);
  if (!fd_gradient_fallback) fail(ErrorKind::MissingDerivative, "potential gradient unavailable");
  MatrixGradient g;
  for (int k = 0; k < 2; ++k) {
    Vec2 e = Vec2::Zero();
    e[k] = fd_step;
    g[k] = (value_(x + e) - value_(x - e)) / (2.0 * fd_step);
  }
  return g;
}

MatrixHessian MatrixPotential::hessian(const Vec2& x) const {
  if (hessian_) return hessian_(x);
  if (!fd_hessian_fallback) fail(ErrorKind::MissingDerivative, "potential Hessian unavailable");
  MatrixHessian hs;
  const double h = fd_step;
  if (gradient_) {
    for (int l = 0; l < 2; ++l) {
      Vec2 e = Vec2::Zero();
      e[l] = h;
      const MatrixGradient gp = gradient_(x + e);
      const MatrixGradient gm = gradient_(x - e);
      for (int k = 0; k < 2; ++k) hs[k][l] = (gp[k] - gm[k]) / (2.0 * h);
    }
    for (int k = 0; k < 2; ++k) {
      for (int l = k + 1; l < 2; ++l) {
        hs[k][l] = 0.5 * (hs[k][l] + hs[l][k]);
        hs[l][k] = hs[k][l];
      }
    }
    return hs;
  }
  const Matrix v0 = value_(x);
  const Vec2 ex(h, 0.0);
  const Vec2 ey(0.0, h);
  hs[0][0] = (value_(x + ex) - 2.0 * v0 + value_(x - ex)) / (h * h);
  hs[1][1] = (value_(x + ey) - 2.0 * v0 + value_(x - ey)) / (h * h);
  hs[0][1] = (value_(x + ex + ey) - value_(x + ex - ey) - value_(x - ex + ey) + value_(x - ex - ey)) / (4.0 * h * h);
  hs[1][0] = hs[0][1];
  return hs;
}

MatrixPotential entrywise_potential(int components, std::vector<PotentialEntry> entries) {
  for (const auto& e : entries) {
    if (e.row < 0 || e.col < 0 || e.row >= components || e.col >= components) {
      fail(ErrorKind::InvalidArgument, "potential entry index out of range");
    }
  }
  bool all_grad = true;
  bool all_hess = true;
  for (const auto& e : entries) {
    all_grad = all_grad && static_cast<bool>(e.field.gradient);
    all_hess = all_hess && static_cast<bool>(e.field.hessian);
  }
  const int n = components;
  auto value = [n, entries](const Vec2& x) {
    Matrix v = Matrix::Zero(n, n);
    for (const auto& e : entries) {
      const double f = e.field.value(x);
      v(e.row, e.col) += f;
      if (e.row != e.col) v(e.col, e.row) += f;
    }
    return v;
  };
  std::function<MatrixGradient(const Vec2&)> gradient;
  if (all_grad) {
    gradient = [n, entries](const Vec2& x) {
      MatrixGradient g{Matrix::Zero(n, n), Matrix::Zero(n, n)};
      for (const auto& e : entries) {
        const Vec2 d = e.field.gradient(x);
        for (int k = 0; k < 2; ++k) {
          g[k](e.row, e.col) += d[k];
          if (e.row != e.col) g[k](e.col, e.row) += d[k];
        }
      }
      return g;
    };
  }
  std::function<MatrixHessian(const Vec2&)> hessian;
  if (all_hess) {
    hessian = [n, entries](const Vec2& x) {
      MatrixHessian hs;
      for (auto& row : hs) {
        for (auto& m : row) m = Matrix::Zero(n, n);
      }
      for (const auto& e : entries) {
        const Mat2 d = e.field.hessian(x);
        for (int k = 0; k < 2; ++k) {
          for (int l = 0; l < 2; ++l) {
            hs[k][l](e.row, e.col) += d(k, l);
            if (e.row != e.col) hs[k][l](e.col, e.row) += d(k, l);
          }
        }
      }
      return hs;
    };
  }
  return MatrixPotential(components, value, gradient, hessian);
}

MatrixPotential zero_potential(int components) { return entrywise_potential(components, {}); }

MatrixPotential scalar_potential(ScalarField field) { return entrywise_potential(1, {{0, 0, std::move(field)}}); }

RescaledPotential potential_t_derivatives(const MatrixPotential& potential, double t0, const Vec2& x,
                                          bool with_second) {
  if (!(t0 > 0.0)) fail(ErrorKind::InvalidArgument, "t0 must be positive");
  const Vec2 y = t0 * x;
  const Matrix v = potential.value(y);
  const MatrixGradient g = potential.gradient(y);
  const Matrix xgrad = x.x() * g[0] + x.y() * g[1];

  RescaledPotential out;
  out.value = t0 * t0 * v;
  out.first = 2.0 * t0 * v + t0 * t0 * xgrad;
  if (with_second) {
    const MatrixHessian hs = potential.hessian(y);
    Matrix xhx = x.x() * x.x() * hs[0][0] + x.x() * x.y() * (hs[0][1] + hs[1][0]) + x.y() * x.y() * hs[1][1];
    out.second = 2.0 * v + 4.0 * t0 * xgrad + t0 * t0 * xhx;
  }
  return out;
}

std::vector<RescaledPotential> potential_t_derivatives(const MatrixPotential& potential, double t0,
                                                       std::span<const Vec2> points, bool with_second) {
  std::vector<RescaledPotential> out;
  out.reserve(points.size());
  for (const auto& x : points) out.push_back(potential_t_derivatives(potential, t0, x, with_second));
  return out;
}

double symmetry_defect(const MatrixPotential& potential, std::span<const Vec2> points) {
  double d = 0.0;
  for (const auto& x : points) {
    const Matrix v = potential.value(x);
    d = std::max(d, (v - v.transpose()).cwiseAbs().maxCoeff());
  }
  return d;
}

}  // namespace eigenflow
