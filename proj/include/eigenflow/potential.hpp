#pragma once

#include <array>
#include <functional>
#include <span>
#include <vector>

#include "eigenflow/types.hpp"

namespace eigenflow {

/// Scalar coefficient field with optional analytic derivatives.
struct ScalarField {
  std::function<double(const Vec2&)> value;
  std::function<Vec2(const Vec2&)> gradient;
  std::function<Mat2(const Vec2&)> hessian;
};

ScalarField constant_field(double c);
/// a . x
ScalarField linear_field(const Vec2& a);
/// x^T Q x (Q symmetrized).
ScalarField quadratic_field(const Mat2& q);
/// amplitude * exp(-|x - center|^2 / (2 width^2))
ScalarField gaussian_field(double amplitude, const Vec2& center, double width);

struct Monomial {
  int px = 0;
  int py = 0;
  double coefficient = 0.0;
};
/// Sum of c * x^px * y^py.
ScalarField polynomial_field(std::vector<Monomial> terms);

ScalarField sum_fields(std::vector<ScalarField> fields);

using MatrixGradient = std::array<Matrix, 2>;
using MatrixHessian = std::array<std::array<Matrix, 2>, 2>;

/// x -> symmetric N x N matrix V(x), with optional analytic gradient and
/// Hessian. Missing derivatives are synthesized by central differences
/// (step `fd_step`) when the matching fallback flag is set.
class MatrixPotential {
 public:
  MatrixPotential() = default;
  MatrixPotential(int components, std::function<Matrix(const Vec2&)> value,
                  std::function<MatrixGradient(const Vec2&)> gradient = {},
                  std::function<MatrixHessian(const Vec2&)> hessian = {});

  int components() const { return components_; }
  Matrix value(const Vec2& x) const;
  MatrixGradient gradient(const Vec2& x) const;
  MatrixHessian hessian(const Vec2& x) const;

  bool has_analytic_gradient() const { return static_cast<bool>(gradient_); }
  bool has_analytic_hessian() const { return static_cast<bool>(hessian_); }

  bool fd_gradient_fallback = true;
  bool fd_hessian_fallback = true;
  double fd_step = 1e-5;

 private:
  int components_ = 1;
  std::function<Matrix(const Vec2&)> value_;
  std::function<MatrixGradient(const Vec2&)> gradient_;
  std::function<MatrixHessian(const Vec2&)> hessian_;
};

/// Builds an N x N potential from scalar entries; entry (i, j) is mirrored
/// to (j, i). Unlisted entries are zero.
struct PotentialEntry {
  int row = 0;
  int col = 0;
  ScalarField field;
};
MatrixPotential entrywise_potential(int components, std::vector<PotentialEntry> entries);

MatrixPotential zero_potential(int components = 1);
MatrixPotential scalar_potential(ScalarField field);

/// V^t(x) = t^2 V(tx) and its first two t-derivatives at one point.
struct RescaledPotential {
  Matrix value;
  Matrix first;
  Matrix second;
};

/// Evaluates V^{t0}, Vdot and Vddot at every point:
///   Vdot  = 2 t0 V(t0 x) + t0^2 x.gradV(t0 x)
///   Vddot = 2 V(t0 x) + 4 t0 x.gradV(t0 x) + t0^2 x^T HessV(t0 x) x
/// The second derivative is skipped (left empty) when `with_second` is false.
std::vector<RescaledPotential> potential_t_derivatives(const MatrixPotential& potential, double t0,
                                                       std::span<const Vec2> points, bool with_second = true);

RescaledPotential potential_t_derivatives(const MatrixPotential& potential, double t0, const Vec2& x,
                                          bool with_second = true);

/// Max over sample points of the symmetry defect |V - V^T|_max.
double symmetry_defect(const MatrixPotential& potential, std::span<const Vec2> points);

}  // namespace eigenflow
