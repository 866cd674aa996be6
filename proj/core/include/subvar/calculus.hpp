#pragma once

#include "subvar/fd.hpp"
#include "subvar/manifold.hpp"

#include <algorithm>
#include <vector>

namespace subvar {

using FieldMat = Eigen::MatrixXd;
using FieldSetFn = std::function<FieldMat(const Point&)>;

// Derivative of f (scalar, vector or matrix valued) along the tangent vector v at
// x, taken along the model retraction curve s -> R(x, s v / |v|).
template <class F>
auto directional(const ManifoldModel& m, F&& f, const Point& x, const Vec& v, const FdSettings& fd) {
  using R = std::decay_t<decltype(f(x))>;
  const double nv = v.norm();
  R zero = f(x) * 0.0;
  if (nv == 0.0) return zero;
  const Vec u = v / nv;
  const double h = fd.h * std::max(1.0, x.cwiseAbs().maxCoeff());
  auto curve = [&](double s) -> R { return f(m.retract(x, s * u)); };
  return R(nth_derivative(curve, 0.0, 1, h, fd.richardson) * nv);
}

// Values and pairwise brackets of a finite set of vector fields at one point.
struct BracketTable {
  FieldMat values;                 // d x m
  std::vector<Vec> table;          // m*m brackets
  int m = 0;
  const Vec& operator()(int k, int l) const { return table[static_cast<size_t>(k * m + l)]; }
  Vec value(int k) const { return values.col(k); }
};

BracketTable bracket_table(const ManifoldModel& m, const FieldSetFn& fields, const Point& x, const FdSettings& fd);

// [X, Y](x) for two fields given by frame components.
Vec bracket(const ManifoldModel& m, const FieldFn& X, const FieldFn& Y, const Point& x, const FdSettings& fd);

// Max over frame triples of |sum_cyc [[F_mu, F_nu], F_rho]|.
double jacobi_residual(const ManifoldModel& m, const Point& x, const FdSettings& fd);

}  // namespace subvar
