#pragma once

#include "subvar/types.hpp"

#include <array>
#include <cmath>
#include <span>

namespace subvar {

struct FdSettings {
  double h = 1e-3;
  bool richardson = true;
};

namespace detail {

struct Stencil {
  int half_width;
  std::array<double, 7> coeff;  // offsets -3..3
};

inline const Stencil& central_stencil(int order) {
  static const std::array<Stencil, 6> table = {{
      {0, {0, 0, 0, 1, 0, 0, 0}},
      {1, {0, 0, -0.5, 0, 0.5, 0, 0}},
      {1, {0, 0, 1, -2, 1, 0, 0}},
      {2, {0, -0.5, 1, 0, -1, 0.5, 0}},
      {2, {0, 1, -4, 6, -4, 1, 0}},
      {3, {-0.5, 2, -2.5, 0, 2.5, -2, 0.5}},
  }};
  if (order < 0 || order > 5)
    throw GeometryError(ErrorKind::UnsupportedOrder, "finite-difference order " + std::to_string(order));
  return table[order];
}

template <class F>
auto apply_stencil(F&& f, double t, int order, double h) {
  const Stencil& s = central_stencil(order);
  using R = std::decay_t<decltype(f(t))>;
  R acc = f(t) * 0.0;
  for (int k = -s.half_width; k <= s.half_width; ++k) {
    const double c = s.coeff[k + 3];
    if (c != 0.0) acc = acc + c * f(t + k * h);
  }
  return R(acc * (1.0 / std::pow(h, order)));
}

}  // namespace detail

// Central difference of the given order (second-order accurate stencils),
// optionally with one Richardson level using steps h and h/2.
template <class F>
auto nth_derivative(F&& f, double t, int order, double h, bool richardson = true) {
  auto coarse = detail::apply_stencil(f, t, order, h);
  if (!richardson) return coarse;
  auto fine = detail::apply_stencil(f, t, order, 0.5 * h);
  using R = decltype(coarse);
  return R((4.0 * fine - coarse) * (1.0 / 3.0));
}

}  // namespace subvar
