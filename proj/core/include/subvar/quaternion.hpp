#pragma once

#include <Eigen/Dense>

#include <cmath>

namespace subvar::quat {

// Quaternions as (w, x, y, z).
using Q = Eigen::Vector4d;

inline Q make(double w, double x, double y, double z) { return Q(w, x, y, z); }
inline Q one() { return make(1, 0, 0, 0); }
// Imaginary units i, j, k for a = 0, 1, 2.
inline Q unit_imag(int a) {
  Q q = Q::Zero();
  q(a + 1) = 1.0;
  return q;
}

inline Q mul(const Q& p, const Q& q) {
  return make(p(0) * q(0) - p(1) * q(1) - p(2) * q(2) - p(3) * q(3),
              p(0) * q(1) + p(1) * q(0) + p(2) * q(3) - p(3) * q(2),
              p(0) * q(2) - p(1) * q(3) + p(2) * q(0) + p(3) * q(1),
              p(0) * q(3) + p(1) * q(2) - p(2) * q(1) + p(3) * q(0));
}

inline Q conj(const Q& q) { return make(q(0), -q(1), -q(2), -q(3)); }

// exp of the pure imaginary quaternion v = (v1, v2, v3).
inline Q exp_imag(const Eigen::Vector3d& v) {
  const double a = v.norm();
  if (a < 1e-300) return one();
  const double s = std::sin(a) / a;
  return make(std::cos(a), s * v(0), s * v(1), s * v(2));
}

inline Eigen::Vector3d imag(const Q& q) { return q.tail<3>(); }
inline Q pure(const Eigen::Vector3d& v) { return make(0, v(0), v(1), v(2)); }

}  // namespace subvar::quat
