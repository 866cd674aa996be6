#pragma once

#include "subvar/manifold.hpp"
#include "subvar/quaternion.hpp"

namespace subvar {

// Unit tangent frame at y on the unit sphere S^m in R^{m+1}, obtained by
// parallel transport of e_1..e_m from y0 = e_0 along the minimizing geodesic.
// Columns are Euclidean unit vectors; undefined at y = -y0.
Eigen::MatrixXd sphere_parallel_frame(const Eigen::VectorXd& y);
// Point at polar angle theta from e_0 in the direction dir (unit, orthogonal to e_0).
Eigen::VectorXd sphere_cap_point(double theta, const Eigen::VectorXd& dir);
// Uniform-ish unit quaternion from three unit-cube coordinates (Shoemake).
quat::Q unit_quaternion(double u1, double u2, double u3);

// S^3 -> S^2(1/2), x -> x i x^-1, frame E1 = x i, e~2 = x j, e~3 = x k.
// The base frame W_i is the parallel frame from y0 = i scaled to g_N-unit length,
// so its lifts rotate against e~_i: base_lift is a point-dependent rotation.
class HopfS3Model : public LieFrameModel {
 public:
  HopfS3Model();
  Vec project(const Point& x) const override;  // unit vector in R^3 (pure quaternion)
  Mat base_lift(const Point& x) const override;
  Point sample(const std::vector<double>& u) const override;
  // Frame components (e~ part) of the horizontal lift of a base tangent vector w
  // given in the ambient R^3 of the unit S^2.
  Eigen::Vector2d lift(const Point& x, const Eigen::Vector3d& w) const;
  // Base frame W_i at pi(x), ambient R^3 vectors (Euclidean length 2).
  Eigen::MatrixXd base_frame(const Vec& y) const;
  Point section(const Eigen::Vector3d& y) const;
  double cap_angle = 1.2;
};

// R^2 x S^1 with coordinates (theta, x, y) and the coordinate frame.
class ProductR2S1Model : public RepresentedModel {
 public:
  ProductR2S1Model();
  Vec project(const Point& x) const override;  // (x, y)
  Point sample(const std::vector<double>& u) const override;
};

// Heisenberg group in coordinates (theta, x, y) over the flat plane, frame
// E1 = d_theta, e2 = d_x, e3 = d_y - 2x d_theta, so [e2, e3] = -2 E1. Sasaki at g0.
class HeisenbergModel : public RepresentedModel {
 public:
  HeisenbergModel();
  Vec project(const Point& x) const override;  // (x, y)
  Point sample(const std::vector<double>& u) const override;
};

// S^2 x S^1 with coordinates (psi, theta, phi), frame d_psi, d_theta, (1/sin theta) d_phi.
class ProductS2S1Model : public RepresentedModel {
 public:
  ProductS2S1Model();
  Vec project(const Point& x) const override;  // (theta, phi)
  Point sample(const std::vector<double>& u) const override;
};

// S^3 x S^1, frame (d_angle ; x i, x j, x k). Point layout: (q0..q3, angle).
class ProductS3S1Model : public LieFrameModel {
 public:
  ProductS3S1Model();
  Vec project(const Point& x) const override;
  Point sample(const std::vector<double>& u) const override;
};

// S^3 x S^3 -> S^3 projection to the first factor. Vertical frame: left-invariant
// fields of the second factor; horizontal: left-invariant fields of the first.
class S3xS3Model : public LieFrameModel {
 public:
  S3xS3Model();
  Vec project(const Point& x) const override;
  Point sample(const std::vector<double>& u) const override;
};

// S^7 in R^8 = H^2 over S^4(1/2), pi(q1, q2) = (|q1|^2 - |q2|^2, 2 q1 conj(q2)).
// Vertical frame E_a = x e_a (right multiplication, fundamental fields of the
// right S^3 action); horizontal frame = basic lifts of the parallel frame of S^4.
class HopfS7Model : public RepresentedModel {
 public:
  explicit HopfS7Model(std::string name = "hopf_s7");
  Vec project(const Point& x) const override;  // unit vector in R^5
  Point sample(const std::vector<double>& u) const override;
  Point fiber_move(const Point& x, const Vec& s) const override;

  static Eigen::Matrix<double, 5, 8> jacobian(const Eigen::Matrix<double, 8, 1>& x);
  // Horizontal lift (ambient R^8) of a base vector w (ambient R^5).
  static Eigen::Matrix<double, 8, 1> lift(const Eigen::Matrix<double, 8, 1>& x, const Eigen::Matrix<double, 5, 1>& w);
  static Eigen::MatrixXd frame(const Point& x);
  // Vertical components of x -> x conj(q1) e_a q1 / |q1|^2 = (e_a q1, q2 conj(q1) e_a q1 / |q1|^2).
  // It is equivariant under the right S^3 action, so it commutes with every E_b.
  // Singular where q1 = 0.
  static Eigen::Vector3d left_invariant(const Point& x, int a);
  Point section(const Eigen::VectorXd& y) const;
  double cap_angle = 1.0;
};

}  // namespace subvar
