#pragma once

#include "subvar/calculus.hpp"

#include <vector>

namespace subvar {

// Levi-Civita data of a metric given by its coefficients g_{mu nu}(x) in the
// model frame. Everything is computed at one point on demand; nothing is cached.
class FrameGeometry {
 public:
  FrameGeometry(ModelPtr model, MetricFn metric, FdSettings fd = {});
  virtual ~FrameGeometry() = default;

  const ManifoldModel& model() const { return *model_; }
  const ModelPtr& model_ptr() const { return model_; }
  const FdSettings& fd() const { return fd_; }
  int dim() const { return model_->dim(); }

  Mat metric(const Point& x) const;
  double inner(const Mat& g, const Vec& X, const Vec& Y) const { return X.dot(g * Y); }

  // gamma[mu] column nu holds the components of nabla_{F_mu} F_nu.
  struct Connection {
    Mat g;
    Brackets c;
    std::vector<Mat> gamma;
    // nabla_X Y for constant-component extensions of X and Y.
    Vec apply(const Vec& X, const Vec& Y) const;
  };
  Connection connection(const Point& x) const;

  // nabla_X Y for fields in frame components.
  Vec covariant(const Point& x, const FieldFn& X, const FieldFn& Y) const;
  Vec covariant(const Point& x, const Connection& conn, const Vec& X, const FieldFn& Y) const;

  // Full curvature: r[mu * d + nu] column rho = R(F_mu, F_nu) F_rho, with
  // R(X,Y) = nabla_X nabla_Y - nabla_Y nabla_X - nabla_[X,Y].
  std::vector<Mat> riemann(const Point& x) const;
  static Vec riemann_apply(const std::vector<Mat>& r, const Vec& X, const Vec& Y, const Vec& Z);
  // g(R(X,Y)Y, X) / |X ^ Y|^2 from the full curvature tensor.
  double sectional(const Point& x, const Vec& X, const Vec& Y) const;
  double sectional(const Mat& g, const std::vector<Mat>& r, const Vec& X, const Vec& Y) const;

  // |X g(Y,Z) - g(nabla_X Y, Z) - g(Y, nabla_X Z)| for constant-component fields.
  double compatibility_residual(const Point& x, const Vec& X, const Vec& Y, const Vec& Z) const;
  // |nabla_X Y - nabla_Y X - [X,Y]|.
  double torsion_residual(const Point& x, const Vec& X, const Vec& Y) const;

 protected:
  ModelPtr model_;
  MetricFn metric_;
  FdSettings fd_;
};

enum class Part { Vertical, Horizontal };

// Riemannian submersion view: the first n frame fields span the vertical
// distribution and g_ab = delta_ab. The horizontal space is the g-orthogonal
// complement, spanned by H_i = e~_i - sum_a g_{a i} E_a.
class SubmersionGeometry : public FrameGeometry {
 public:
  SubmersionGeometry(ModelPtr model, MetricFn metric, FdSettings fd = {});

  int n() const { return model_->n(); }
  int p() const { return model_->p(); }

  // d x p matrix with the fields H_i as columns.
  Mat horizontal_fields(const Mat& g) const;
  Mat horizontal_fields(const Point& x) const { return horizontal_fields(metric(x)); }
  // P_V v = sum_a g(v, E_a) E_a, P_H v = v - P_V v. Throws MetricDegeneracy if g is not positive definite.
  Vec project(const Mat& g, const Vec& v, Part part) const;

  // Pointwise O'Neill data: brackets of the H_i and the table A_{H_i} H_j.
  struct ONeill {
    Mat g;
    Mat H;           // d x p
    Mat Hgram_inv;   // inverse Gram matrix of the H_i
    BracketTable hb;
    std::vector<Vec> a;  // a[i * p + j] = A_{H_i} H_j = 1/2 P_V [H_i, H_j]
  };
  ONeill oneill(const Point& x) const;

  // A_E F for arbitrary tangent vectors (A_E = A_{P_H E}).
  Vec A(const ONeill& o, const Vec& E, const Vec& F) const;
  // Coefficients of a horizontal vector in the H basis.
  Vec h_coeffs(const ONeill& o, const Vec& X) const;

  // O'Neill sectional curvatures. base_curvature is sec_N of the base plane.
  double sec_vertizontal(const ONeill& o, const Vec& X, const Vec& U) const;
  double sec_horizontal(const ONeill& o, const Vec& X, const Vec& Y, double base_curvature) const;
  // (nabla_Z A)_X Y evaluated through constant-coefficient extensions of X, Y in the
  // H basis (horizontal parts) and in the E basis (vertical parts).
  Vec nabla_A(const Point& x, const Vec& Z, const Vec& X, const Vec& Y) const;
  // Plane spanned by X and cos(theta) Y + sin(theta) U; X, Y horizontal, U vertical.
  double sec_general(const Point& x, const Vec& X, const Vec& Y, double theta, const Vec& U,
                     double base_curvature) const;

  // A_E F = P_H nabla_{P_H E} P_V F + P_V nabla_{P_H E} P_H F from the connection.
  Vec A_connection(const Point& x, const Connection& conn, const Vec& E, const Vec& F) const;
  // max |P_H nabla_{E_a} E_b| over vertical frame pairs.
  double totally_geodesic_residual(const Point& x) const;
  // (L_K g)(X, Y) = K g(X,Y) - g([K,X],Y) - g(X,[K,Y]) for fields in frame components.
  double killing_defect(const Point& x, const FieldFn& K, const FieldFn& X, const FieldFn& Y) const;
};

// Orthonormalize (in argument order) a pair of vectors; throws DegeneratePlane.
void gram_schmidt(const Mat& g, Vec& X, Vec& Y);

}  // namespace subvar
