#pragma once

#include "subvar/variation.hpp"

#include <vector>

namespace subvar {

// Forms are stored by their values on the model frame F_mu:
//   1-form: w(mu) = w(F_mu);  2-form: W(mu, nu) = W(F_mu, F_nu).
// Exterior derivative and wedge use the half-normalized convention
//   dw(X, Y) = 1/2 (X w(Y) - Y w(X) - w([X, Y])),
//   (a ^ b)(X, Y) = 1/2 (a(X) b(Y) - a(Y) b(X)).
using OneFormFn = std::function<Vec(const Point&)>;
using TwoFormFn = std::function<Mat(const Point&)>;

Mat exterior_d(const ManifoldModel& m, const OneFormFn& w, const Point& x, const FdSettings& fd);
// Cyclic sum of X W(Y,Z) - W([X,Y],Z) over frame triples; (mu*d + nu)*d + rho.
// Normalization is irrelevant for the only use (dd = 0).
std::vector<double> exterior_d2(const ManifoldModel& m, const TwoFormFn& W, const Point& x, const FdSettings& fd);
double dd_residual(const ManifoldModel& m, const OneFormFn& w, const Point& x, const FdSettings& fd);

Mat wedge(const Vec& a, const Vec& b);
inline Vec interior(const Mat& W, const Vec& X) { return W.transpose() * X; }
// <a, b>_H = sum_i a(H_i) b(H_i) over a g-orthonormal horizontal frame given by columns.
inline double inner_h(const Vec& a, const Vec& b, const Mat& H) { return (H.transpose() * a).dot(H.transpose() * b); }

// Basicness of w for the vertical frame E_1..E_n: max |w(E_a)| and max |dw(E_a, .)|.
struct BasicnessReport {
  double interior = 0.0;
  double interior_d = 0.0;
  double max() const { return std::max(interior, interior_d); }
};
BasicnessReport basicness(const ManifoldModel& m, const OneFormFn& w, const Point& x, const FdSettings& fd);

// omega^a_t(F_mu) = B_t(E_a, F_mu). Column a of the returned matrix is omega^a.
Mat extract_forms(const VariationEngine& eng, const Point& x, double t);
OneFormFn extracted_form(const VariationEngine& eng, int a, double t);
// Pullback of a base 1-form given by its values alpha(W_i) on the base frame:
// components [0; R alpha_W] in the adapted frame.
OneFormFn pullback_form(ModelPtr model, std::function<Vec(const Point&)> alpha_w);

// --- base side, expressed through the lifted base frame pi^*W_i at g0 ---------------

// Christoffel table of the base frame: gamma(k, i, m) = g_N(nabla_{W_k} W_i, W_m), index (k*p + i)*p + m.
std::vector<double> base_connection(const ManifoldModel& m, const Point& x, const FdSettings& fd);
// Base 2-form values beta(W_i, W_j) of a basic 2-form given on the adapted frame.
Mat base_components(const ManifoldModel& m, const Point& x, const Mat& W);
// (nabla^N_{W_k} d alpha)(W_i, W_j) for alpha given through its pullback; index (k*p + i)*p + j.
std::vector<double> base_nabla_dalpha(const ManifoldModel& m, const OneFormFn& pullback, const Point& x,
                                      const FdSettings& fd);
// delta_N alpha = -sum_i (nabla^N_{W_i} alpha)(W_i).
double base_codifferential(const ManifoldModel& m, const OneFormFn& pullback, const Point& x, const FdSettings& fd);

// delta_0 B_0 = -sum_mu (nabla^0_{F_mu} B_0)(F_mu, .) from the variation at t = 0, together with
// the two equivalent conditions: delta_N alpha^a and sum_a omega^a(A_X E_a).
struct Delta0Report {
  Vec direct;           // delta_0 B_0 on the frame
  Vec delta_n;          // delta_N alpha^a per a
  Vec a_condition;      // sum_a omega^a(A_{pi^*W_i} E_a) per i
  double consistency = 0.0;  // |direct(E_a) - delta_n(a)| and |direct(X) + 2 a_condition(X)|
  double basicness = 0.0;
  bool is_zero = false;
};
Delta0Report delta0B0_check(const VariationEngine& eng, const Point& x, double tol, FdSettings fd = {});

}  // namespace subvar
