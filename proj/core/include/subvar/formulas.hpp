#pragma once

#include "subvar/variation.hpp"

#include <string>
#include <vector>

namespace subvar {

enum class PlaneKind { Vertizontal, Horizontal, Pairing };
const char* to_string(PlaneKind k);

// What to differentiate. Indices are 0-based horizontal frame indices.
//  vertizontal: sec(P_H W_i, U)
//  horizontal:  sec(P_H W_i, P_H W_j)
//  pairing:     g_t(A_{P_H W_i} U, A_{P_H W_j} U2)
// A non-empty rotation (p x p, orthogonal) replaces W_i by Z_i = sum_j a_ij W_j.
struct DerivativeRequest {
  PlaneKind kind = PlaneKind::Vertizontal;
  int order = 1;
  int i = 0, j = 1;
  Vec U, U2;      // vertical, n components in the E_a frame
  Mat rotation;   // empty = identity
  double t = 0.0;
  std::string describe() const;
};

// Brackets of the moving horizontal frame L_i = P_H^t pi^*W_i and of the
// vertical data V_i (and optionally dV_i/dt) at one point and time.
struct BracketData {
  int n = 0, p = 0, d = 0;
  Mat g;       // g_t at x
  Mat L;       // d x p
  Mat V;       // d x p (vertical rows only nonzero)
  Mat dV;      // d x p, empty unless requested
  std::vector<Vec> LL, Q, VV, dQ, dVV;  // index i*p + j; Q = [V_i,L_j] + [L_i,V_j]
  std::vector<double> gN;               // (i*p + j)*p + k : g_t([L_i,L_j], L_k)

  const Vec& ll(int i, int j) const { return LL[static_cast<size_t>(i * p + j)]; }
  const Vec& q(int i, int j) const { return Q[static_cast<size_t>(i * p + j)]; }
  const Vec& vv(int i, int j) const { return VV[static_cast<size_t>(i * p + j)]; }
  const Vec& dq(int i, int j) const { return dQ[static_cast<size_t>(i * p + j)]; }
  double gn(int i, int j, int k) const { return gN[static_cast<size_t>((i * p + j) * p + k)]; }
  double dot(const Vec& a, const Vec& b) const { return a.dot(g * b); }
  Vec pv(const Vec& w) const;  // P_V^t w

  // Shorthand scalars used throughout:
  //  c(i,j,U) = g([L_i,L_j], U)
  //  e(i,j,U) = sum_k gN(i,j,k) g(V_k,U) - g(Q(i,j), U)
  //  v(i,j,U) = g([V_i,V_j], U)
  //  w(i,j,U) = sum_k gN(i,j,k) g(dV_k,U) - g(dQ(i,j), U)
  double c(int i, int j, const Vec& U) const { return dot(ll(i, j), U); }
  double e(int i, int j, const Vec& U) const;
  double v(int i, int j, const Vec& U) const { return dot(vv(i, j), U); }
  double w(int i, int j, const Vec& U) const;
};

BracketData bracket_data(const VariationEngine& eng, const Point& x, double t, bool with_dt, FdSettings fd = {});

// Lemma-level first derivatives (vectors in frame components):
//  2 d/dt A_{L_i} L_j and 2 d/dt A_{L_i} U.
Vec dA_horizontal(const BracketData& b, int i, int j);
Vec dA_vertical(const BracketData& b, int i, const Vec& U);

// Closed forms for constant V (orders 1..5, order 5 is 0). U is a d-vector.
double pairing_derivative(const BracketData& b, int order, int i, int l, const Vec& U1, const Vec& U2);
double vertizontal_derivative(const BracketData& b, int order, int i, const Vec& U);
double horizontal_derivative(const BracketData& b, int order, int i, int j);
// The same second horizontal derivative written as -3/2 sum_a (e_a^2 + 2 c_a v_a).
double horizontal_second_compact(const BracketData& b, int i, int j);

// Second derivatives carrying the dV/dt terms (needs bracket_data(..., with_dt = true)).
double vertizontal_second_general(const BracketData& b, int i, const Vec& U);
double horizontal_second_general(const BracketData& b, int i, int j);
double pairing_second_general(const BracketData& b, int i, int l, const Vec& U1, const Vec& U2);

// Rotated directions Z_i = sum a_ij W_j, xi_i = sum a_ij V_j (orders 1, 2).
// The vertizontal coefficients printed in the source of these identities are
// four times too large; printed_coefficients = true reproduces them verbatim.
double rotated_vertizontal(const BracketData& b, const Mat& a, int order, int i, const Vec& U,
                           bool printed_coefficients = false);
double rotated_horizontal(const BracketData& b, const Mat& a, int order, int i, int j);

// Evaluate the closed form for a request (dispatches on kind, rotation, dt data).
double closed_form(const VariationEngine& eng, const Point& x, const DerivativeRequest& req, FdSettings fd = {});

// Independent quantity: O'Neill curvature / pairing of the evolved metric at time s.
double plane_quantity(const VariationEngine& eng, const Point& x, const DerivativeRequest& req, double s,
                      FdSettings fd = {});

struct ComparisonReport {
  std::string request;
  double closed_form = 0.0;
  double fd = 0.0;
  double step = 0.0;
  int richardson = 1;
  double abs_residual = 0.0;
  double rel_residual = 0.0;  // |cf - fd| / max(1, |cf|)
  double tolerance = 0.0;
  bool pass = false;
};

// Default t-steps: 1e-2 for orders 1-2, 5e-2 for orders 3-5.
double default_t_step(int order);

// Order-k central difference of plane_quantity vs closed_form. For order 5 the
// closed form is 0 and the verdict uses the absolute FD value.
ComparisonReport fd_compare(const VariationEngine& eng, const Point& x, const DerivativeRequest& req, double tol,
                            double t_window = 0.0, FdSettings fd = {});

struct PolyFit {
  int degree = 4;
  int points = 0;
  double residual = 0.0;
  std::vector<double> coeffs;  // ascending powers
};

// Least-squares degree-4 fit of plane_quantity(t) on `points` equispaced t in [-half, half].
PolyFit polynomial_fit_check(const VariationEngine& eng, const Point& x, const DerivativeRequest& req,
                             double half = 0.5, int points = 13, FdSettings fd = {});

std::string comparison_csv_header();
std::string comparison_csv_row(const std::string& suite, const std::string& example, const ComparisonReport& r);

}  // namespace subvar
