#pragma once

#include "subvar/forms.hpp"

#include <string>
#include <vector>

namespace subvar {

// Variation of a circle bundle (n = 1) by a base 1-form alpha: V_i = (alpha(W_i) o pi) U.
// alpha_w returns alpha(W_i) at pi(x).
VariationSpec circle_variation(std::string name, std::function<Vec(const Point&)> alpha_w);

// --- form-based derivatives of sec(P_H^t pi^*W_i, U) -------------------------------

struct FormDerivatives {
  double order1 = 0.0;          // 2 <i_Z dU^flat, i_Z d pi^*alpha>_H
  double order2 = 0.0;          // 2 |i_Z d alpha|^2
  double order3 = 0.0;          // identically 0 for basic alpha
  double order1_printed = 0.0;  // -4 <., .>_H as published
  double order2_printed = 0.0;  // 8 |i_Z d alpha|^2 as published
  double iota_dalpha_sq = 0.0;  // |i_Z d alpha|^2
  Mat dalpha;                   // base components d alpha(W_i, W_j)
};
FormDerivatives form_based_sec_derivatives(const VariationEngine& eng, const Point& x, int i, double t,
                                           FdSettings fd = {});

// --- positivity of products -----------------------------------------------------

struct PositivitySettings {
  std::vector<double> ts;
  int thetas = 64;  // uniform on [0, pi)
  int planes = 8;   // Halton directions in the horizontal space
};

struct SweepRow {
  int point_id = 0;
  double t = 0.0;
  double theta = 0.0;
  int plane_id = 0;
  double sec = 0.0;
  bool min_flag = false;
};

struct PositivityReport {
  std::vector<SweepRow> rows;
  std::vector<double> ts;
  std::vector<double> min_sec;             // per t, over points, planes and theta
  std::vector<double> max_sec;
  std::vector<double> leading_deviation;   // max |sec - leading law| per t
  std::vector<double> min_horizontal;      // per t
  std::vector<double> max_vertizontal;     // per t
  double nondegeneracy = 0.0;              // min |det d alpha| over points
  bool nondegenerate = false;
  double nabla_condition = 0.0;            // max |(nabla^N_X d alpha)(X, Y)| symmetrized
  double t_x = 0.0;                        // first positive t with min sec <= 0 (0 if none)
  bool positive_for_all_positive_t = false;
  bool mixed_sign = false;
  std::string csv() const;                 // t,theta,plane_id,sec plus point id and min flag
};

PositivityReport product_positivity_sweep(const VariationEngine& eng, const std::vector<Point>& points,
                                          const PositivitySettings& s, FdSettings fd = {});

// --- contact structures -----------------------------------------------------------

enum class ContactLevel { ContactMetric, KContact, Sasaki };
const char* to_string(ContactLevel l);

struct ContactReport {
  double d_eta = 0.0;        // d eta(X, Y) - g(X, phi Y)
  double iota_u = 0.0;       // i_U d eta
  double phi_squared = 0.0;  // phi^2 X + X - eta(X) U
  double isometry = 0.0;     // g(phi X, phi Y) - g(X, Y) + eta(X) eta(Y)
  double killing = 0.0;      // (L_U g)(F_mu, F_nu)
  double sasaki = 0.0;       // (nabla_X phi) Y - g(X, Y) U + eta(Y) X
  double level_residual(ContactLevel l) const;
};
ContactReport contact_check(const VariationEngine& eng, const Point& x, double t, ContactLevel level,
                            FdSettings fd = {});

// d^2/dt^2 of g_t(A_{L_i} U, A_{L_i} U) - 1 at t = 0, against 2|i dalpha|^2 and the printed 8|i dalpha|^2.
struct IsometryDefect {
  double fd_second = 0.0;
  double corrected = 0.0;
  double printed = 0.0;
};
IsometryDefect a_isometry_defect(const VariationEngine& eng, const Point& x, int i, FdSettings fd = {});

// --- weak contact metric conditions ---------------------------------------------------

struct WeakCmsReport {
  // printed condition sets at t = 0 data, max |value| over base frame triples
  double weakcms0 = 0.0, weakcms1 = 0.0, weakcms2 = 0.0;
  double rweak0 = 0.0, rweak1 = 0.0, rweak2 = 0.0, rweak3 = 0.0;
  // direct evaluation on evolved metrics, max over sampled t and frame triples
  double nabla_q = 0.0;       // g_t((nabla_Z Q~) X, Y)
  double curvature = 0.0;     // g_t(R(Q~ X, Y) Z, U)
  double vertical_part = 0.0; // g_t((nabla_X Q~) Y, U), reported only
  std::vector<double> ts;
  double min_fatness = 0.0;   // smallest eigenvalue of g_t(A_{L_i}U, A_{L_j}U)
  double printed_max() const;
  double direct_max() const { return std::max(nabla_q, curvature); }
};
WeakCmsReport weak_cms_check(const VariationEngine& eng, const Point& x, const std::vector<double>& ts,
                             FdSettings fd = {});

// --- variations induced by Lie derivatives --------------------------------------------

struct LieAlphaReport {
  Vec alpha;                  // (L_{pi^*Z} g0)(U, F_mu)
  double basicness = 0.0;
  double killing_on_base = 0.0;   // max |(L_Z g_N)(W_i, W_j)|
  double d_phi_z = 0.0;           // max |d(phi_0 Z)^flat| on horizontal pairs
  bool killing = false;
  bool closed = false;
};
// Z is the horizontal lift pi^*Z in frame components.
LieAlphaReport lie_variation_alpha(const ModelPtr& m, const FieldFn& Z, const Point& x, double tol,
                                   FdSettings fd = {});

// --- invariants ----------------------------------------------------------------------

// Basicness of the extracted alpha_t.
double extracted_basicness(const VariationEngine& eng, const Point& x, double t, FdSettings fd = {});
// Max over i, j of the fiber spread of g_t(A_{L_i} U, L_j).
double projectability_residual(const VariationEngine& eng, const Point& x, double t, int samples,
                               FdSettings fd = {});
// Max |U g_t(nabla_{L_i} L_j, L_k)|.
double fiber_constancy_residual(const VariationEngine& eng, const Point& x, double t, FdSettings fd = {});
// Max |P_V [L_i, L_j]|.
double integrability_residual(const VariationEngine& eng, const Point& x, double t, FdSettings fd = {});

}  // namespace subvar
