#pragma once

#include "subvar/forms.hpp"
#include "subvar/models.hpp"

#include <string>
#include <vector>

namespace subvar {

// --- SU(2) bookkeeping ------------------------------------------------------------

// Levi-Civita symbol on {0,1,2}.
int levi_civita(int a, int b, int c);
// max |sum_a eps_bca eps_dea - (delta_bd delta_ce - delta_be delta_cd)|, exact integers.
int epsilon_identity_defect();
// max |[E_a, E_b] - 2 eps_abc E_c| over vertical pairs (needs n = 3).
double su2_bracket_residual(const ManifoldModel& m, const Point& x, FdSettings fd = {});

// --- fatness --------------------------------------------------------------------

// A plane direction: horizontal coefficients on the lifted frame, vertical coefficients on E_a.
struct PlaneDirection {
  Vec horizontal;  // p
  Vec vertical;    // n
};
std::vector<PlaneDirection> halton_directions(int n, int p, int count, int offset = 1);

struct ScanRow {
  int sample_id = 0;
  int direction_id = 0;
  double sec = 0.0;
  double t = 0.0;
};

struct FatnessScan {
  double t = 0.0;
  double min_sec = 0.0;
  std::vector<double> variance;  // per direction, over fiber samples
  double max_variance = 0.0;
  double totally_geodesic = 0.0;
  std::vector<ScanRow> rows;
  std::string csv() const;  // sample_id,direction_id,sec,t
};

// Fiber samples: x moved by fiber_move over a deterministic grid (n = 1) or Halton set.
std::vector<Point> fiber_samples(const ManifoldModel& m, const Point& x, int count);
FatnessScan fatness_scan(const VariationEngine& eng, const std::vector<Point>& fiber, double t,
                         const std::vector<PlaneDirection>& dirs, FdSettings fd = {});

// --- non-constant vertizontal curvature ------------------------------------------

enum class BumpCase { KillingSeed, BracketDirection };  // U = xi, or U = P_V[X, Y] / |.|
enum class SeedKind { Fundamental, LeftInvariant };
const char* to_string(BumpCase c);

// The base point is the pole y0 = e_0 of the sphere base, where the parallel base frame
// has vanishing brackets. f = offset + slope * y_{Y+1} / 2, so Y(f) = slope and W_j(f) = 0
// for the other directions at y0. rho is a quintic smoothstep in |y - y0|.
struct BumpConstruction {
  int x_dir = 0, y_dir = 1;
  int seed_axis = 0;
  SeedKind seed = SeedKind::Fundamental;
  BumpCase kase = BumpCase::KillingSeed;
  double slope = 2.0;
  double offset = 0.0;
  double inner = 0.3, outer = 0.9;
  bool cutoff = true;
};

struct BumpVariation {
  VariationSpec spec;
  Point center;                               // on the fiber over y0
  std::function<Vec(const Point&)> U;         // unit vertical field (n components)
  double hypothesis_variance = 0.0;
  std::vector<Point> fiber;                   // samples over y0
};

double bump_f(const BumpConstruction& b, const Vec& y);
double bump_rho(const BumpConstruction& b, const Vec& y);
// xi in vertical frame components at x.
Vec bump_seed(const ManifoldModel& m, const BumpConstruction& b, const Point& x);
Point pole_point(const ManifoldModel& m);

// Throws Infeasible when g0([X,Y],U) g0(xi,U) is constant along the fiber (variance <= threshold).
BumpVariation build_nonconstant_variation(const ModelPtr& model, const BumpConstruction& b, double threshold = 1e-6,
                                          int samples = 16, FdSettings fd = {});

// d/dt sec(P_H X, U) at t = 0 split as
//   1/2 f sum_j g([X, W_j], U) (L_xi g)(W_j, U)  +  1/2 g([X, Y], U) g(xi, U) Y(f),
// evaluated without rho (rho = 1 near the fiber over y0) and compared with the closed form.
// The published expression carries -1/2 on the first term; lie_term_printed keeps it.
// Away from y0 the base frame brackets add frame_term = 1/2 f g(xi,U) sum_j g([X,W_j],U) g([X,W_j],X),
// and the second term becomes a sum over all W_j(f).
struct FirstDerivativeTerms {
  double lie_term = 0.0;
  double lie_term_printed = 0.0;
  double bracket_term = 0.0;
  double frame_term = 0.0;
  double closed_form = 0.0;
  double total() const { return lie_term + bracket_term + frame_term; }
  double total_printed() const { return lie_term_printed + bracket_term + frame_term; }
};
FirstDerivativeTerms first_derivative_terms(const ModelPtr& model, const BumpConstruction& b, const Point& x,
                                            const Vec& U, FdSettings fd = {});

// --- homogeneous actions ----------------------------------------------------------

struct HomogeneousReport {
  double bracket = 0.0;           // max |[E_b, V_i]|
  double initial_killing = 0.0;   // max |L_{E_b} g_0|
  std::vector<double> ts;
  std::vector<double> killing;    // per t, max over b and frame pairs
  double killing_max = 0.0;
  double variance = 0.0;          // max fiber variance of vertizontal sec over ts
};
HomogeneousReport homogeneous_action_check(const VariationEngine& eng, const Point& x, const std::vector<double>& ts,
                                           const std::vector<Point>& fiber, const std::vector<PlaneDirection>& dirs,
                                           FdSettings fd = {});

// --- SU(2) structures along the variation -----------------------------------------

struct ThreeSasakiReport {
  double lemma = 0.0;            // |FD of 2 g_t(A L_l L_j, E_a) - printed right-hand side|, max over t
  double axioms = 0.0;           // horizontal almost contact 3-structure residuals, max over t
  double axiom_square = 0.0, axiom_isometry = 0.0, axiom_product = 0.0;
  Mat d2_fd, d2_corrected, d2_printed;  // per (i, l), summed over a at t = 0
  Mat d4_fd, d4_printed;                // sum over a of 4 d^4/dt^4 at t = 0
  double d2_residual = 0.0;      // max |d2_fd - d2_corrected|
  double d2_printed_residual = 0.0;
  double d4_residual = 0.0;      // max |d4_fd - d4_printed| / max(1, |d4_printed|)
  double d2_defect = 0.0;        // max |d2_corrected|
  double d4_defect = 0.0;        // max |d4_printed|
  bool closed = false, wedge_free = false, rank_le_one = false;
  double max_domega = 0.0, max_wedge = 0.0;
};
ThreeSasakiReport su2_3sasaki_check(const VariationEngine& eng, const Point& x, const std::vector<double>& ts,
                                    double tol = 1e-6, FdSettings fd = {});

// Base forms on the S^4 base of S^7 given by ambient gradients: omega^a(W_j) = <c_a, W_j(y)>.
VariationSpec s7_gradient_variation(std::string name, const Mat& coeffs);  // coeffs: 3 x 5
// General version: omega^a(W_j) = <C(y)_a, W_j(y)> with C(y) a 3 x 5 matrix valued function of y in R^5.
VariationSpec s7_form_variation(std::string name, std::function<Mat(const Vec&)> coeffs);

}  // namespace subvar
