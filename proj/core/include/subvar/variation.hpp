#pragma once

#include "subvar/geometry.hpp"

#include <string>
#include <vector>

namespace subvar {

// Column i holds V_i in vertical frame components, i.e. entry (a, i) = g0(V_i, E_a).
using VerticalFn = std::function<Mat(const Point&, double)>;

struct VariationSpec {
  std::string name;
  VerticalFn vertical;
  bool time_dependent = false;
  VerticalFn vertical_dt;  // optional d/dt V_i, used by the general second-order formulas
};

VariationSpec zero_variation(int n, int p);
// Constant vertical data V (n x p) independent of the point.
VariationSpec constant_variation(std::string name, const Mat& V);

struct IntegratorSettings {
  int steps = 200;           // RK4 steps for pointwise metric(x, t) evaluations
  double cond_limit = 1e8;   // truncation threshold for cond(G)
};

// Coefficient-level ODE: X = g_VH (n x p), Y = g_HH (p x p),
// dX/dt = lambda G, dY/dt = (lambda G)^T X + X^T (lambda G), G = Y - X^T X.
struct MetricState {
  Mat X;
  Mat Y;
};

MetricState metric_ode_rhs(const Mat& lambda, const MetricState& s);
MetricState metric_ode_solve(const std::function<Mat(double)>& lambda, int n, int p, double t, int steps);
Mat assemble_metric(const MetricState& s);
// G = Y - X^T X.
inline Mat metric_G(const MetricState& s) { return s.Y - s.X.transpose() * s.X; }
MetricState split_metric(const Mat& g, int n);

struct TrajectorySample {
  double t = 0.0;
  Mat g;
  Mat b;  // stored right-hand side of the ODE, B_t = d/dt g_t
  double cond_G = 1.0;
};

struct MetricTrajectory {
  Point x;
  std::string spec;
  int n = 0, p = 0;
  double h = 0.0;
  std::vector<TrajectorySample> samples;  // ascending t, contains t = 0
  double eps_minus = 0.0, eps_plus = 0.0;  // first grid |t| where the run stopped (0 if never)
  bool truncated = false;

  double t_min() const { return samples.front().t; }
  double t_max() const { return samples.back().t; }
  // Cubic Hermite interpolation with the stored B_t; exact on grid points.
  Mat metric_at(double t) const;
  Mat b_at(double t) const;
  // Largest symmetric half-width covered by valid samples.
  double symmetric_eps() const;
  // Columns: t, g_{mu nu} upper triangle (row-major), cond_G, flags.
  std::string csv() const;
};

class VariationEngine {
 public:
  VariationEngine(ModelPtr model, VariationSpec spec, IntegratorSettings settings = {});

  const ManifoldModel& model() const { return *model_; }
  const ModelPtr& model_ptr() const { return model_; }
  const VariationSpec& spec() const { return spec_; }
  const IntegratorSettings& settings() const { return settings_; }
  int n() const { return model_->n(); }
  int p() const { return model_->p(); }

  // lambda_{a k} = sum_i V_{a i} R_{k i}, where pi^*W_i = sum_k R_{k i} e~_k.
  Mat lambda(const Point& x, double t) const;
  Mat vertical(const Point& x, double t) const { return spec_.vertical(x, t); }

  MetricState state(const Point& x, double t) const;
  Mat metric(const Point& x, double t) const;
  MetricFn metric_fn(double t) const;
  SubmersionGeometry geometry(double t, FdSettings fd = {}) const;

  // B_t = d/dt g_t from the ODE right-hand side.
  Mat b_tensor(const Point& x, double t) const;
  // B#_t u = sum_i g0(V_i, u) P_H^t pi^*W_i for vertical u.
  Vec bsharp(const Point& x, double t, const Vec& u) const;
  // Columns P_H^t pi^*W_i (d x p).
  Mat lifted_frame(const Point& x, double t) const;

  // RK4 run on [-t_span, t_span] with step h (default 1e-3 * t_span).
  MetricTrajectory evolve(const Point& x, double t_span, double h = 0.0) const;

 private:
  ModelPtr model_;
  VariationSpec spec_;
  IntegratorSettings settings_;
};

// --- invariant checks --------------------------------------------------------

struct InvariantReport {
  double vertical_block = 0.0;       // max |g_ab - delta_ab|
  double b_identity = 0.0;           // submersion-preservation identity with FD B_t
  double lift_orthonormality = 0.0;  // max |g_t(P_H W_i, P_H W_j) - delta_ij|
  double lift_derivative = 0.0;      // max |d/dt P_H W_i + V_i| (FD)
  double bsharp_raise = 0.0;         // max |g_t(B# u, w) - B_t(u, w)|
  double ode_consistency = 0.0;      // stored B vs FD of trajectory
  double max() const;
};

InvariantReport check_invariants(const VariationEngine& eng, const MetricTrajectory& traj);

// Frame covariance of the ODE under M = diag(Mv, Mh) in O(n) x O(p).
double frame_covariance_residual(const Mat& lambda, const Mat& Mv, const Mat& Mh, double t, int steps);

// max over sampled t of the P_H nabla residual on vertical pairs.
double totally_geodesic_residual(const VariationEngine& eng, const Point& x, const std::vector<double>& ts,
                                 FdSettings fd = {});

// max |(L_{V_i} g0)(E_a, E_b)| over vertical pairs: V_i restricted to fibers is Killing.
double fiber_killing_residual(const VariationEngine& eng, const Point& x, FdSettings fd = {});

// Killing defect of a vertical field K along the variation.
struct KillingDefectReport {
  Mat predicted;   // (i, a): g_t([K, V_i], E_a)
  Mat fd_first;    // (i, a): d/dt (L_K g_t)(P_H^t pi^*W_i, E_a)
  Mat fd_second;   // second derivative, expected 0 for constant V_i
  double initial_defect = 0.0;  // max |L_K g_0| over frame pairs
};
KillingDefectReport killing_defect_derivative(const VariationEngine& eng, const FieldFn& K, const Point& x, double t,
                                              FdSettings fd = {}, double t_step = 1e-2);

}  // namespace subvar
