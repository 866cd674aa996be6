#include "subvar/variation.hpp"

#include <cmath>
#include <cstdio>
#include <algorithm>
#include <limits>
#include <sstream>

namespace subvar {

VariationSpec zero_variation(int n, int p) {
  VariationSpec s;
  s.name = "zero";
  s.vertical = [n, p](const Point&, double) -> Mat { return Mat::Zero(n, p); };
  return s;
}

VariationSpec constant_variation(std::string name, const Mat& V) {
  VariationSpec s;
  s.name = std::move(name);
  s.vertical = [V](const Point&, double) -> Mat { return V; };
  return s;
}

MetricState metric_ode_rhs(const Mat& lambda, const MetricState& s) {
  const Mat B = lambda * metric_G(s);
  MetricState d;
  d.X = B;
  d.Y = B.transpose() * s.X + s.X.transpose() * B;
  return d;
}

MetricState metric_ode_solve(const std::function<Mat(double)>& lambda, int n, int p, double t, int steps) {
  MetricState s{Mat::Zero(n, p), Mat::Identity(p, p)};
  if (t == 0.0 || steps <= 0) return s;
  const double h = t / steps;
  auto axpy = [](const MetricState& a, double c, const MetricState& k) {
    return MetricState{a.X + c * k.X, a.Y + c * k.Y};
  };
  for (int k = 0; k < steps; ++k) {
    const double t0 = k * h;
    const Mat l0 = lambda(t0), lm = lambda(t0 + 0.5 * h), l1 = lambda(t0 + h);
    const MetricState k1 = metric_ode_rhs(l0, s);
    const MetricState k2 = metric_ode_rhs(lm, axpy(s, 0.5 * h, k1));
    const MetricState k3 = metric_ode_rhs(lm, axpy(s, 0.5 * h, k2));
    const MetricState k4 = metric_ode_rhs(l1, axpy(s, h, k3));
    s.X += (h / 6.0) * (k1.X + 2.0 * k2.X + 2.0 * k3.X + k4.X);
    s.Y += (h / 6.0) * (k1.Y + 2.0 * k2.Y + 2.0 * k3.Y + k4.Y);
    s.Y = 0.5 * (s.Y + s.Y.transpose()).eval();
  }
  return s;
}

Mat assemble_metric(const MetricState& s) {
  const int n = static_cast<int>(s.X.rows()), p = static_cast<int>(s.X.cols());
  Mat g(n + p, n + p);
  g.topLeftCorner(n, n).setIdentity();  // pinned, never integrated
  g.topRightCorner(n, p) = s.X;
  g.bottomLeftCorner(p, n) = s.X.transpose();
  g.bottomRightCorner(p, p) = s.Y;
  return g;
}

MetricState split_metric(const Mat& g, int n) {
  const int p = static_cast<int>(g.rows()) - n;
  return MetricState{g.topRightCorner(n, p), g.bottomRightCorner(p, p)};
}

namespace {

Mat assemble_b(const Mat& lambda, const MetricState& s) {
  const MetricState d = metric_ode_rhs(lambda, s);
  MetricState z{d.X, d.Y};
  Mat b = assemble_metric(z);
  b.topLeftCorner(s.X.rows(), s.X.rows()).setZero();
  return b;
}

double cond_of(const Mat& G) {
  Eigen::SelfAdjointEigenSolver<Mat> es(G, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().maxCoeff();
  if (lo <= 0.0) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

}  // namespace

// ---------------------------------------------------------------------------

Mat MetricTrajectory::metric_at(double t) const {
  if (samples.empty() || t < t_min() - 1e-12 || t > t_max() + 1e-12)
    throw GeometryError(ErrorKind::InvalidArgument, "t outside trajectory range");
  size_t k = 0;
  while (k + 1 < samples.size() && samples[k + 1].t <= t) ++k;
  if (k + 1 == samples.size() || samples[k].t == t) return samples[k].g;
  const auto& a = samples[k];
  const auto& b = samples[k + 1];
  const double dt = b.t - a.t, s = (t - a.t) / dt;
  const double h00 = 2 * s * s * s - 3 * s * s + 1, h10 = s * s * s - 2 * s * s + s;
  const double h01 = -2 * s * s * s + 3 * s * s, h11 = s * s * s - s * s;
  return h00 * a.g + h10 * dt * a.b + h01 * b.g + h11 * dt * b.b;
}

Mat MetricTrajectory::b_at(double t) const {
  size_t k = 0;
  while (k + 1 < samples.size() && samples[k + 1].t <= t) ++k;
  if (k + 1 == samples.size() || samples[k].t == t) return samples[k].b;
  const auto& a = samples[k];
  const auto& b = samples[k + 1];
  const double s = (t - a.t) / (b.t - a.t);
  return (1 - s) * a.b + s * b.b;
}

double MetricTrajectory::symmetric_eps() const { return std::min(-t_min(), t_max()); }

std::string MetricTrajectory::csv() const {
  std::ostringstream os;
  const int d = n + p;
  os << "t";
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) os << ",g_" << i << "_" << j;
  os << ",cond_G,flags\n";
  char buf[64];
  for (const auto& s : samples) {
    std::snprintf(buf, sizeof buf, "%.6f", s.t);
    os << buf;
    for (int i = 0; i < d; ++i)
      for (int j = i; j < d; ++j) {
        std::snprintf(buf, sizeof buf, ",%.12e", s.g(i, j));
        os << buf;
      }
    std::snprintf(buf, sizeof buf, ",%.6e", s.cond_G);
    os << buf;
    const bool edge = truncated && (s.t == t_min() || s.t == t_max());
    os << (edge ? ",truncated" : ",ok") << "\n";
  }
  return os.str();
}

// ---------------------------------------------------------------------------

VariationEngine::VariationEngine(ModelPtr model, VariationSpec spec, IntegratorSettings settings)
    : model_(std::move(model)), spec_(std::move(spec)), settings_(settings) {
  if (!spec_.vertical) throw GeometryError(ErrorKind::InvalidArgument, "variation spec has no vertical data");
}

Mat VariationEngine::lambda(const Point& x, double t) const {
  const Mat V = spec_.vertical(x, t);
  if (V.rows() != n() || V.cols() != p())
    throw GeometryError(ErrorKind::InvalidArgument, "vertical data must be n x p");
  return V * model_->base_lift(x).transpose();
}

MetricState VariationEngine::state(const Point& x, double t) const {
  if (!spec_.time_dependent) {
    const Mat l = lambda(x, 0.0);
    if (l.isZero(0.0)) return MetricState{Mat::Zero(n(), p()), Mat::Identity(p(), p())};
    return metric_ode_solve([&l](double) { return l; }, n(), p(), t, settings_.steps);
  }
  return metric_ode_solve([&](double s) { return lambda(x, s); }, n(), p(), t, settings_.steps);
}

Mat VariationEngine::metric(const Point& x, double t) const { return assemble_metric(state(x, t)); }

MetricFn VariationEngine::metric_fn(double t) const {
  // capture by value so the closure outlives this engine reference safely
  VariationEngine copy = *this;
  return [copy, t](const Point& x) -> Mat { return copy.metric(x, t); };
}

SubmersionGeometry VariationEngine::geometry(double t, FdSettings fd) const {
  return SubmersionGeometry(model_, metric_fn(t), fd);
}

Mat VariationEngine::b_tensor(const Point& x, double t) const { return assemble_b(lambda(x, t), state(x, t)); }

Mat VariationEngine::lifted_frame(const Point& x, double t) const {
  const MetricState s = state(x, t);
  Mat H = Mat::Zero(n() + p(), p());
  H.bottomRows(p()).setIdentity();
  H.topRows(n()) = -s.X;
  return H * model_->base_lift(x);
}

Vec VariationEngine::bsharp(const Point& x, double t, const Vec& u) const {
  const Mat V = spec_.vertical(x, t);
  const Vec coef = V.transpose() * u.head(n());
  return lifted_frame(x, t) * coef;
}

MetricTrajectory VariationEngine::evolve(const Point& x, double t_span, double h) const {
  if (!(t_span > 0.0)) throw GeometryError(ErrorKind::InvalidArgument, "trajectory span must be positive");
  if (h <= 0.0) h = 1e-3 * t_span;
  const int steps = static_cast<int>(std::llround(t_span / h));
  h = t_span / steps;
  MetricTrajectory traj;
  traj.x = x;
  traj.spec = spec_.name;
  traj.n = n();
  traj.p = p();
  traj.h = h;
  const Mat l_const = spec_.time_dependent ? Mat() : lambda(x, 0.0);
  auto lam = [&](double s) -> Mat { return spec_.time_dependent ? lambda(x, s) : l_const; };

  auto run = [&](double dir, std::vector<TrajectorySample>& out, double& eps) {
    MetricState s{Mat::Zero(n(), p()), Mat::Identity(p(), p())};
    const double hh = dir * h;
    for (int k = 1; k <= steps; ++k) {
      const double t0 = (k - 1) * hh;
      const Mat l0 = lam(t0), lm = lam(t0 + 0.5 * hh), l1 = lam(t0 + hh);
      const MetricState k1 = metric_ode_rhs(l0, s);
      const MetricState s2{s.X + 0.5 * hh * k1.X, s.Y + 0.5 * hh * k1.Y};
      const MetricState k2 = metric_ode_rhs(lm, s2);
      const MetricState s3{s.X + 0.5 * hh * k2.X, s.Y + 0.5 * hh * k2.Y};
      const MetricState k3 = metric_ode_rhs(lm, s3);
      const MetricState s4{s.X + hh * k3.X, s.Y + hh * k3.Y};
      const MetricState k4 = metric_ode_rhs(l1, s4);
      s.X += (hh / 6.0) * (k1.X + 2.0 * k2.X + 2.0 * k3.X + k4.X);
      s.Y += (hh / 6.0) * (k1.Y + 2.0 * k2.Y + 2.0 * k3.Y + k4.Y);
      s.Y = 0.5 * (s.Y + s.Y.transpose()).eval();
      const double t = k * hh;
      TrajectorySample smp;
      smp.t = t;
      smp.g = assemble_metric(s);
      smp.cond_G = cond_of(metric_G(s));
      Eigen::LLT<Mat> llt(smp.g);
      if (!(smp.cond_G <= settings_.cond_limit) || llt.info() != Eigen::Success) {
        eps = std::abs(t);
        traj.truncated = true;
        return;
      }
      smp.b = assemble_b(lam(t), s);
      out.push_back(std::move(smp));
    }
  };

  std::vector<TrajectorySample> fwd, bwd;
  run(+1.0, fwd, traj.eps_plus);
  run(-1.0, bwd, traj.eps_minus);
  for (auto it = bwd.rbegin(); it != bwd.rend(); ++it) traj.samples.push_back(*it);
  TrajectorySample zero;
  zero.t = 0.0;
  zero.g = Mat::Identity(n() + p(), n() + p());
  zero.b = assemble_b(lam(0.0), MetricState{Mat::Zero(n(), p()), Mat::Identity(p(), p())});
  traj.samples.push_back(zero);
  for (auto& s : fwd) traj.samples.push_back(s);
  return traj;
}

// ---------------------------------------------------------------------------

double InvariantReport::max() const {
  return std::max({vertical_block, b_identity, lift_orthonormality, lift_derivative, bsharp_raise, ode_consistency});
}

InvariantReport check_invariants(const VariationEngine& eng, const MetricTrajectory& traj) {
  InvariantReport r;
  const int n = eng.n(), p = eng.p(), d = n + p;
  const Point& x = traj.x;
  const auto& S = traj.samples;
  const Mat R = eng.model().base_lift(x);
  for (size_t k = 0; k < S.size(); ++k) {
    const Mat& g = S[k].g;
    const double t = S[k].t;
    r.vertical_block = std::max(r.vertical_block, (g.topLeftCorner(n, n) - Mat::Identity(n, n)).cwiseAbs().maxCoeff());
    const MetricState st = split_metric(g, n);
    Mat H = Mat::Zero(d, p);
    H.bottomRows(p).setIdentity();
    H.topRows(n) = -st.X;
    const Mat L = H * R;
    r.lift_orthonormality = std::max(r.lift_orthonormality, (L.transpose() * g * L - Mat::Identity(p, p)).cwiseAbs().maxCoeff());
    // B# raising with the stored B
    const Mat V = eng.vertical(x, t);
    for (int a = 0; a < n; ++a) {
      const Vec u = unit(d, a);
      const Vec bs = L * (V.transpose() * u.head(n));
      for (int m = 0; m < d; ++m)
        r.bsharp_raise = std::max(r.bsharp_raise, std::abs(bs.dot(g * unit(d, m)) - S[k].b(a, m)));
    }
    // FD on the grid (fourth order: steps h and 2h)
    if (k >= 2 && k + 2 < S.size()) {
      const double h = S[k + 1].t - S[k].t;
      const Mat d1 = (S[k + 1].g - S[k - 1].g) / (2 * h);
      const Mat d2 = (S[k + 2].g - S[k - 2].g) / (4 * h);
      const Mat B = (4.0 * d1 - d2) / 3.0;
      r.ode_consistency = std::max(r.ode_consistency, (B - S[k].b).cwiseAbs().maxCoeff());
      // B(X,Y) = sum_a B(X,E_a) g(Y,E_a) + B(Y,E_a) g(X,E_a), with the FD B
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
          double rhs = 0.0;
          for (int a = 0; a < n; ++a) rhs += B(i, a) * g(j, a) + B(j, a) * g(i, a);
          r.b_identity = std::max(r.b_identity, std::abs(B(i, j) - rhs));
        }
      // d/dt P_H W_i = -V_i
      auto lift_at = [&](size_t q) {
        const MetricState sq = split_metric(S[q].g, n);
        Mat Hq = Mat::Zero(d, p);
        Hq.bottomRows(p).setIdentity();
        Hq.topRows(n) = -sq.X;
        return Mat(Hq * R);
      };
      const Mat dl1 = (lift_at(k + 1) - lift_at(k - 1)) / (2 * h);
      const Mat dl2 = (lift_at(k + 2) - lift_at(k - 2)) / (4 * h);
      const Mat dL = (4.0 * dl1 - dl2) / 3.0;
      Mat target = Mat::Zero(d, p);
      target.topRows(n) = -V;
      r.lift_derivative = std::max(r.lift_derivative, (dL - target).cwiseAbs().maxCoeff());
    }
  }
  return r;
}

double frame_covariance_residual(const Mat& lambda, const Mat& Mv, const Mat& Mh, double t, int steps) {
  const int n = static_cast<int>(lambda.rows()), p = static_cast<int>(lambda.cols());
  const Mat g = assemble_metric(metric_ode_solve([&](double) { return lambda; }, n, p, t, steps));
  Mat M = Mat::Zero(n + p, n + p);
  M.topLeftCorner(n, n) = Mv;
  M.bottomRightCorner(p, p) = Mh;
  const Mat rotated = M.transpose() * g * M;
  // lambda'_{ck} = sum lambda_{ai} M_{ik} M_{ac}
  const Mat lp = Mv.transpose() * lambda * Mh;
  const Mat g2 = assemble_metric(metric_ode_solve([&](double) { return lp; }, n, p, t, steps));
  return (rotated - g2).cwiseAbs().maxCoeff();
}

double totally_geodesic_residual(const VariationEngine& eng, const Point& x, const std::vector<double>& ts,
                                 FdSettings fd) {
  double worst = 0.0;
  for (double t : ts) worst = std::max(worst, eng.geometry(t, fd).totally_geodesic_residual(x));
  return worst;
}

double fiber_killing_residual(const VariationEngine& eng, const Point& x, FdSettings fd) {
  const int n = eng.n(), d = eng.model().dim();
  const SubmersionGeometry g0(eng.model_ptr(), [d](const Point&) -> Mat { return Mat::Identity(d, d); }, fd);
  double worst = 0.0;
  for (int i = 0; i < eng.p(); ++i) {
    FieldFn Vi = [&eng, i, d, n](const Point& y) -> Vec {
      Vec v = Vec::Zero(d);
      v.head(n) = eng.vertical(y, 0.0).col(i);
      return v;
    };
    for (int a = 0; a < n; ++a)
      for (int b = a; b < n; ++b) {
        FieldFn Ea = [a, d](const Point&) -> Vec { return unit(d, a); };
        FieldFn Eb = [b, d](const Point&) -> Vec { return unit(d, b); };
        worst = std::max(worst, std::abs(g0.killing_defect(x, Vi, Ea, Eb)));
      }
  }
  return worst;
}

KillingDefectReport killing_defect_derivative(const VariationEngine& eng, const FieldFn& K, const Point& x, double t,
                                              FdSettings fd, double t_step) {
  const int n = eng.n(), p = eng.p(), d = n + p;
  KillingDefectReport rep;
  rep.predicted = Mat::Zero(p, n);
  rep.fd_first = Mat::Zero(p, n);
  rep.fd_second = Mat::Zero(p, n);
  {
    const SubmersionGeometry g0 = eng.geometry(0.0, fd);
    for (int m = 0; m < d; ++m)
      for (int l = m; l < d; ++l) {
        FieldFn Fm = [m, d](const Point&) -> Vec { return unit(d, m); };
        FieldFn Fl = [l, d](const Point&) -> Vec { return unit(d, l); };
        rep.initial_defect = std::max(rep.initial_defect, std::abs(g0.killing_defect(x, K, Fm, Fl)));
      }
  }
  const Mat gt = eng.metric(x, t);
  for (int i = 0; i < p; ++i) {
    FieldFn Vi = [&eng, i, d, n, t](const Point& y) -> Vec {
      Vec v = Vec::Zero(d);
      v.head(n) = eng.vertical(y, t).col(i);
      return v;
    };
    const Vec kv = bracket(eng.model(), K, Vi, x, fd);
    for (int a = 0; a < n; ++a) {
      rep.predicted(i, a) = kv.dot(gt * unit(d, a));
      FieldFn Ea = [a, d](const Point&) -> Vec { return unit(d, a); };
      auto defect = [&](double s) {
        const SubmersionGeometry gs = eng.geometry(s, fd);
        FieldFn Li = [&eng, i, s](const Point& y) -> Vec { return eng.lifted_frame(y, s).col(i); };
        return gs.killing_defect(x, K, Li, Ea);
      };
      rep.fd_first(i, a) = nth_derivative(defect, t, 1, t_step, true);
      rep.fd_second(i, a) = nth_derivative(defect, t, 2, t_step, true);
    }
  }
  return rep;
}

}  // namespace subvar
