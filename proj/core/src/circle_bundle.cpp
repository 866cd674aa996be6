#include "subvar/circle_bundle.hpp"

#include "subvar/formulas.hpp"
#include "subvar/sampling.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

namespace subvar {

namespace {

size_t idx3(int a, int b, int c, int n) { return static_cast<size_t>((a * n + b) * n + c); }

void require_circle(const VariationEngine& eng, const char* what) {
  if (eng.n() != 1) throw GeometryError(ErrorKind::InvalidArgument, std::string(what) + " needs a circle bundle (n = 1)");
}

// Nested differences: inner step at least 1e-3, outer four times that.
std::pair<FdSettings, FdSettings> nested(const FdSettings& fd) {
  FdSettings inner = fd;
  inner.h = std::max(fd.h, 1e-3);
  FdSettings outer = inner;
  outer.h = 4.0 * inner.h;
  return {inner, outer};
}

FieldSetFn lifted_fields(const VariationEngine& eng, double t) {
  return [&eng, t](const Point& y) -> FieldMat { return FieldMat(eng.lifted_frame(y, t)); };
}

// dalpha(L_i, L_j) for the extracted form at t.
Mat dalpha_on_lifts(const VariationEngine& eng, const Point& x, double t, const FdSettings& fd) {
  const Mat L = eng.lifted_frame(x, t);
  return L.transpose() * exterior_d(eng.model(), extracted_form(eng, 0, t), x, fd) * L;
}

}  // namespace

VariationSpec circle_variation(std::string name, std::function<Vec(const Point&)> alpha_w) {
  VariationSpec s;
  s.name = std::move(name);
  s.vertical = [alpha_w](const Point& y, double) -> Mat {
    const Vec a = alpha_w(y);
    return Mat(a.transpose());
  };
  return s;
}

// ---------------------------------------------------------------------------

FormDerivatives form_based_sec_derivatives(const VariationEngine& eng, const Point& x, int i, double t, FdSettings fd) {
  require_circle(eng, "form-based derivatives");
  const int p = eng.p(), d = eng.model().dim();
  if (i < 0 || i >= p) throw GeometryError(ErrorKind::InvalidArgument, "base direction out of range");
  FormDerivatives r;
  r.dalpha = dalpha_on_lifts(eng, x, t, fd);
  const BracketTable tab = bracket_table(eng.model(), lifted_fields(eng, t), x, fd);
  const Mat g = eng.metric(x, t);
  const Vec U = unit(d, 0);
  double pair = 0.0;
  for (int j = 0; j < p; ++j) {
    const double du = -0.5 * tab(i, j).dot(g * U);  // dU^flat(L_i, L_j)
    pair += du * r.dalpha(i, j);
    r.iota_dalpha_sq += r.dalpha(i, j) * r.dalpha(i, j);
  }
  r.order1 = 2.0 * pair;
  r.order1_printed = -4.0 * pair;
  r.order2 = 2.0 * r.iota_dalpha_sq;
  r.order2_printed = 8.0 * r.iota_dalpha_sq;
  r.order3 = 0.0;
  return r;
}

// ---------------------------------------------------------------------------

namespace {

struct PlaneData {
  double kv = 0.0, kh = 0.0, mixed = 0.0;
  double iota_sq = 0.0, dxy = 0.0;  // |i_X dalpha|^2 and dalpha(X, Y) for the base directions
};

}  // namespace

std::string PositivityReport::csv() const {
  std::string out = "point_id,t,theta,plane_id,sec,min_flag\n";
  char buf[160];
  for (const SweepRow& r : rows) {
    std::snprintf(buf, sizeof buf, "%d,%.6f,%.9f,%d,%.12e,%d\n", r.point_id, r.t, r.theta, r.plane_id, r.sec,
                  r.min_flag ? 1 : 0);
    out += buf;
  }
  return out;
}

PositivityReport product_positivity_sweep(const VariationEngine& eng, const std::vector<Point>& points,
                                          const PositivitySettings& s, FdSettings fd) {
  require_circle(eng, "positivity sweep");
  if (points.empty()) throw GeometryError(ErrorKind::InvalidArgument, "positivity sweep needs points");
  const ManifoldModel& m = eng.model();
  const int p = eng.p(), d = m.dim();
  if (p < 2) throw GeometryError(ErrorKind::InvalidArgument, "positivity sweep needs a base of dimension >= 2");

  {
    const SubmersionGeometry g0 = eng.geometry(0.0, fd);
    const SubmersionGeometry::ONeill o = g0.oneill(points.front());
    double amax = 0.0;
    for (const Vec& a : o.a) amax = std::max(amax, a.cwiseAbs().maxCoeff());
    if (amax > 1e-8) throw GeometryError(ErrorKind::Precondition, "initial metric is not a product (A != 0)");
  }

  PositivityReport rep;
  rep.ts = s.ts;
  const size_t nt = s.ts.size();
  rep.min_sec.assign(nt, std::numeric_limits<double>::infinity());
  rep.max_sec.assign(nt, -std::numeric_limits<double>::infinity());
  rep.leading_deviation.assign(nt, 0.0);
  rep.min_horizontal.assign(nt, std::numeric_limits<double>::infinity());
  rep.max_vertizontal.assign(nt, 0.0);

  // base form data at t = 0 (alpha_t is t-independent for constant V)
  rep.nondegeneracy = std::numeric_limits<double>::infinity();
  std::vector<Mat> da(points.size());
  const OneFormFn alpha = extracted_form(eng, 0, 0.0);
  for (size_t k = 0; k < points.size(); ++k) {
    da[k] = base_components(m, points[k], exterior_d(m, alpha, points[k], fd));
    rep.nondegeneracy = std::min(rep.nondegeneracy, std::abs(da[k].determinant()));
    const std::vector<double> T = base_nabla_dalpha(m, alpha, points[k], fd);
    for (int a = 0; a < p; ++a)
      for (int b = 0; b < p; ++b)
        for (int c = 0; c < p; ++c)
          rep.nabla_condition = std::max(rep.nabla_condition, std::abs(T[idx3(a, b, c, p)] + T[idx3(b, a, c, p)]));
  }
  rep.nondegenerate = rep.nondegeneracy > 1e-9;

  // plane directions in base frame coefficients, orthonormalized once
  std::vector<std::pair<Vec, Vec>> planes;
  for (int q = 0; q < s.planes; ++q) {
    const std::vector<double> u = halton_point(static_cast<std::uint64_t>(q + 1), 2 * p);
    Vec a(p), b(p);
    for (int k = 0; k < p; ++k) {
      a(k) = 2.0 * u[static_cast<size_t>(k)] - 1.0;
      b(k) = 2.0 * u[static_cast<size_t>(p + k)] - 1.0;
    }
    a.normalize();
    b -= a.dot(b) * a;
    b.normalize();
    planes.emplace_back(a, b);
  }

  const double secn = m.base_curvature();
  const Vec U = unit(d, 0);
  for (size_t ti = 0; ti < nt; ++ti) {
    const double t = s.ts[ti];
    const SubmersionGeometry geo = eng.geometry(t, fd);
    size_t first_row = rep.rows.size();
    for (size_t k = 0; k < points.size(); ++k) {
      const Point& x = points[k];
      const SubmersionGeometry::ONeill o = geo.oneill(x);
      const Mat L = eng.lifted_frame(x, t);
      for (int q = 0; q < s.planes; ++q) {
        const Vec& a = planes[static_cast<size_t>(q)].first;
        const Vec& b = planes[static_cast<size_t>(q)].second;
        const Vec X = L * a, Y = L * b;
        PlaneData pd;
        pd.kh = geo.sec_horizontal(o, X, Y, secn);
        pd.kv = geo.sec_vertizontal(o, X, U);
        pd.mixed = -geo.nabla_A(x, X, X, Y).dot(o.g * U);
        pd.iota_sq = (da[k].transpose() * a).squaredNorm();
        pd.dxy = a.dot(da[k] * b);
        rep.min_horizontal[ti] = std::min(rep.min_horizontal[ti], pd.kh);
        rep.max_vertizontal[ti] = std::max(rep.max_vertizontal[ti], pd.kv);
        for (int th = 0; th < s.thetas; ++th) {
          const double theta = std::numbers::pi * th / s.thetas;
          const double c = std::cos(theta), sn = std::sin(theta);
          const double sec = pd.kv * sn * sn + pd.kh * c * c - 2.0 * pd.mixed * sn * c;
          const double law = pd.iota_sq * t * t * sn * sn + (secn - 3.0 * pd.dxy * pd.dxy * t * t) * c * c;
          rep.leading_deviation[ti] = std::max(rep.leading_deviation[ti], std::abs(sec - law));
          rep.min_sec[ti] = std::min(rep.min_sec[ti], sec);
          rep.max_sec[ti] = std::max(rep.max_sec[ti], sec);
          rep.rows.push_back({static_cast<int>(k), t, theta, q, sec, false});
        }
      }
    }
    for (size_t r = first_row; r < rep.rows.size(); ++r)
      if (rep.rows[r].sec == rep.min_sec[ti]) {
        rep.rows[r].min_flag = true;
        break;
      }
  }

  // first positive t (in increasing order) where positivity is lost
  std::vector<size_t> order;
  for (size_t ti = 0; ti < nt; ++ti)
    if (s.ts[ti] > 0.0) order.push_back(ti);
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return s.ts[a] < s.ts[b]; });
  rep.positive_for_all_positive_t = !order.empty();
  for (size_t ti : order)
    if (rep.min_sec[ti] <= 0.0) {
      rep.t_x = s.ts[ti];
      rep.positive_for_all_positive_t = false;
      break;
    }
  constexpr double kSignTol = 1e-10;
  for (size_t ti = 0; ti < nt; ++ti)
    if (rep.min_sec[ti] < -kSignTol && rep.max_sec[ti] > kSignTol) rep.mixed_sign = true;
  return rep;
}

// ---------------------------------------------------------------------------

const char* to_string(ContactLevel l) {
  switch (l) {
    case ContactLevel::ContactMetric: return "contact-metric";
    case ContactLevel::KContact: return "k-contact";
    case ContactLevel::Sasaki: return "sasaki";
  }
  return "?";
}

double ContactReport::level_residual(ContactLevel l) const {
  double r = std::max({d_eta, iota_u, phi_squared, isometry});
  if (l != ContactLevel::ContactMetric) r = std::max(r, killing);
  if (l == ContactLevel::Sasaki) r = std::max(r, sasaki);
  return r;
}

ContactReport contact_check(const VariationEngine& eng, const Point& x, double t, ContactLevel level, FdSettings fd) {
  require_circle(eng, "contact check");
  const ManifoldModel& m = eng.model();
  const int d = m.dim();
  const SubmersionGeometry geo = eng.geometry(t, fd);
  const SubmersionGeometry::ONeill o = geo.oneill(x);
  const Mat& g = o.g;
  const Vec U = unit(d, 0);
  auto phi = [&](const SubmersionGeometry::ONeill& oo, const Vec& v) -> Vec { return -geo.A(oo, v, U); };
  const Vec eta = g.col(0);

  ContactReport r;
  OneFormFn eta_fn = [&eng, t](const Point& y) -> Vec { return Vec(eng.metric(y, t).col(0)); };
  const Mat deta = exterior_d(m, eta_fn, x, fd);
  std::vector<Vec> ph(static_cast<size_t>(d));
  for (int mu = 0; mu < d; ++mu) ph[static_cast<size_t>(mu)] = phi(o, unit(d, mu));
  for (int mu = 0; mu < d; ++mu) {
    const Vec& pm = ph[static_cast<size_t>(mu)];
    r.iota_u = std::max(r.iota_u, std::abs(deta(0, mu)));
    const Vec sq = phi(o, pm) + unit(d, mu) - eta(mu) * U;
    r.phi_squared = std::max(r.phi_squared, sq.cwiseAbs().maxCoeff());
    for (int nu = 0; nu < d; ++nu) {
      const Vec& pn = ph[static_cast<size_t>(nu)];
      r.d_eta = std::max(r.d_eta, std::abs(deta(mu, nu) - unit(d, mu).dot(g * pn)));
      r.isometry = std::max(r.isometry, std::abs(pm.dot(g * pn) - g(mu, nu) + eta(mu) * eta(nu)));
    }
  }
  if (level == ContactLevel::ContactMetric) return r;

  FieldFn Uf = [U](const Point&) -> Vec { return U; };
  for (int mu = 0; mu < d; ++mu)
    for (int nu = mu; nu < d; ++nu) {
      FieldFn Fm = [d, mu](const Point&) -> Vec { return unit(d, mu); };
      FieldFn Fn = [d, nu](const Point&) -> Vec { return unit(d, nu); };
      r.killing = std::max(r.killing, std::abs(geo.killing_defect(x, Uf, Fm, Fn)));
    }
  if (level == ContactLevel::KContact) return r;

  const FrameGeometry::Connection conn = geo.connection(x);
  for (int nu = 0; nu < d; ++nu) {
    const Vec Y = unit(d, nu);
    FieldFn phiY = [&geo, &phi, Y](const Point& y) -> Vec { return phi(geo.oneill(y), Y); };
    for (int mu = 0; mu < d; ++mu) {
      const Vec X = unit(d, mu);
      const Vec lhs = geo.covariant(x, conn, X, phiY) - phi(o, conn.apply(X, Y));
      const Vec rhs = g(mu, nu) * U - eta(nu) * X;
      r.sasaki = std::max(r.sasaki, (lhs - rhs).cwiseAbs().maxCoeff());
    }
  }
  return r;
}

IsometryDefect a_isometry_defect(const VariationEngine& eng, const Point& x, int i, FdSettings fd) {
  require_circle(eng, "A-isometry defect");
  const int d = eng.model().dim();
  IsometryDefect r;
  const Vec U = unit(d, 0);
  auto defect = [&](double s) {
    const SubmersionGeometry geo = eng.geometry(s, fd);
    const SubmersionGeometry::ONeill o = geo.oneill(x);
    const Vec a = geo.A(o, Vec(eng.lifted_frame(x, s).col(i)), U);
    return a.dot(o.g * a) - 1.0;
  };
  r.fd_second = nth_derivative(defect, 0.0, 2, default_t_step(2), true);
  const Mat da = dalpha_on_lifts(eng, x, 0.0, fd);
  const double sq = da.row(i).squaredNorm();
  r.corrected = 2.0 * sq;
  r.printed = 8.0 * sq;
  return r;
}

// ---------------------------------------------------------------------------

double WeakCmsReport::printed_max() const {
  return std::max({weakcms0, weakcms1, weakcms2, rweak0, rweak1, rweak2, rweak3});
}

WeakCmsReport weak_cms_check(const VariationEngine& eng, const Point& x, const std::vector<double>& ts, FdSettings fd) {
  require_circle(eng, "weak contact metric check");
  const ManifoldModel& m = eng.model();
  const int p = eng.p(), d = m.dim();
  const Vec U = unit(d, 0);
  WeakCmsReport r;
  r.ts = ts;

  // t = 0 data
  const SubmersionGeometry g0 = eng.geometry(0.0, fd);
  const SubmersionGeometry::ONeill o0 = g0.oneill(x);
  const Mat L0 = eng.lifted_frame(x, 0.0);
  Mat A0(p, p), dth(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) A0(i, j) = g0.A(o0, Vec(L0.col(i)), Vec(L0.col(j))).dot(o0.g * U);
  dth = -A0;
  std::vector<double> nA(static_cast<size_t>(p * p * p));
  for (int z = 0; z < p; ++z)
    for (int a = 0; a < p; ++a)
      for (int i = 0; i < p; ++i)
        nA[idx3(z, a, i, p)] = g0.nabla_A(x, Vec(L0.col(z)), Vec(L0.col(a)), Vec(L0.col(i))).dot(o0.g * U);
  const OneFormFn alpha = extracted_form(eng, 0, 0.0);
  const Mat da = base_components(m, x, exterior_d(m, alpha, x, fd));
  const std::vector<double> nda = base_nabla_dalpha(m, alpha, x, fd);
  const Mat G = A0 * A0.transpose();
  // <i_l beta, i_x gamma> = sum_j beta(l, j) gamma(x, j)
  const Mat th_da = dth * da.transpose();
  const Mat da_da = da * da.transpose();
  auto NA = [&](int z, int a, int b) { return nA[idx3(z, a, b, p)]; };
  auto ND = [&](int z, int a, int b) { return nda[idx3(z, a, b, p)]; };

  for (int X = 0; X < p; ++X)
    for (int Y = 0; Y < p; ++Y)
      for (int Z = 0; Z < p; ++Z) {
        double w0 = 0.0, w1 = 0.0, w2 = 0.0;
        for (int i = 0; i < p; ++i) {
          w0 += A0(i, Y) * NA(Z, X, i) + A0(i, X) * NA(Z, Y, i);
          w1 += NA(Z, i, Y) * da(X, i) + NA(Z, i, X) * da(Y, i);
          w1 += ND(Z, Y, i) * dth(X, i) + ND(Z, X, i) * dth(Y, i);
          w2 += ND(Z, Y, i) * da(X, i) + ND(Z, X, i) * da(Y, i);
        }
        double q0 = -NA(Z, X, Y), q1 = ND(Z, X, Y), q2 = 0.0, q3 = 0.0;
        for (int l = 0; l < p; ++l) {
          const double mix = 0.5 * (th_da(l, X) + th_da(X, l));
          q0 += G(X, l) * NA(Z, l, Y);
          q1 += -G(X, l) * ND(Z, l, Y) + mix * NA(Z, l, Y);
          q2 += da_da(l, X) * NA(Z, l, Y) - mix * ND(Z, l, Y);
          q3 += da_da(l, X) * ND(Z, l, Y);
        }
        r.weakcms0 = std::max(r.weakcms0, std::abs(w0));
        r.weakcms1 = std::max(r.weakcms1, std::abs(w1));
        r.weakcms2 = std::max(r.weakcms2, std::abs(w2));
        r.rweak0 = std::max(r.rweak0, std::abs(q0));
        r.rweak1 = std::max(r.rweak1, std::abs(q1));
        r.rweak2 = std::max(r.rweak2, std::abs(q2));
        r.rweak3 = std::max(r.rweak3, std::abs(q3));
      }

  // direct evaluation on g_t
  r.min_fatness = std::numeric_limits<double>::infinity();
  for (double t : ts) {
    const SubmersionGeometry geo = eng.geometry(t, fd);
    const SubmersionGeometry::ONeill o = geo.oneill(x);
    const Mat L = eng.lifted_frame(x, t);
    Mat F(p, p);
    for (int i = 0; i < p; ++i) {
      const Vec ai = geo.A(o, Vec(L.col(i)), U);
      for (int j = 0; j < p; ++j) F(i, j) = ai.dot(o.g * geo.A(o, Vec(L.col(j)), U));
    }
    const double fat = Eigen::SelfAdjointEigenSolver<Mat>(F).eigenvalues().minCoeff();
    r.min_fatness = std::min(r.min_fatness, fat);
    if (fat < 1e-8) throw GeometryError(ErrorKind::Precondition, "phi_t is degenerate on the horizontal space");

    auto qt = [&geo, &U](const SubmersionGeometry::ONeill& oo, const Vec& v) -> Vec {
      const Vec ph = -geo.A(oo, v, U);
      const Vec ph2 = -geo.A(oo, ph, U);
      return Vec(-ph2 + v.dot(oo.g * U) * U - v);
    };
    const FrameGeometry::Connection conn = geo.connection(x);
    auto nabla_q = [&](const Vec& Zv, const Vec& Xv) -> Vec {
      FieldFn qx = [&geo, &qt, Xv](const Point& y) -> Vec { return qt(geo.oneill(y), Xv); };
      return geo.covariant(x, conn, Zv, qx) - qt(o, conn.apply(Zv, Xv));
    };
    const std::vector<Mat> R = geo.riemann(x);
    for (int X = 0; X < p; ++X) {
      const Vec Xv = L.col(X);
      const Vec qx = qt(o, Xv);
      for (int Z = 0; Z < p; ++Z) {
        const Vec Zv = L.col(Z);
        const Vec nq = nabla_q(Zv, Xv);
        for (int Y = 0; Y < p; ++Y) {
          const Vec Yv = L.col(Y);
          r.nabla_q = std::max(r.nabla_q, std::abs(nq.dot(o.g * Yv)));
          const Vec rv = FrameGeometry::riemann_apply(R, qx, Yv, Zv);
          r.curvature = std::max(r.curvature, std::abs(rv.dot(o.g * U)));
        }
        // vertical part (nabla_Z Q~) X, reported only
        r.vertical_part = std::max(r.vertical_part, std::abs(nq.dot(o.g * U)));
      }
    }
  }
  return r;
}

// ---------------------------------------------------------------------------

LieAlphaReport lie_variation_alpha(const ModelPtr& model, const FieldFn& Z, const Point& x, double tol, FdSettings fd) {
  const ManifoldModel& m = *model;
  if (m.n() != 1) throw GeometryError(ErrorKind::InvalidArgument, "Lie variation needs a circle bundle (n = 1)");
  const int p = m.p(), d = m.dim();
  const auto [inner, outer] = nested(fd);
  MetricFn id = [d](const Point&) -> Mat { return Mat::Identity(d, d); };
  const SubmersionGeometry gi(model, id, inner);
  const SubmersionGeometry go(model, id, fd);
  const Vec U = unit(d, 0);
  FieldFn Uf = [U](const Point&) -> Vec { return U; };

  OneFormFn alpha = [&gi, &Z, &Uf, d](const Point& y) -> Vec {
    Vec out(d);
    for (int mu = 0; mu < d; ++mu) {
      FieldFn F = [d, mu](const Point&) -> Vec { return unit(d, mu); };
      out(mu) = gi.killing_defect(y, Z, Uf, F);
    }
    return out;
  };
  LieAlphaReport r;
  r.alpha = alpha(x);
  r.basicness = basicness(m, alpha, x, outer).max();

  auto lift_field = [&m, p](int i) -> FieldFn {
    return [&m, p, i](const Point& y) -> Vec {
      Vec v = Vec::Zero(m.dim());
      v.tail(p) = m.base_lift(y).col(i);
      return v;
    };
  };
  for (int i = 0; i < p; ++i)
    for (int j = i; j < p; ++j)
      r.killing_on_base = std::max(r.killing_on_base, std::abs(go.killing_defect(x, Z, lift_field(i), lift_field(j))));

  OneFormFn beta = [&gi, &Z, U](const Point& y) -> Vec { return -gi.A(gi.oneill(y), Z(y), U); };
  const Mat db = base_components(m, x, exterior_d(m, beta, x, outer));
  r.d_phi_z = db.cwiseAbs().maxCoeff();
  r.killing = r.killing_on_base <= tol;
  r.closed = r.d_phi_z <= tol;
  return r;
}

// ---------------------------------------------------------------------------

double extracted_basicness(const VariationEngine& eng, const Point& x, double t, FdSettings fd) {
  double worst = 0.0;
  for (int a = 0; a < eng.n(); ++a) worst = std::max(worst, basicness(eng.model(), extracted_form(eng, a, t), x, fd).max());
  return worst;
}

double projectability_residual(const VariationEngine& eng, const Point& x, double t, int samples, FdSettings fd) {
  const ManifoldModel& m = eng.model();
  const int n = m.n(), p = m.p(), d = m.dim();
  if (samples < 2) throw GeometryError(ErrorKind::InvalidArgument, "need at least two fiber samples");
  const SubmersionGeometry geo = eng.geometry(t, fd);
  Mat lo = Mat::Constant(p * n, p, std::numeric_limits<double>::infinity());
  Mat hi = Mat::Constant(p * n, p, -std::numeric_limits<double>::infinity());
  for (int k = 0; k < samples; ++k) {
    Vec s(n);
    if (n == 1) {
      s(0) = 2.0 * std::numbers::pi * k / samples;
    } else {
      const std::vector<double> u = halton_point(static_cast<std::uint64_t>(k + 1), n);
      for (int a = 0; a < n; ++a) s(a) = std::numbers::pi * (2.0 * u[static_cast<size_t>(a)] - 1.0);
    }
    const Point y = k == 0 ? x : m.fiber_move(x, s);
    const SubmersionGeometry::ONeill o = geo.oneill(y);
    const Mat L = eng.lifted_frame(y, t);
    for (int a = 0; a < n; ++a)
      for (int i = 0; i < p; ++i) {
        const Vec ai = geo.A(o, Vec(L.col(i)), unit(d, a));
        for (int j = 0; j < p; ++j) {
          const double v = ai.dot(o.g * L.col(j));
          lo(a * p + i, j) = std::min(lo(a * p + i, j), v);
          hi(a * p + i, j) = std::max(hi(a * p + i, j), v);
        }
      }
  }
  return (hi - lo).maxCoeff();
}

double fiber_constancy_residual(const VariationEngine& eng, const Point& x, double t, FdSettings fd) {
  const ManifoldModel& m = eng.model();
  const int p = m.p(), d = m.dim();
  const auto [inner, outer] = nested(fd);
  const SubmersionGeometry geo = eng.geometry(t, inner);
  auto table = [&](const Point& y) -> Eigen::MatrixXd {
    const FrameGeometry::Connection conn = geo.connection(y);
    const Mat L = eng.lifted_frame(y, t);
    Eigen::MatrixXd out(p, p * p);
    for (int j = 0; j < p; ++j) {
      FieldFn Lj = [&eng, t, j](const Point& q) -> Vec { return Vec(eng.lifted_frame(q, t).col(j)); };
      for (int i = 0; i < p; ++i) {
        const Vec nij = geo.covariant(y, conn, Vec(L.col(i)), Lj);
        for (int k = 0; k < p; ++k) out(k, i * p + j) = nij.dot(conn.g * L.col(k));
      }
    }
    return out;
  };
  double worst = 0.0;
  for (int a = 0; a < m.n(); ++a)
    worst = std::max(worst, directional(m, table, x, unit(d, a), outer).cwiseAbs().maxCoeff());
  return worst;
}

double integrability_residual(const VariationEngine& eng, const Point& x, double t, FdSettings fd) {
  const int p = eng.p();
  const BracketTable tab = bracket_table(eng.model(), lifted_fields(eng, t), x, fd);
  const Mat g = eng.metric(x, t);
  double worst = 0.0;
  for (int i = 0; i < p; ++i)
    for (int j = i + 1; j < p; ++j) {
      const Vec b = tab(i, j);
      const Vec pv = (g * b).head(eng.n());
      worst = std::max(worst, pv.norm());
    }
  return worst;
}

}  // namespace subvar
