#include "subvar/forms.hpp"

#include <cmath>

namespace subvar {

namespace {

size_t idx3(int a, int b, int c, int n) { return static_cast<size_t>((a * n + b) * n + c); }

Mat identity_metric_lift(const ManifoldModel& m, const Point& x) {
  // pi^*W_i at g0 in frame components
  const int n = m.n(), p = m.p();
  Mat L = Mat::Zero(n + p, p);
  L.bottomRows(p) = m.base_lift(x);
  return L;
}

}  // namespace

Mat exterior_d(const ManifoldModel& m, const OneFormFn& w, const Point& x, const FdSettings& fd) {
  const int d = m.dim();
  const Vec w0 = w(x);
  std::vector<Vec> dw;
  dw.reserve(static_cast<size_t>(d));
  for (int mu = 0; mu < d; ++mu) dw.push_back(directional(m, w, x, unit(d, mu), fd));
  const Brackets c = m.brackets(x);
  Mat out = Mat::Zero(d, d);
  for (int mu = 0; mu < d; ++mu)
    for (int nu = mu + 1; nu < d; ++nu) {
      const double v = 0.5 * (dw[static_cast<size_t>(mu)](nu) - dw[static_cast<size_t>(nu)](mu) - w0.dot(c.at(mu, nu)));
      out(mu, nu) = v;
      out(nu, mu) = -v;
    }
  return out;
}

std::vector<double> exterior_d2(const ManifoldModel& m, const TwoFormFn& W, const Point& x, const FdSettings& fd) {
  const int d = m.dim();
  const Mat W0 = W(x);
  std::vector<Mat> dW;
  for (int mu = 0; mu < d; ++mu) dW.push_back(directional(m, W, x, unit(d, mu), fd));
  const Brackets c = m.brackets(x);
  auto term = [&](int a, int b, int e) {
    return dW[static_cast<size_t>(a)](b, e) - c.at(a, b).dot(W0.col(e));
  };
  std::vector<double> out(static_cast<size_t>(d * d * d), 0.0);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (int e = 0; e < d; ++e) out[idx3(a, b, e, d)] = term(a, b, e) + term(b, e, a) + term(e, a, b);
  return out;
}

double dd_residual(const ManifoldModel& m, const OneFormFn& w, const Point& x, const FdSettings& fd) {
  // the inner derivative uses a wider step so the nested difference stays above round-off
  FdSettings inner = fd;
  inner.h = std::max(fd.h, 1e-3);
  FdSettings outer = inner;
  outer.h = 4.0 * inner.h;
  TwoFormFn dw = [&m, &w, inner](const Point& y) { return exterior_d(m, w, y, inner); };
  double worst = 0.0;
  for (double v : exterior_d2(m, dw, x, outer)) worst = std::max(worst, std::abs(v));
  return worst;
}

Mat wedge(const Vec& a, const Vec& b) { return 0.5 * (a * b.transpose() - b * a.transpose()); }

BasicnessReport basicness(const ManifoldModel& m, const OneFormFn& w, const Point& x, const FdSettings& fd) {
  BasicnessReport r;
  const Vec w0 = w(x);
  const Mat dw = exterior_d(m, w, x, fd);
  for (int a = 0; a < m.n(); ++a) {
    r.interior = std::max(r.interior, std::abs(w0(a)));
    r.interior_d = std::max(r.interior_d, dw.row(a).cwiseAbs().maxCoeff());
  }
  return r;
}

Mat extract_forms(const VariationEngine& eng, const Point& x, double t) {
  const Mat B = eng.b_tensor(x, t);
  return B.leftCols(eng.n());
}

OneFormFn extracted_form(const VariationEngine& eng, int a, double t) {
  return [eng, a, t](const Point& y) -> Vec { return eng.b_tensor(y, t).col(a); };
}

OneFormFn pullback_form(ModelPtr model, std::function<Vec(const Point&)> alpha_w) {
  return [model, alpha_w](const Point& y) -> Vec {
    const int n = model->n(), p = model->p();
    Vec w = Vec::Zero(n + p);
    w.tail(p) = model->base_lift(y) * alpha_w(y);
    return w;
  };
}

std::vector<double> base_connection(const ManifoldModel& m, const Point& x, const FdSettings& fd) {
  const int p = m.p();
  FieldSetFn lifts = [&m](const Point& y) -> FieldMat { return FieldMat(identity_metric_lift(m, y)); };
  const BracketTable tab = bracket_table(m, lifts, x, fd);
  // c(a,b,c) = g0([pi^*W_a, pi^*W_b], pi^*W_c), the base structure functions
  std::vector<double> c(static_cast<size_t>(p * p * p), 0.0);
  for (int a = 0; a < p; ++a)
    for (int b = 0; b < p; ++b)
      for (int e = 0; e < p; ++e) c[idx3(a, b, e, p)] = tab(a, b).dot(tab.values.col(e));
  std::vector<double> gamma(c.size(), 0.0);
  for (int k = 0; k < p; ++k)
    for (int i = 0; i < p; ++i)
      for (int mm = 0; mm < p; ++mm)
        gamma[idx3(k, i, mm, p)] = 0.5 * (c[idx3(k, i, mm, p)] - c[idx3(i, mm, k, p)] + c[idx3(mm, k, i, p)]);
  return gamma;
}

Mat base_components(const ManifoldModel& m, const Point& x, const Mat& W) {
  const Mat L = identity_metric_lift(m, x);
  return L.transpose() * W * L;
}

std::vector<double> base_nabla_dalpha(const ManifoldModel& m, const OneFormFn& pullback, const Point& x,
                                      const FdSettings& fd) {
  const int p = m.p();
  FdSettings inner = fd;
  inner.h = std::max(fd.h, 1e-3);
  FdSettings outer = inner;
  outer.h = 4.0 * inner.h;
  // base components of d alpha as functions on M (constant along fibers)
  auto da = [&m, &pullback, inner](const Point& y) -> Mat {
    return base_components(m, y, exterior_d(m, pullback, y, inner));
  };
  const Mat da0 = da(x);
  const Mat L = identity_metric_lift(m, x);
  const std::vector<double> gamma = base_connection(m, x, fd);
  std::vector<double> out(static_cast<size_t>(p * p * p), 0.0);
  for (int k = 0; k < p; ++k) {
    const Mat dk = directional(m, da, x, Vec(L.col(k)), outer);
    for (int i = 0; i < p; ++i)
      for (int j = 0; j < p; ++j) {
        double v = dk(i, j);
        for (int mm = 0; mm < p; ++mm)
          v -= gamma[idx3(k, i, mm, p)] * da0(mm, j) + gamma[idx3(k, j, mm, p)] * da0(i, mm);
        out[idx3(k, i, j, p)] = v;
      }
  }
  return out;
}

double base_codifferential(const ManifoldModel& m, const OneFormFn& pullback, const Point& x, const FdSettings& fd) {
  const int p = m.p();
  const Mat L0 = identity_metric_lift(m, x);
  auto aw = [&m, &pullback](const Point& y) -> Vec {
    return Vec(identity_metric_lift(m, y).transpose() * pullback(y));
  };
  const Vec a0 = aw(x);
  const std::vector<double> gamma = base_connection(m, x, fd);
  double s = 0.0;
  for (int i = 0; i < p; ++i) {
    s += directional(m, aw, x, Vec(L0.col(i)), fd)(i);
    for (int mm = 0; mm < p; ++mm) s -= gamma[idx3(i, i, mm, p)] * a0(mm);
  }
  return -s;  // delta = -div
}

Delta0Report delta0B0_check(const VariationEngine& eng, const Point& x, double tol, FdSettings fd) {
  const ManifoldModel& m = eng.model();
  const int n = m.n(), p = m.p(), d = n + p;
  Delta0Report r;
  for (int a = 0; a < n; ++a)
    r.basicness = std::max(r.basicness, basicness(m, extracted_form(eng, a, 0.0), x, fd).max());
  if (r.basicness > 1e-6)
    throw GeometryError(ErrorKind::Precondition, "omega^a_0 is not basic, the divergence criterion does not apply");

  // direct: (nabla_Y B)(F, X) = Y(B(F,X)) - B(nabla_Y F, X) - B(F, nabla_Y X) with the g0 connection
  const SubmersionGeometry g0 = eng.geometry(0.0, fd);
  const FrameGeometry::Connection conn = g0.connection(x);
  auto B = [&eng](const Point& y) -> Mat { return eng.b_tensor(y, 0.0); };
  const Mat B0 = B(x);
  r.direct = Vec::Zero(d);
  for (int mu = 0; mu < d; ++mu) {
    const Mat dB = directional(m, B, x, unit(d, mu), fd);
    for (int nu = 0; nu < d; ++nu) {
      const Vec nF = conn.gamma[static_cast<size_t>(mu)].col(mu);
      const Vec nX = conn.gamma[static_cast<size_t>(mu)].col(nu);
      r.direct(nu) -= dB(mu, nu) - nF.dot(B0.col(nu)) - B0.row(mu).dot(nX);
    }
  }

  r.delta_n = Vec::Zero(n);
  for (int a = 0; a < n; ++a) r.delta_n(a) = base_codifferential(m, extracted_form(eng, a, 0.0), x, fd);

  const SubmersionGeometry::ONeill o = g0.oneill(x);
  const Mat L = identity_metric_lift(m, x);
  r.a_condition = Vec::Zero(p);
  for (int i = 0; i < p; ++i)
    for (int a = 0; a < n; ++a) r.a_condition(i) += B0.col(a).dot(g0.A(o, L.col(i), unit(d, a)));

  for (int a = 0; a < n; ++a) r.consistency = std::max(r.consistency, std::abs(r.direct(a) - r.delta_n(a)));
  const Vec dh = L.transpose() * r.direct;
  for (int i = 0; i < p; ++i) r.consistency = std::max(r.consistency, std::abs(dh(i) - 2.0 * r.a_condition(i)));
  r.is_zero = r.delta_n.cwiseAbs().maxCoeff() <= tol && r.a_condition.cwiseAbs().maxCoeff() <= tol;
  return r;
}

}  // namespace subvar
