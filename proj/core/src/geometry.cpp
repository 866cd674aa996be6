#include "subvar/geometry.hpp"

#include <cmath>

namespace subvar {

namespace {

Eigen::LLT<Mat> checked_llt(const Mat& g) {
  Eigen::LLT<Mat> llt(g);
  if (llt.info() != Eigen::Success)
    throw GeometryError(ErrorKind::MetricDegeneracy, "metric is not positive definite");
  return llt;
}

double gnorm(const Mat& g, const Vec& v) { return std::sqrt(std::max(0.0, v.dot(g * v))); }

}  // namespace

void gram_schmidt(const Mat& g, Vec& X, Vec& Y) {
  const double nx = gnorm(g, X);
  if (nx < 1e-12) throw GeometryError(ErrorKind::DegeneratePlane, "first plane vector vanishes");
  X /= nx;
  const double scale = std::max(1.0, gnorm(g, Y));
  Y -= X.dot(g * Y) * X;
  const double ny = gnorm(g, Y);
  if (ny < 1e-12 * scale) throw GeometryError(ErrorKind::DegeneratePlane, "plane vectors are linearly dependent");
  Y /= ny;
}

FrameGeometry::FrameGeometry(ModelPtr model, MetricFn metric, FdSettings fd)
    : model_(std::move(model)), metric_(std::move(metric)), fd_(fd) {}

Mat FrameGeometry::metric(const Point& x) const { return metric_(x); }

Vec FrameGeometry::Connection::apply(const Vec& X, const Vec& Y) const {
  Vec out = Vec::Zero(X.size());
  for (int mu = 0; mu < X.size(); ++mu)
    if (X(mu) != 0.0) out += X(mu) * (gamma[static_cast<size_t>(mu)] * Y);
  return out;
}

FrameGeometry::Connection FrameGeometry::connection(const Point& x) const {
  const int d = dim();
  Connection conn;
  conn.g = metric_(x);
  conn.c = model_->brackets(x);
  const auto llt = checked_llt(conn.g);
  std::vector<Mat> dg;
  dg.reserve(static_cast<size_t>(d));
  for (int mu = 0; mu < d; ++mu) dg.push_back(directional(*model_, metric_, x, unit(d, mu), fd_));
  // lowered brackets: gc[mu*d+nu](rho) = g(c_{mu nu}, F_rho)
  std::vector<Vec> gc(static_cast<size_t>(d * d));
  for (int mu = 0; mu < d; ++mu)
    for (int nu = 0; nu < d; ++nu) gc[static_cast<size_t>(mu * d + nu)] = conn.g * conn.c.at(mu, nu);
  auto lc = [&](int a, int b, int r) { return gc[static_cast<size_t>(a * d + b)](r); };
  conn.gamma.assign(static_cast<size_t>(d), Mat::Zero(d, d));
  for (int mu = 0; mu < d; ++mu) {
    for (int nu = 0; nu < d; ++nu) {
      Vec k(d);
      for (int rho = 0; rho < d; ++rho) {
        k(rho) = 0.5 * (dg[static_cast<size_t>(mu)](nu, rho) + dg[static_cast<size_t>(nu)](mu, rho) -
                        dg[static_cast<size_t>(rho)](mu, nu) + lc(mu, nu, rho) - lc(mu, rho, nu) - lc(nu, rho, mu));
      }
      conn.gamma[static_cast<size_t>(mu)].col(nu) = llt.solve(k);
    }
  }
  return conn;
}

Vec FrameGeometry::covariant(const Point& x, const FieldFn& X, const FieldFn& Y) const {
  return covariant(x, connection(x), X(x), Y);
}

Vec FrameGeometry::covariant(const Point& x, const Connection& conn, const Vec& X, const FieldFn& Y) const {
  return directional(*model_, Y, x, X, fd_) + conn.apply(X, Y(x));
}

std::vector<Mat> FrameGeometry::riemann(const Point& x) const {
  const int d = dim();
  auto flat = [&](const Point& y) -> Eigen::MatrixXd {
    const Connection c = connection(y);
    Eigen::MatrixXd out(d, d * d);
    for (int mu = 0; mu < d; ++mu) out.middleCols(mu * d, d) = c.gamma[static_cast<size_t>(mu)];
    return out;
  };
  const Connection conn = connection(x);
  std::vector<Eigen::MatrixXd> dgam;
  for (int mu = 0; mu < d; ++mu) dgam.push_back(directional(*model_, flat, x, unit(d, mu), fd_));
  std::vector<Mat> r(static_cast<size_t>(d * d), Mat::Zero(d, d));
  for (int mu = 0; mu < d; ++mu) {
    for (int nu = 0; nu < d; ++nu) {
      if (mu == nu) continue;
      Mat& out = r[static_cast<size_t>(mu * d + nu)];
      const Mat& gm = conn.gamma[static_cast<size_t>(mu)];
      const Mat& gn = conn.gamma[static_cast<size_t>(nu)];
      for (int rho = 0; rho < d; ++rho) {
        Vec v = Vec(dgam[static_cast<size_t>(mu)].col(nu * d + rho)) - Vec(dgam[static_cast<size_t>(nu)].col(mu * d + rho));
        v += gm * gn.col(rho) - gn * gm.col(rho);
        const Vec& c = conn.c.at(mu, nu);
        for (int s = 0; s < d; ++s)
          if (c(s) != 0.0) v -= c(s) * conn.gamma[static_cast<size_t>(s)].col(rho);
        out.col(rho) = v;
      }
    }
  }
  return r;
}

Vec FrameGeometry::riemann_apply(const std::vector<Mat>& r, const Vec& X, const Vec& Y, const Vec& Z) {
  const int d = static_cast<int>(X.size());
  Vec out = Vec::Zero(d);
  for (int mu = 0; mu < d; ++mu)
    for (int nu = 0; nu < d; ++nu) {
      const double w = X(mu) * Y(nu);
      if (w != 0.0) out += w * (r[static_cast<size_t>(mu * d + nu)] * Z);
    }
  return out;
}

double FrameGeometry::sectional(const Mat& g, const std::vector<Mat>& r, const Vec& X, const Vec& Y) const {
  Vec a = X, b = Y;
  gram_schmidt(g, a, b);
  return riemann_apply(r, a, b, b).dot(g * a);
}

double FrameGeometry::sectional(const Point& x, const Vec& X, const Vec& Y) const {
  return sectional(metric_(x), riemann(x), X, Y);
}

double FrameGeometry::compatibility_residual(const Point& x, const Vec& X, const Vec& Y, const Vec& Z) const {
  const Connection conn = connection(x);
  auto gyz = [&](const Point& p) { return Y.dot(metric_(p) * Z); };
  const double lhs = directional(*model_, gyz, x, X, fd_);
  const double rhs = conn.apply(X, Y).dot(conn.g * Z) + Y.dot(conn.g * conn.apply(X, Z));
  return std::abs(lhs - rhs);
}

double FrameGeometry::torsion_residual(const Point& x, const Vec& X, const Vec& Y) const {
  const Connection conn = connection(x);
  return (conn.apply(X, Y) - conn.apply(Y, X) - conn.c.apply(X, Y)).cwiseAbs().maxCoeff();
}

// ---------------------------------------------------------------------------

SubmersionGeometry::SubmersionGeometry(ModelPtr model, MetricFn metric, FdSettings fd)
    : FrameGeometry(std::move(model), std::move(metric), fd) {}

Mat SubmersionGeometry::horizontal_fields(const Mat& g) const {
  const int nn = n(), pp = p();
  Mat H = Mat::Zero(nn + pp, pp);
  H.bottomRows(pp).setIdentity();
  H.topRows(nn) = -g.block(0, nn, nn, pp);
  return H;
}

Vec SubmersionGeometry::project(const Mat& g, const Vec& v, Part part) const {
  checked_llt(g);
  Vec pv = Vec::Zero(v.size());
  pv.head(n()) = (g * v).head(n());
  return part == Part::Vertical ? pv : Vec(v - pv);
}

SubmersionGeometry::ONeill SubmersionGeometry::oneill(const Point& x) const {
  ONeill o;
  o.g = metric_(x);
  checked_llt(o.g);
  o.H = horizontal_fields(o.g);
  o.Hgram_inv = (o.H.transpose() * o.g * o.H).inverse();
  FieldSetFn hf = [this](const Point& y) -> FieldMat { return horizontal_fields(metric_(y)); };
  o.hb = bracket_table(*model_, hf, x, fd_);
  const int pp = p();
  o.a.resize(static_cast<size_t>(pp * pp));
  for (int i = 0; i < pp; ++i)
    for (int j = 0; j < pp; ++j) o.a[static_cast<size_t>(i * pp + j)] = 0.5 * project(o.g, o.hb(i, j), Part::Vertical);
  return o;
}

Vec SubmersionGeometry::h_coeffs(const ONeill& o, const Vec& X) const {
  return project(o.g, X, Part::Horizontal).tail(p());
}

Vec SubmersionGeometry::A(const ONeill& o, const Vec& E, const Vec& F) const {
  const int pp = p();
  const Vec xh = h_coeffs(o, E);
  const Vec fh = h_coeffs(o, F);
  const Vec fv = project(o.g, F, Part::Vertical);
  Vec out = Vec::Zero(dim());
  std::vector<Vec> axh(static_cast<size_t>(pp), Vec::Zero(dim()));  // A_X H_j
  for (int i = 0; i < pp; ++i) {
    if (xh(i) == 0.0) continue;
    for (int j = 0; j < pp; ++j) axh[static_cast<size_t>(j)] += xh(i) * o.a[static_cast<size_t>(i * pp + j)];
  }
  for (int j = 0; j < pp; ++j) out += fh(j) * axh[static_cast<size_t>(j)];
  if (!fv.isZero(0.0)) {
    Vec coef(pp);
    for (int j = 0; j < pp; ++j) coef(j) = -axh[static_cast<size_t>(j)].dot(o.g * fv);
    out += o.H * (o.Hgram_inv * coef);
  }
  return out;
}

double SubmersionGeometry::sec_vertizontal(const ONeill& o, const Vec& X, const Vec& U) const {
  const Vec xh = project(o.g, X, Part::Horizontal);
  const Vec uv = project(o.g, U, Part::Vertical);
  const double nx = xh.dot(o.g * xh), nu = uv.dot(o.g * uv);
  if (nx < 1e-24 || nu < 1e-24) throw GeometryError(ErrorKind::DegeneratePlane, "vertizontal plane needs nonzero X and U");
  const Vec a = A(o, xh, uv);
  return a.dot(o.g * a) / (nx * nu);
}

double SubmersionGeometry::sec_horizontal(const ONeill& o, const Vec& X, const Vec& Y, double base_curvature) const {
  Vec xh = project(o.g, X, Part::Horizontal);
  Vec yh = project(o.g, Y, Part::Horizontal);
  gram_schmidt(o.g, xh, yh);
  const Vec a = A(o, xh, yh);
  return base_curvature - 3.0 * a.dot(o.g * a);
}

Vec SubmersionGeometry::nabla_A(const Point& x, const Vec& Z, const Vec& X, const Vec& Y) const {
  const ONeill o = oneill(x);
  const Vec xh = h_coeffs(o, X), yh = h_coeffs(o, Y);
  const Vec xv = project(o.g, X, Part::Vertical), yv = project(o.g, Y, Part::Vertical);
  FieldFn Xf = [&](const Point& q) -> Vec { return Vec(horizontal_fields(metric_(q)) * xh + xv); };
  FieldFn Yf = [&](const Point& q) -> Vec { return Vec(horizontal_fields(metric_(q)) * yh + yv); };
  FieldFn Af = [&](const Point& q) -> Vec {
    const ONeill oq = oneill(q);
    const Mat Hq = oq.H;
    return A(oq, Vec(Hq * xh + xv), Vec(Hq * yh + yv));
  };
  const Connection conn = connection(x);
  const Vec nAxy = covariant(x, conn, Z, Af);
  const Vec nX = covariant(x, conn, Z, Xf);
  const Vec nY = covariant(x, conn, Z, Yf);
  return nAxy - A(o, nX, Y) - A(o, X, nY);
}

double SubmersionGeometry::sec_general(const Point& x, const Vec& X, const Vec& Y, double theta, const Vec& U,
                                       double base_curvature) const {
  const ONeill o = oneill(x);
  Vec xh = project(o.g, X, Part::Horizontal);
  Vec yh = project(o.g, Y, Part::Horizontal);
  gram_schmidt(o.g, xh, yh);
  Vec uv = project(o.g, U, Part::Vertical);
  const double nu = gnorm(o.g, uv);
  if (nu < 1e-12) throw GeometryError(ErrorKind::DegeneratePlane, "vertical vector vanishes");
  uv /= nu;
  const double kh = sec_horizontal(o, xh, yh, base_curvature);
  const double kv = sec_vertizontal(o, xh, uv);
  // g(R(X,Y)X, U) = -g((nabla_X A)_X Y, U)
  const double mixed = -nabla_A(x, xh, xh, yh).dot(o.g * uv);
  const double c = std::cos(theta), s = std::sin(theta);
  return kv * s * s + kh * c * c - 2.0 * mixed * s * c;
}

Vec SubmersionGeometry::A_connection(const Point& x, const Connection& conn, const Vec& E, const Vec& F) const {
  const Vec eh = project(conn.g, E, Part::Horizontal);
  FieldFn fv = [&](const Point& q) -> Vec { return project(metric_(q), F, Part::Vertical); };
  FieldFn fh = [&](const Point& q) -> Vec { return project(metric_(q), F, Part::Horizontal); };
  return project(conn.g, covariant(x, conn, eh, fv), Part::Horizontal) +
         project(conn.g, covariant(x, conn, eh, fh), Part::Vertical);
}

double SubmersionGeometry::totally_geodesic_residual(const Point& x) const {
  const Connection conn = connection(x);
  double worst = 0.0;
  for (int a = 0; a < n(); ++a)
    for (int b = 0; b < n(); ++b) {
      const Vec v = project(conn.g, conn.gamma[static_cast<size_t>(a)].col(b), Part::Horizontal);
      worst = std::max(worst, gnorm(conn.g, v));
    }
  return worst;
}

double SubmersionGeometry::killing_defect(const Point& x, const FieldFn& K, const FieldFn& X, const FieldFn& Y) const {
  const Mat g = metric_(x);
  auto gxy = [&](const Point& q) { return X(q).dot(metric_(q) * Y(q)); };
  const double kg = directional(*model_, gxy, x, K(x), fd_);
  const Vec kx = bracket(*model_, K, X, x, fd_);
  const Vec ky = bracket(*model_, K, Y, x, fd_);
  return kg - kx.dot(g * Y(x)) - X(x).dot(g * ky);
}

}  // namespace subvar
