#include "subvar/formulas.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace subvar {

const char* to_string(PlaneKind k) {
  switch (k) {
    case PlaneKind::Vertizontal: return "vertizontal";
    case PlaneKind::Horizontal: return "horizontal";
    case PlaneKind::Pairing: return "pairing";
  }
  return "?";
}

namespace {

std::string fmt_vec(const Vec& v) {
  std::string s = "(";
  char buf[32];
  for (int k = 0; k < v.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%s%.6g", k ? ";" : "", v(k));
    s += buf;
  }
  return s + ")";
}

Vec embed_vertical(const BracketData& b, const Vec& u) {
  if (u.size() == b.d) return u;
  if (u.size() != b.n) throw GeometryError(ErrorKind::InvalidArgument, "vertical argument has wrong size");
  Vec out = Vec::Zero(b.d);
  out.head(b.n) = u;
  return out;
}

void check_order(int order, int max_order) {
  if (order < 1 || order > max_order)
    throw GeometryError(ErrorKind::UnsupportedOrder, "derivative order " + std::to_string(order));
}

void check_rotation(const Mat& a, int p) {
  if (a.rows() != p || a.cols() != p) throw GeometryError(ErrorKind::InvalidArgument, "rotation must be p x p");
  if ((a * a.transpose() - Mat::Identity(p, p)).cwiseAbs().maxCoeff() > 1e-10)
    throw GeometryError(ErrorKind::Precondition, "rotation coefficients are not orthogonal");
}

}  // namespace

std::string DerivativeRequest::describe() const {
  std::ostringstream os;
  char buf[64];
  os << to_string(kind) << "[k=" << order << ",i=" << i;
  if (kind != PlaneKind::Vertizontal) os << ",j=" << j;
  if (kind != PlaneKind::Horizontal) os << ",U=" << fmt_vec(U);
  if (kind == PlaneKind::Pairing) os << ",U2=" << fmt_vec(U2);
  if (rotation.size() > 0) os << ",rotated";
  std::snprintf(buf, sizeof buf, ",t=%.4g]", t);
  os << buf;
  return os.str();
}

// ---------------------------------------------------------------------------

Vec BracketData::pv(const Vec& w) const {
  Vec out = Vec::Zero(d);
  out.head(n) = (g * w).head(n);
  return out;
}

double BracketData::e(int i, int j, const Vec& U) const {
  double s = 0.0;
  for (int k = 0; k < p; ++k) s += gn(i, j, k) * dot(V.col(k), U);
  return s - dot(q(i, j), U);
}

double BracketData::w(int i, int j, const Vec& U) const {
  if (dV.size() == 0) throw GeometryError(ErrorKind::InvalidArgument, "dV/dt terms requested without dV/dt data");
  double s = 0.0;
  for (int k = 0; k < p; ++k) s += gn(i, j, k) * dot(dV.col(k), U);
  return s - dot(dq(i, j), U);
}

BracketData bracket_data(const VariationEngine& eng, const Point& x, double t, bool with_dt, FdSettings fd) {
  const VariationSpec& spec = eng.spec();
  if (with_dt && !spec.vertical_dt)
    throw GeometryError(ErrorKind::InvalidArgument, "variation has no dV/dt callback");
  BracketData b;
  b.n = eng.n();
  b.p = eng.p();
  b.d = b.n + b.p;
  const int n = b.n, p = b.p, d = b.d;
  const int blocks = with_dt ? 3 : 2;
  FieldSetFn fields = [&](const Point& y) -> FieldMat {
    FieldMat f = FieldMat::Zero(d, blocks * p);
    f.leftCols(p) = eng.lifted_frame(y, t);
    f.block(0, p, n, p) = spec.vertical(y, t);
    if (with_dt) f.block(0, 2 * p, n, p) = spec.vertical_dt(y, t);
    return f;
  };
  const BracketTable tab = bracket_table(eng.model(), fields, x, fd);
  b.g = eng.metric(x, t);
  b.L = tab.values.leftCols(p);
  b.V = tab.values.middleCols(p, p);
  if (with_dt) b.dV = tab.values.rightCols(p);
  const size_t pp = static_cast<size_t>(p * p);
  b.LL.resize(pp);
  b.Q.resize(pp);
  b.VV.resize(pp);
  if (with_dt) {
    b.dQ.resize(pp);
    b.dVV.resize(pp);
  }
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) {
      const size_t k = static_cast<size_t>(i * p + j);
      b.LL[k] = tab(i, j);
      b.Q[k] = tab(p + i, j) + tab(i, p + j);
      b.VV[k] = tab(p + i, p + j);
      if (with_dt) {
        b.dQ[k] = tab(2 * p + i, j) + tab(i, 2 * p + j);
        b.dVV[k] = tab(2 * p + i, 2 * p + j);
      }
    }
  b.gN.assign(pp * static_cast<size_t>(p), 0.0);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j)
      for (int k = 0; k < p; ++k) b.gN[static_cast<size_t>((i * p + j) * p + k)] = b.dot(b.ll(i, j), b.L.col(k));
  return b;
}

// ---------------------------------------------------------------------------

Vec dA_horizontal(const BracketData& b, int i, int j) {
  Vec out = Vec::Zero(b.d);
  for (int k = 0; k < b.p; ++k) out += b.gn(i, j, k) * Vec(b.V.col(k));
  return out - b.pv(b.q(i, j));
}

Vec dA_vertical(const BracketData& b, int i, const Vec& Uin) {
  const Vec U = embed_vertical(b, Uin);
  Vec out = Vec::Zero(b.d);
  for (int j = 0; j < b.p; ++j) {
    double s = 0.0;
    for (int k = 0; k < b.p; ++k) s += b.gn(i, j, k) * b.dot(b.V.col(k), U);
    out -= s * Vec(b.L.col(j));
    out += b.dot(b.q(i, j), U) * Vec(b.L.col(j));
    out += b.c(i, j, U) * Vec(b.V.col(j));
  }
  return out;
}

double pairing_derivative(const BracketData& b, int order, int i, int l, const Vec& U1in, const Vec& U2in) {
  check_order(order, 5);
  const Vec U1 = embed_vertical(b, U1in), U2 = embed_vertical(b, U2in);
  double s = 0.0;
  switch (order) {
    case 1:
      for (int j = 0; j < b.p; ++j) s += b.c(l, j, U2) * b.e(i, j, U1) + b.c(i, j, U1) * b.e(l, j, U2);
      return s / 4.0;
    case 2:
      for (int j = 0; j < b.p; ++j)
        s += 2.0 * b.e(l, j, U2) * b.e(i, j, U1) + 2.0 * b.c(l, j, U2) * b.v(i, j, U1) +
             2.0 * b.c(i, j, U1) * b.v(l, j, U2);
      return s / 4.0;
    case 3:
      for (int j = 0; j < b.p; ++j) s += 6.0 * (b.v(i, j, U1) * b.e(l, j, U2) + b.e(i, j, U1) * b.v(l, j, U2));
      return s / 4.0;
    case 4:
      for (int j = 0; j < b.p; ++j) s += 24.0 * b.v(i, j, U1) * b.v(l, j, U2);
      return s / 4.0;
    default:
      return 0.0;
  }
}

double vertizontal_derivative(const BracketData& b, int order, int i, const Vec& Uin) {
  check_order(order, 5);
  const Vec U = embed_vertical(b, Uin);
  double s1 = 0.0, s2 = 0.0;
  switch (order) {
    case 1:
      for (int j = 0; j < b.p; ++j) s1 += b.c(i, j, U) * b.e(i, j, U);
      return 0.5 * s1;
    case 2:
      for (int j = 0; j < b.p; ++j) {
        const double ej = b.e(i, j, U);
        s1 += ej * ej;
        s2 += b.c(i, j, U) * b.v(i, j, U);
      }
      return 0.5 * s1 + s2;
    case 3:
      for (int j = 0; j < b.p; ++j) s1 += b.e(i, j, U) * b.v(i, j, U);
      return 3.0 * s1;
    case 4:
      for (int j = 0; j < b.p; ++j) {
        const double vj = b.v(i, j, U);
        s1 += vj * vj;
      }
      return 6.0 * s1;
    default:
      return 0.0;
  }
}

namespace {

// The printed horizontal terms for the index quadruple (k,l | r,s); the
// (k,l) pair carries V, the (r,s) pair the bracket [L_r, L_s].
double horizontal_first_terms(const BracketData& b, int k, int l, int r, int s) {
  const Vec P = b.pv(b.ll(r, s));
  double t1 = 0.0;
  for (int q = 0; q < b.p; ++q) t1 += b.gn(k, l, q) * b.dot(b.V.col(q), P);
  return -1.5 * t1 + 1.5 * b.dot(b.q(k, l), P);
}

double horizontal_second_terms(const BracketData& b, int k, int l, int r, int s, bool with_dt) {
  const Vec P = b.pv(b.ll(r, s));
  double out = 0.0;
  if (with_dt) {
    double t0 = 0.0;
    for (int q = 0; q < b.p; ++q) t0 += b.gn(k, l, q) * b.dot(b.dV.col(q), P);
    out += -1.5 * t0;
    out += 1.5 * b.dot(b.dq(k, l), P);
  }
  out += -3.0 * b.dot(b.vv(k, l), b.ll(r, s));
  double t2 = 0.0;
  for (int q = 0; q < b.p; ++q)
    for (int m = 0; m < b.p; ++m) t2 += b.gn(k, l, q) * b.gn(r, s, m) * b.dot(b.V.col(q), b.V.col(m));
  out += -1.5 * t2;
  double t3 = 0.0;
  for (int q = 0; q < b.p; ++q) t3 += b.gn(k, l, q) * b.dot(b.V.col(q), b.q(r, s));
  out += 3.0 * t3;
  out += -1.5 * b.dot(b.q(k, l), b.q(r, s));
  return out;
}

}  // namespace

double horizontal_derivative(const BracketData& b, int order, int i, int j) {
  check_order(order, 5);
  double s = 0.0;
  switch (order) {
    case 1:
      return horizontal_first_terms(b, i, j, i, j);
    case 2:
      return horizontal_second_terms(b, i, j, i, j, false);
    case 3: {
      const Vec vv = b.vv(i, j);
      for (int k = 0; k < b.p; ++k) s += b.gn(i, j, k) * b.dot(b.V.col(k), vv);
      return -9.0 * s + 9.0 * b.dot(b.q(i, j), vv);
    }
    case 4:
      return -18.0 * b.dot(b.vv(i, j), b.vv(i, j));
    default:
      return 0.0;
  }
}

double horizontal_second_compact(const BracketData& b, int i, int j) {
  double s = 0.0;
  for (int a = 0; a < b.n; ++a) {
    const Vec Ea = unit(b.d, a);
    const double ea = b.e(i, j, Ea);
    s += ea * ea + 2.0 * b.c(i, j, Ea) * b.v(i, j, Ea);
  }
  return -1.5 * s;
}

double vertizontal_second_general(const BracketData& b, int i, const Vec& Uin) {
  const Vec U = embed_vertical(b, Uin);
  double s1 = 0.0, s2 = 0.0;
  for (int j = 0; j < b.p; ++j) {
    const double ej = b.e(i, j, U);
    s1 += ej * ej;
    s2 += b.c(i, j, U) * (b.w(i, j, U) + 2.0 * b.v(i, j, U));
  }
  return 0.5 * s1 + 0.5 * s2;
}

double horizontal_second_general(const BracketData& b, int i, int j) {
  return horizontal_second_terms(b, i, j, i, j, true);
}

double pairing_second_general(const BracketData& b, int i, int l, const Vec& U1in, const Vec& U2in) {
  const Vec U1 = embed_vertical(b, U1in), U2 = embed_vertical(b, U2in);
  double s = 0.0;
  for (int j = 0; j < b.p; ++j)
    s += 2.0 * b.e(l, j, U2) * b.e(i, j, U1) + b.c(l, j, U2) * (b.w(i, j, U1) + 2.0 * b.v(i, j, U1)) +
         b.c(i, j, U1) * (b.w(l, j, U2) + 2.0 * b.v(l, j, U2));
  return s / 4.0;
}

double rotated_vertizontal(const BracketData& b, const Mat& a, int order, int i, const Vec& Uin,
                           bool printed_coefficients) {
  check_rotation(a, b.p);
  check_order(order, 2);
  const Vec U = embed_vertical(b, Uin);
  const int p = b.p;
  double s1 = 0.0, s2 = 0.0;
  for (int j = 0; j < p; ++j) {
    double in1 = 0.0, in2 = 0.0;
    for (int k = 0; k < p; ++k)
      for (int l = 0; l < p; ++l) {
        const double aa = a(i, k) * a(i, l);
        if (order == 1) {
          in1 += aa * (b.c(k, j, U) * b.e(l, j, U));
        } else {
          in1 += aa * (b.e(l, j, U) * b.e(k, j, U));
          in2 += aa * (b.c(k, j, U) * b.v(l, j, U));
        }
      }
    s1 += in1;
    s2 += in2;
  }
  if (order == 1) return (printed_coefficients ? 2.0 : 0.5) * s1;
  return printed_coefficients ? 2.0 * s1 + 4.0 * s2 : 0.5 * s1 + s2;
}

double rotated_horizontal(const BracketData& b, const Mat& a, int order, int i, int j) {
  check_rotation(a, b.p);
  check_order(order, 2);
  const bool with_dt = b.dV.size() > 0;
  const int p = b.p;
  double s = 0.0;
  for (int k = 0; k < p; ++k)
    for (int l = 0; l < p; ++l)
      for (int r = 0; r < p; ++r)
        for (int q = 0; q < p; ++q) {
          const double aaaa = a(i, k) * a(j, l) * a(i, r) * a(j, q);
          if (aaaa == 0.0) continue;
          s += aaaa * (order == 1 ? horizontal_first_terms(b, k, l, r, q)
                                  : horizontal_second_terms(b, k, l, r, q, with_dt));
        }
  return s;
}

// ---------------------------------------------------------------------------

double closed_form(const VariationEngine& eng, const Point& x, const DerivativeRequest& req, FdSettings fd) {
  if (req.order > 5 || req.order < 1)
    throw GeometryError(ErrorKind::UnsupportedOrder, "derivative order " + std::to_string(req.order));
  const bool general = eng.spec().time_dependent;
  if (general && req.order > 2)
    throw GeometryError(ErrorKind::Precondition, "orders above 2 need t-independent V");
  if (req.order == 5) return 0.0;
  const BracketData b = bracket_data(eng, x, req.t, general, fd);
  const bool rotated = req.rotation.size() > 0;
  if (rotated) {
    if (req.order > 2) throw GeometryError(ErrorKind::UnsupportedOrder, "rotated forms exist for orders 1 and 2");
    if (general && req.kind == PlaneKind::Vertizontal)
      throw GeometryError(ErrorKind::Precondition, "rotated vertizontal forms need t-independent V");
  }
  switch (req.kind) {
    case PlaneKind::Vertizontal: {
      Vec U = embed_vertical(b, req.U);
      U /= std::sqrt(b.dot(U, U));
      if (rotated) return rotated_vertizontal(b, req.rotation, req.order, req.i, U);
      if (general && req.order == 2) return vertizontal_second_general(b, req.i, U);
      return vertizontal_derivative(b, req.order, req.i, U);
    }
    case PlaneKind::Horizontal:
      if (req.i == req.j) throw GeometryError(ErrorKind::DegeneratePlane, "horizontal plane needs i != j");
      if (rotated) return rotated_horizontal(b, req.rotation, req.order, req.i, req.j);
      if (general && req.order == 2) return horizontal_second_general(b, req.i, req.j);
      return horizontal_derivative(b, req.order, req.i, req.j);
    case PlaneKind::Pairing:
      if (rotated) throw GeometryError(ErrorKind::UnsupportedOrder, "no rotated pairing form");
      if (general && req.order == 2) return pairing_second_general(b, req.i, req.j, req.U, req.U2);
      return pairing_derivative(b, req.order, req.i, req.j, req.U, req.U2);
  }
  return 0.0;
}

double plane_quantity(const VariationEngine& eng, const Point& x, const DerivativeRequest& req, double s,
                      FdSettings fd) {
  const int n = eng.n(), d = eng.model().dim();
  const SubmersionGeometry geo = eng.geometry(s, fd);
  const SubmersionGeometry::ONeill o = geo.oneill(x);
  Mat L = eng.lifted_frame(x, s);
  if (req.rotation.size() > 0) L = L * req.rotation.transpose();
  auto vert = [&](const Vec& u) {
    if (u.size() == d) return u;
    Vec out = Vec::Zero(d);
    out.head(n) = u;
    return out;
  };
  switch (req.kind) {
    case PlaneKind::Vertizontal:
      return geo.sec_vertizontal(o, L.col(req.i), vert(req.U));
    case PlaneKind::Horizontal:
      return geo.sec_horizontal(o, L.col(req.i), L.col(req.j), eng.model().base_curvature());
    case PlaneKind::Pairing: {
      const Vec a1 = geo.A(o, L.col(req.i), vert(req.U));
      const Vec a2 = geo.A(o, L.col(req.j), vert(req.U2));
      return a1.dot(o.g * a2);
    }
  }
  return 0.0;
}

double default_t_step(int order) { return order <= 2 ? 1e-2 : 5e-2; }

ComparisonReport fd_compare(const VariationEngine& eng, const Point& x, const DerivativeRequest& req, double tol,
                            double t_window, FdSettings fd) {
  if (req.order < 1 || req.order > 5)
    throw GeometryError(ErrorKind::UnsupportedOrder, "derivative order " + std::to_string(req.order));
  ComparisonReport r;
  r.request = req.describe();
  r.step = default_t_step(req.order);
  r.richardson = 1;
  r.tolerance = tol;
  const int half = req.order == 5 ? 3 : (req.order + 1) / 2;
  if (t_window > 0.0 && std::abs(req.t) + half * r.step > t_window)
    throw GeometryError(ErrorKind::InvalidArgument, "trajectory window too small for the order-" +
                                                        std::to_string(req.order) + " stencil");
  r.closed_form = closed_form(eng, x, req, fd);
  auto q = [&](double s) { return plane_quantity(eng, x, req, s, fd); };
  r.fd = nth_derivative(q, req.t, req.order, r.step, true);
  r.abs_residual = std::abs(r.closed_form - r.fd);
  r.rel_residual = r.abs_residual / std::max(1.0, std::abs(r.closed_form));
  r.pass = (req.order == 5 ? std::abs(r.fd) : r.rel_residual) <= tol;
  return r;
}

PolyFit polynomial_fit_check(const VariationEngine& eng, const Point& x, const DerivativeRequest& req, double half,
                             int points, FdSettings fd) {
  if (eng.spec().time_dependent)
    throw GeometryError(ErrorKind::Precondition, "polynomial claim needs t-independent V");
  if (points < 12) throw GeometryError(ErrorKind::InvalidArgument, "need at least 12 fit points");
  PolyFit out;
  out.points = points;
  Eigen::MatrixXd A(points, 5);
  Eigen::VectorXd y(points);
  for (int k = 0; k < points; ++k) {
    const double t = -half + 2.0 * half * k / (points - 1);
    y(k) = plane_quantity(eng, x, req, t, fd);
    double pw = 1.0;
    for (int m = 0; m < 5; ++m, pw *= t) A(k, m) = pw;
  }
  const Eigen::VectorXd c = A.colPivHouseholderQr().solve(y);
  out.residual = (A * c - y).cwiseAbs().maxCoeff();
  out.coeffs.assign(c.data(), c.data() + c.size());
  return out;
}

std::string comparison_csv_header() { return "suite,example,request,closed_form,fd,residual,verdict\n"; }

std::string comparison_csv_row(const std::string& suite, const std::string& example, const ComparisonReport& r) {
  char buf[128];
  std::snprintf(buf, sizeof buf, ",%.12e,%.12e,%.6e,", r.closed_form, r.fd, r.rel_residual);
  std::string req = r.request;
  for (char& ch : req)
    if (ch == ',') ch = ' ';
  return suite + "," + example + "," + req + buf + (r.pass ? "pass" : "fail") + "\n";
}

}  // namespace subvar
