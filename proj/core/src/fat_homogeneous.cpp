#include "subvar/fat_homogeneous.hpp"

#include "subvar/formulas.hpp"
#include "subvar/sampling.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

namespace subvar {

namespace {

Vec base_point(const ManifoldModel& m, const Point& x) {
  const Vec y = m.project(x);
  return y / y.norm();
}

// W_j at y for the radius-1/2 sphere bases: twice the parallel frame.
Eigen::MatrixXd sphere_base_frame(const Vec& y) { return 2.0 * sphere_parallel_frame(Eigen::VectorXd(y)); }

FieldFn const_field(int d, const Vec& v) {
  (void)d;
  return [v](const Point&) -> Vec { return v; };
}

FieldFn lift_field(const ManifoldModel& m, int i) {
  return [&m, i](const Point& y) -> Vec {
    Vec v = Vec::Zero(m.dim());
    v.tail(m.p()) = m.base_lift(y).col(i);
    return v;
  };
}

Vec embed_v(int d, const Vec& u) {
  Vec out = Vec::Zero(d);
  out.head(u.size()) = u;
  return out;
}

double variance(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double mean = 0.0;
  for (double a : v) mean += a;
  mean /= static_cast<double>(v.size());
  double s = 0.0;
  for (double a : v) s += (a - mean) * (a - mean);
  return s / static_cast<double>(v.size());
}

void require_sphere_base(const ManifoldModel& m) {
  if (!dynamic_cast<const HopfS7Model*>(&m) && !dynamic_cast<const HopfS3Model*>(&m))
    throw GeometryError(ErrorKind::InvalidArgument, "bump construction needs a Hopf model over a round sphere");
}

}  // namespace

// ---------------------------------------------------------------------------

int levi_civita(int a, int b, int c) {
  if (a == b || b == c || c == a) return 0;
  return ((b - a + 3) % 3 == 1) ? 1 : -1;
}

int epsilon_identity_defect() {
  int worst = 0;
  for (int b = 0; b < 3; ++b)
    for (int c = 0; c < 3; ++c)
      for (int d = 0; d < 3; ++d)
        for (int e = 0; e < 3; ++e) {
          int s = 0;
          for (int a = 0; a < 3; ++a) s += levi_civita(b, c, a) * levi_civita(d, e, a);
          const int rhs = (b == d && c == e ? 1 : 0) - (b == e && c == d ? 1 : 0);
          worst = std::max(worst, std::abs(s - rhs));
        }
  return worst;
}

double su2_bracket_residual(const ManifoldModel& m, const Point& x, FdSettings fd) {
  if (m.n() != 3) throw GeometryError(ErrorKind::InvalidArgument, "SU(2) bracket check needs n = 3");
  const int d = m.dim();
  double worst = 0.0;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      Vec expect = Vec::Zero(d);
      for (int c = 0; c < 3; ++c) expect(c) = 2.0 * levi_civita(a, b, c);
      const Vec got = bracket(m, const_field(d, unit(d, a)), const_field(d, unit(d, b)), x, fd);
      worst = std::max(worst, (got - expect).cwiseAbs().maxCoeff());
    }
  return worst;
}

// ---------------------------------------------------------------------------

std::vector<PlaneDirection> halton_directions(int n, int p, int count, int offset) {
  std::vector<PlaneDirection> out;
  for (int k = 0; k < count; ++k) {
    const std::vector<double> u = halton_point(static_cast<std::uint64_t>(offset + k), n + p);
    PlaneDirection dir{Vec(p), Vec(n)};
    for (int i = 0; i < p; ++i) dir.horizontal(i) = 2.0 * u[static_cast<size_t>(i)] - 1.0;
    for (int a = 0; a < n; ++a) dir.vertical(a) = 2.0 * u[static_cast<size_t>(p + a)] - 1.0;
    dir.horizontal.normalize();
    dir.vertical.normalize();
    out.push_back(dir);
  }
  return out;
}

std::string FatnessScan::csv() const {
  std::string out = "sample_id,direction_id,sec,t\n";
  char buf[128];
  for (const ScanRow& r : rows) {
    std::snprintf(buf, sizeof buf, "%d,%d,%.12e,%.6f\n", r.sample_id, r.direction_id, r.sec, r.t);
    out += buf;
  }
  return out;
}

std::vector<Point> fiber_samples(const ManifoldModel& m, const Point& x, int count) {
  const int n = m.n();
  std::vector<Point> out{x};
  for (int k = 1; k < count; ++k) {
    Vec s(n);
    if (n == 1) {
      s(0) = 2.0 * std::numbers::pi * k / count;
    } else {
      const std::vector<double> u = halton_point(static_cast<std::uint64_t>(k), n);
      for (int a = 0; a < n; ++a) s(a) = std::numbers::pi * (2.0 * u[static_cast<size_t>(a)] - 1.0);
    }
    out.push_back(m.fiber_move(x, s));
  }
  return out;
}

FatnessScan fatness_scan(const VariationEngine& eng, const std::vector<Point>& fiber, double t,
                         const std::vector<PlaneDirection>& dirs, FdSettings fd) {
  if (fiber.empty() || dirs.empty()) throw GeometryError(ErrorKind::InvalidArgument, "fatness scan needs samples");
  const int d = eng.model().dim();
  const SubmersionGeometry geo = eng.geometry(t, fd);
  FatnessScan r;
  r.t = t;
  r.min_sec = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> per(dirs.size());
  for (size_t k = 0; k < fiber.size(); ++k) {
    const SubmersionGeometry::ONeill o = geo.oneill(fiber[k]);
    const Mat L = eng.lifted_frame(fiber[k], t);
    for (size_t q = 0; q < dirs.size(); ++q) {
      const double sec = geo.sec_vertizontal(o, L * dirs[q].horizontal, embed_v(d, dirs[q].vertical));
      per[q].push_back(sec);
      r.min_sec = std::min(r.min_sec, sec);
      r.rows.push_back({static_cast<int>(k), static_cast<int>(q), sec, t});
    }
  }
  for (const auto& v : per) {
    r.variance.push_back(variance(v));
    r.max_variance = std::max(r.max_variance, r.variance.back());
  }
  r.totally_geodesic = geo.totally_geodesic_residual(fiber.front());
  return r;
}

// ---------------------------------------------------------------------------

const char* to_string(BumpCase c) { return c == BumpCase::KillingSeed ? "killing-seed" : "bracket-direction"; }

double bump_f(const BumpConstruction& b, const Vec& y) { return b.offset + 0.5 * b.slope * y(b.y_dir + 1); }

double bump_rho(const BumpConstruction& b, const Vec& y) {
  if (!b.cutoff) return 1.0;
  Vec y0 = Vec::Zero(y.size());
  y0(0) = 1.0;
  const double r = (y - y0).norm();
  if (r <= b.inner) return 1.0;
  if (r >= b.outer) return 0.0;
  const double s = (b.outer - r) / (b.outer - b.inner);
  return s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
}

Vec bump_seed(const ManifoldModel& m, const BumpConstruction& b, const Point& x) {
  if (b.seed_axis < 0 || b.seed_axis >= m.n()) throw GeometryError(ErrorKind::InvalidArgument, "seed axis out of range");
  if (b.seed == SeedKind::Fundamental) return unit(m.n(), b.seed_axis);
  if (!dynamic_cast<const HopfS7Model*>(&m))
    throw GeometryError(ErrorKind::InvalidArgument, "left-invariant seeds exist on the S^7 models only");
  return Vec(HopfS7Model::left_invariant(x, b.seed_axis));
}

Point pole_point(const ManifoldModel& m) {
  if (const auto* s7 = dynamic_cast<const HopfS7Model*>(&m)) {
    Eigen::VectorXd y = Eigen::VectorXd::Zero(5);
    y(0) = 1.0;
    return s7->section(y);
  }
  if (const auto* s3 = dynamic_cast<const HopfS3Model*>(&m)) return s3->section(Eigen::Vector3d(1.0, 0.0, 0.0));
  throw GeometryError(ErrorKind::InvalidArgument, "no pole point for model " + m.name());
}

namespace {

// Unit vertical field for the construction.
std::function<Vec(const Point&)> bump_direction(const ModelPtr& model, const BumpConstruction& b, FdSettings fd) {
  const ManifoldModel* m = model.get();
  if (b.kase == BumpCase::KillingSeed)
    return [m, b](const Point& y) -> Vec {
      const Vec xi = bump_seed(*m, b, y);
      return xi / xi.norm();
    };
  return [m, b, fd](const Point& y) -> Vec {
    const Vec br = bracket(*m, lift_field(*m, b.x_dir), lift_field(*m, b.y_dir), y, fd);
    const Vec v = br.head(m->n());
    const double nv = v.norm();
    if (nv < 1e-10) throw GeometryError(ErrorKind::DegenerateDirection, "P_V[X, Y] vanishes");
    return v / nv;
  };
}

double hypothesis_value(const ManifoldModel& m, const BumpConstruction& b, const Vec& U, const Point& y,
                        const FdSettings& fd) {
  const int d = m.dim();
  const Vec br = bracket(m, lift_field(m, b.x_dir), lift_field(m, b.y_dir), y, fd);
  const Vec u = embed_v(d, U);
  return br.dot(u) * embed_v(d, bump_seed(m, b, y)).dot(u);
}

}  // namespace

BumpVariation build_nonconstant_variation(const ModelPtr& model, const BumpConstruction& b, double threshold,
                                          int samples, FdSettings fd) {
  const ManifoldModel& m = *model;
  require_sphere_base(m);
  const int p = m.p();
  if (b.x_dir == b.y_dir || b.x_dir < 0 || b.y_dir < 0 || b.x_dir >= p || b.y_dir >= p)
    throw GeometryError(ErrorKind::InvalidArgument, "bump directions must be distinct base frame indices");
  BumpVariation out;
  out.center = pole_point(m);
  out.fiber = fiber_samples(m, out.center, samples);
  out.U = bump_direction(model, b, fd);
  std::vector<double> h;
  for (const Point& y : out.fiber) h.push_back(hypothesis_value(m, b, out.U(y), y, fd));
  out.hypothesis_variance = variance(h);
  if (out.hypothesis_variance <= threshold)
    throw GeometryError(ErrorKind::Infeasible, "g0([X,Y],U) g0(xi,U) is constant along the fiber");

  out.spec.name = std::string("bump-") + to_string(b.kase);
  out.spec.vertical = [model, b](const Point& y, double) -> Mat {
    const ManifoldModel& mm = *model;
    const Vec yb = base_point(mm, y);
    Mat V = Mat::Zero(mm.n(), mm.p());
    const double w = bump_f(b, yb) * bump_rho(b, yb);
    if (w != 0.0) V.col(b.x_dir) = w * bump_seed(mm, b, y);
    return V;
  };
  return out;
}

FirstDerivativeTerms first_derivative_terms(const ModelPtr& model, const BumpConstruction& b, const Point& x,
                                            const Vec& U, FdSettings fd) {
  const ManifoldModel& m = *model;
  require_sphere_base(m);
  const int p = m.p(), d = m.dim();
  BumpConstruction plain = b;
  plain.cutoff = false;
  VariationSpec spec;
  spec.name = "bump-uncut";
  spec.vertical = [model, plain](const Point& y, double) -> Mat {
    Mat V = Mat::Zero(model->n(), model->p());
    V.col(plain.x_dir) = bump_f(plain, base_point(*model, y)) * bump_seed(*model, plain, y);
    return V;
  };
  const VariationEngine eng(model, spec);
  DerivativeRequest req;
  req.kind = PlaneKind::Vertizontal;
  req.order = 1;
  req.i = b.x_dir;
  req.U = U;
  FirstDerivativeTerms r;
  r.closed_form = closed_form(eng, x, req, fd);

  MetricFn id = [d](const Point&) -> Mat { return Mat::Identity(d, d); };
  const SubmersionGeometry g0(model, id, fd);
  const Vec u = embed_v(d, U / U.norm());
  FieldFn xi = [&m, plain](const Point& y) -> Vec { return embed_v(m.dim(), bump_seed(m, plain, y)); };
  const FieldFn X = lift_field(m, b.x_dir);
  const double f = bump_f(plain, base_point(m, x));
  auto fpi = [&m, plain](const Point& y) { return bump_f(plain, base_point(m, y)); };
  const double gxu = xi(x).dot(u);
  double lie = 0.0, br = 0.0, fr = 0.0;
  for (int j = 0; j < p; ++j) {
    if (j == b.x_dir) continue;
    const FieldFn Wj = lift_field(m, j);
    const Vec xw = bracket(m, X, Wj, x, fd);
    const double c = xw.dot(u);
    lie += c * g0.killing_defect(x, xi, Wj, const_field(d, u));
    br += c * directional(m, fpi, x, Wj(x), fd);
    fr += c * xw.dot(X(x));
  }
  r.lie_term = 0.5 * f * lie;
  r.lie_term_printed = -0.5 * f * lie;
  r.bracket_term = 0.5 * gxu * br;
  r.frame_term = 0.5 * f * gxu * fr;
  return r;
}

// ---------------------------------------------------------------------------

HomogeneousReport homogeneous_action_check(const VariationEngine& eng, const Point& x, const std::vector<double>& ts,
                                           const std::vector<Point>& fiber, const std::vector<PlaneDirection>& dirs,
                                           FdSettings fd) {
  const ManifoldModel& m = eng.model();
  const int n = m.n(), p = m.p(), d = m.dim();
  HomogeneousReport r;
  r.ts = ts;
  for (int b = 0; b < n; ++b) {
    const FieldFn Eb = const_field(d, unit(d, b));
    for (int i = 0; i < p; ++i) {
      FieldFn Vi = [&eng, i, d](const Point& y) -> Vec { return embed_v(d, Vec(eng.vertical(y, 0.0).col(i))); };
      r.bracket = std::max(r.bracket, bracket(m, Eb, Vi, x, fd).norm());
    }
  }
  auto killing_at = [&](double t) {
    const SubmersionGeometry geo = eng.geometry(t, fd);
    double worst = 0.0;
    for (int b = 0; b < n; ++b)
      for (int mu = 0; mu < d; ++mu)
        for (int nu = mu; nu < d; ++nu)
          worst = std::max(worst, std::abs(geo.killing_defect(x, const_field(d, unit(d, b)), const_field(d, unit(d, mu)),
                                                              const_field(d, unit(d, nu)))));
    return worst;
  };
  r.initial_killing = killing_at(0.0);
  for (double t : ts) {
    r.killing.push_back(killing_at(t));
    r.killing_max = std::max(r.killing_max, r.killing.back());
    if (!fiber.empty() && !dirs.empty()) r.variance = std::max(r.variance, fatness_scan(eng, fiber, t, dirs, fd).max_variance);
  }
  return r;
}

// ---------------------------------------------------------------------------

ThreeSasakiReport su2_3sasaki_check(const VariationEngine& eng, const Point& x, const std::vector<double>& ts,
                                    double tol, FdSettings fd) {
  const ManifoldModel& m = eng.model();
  if (m.n() != 3) throw GeometryError(ErrorKind::InvalidArgument, "SU(2) structure check needs n = 3");
  if (eng.spec().time_dependent) throw GeometryError(ErrorKind::Precondition, "SU(2) structure check needs constant omega");
  const int n = 3, p = m.p(), d = m.dim();
  ThreeSasakiReport r;

  // omega^a(pi^*W_j), their fiber derivatives, d omega^a and the wedge matrices
  const Mat W = eng.vertical(x, 0.0);
  auto Vfn = [&eng](const Point& y) -> Mat { return eng.vertical(y, 0.0); };
  std::vector<Mat> Eomega;  // Eomega[b](a, j) = E_b(omega^a(pi^*W_j))
  for (int b = 0; b < n; ++b) Eomega.push_back(directional(m, Vfn, x, unit(d, b), fd));
  std::vector<Mat> D;
  for (int a = 0; a < n; ++a) {
    D.push_back(base_components(m, x, exterior_d(m, extracted_form(eng, a, 0.0), x, fd)));
    r.max_domega = std::max(r.max_domega, D.back().cwiseAbs().maxCoeff());
  }
  auto Om = [&](int b, int c, int i, int j) { return 0.5 * (W(b, i) * W(c, j) - W(b, j) * W(c, i)); };
  for (int b = 0; b < n; ++b)
    for (int c = 0; c < n; ++c)
      for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j) r.max_wedge = std::max(r.max_wedge, std::abs(Om(b, c, i, j)));
  r.closed = r.max_domega <= tol;
  r.wedge_free = r.max_wedge <= tol;
  {
    const Eigen::MatrixXd Wd = W;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(Wd);
    const auto sv = svd.singularValues();
    r.rank_le_one = sv.size() < 2 || sv(1) <= tol * std::max(1.0, sv(0));
  }

  // (i) lemma: 2 d/dt g_t(A_{L_l} L_j, E_a)
  auto atab = [&](double s) -> Eigen::MatrixXd {
    const SubmersionGeometry geo = eng.geometry(s, fd);
    const SubmersionGeometry::ONeill o = geo.oneill(x);
    const Mat L = eng.lifted_frame(x, s);
    Eigen::MatrixXd out(n * p, p);
    for (int l = 0; l < p; ++l)
      for (int j = 0; j < p; ++j) {
        const Vec a = geo.A(o, Vec(L.col(l)), Vec(L.col(j)));
        const Vec ga = o.g * a;
        for (int e = 0; e < n; ++e) out(e * p + l, j) = 2.0 * ga(e);
      }
    return out;
  };
  // (ii) axioms with phi^a X = -A_X E_a on horizontal X
  const int even[3][3] = {{0, 1, 2}, {1, 2, 0}, {2, 0, 1}};
  for (double t : ts) {
    const Eigen::MatrixXd lhs = nth_derivative(atab, t, 1, default_t_step(1), true);
    for (int a = 0; a < n; ++a)
      for (int l = 0; l < p; ++l)
        for (int j = 0; j < p; ++j) {
          double rhs = -2.0 * D[static_cast<size_t>(a)](l, j);
          for (int b = 0; b < n; ++b) {
            for (int c = 0; c < n; ++c) rhs += 4.0 * t * levi_civita(b, c, a) * Om(b, c, l, j);
            rhs += t * W(b, l) * Eomega[static_cast<size_t>(b)](a, j) - t * W(b, j) * Eomega[static_cast<size_t>(b)](a, l);
          }
          r.lemma = std::max(r.lemma, std::abs(lhs(a * p + l, j) - rhs));
        }

    const SubmersionGeometry geo = eng.geometry(t, fd);
    const SubmersionGeometry::ONeill o = geo.oneill(x);
    const Mat L = eng.lifted_frame(x, t);
    auto phi = [&](int a, const Vec& v) -> Vec { return -geo.A(o, v, unit(d, a)); };
    for (int i = 0; i < p; ++i) {
      const Vec Li = L.col(i);
      for (int a = 0; a < n; ++a) {
        const Vec pa = phi(a, Li);
        r.axiom_square = std::max(r.axiom_square, (phi(a, pa) + Li).cwiseAbs().maxCoeff());
        for (int j = 0; j < p; ++j) {
          const double gij = phi(a, Vec(L.col(j))).dot(o.g * pa) - (i == j ? 1.0 : 0.0);
          r.axiom_isometry = std::max(r.axiom_isometry, std::abs(gij));
        }
      }
      for (const auto& perm : even) {
        const Vec lhsv = phi(perm[2], Li) - phi(perm[0], phi(perm[1], Li));
        r.axiom_product = std::max(r.axiom_product, lhsv.cwiseAbs().maxCoeff());
      }
    }
  }
  r.axioms = std::max({r.axiom_square, r.axiom_isometry, r.axiom_product});

  // (iii) second and fourth derivatives of g_t(phi^a L_i, phi^a L_l) at t = 0
  auto pairing = [&](double s) -> Eigen::MatrixXd {
    const SubmersionGeometry geo = eng.geometry(s, fd);
    const SubmersionGeometry::ONeill o = geo.oneill(x);
    const Mat L = eng.lifted_frame(x, s);
    Eigen::MatrixXd out(n * p, p);
    for (int a = 0; a < n; ++a) {
      std::vector<Vec> pa;
      for (int i = 0; i < p; ++i) pa.push_back(geo.A(o, Vec(L.col(i)), unit(d, a)));
      for (int i = 0; i < p; ++i)
        for (int l = 0; l < p; ++l) out(a * p + i, l) = 4.0 * pa[static_cast<size_t>(i)].dot(o.g * pa[static_cast<size_t>(l)]);
    }
    return out;
  };
  const Eigen::MatrixXd d2 = nth_derivative(pairing, 0.0, 2, default_t_step(2), true);
  const Eigen::MatrixXd d4 = nth_derivative(pairing, 0.0, 4, default_t_step(4), true);
  r.d2_fd = r.d2_corrected = r.d2_printed = r.d4_fd = r.d4_printed = Mat::Zero(p, p);
  for (int a = 0; a < n; ++a) {
    const Mat& Da = D[static_cast<size_t>(a)];
    const Mat corr = 8.0 * Da * Da.transpose();
    r.d2_fd += d2.block(a * p, 0, p, p);
    r.d2_corrected += corr;
    r.d2_printed -= corr;
    r.d4_fd += d4.block(a * p, 0, p, p);
    const Mat diff = d2.block(a * p, 0, p, p) - corr;
    r.d2_residual = std::max(r.d2_residual, diff.cwiseAbs().maxCoeff());
    r.d2_printed_residual = std::max(r.d2_printed_residual, (d2.block(a * p, 0, p, p) + corr).cwiseAbs().maxCoeff());
  }
  for (int i = 0; i < p; ++i)
    for (int l = 0; l < p; ++l) {
      double s = 0.0;
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c)
          for (int j = 0; j < p; ++j) s += Om(b, c, i, j) * Om(b, c, j, l);
      r.d4_printed(i, l) = -192.0 * s;
    }
  r.d2_defect = r.d2_corrected.cwiseAbs().maxCoeff();
  r.d4_defect = r.d4_printed.cwiseAbs().maxCoeff();
  for (int i = 0; i < p; ++i)
    for (int l = 0; l < p; ++l)
      r.d4_residual = std::max(r.d4_residual, std::abs(r.d4_fd(i, l) - r.d4_printed(i, l)) /
                                                  std::max(1.0, std::abs(r.d4_printed(i, l))));
  return r;
}

VariationSpec s7_form_variation(std::string name, std::function<Mat(const Vec&)> coeffs) {
  VariationSpec s;
  s.name = std::move(name);
  s.vertical = [coeffs](const Point& x, double) -> Mat {
    const Eigen::Matrix<double, 8, 1> q = x;
    const quat::Q q1 = q.head<4>(), q2 = q.tail<4>();
    Eigen::VectorXd y(5);
    y(0) = q1.squaredNorm() - q2.squaredNorm();
    y.tail<4>() = 2.0 * quat::mul(q1, quat::conj(q2));
    y /= y.norm();
    const Mat C = coeffs(Vec(y));
    if (C.rows() != 3 || C.cols() != 5) throw GeometryError(ErrorKind::InvalidArgument, "form coefficients must be 3 x 5");
    return Mat(Eigen::MatrixXd(C) * sphere_base_frame(Vec(y)));
  };
  return s;
}

VariationSpec s7_gradient_variation(std::string name, const Mat& coeffs) {
  if (coeffs.rows() != 3 || coeffs.cols() != 5)
    throw GeometryError(ErrorKind::InvalidArgument, "gradient coefficients must be 3 x 5");
  return s7_form_variation(std::move(name), [coeffs](const Vec&) { return coeffs; });
}

}  // namespace subvar
