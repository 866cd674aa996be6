#include "subvar/gallery.hpp"

#include "subvar/circle_bundle.hpp"
#include "subvar/sampling.hpp"

#include <chrono>
#include <cmath>

namespace subvar {

namespace {

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

// alpha(W_i) for alpha = <a, W_i(y)> on the S^2(1/2) base of hopf_s3 (exact, the gradient of <a, y>)
// and alpha = y_1 <e_2, W_i(y)> (not closed).
VariationSpec hopf_s3_form(std::shared_ptr<const HopfS3Model> m, bool closed) {
  return circle_variation(closed ? "closed_alpha" : "nonclosed_alpha", [m, closed](const Point& x) -> Vec {
    const Vec y = m->project(x);
    const Eigen::MatrixXd W = m->base_frame(y);
    if (closed) return Vec(W.transpose() * Eigen::Vector3d(0.3, -0.2, 0.5));
    return Vec(y(1) * W.row(2).transpose());
  });
}

// x_0 is the real quaternion part, which changes along the circle fibers: not fiber-Killing.
VariationSpec fiber_dependent() {
  VariationSpec s;
  s.name = "fiber_dependent";
  s.vertical = [](const Point& x, double) -> Mat {
    Mat V = Mat::Zero(1, 2);
    V(0, 0) = 0.8 * x(0);
    return V;
  };
  return s;
}

VariationSpec s7_left_invariant() {
  VariationSpec s;
  s.name = "left_invariant";
  s.vertical = [](const Point& y, double) -> Mat {
    Mat V = Mat::Zero(3, 4);
    V.col(0) = Vec(HopfS7Model::left_invariant(y, 0));
    V.col(1) = 0.5 * Vec(HopfS7Model::left_invariant(y, 1));
    V.col(3) = -0.3 * Vec(HopfS7Model::left_invariant(y, 2));
    return V;
  };
  return s;
}

VariationSpec s7_fundamental(ModelPtr m) {
  VariationSpec s;
  s.name = "fundamental";
  s.vertical = [m](const Point& y, double) -> Mat {
    const Vec b = m->project(y);
    Mat V = Mat::Zero(3, 4);
    V(0, 0) = 1.0 + b(2);
    V(1, 2) = 0.5 * b(1);
    return V;
  };
  return s;
}

Mat s3xs3_constant() {
  Mat V(3, 3);
  V << 0.4, -0.2, 0.1, 0.0, 0.3, -0.5, 0.2, 0.1, 0.25;
  return V;
}

std::vector<RegressionValue> round_hopf_values(double kappa) {
  return {{"vertizontal_sec_t0", 1.0, 0.0, "round unit sphere, totally geodesic fibers"},
          {"base_curvature", kappa, 0.0, "radius 1/2 sphere"}};
}

std::vector<RegressionValue> flat_bundle_values(double kappa) {
  return {{"vertizontal_sec_t0", 0.0, 0.0, "product metric"}, {"base_curvature", kappa, 0.0, "base factor"}};
}

}  // namespace

const NamedSpec& ExampleDescriptor::spec(const std::string& s) const {
  for (const NamedSpec& ns : specs)
    if (ns.name == s) return ns;
  std::string known;
  for (const NamedSpec& ns : specs) known += (known.empty() ? "" : ", ") + ns.name;
  throw CatalogError("example " + name + " has no variation spec '" + s + "' (known: " + known + ")");
}

std::vector<std::string> ExampleDescriptor::spec_names() const {
  std::vector<std::string> out;
  for (const NamedSpec& ns : specs) out.push_back(ns.name);
  return out;
}

std::vector<std::string> catalog_names(bool include_auxiliary) {
  std::vector<std::string> out{"hopf_s3",      "product_r2_s1", "product_s2_s1",  "product_s3_s1",
                               "s3xs3_to_s3", "hopf_s7",       "three_sasaki_s7"};
  if (include_auxiliary) out.push_back("heisenberg");
  return out;
}

ExampleDescriptor instantiate(const std::string& name) {
  ExampleDescriptor ex;
  ex.name = name;
  if (name == "hopf_s3") {
    auto m = std::make_shared<HopfS3Model>();
    ex.model = m;
    ex.frame = "left-invariant x i, x j, x k on SU(2)";
    ex.specs = {{"zero", "lambda = 0", zero_variation(1, 2), true},
                {"constant", "V = (0.6, -0.3) E_1", constant_variation("constant", v2(0.6, -0.3).transpose()), true},
                {"closed_alpha", "alpha = d<a, y>", hopf_s3_form(m, true), true},
                {"nonclosed_alpha", "alpha = y_1 <e_2, W>", hopf_s3_form(m, false), true},
                {"fiber_dependent", "V_1 = 0.8 x_0 E_1, varies along the fiber", fiber_dependent(), false}};
    ex.regression = round_hopf_values(4.0);
  } else if (name == "product_r2_s1") {
    ex.model = std::make_shared<ProductR2S1Model>();
    ex.frame = "coordinate frame d_theta, d_x, d_y";
    ex.specs = {{"zero", "lambda = 0", zero_variation(1, 2), true},
                {"x_dy", "alpha = x dy",
                 circle_variation("x_dy", [](const Point& y) -> Vec { return v2(0.0, y(1)); }), true},
                {"dx", "alpha = dx", constant_variation("dx", v2(1.0, 0.0).transpose()), true}};
    ex.regression = flat_bundle_values(0.0);
  } else if (name == "product_s2_s1") {
    ex.model = std::make_shared<ProductS2S1Model>();
    ex.frame = "d_psi, d_theta, (1/sin theta) d_phi";
    // (1 - cos theta) d phi: d alpha is the area form
    ex.specs = {{"zero", "lambda = 0", zero_variation(1, 2), true},
                {"area_potential", "alpha = (1 - cos theta) d phi",
                 circle_variation("area_potential",
                                  [](const Point& y) -> Vec {
                                    const double th = y(1);
                                    return v2(0.0, (1.0 - std::cos(th)) / std::sin(th));
                                  }),
                 true},
                {"constant", "alpha = 0.5 d theta", constant_variation("constant", v2(0.5, 0.0).transpose()), true}};
    ex.regression = flat_bundle_values(1.0);
  } else if (name == "product_s3_s1") {
    ex.model = std::make_shared<ProductS3S1Model>();
    ex.frame = "d_angle ; left-invariant x i, x j, x k";
    Mat V(1, 3);
    V << 1.0, 0.0, 0.0;
    Mat V2(1, 3);
    V2 << 0.3, -0.4, 0.2;
    ex.specs = {{"zero", "lambda = 0", zero_variation(1, 3), true},
                {"sigma1", "alpha = sigma^1, the dual of x i", constant_variation("sigma1", V), true},
                {"mixed", "alpha = 0.3 sigma^1 - 0.4 sigma^2 + 0.2 sigma^3", constant_variation("mixed", V2), true}};
    ex.regression = flat_bundle_values(1.0);
  } else if (name == "s3xs3_to_s3") {
    ex.model = std::make_shared<S3xS3Model>();
    ex.frame = "left-invariant fields of both factors, fiber = second factor";
    ex.specs = {{"zero", "lambda = 0", zero_variation(3, 3), true},
                {"constant", "constant 3 x 3 V", constant_variation("constant", s3xs3_constant()), true}};
    ex.regression = flat_bundle_values(1.0);
  } else if (name == "hopf_s7" || name == "three_sasaki_s7") {
    auto m = std::make_shared<HopfS7Model>(name);
    ex.model = m;
    ex.frame = "E_a = x e_a (right multiplication), basic lifts of the parallel frame of S^4";
    ex.specs = {{"zero", "lambda = 0", zero_variation(3, 4), true}};
    if (name == "hopf_s7") {
      ex.specs.push_back({"left_invariant", "V_i from left multiplication, equivariant", s7_left_invariant(), true});
      ex.specs.push_back({"fundamental", "V_i = f_i(y) E_a, base dependent coefficients", s7_fundamental(m), true});
      BumpConstruction b;
      ex.specs.push_back({"bump", "rho f E_1 on the first base direction near the pole",
                          build_nonconstant_variation(m, b).spec, true});
    } else {
      Mat c1 = Mat::Zero(3, 5);
      c1(0, 1) = 1.0;
      Mat c2 = c1;
      c2(1, 2) = 1.0;
      ex.specs.push_back({"dy1", "omega^1 = d y_1", s7_gradient_variation("dy1", c1), true});
      ex.specs.push_back({"dy1_dy2", "omega^1 = d y_1, omega^2 = d y_2", s7_gradient_variation("dy1_dy2", c2), true});
      ex.specs.push_back({"y1_dy2", "omega^1 = y_1 d y_2 (not closed)",
                          s7_form_variation("y1_dy2",
                                            [](const Vec& y) {
                                              Mat C = Mat::Zero(3, 5);
                                              C(0, 2) = y(1);
                                              return C;
                                            }),
                          true});
    }
    ex.regression = round_hopf_values(4.0);
  } else if (name == "heisenberg") {
    ex.model = std::make_shared<HeisenbergModel>();
    ex.auxiliary = true;
    ex.frame = "d_theta, d_x, d_y - 2x d_theta";
    ex.specs = {{"zero", "lambda = 0", zero_variation(1, 2), true},
                {"half_x_dy", "alpha = x dy / 2",
                 circle_variation("half_x_dy", [](const Point& y) -> Vec { return v2(0.0, 0.5 * y(1)); }), true},
                {"x2_dy", "alpha = x^2 dy",
                 circle_variation("x2_dy", [](const Point& y) -> Vec { return v2(0.0, y(1) * y(1)); }), true}};
    ex.regression = {{"vertizontal_sec_t0", 1.0, 0.0, "Sasaki structure of the unit Heisenberg group"},
                     {"base_curvature", 0.0, 0.0, "flat base"}};
  } else {
    std::string known;
    for (const std::string& s : catalog_names()) known += (known.empty() ? "" : ", ") + s;
    throw CatalogError("unknown example '" + name + "' (catalog: " + known + ")");
  }
  for (RegressionValue& r : ex.regression) r.tol = ex.tol();
  return ex;
}

bool ValidationReport::pass() const {
  for (const ValidationCheck& c : checks)
    if (!c.pass()) return false;
  return true;
}

const ValidationCheck* ValidationReport::find(const std::string& name) const {
  for (const ValidationCheck& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

ValidationReport self_validate(const ExampleDescriptor& ex, int points, int dense_points, std::uint64_t seed) {
  const auto t0 = std::chrono::steady_clock::now();
  const ManifoldModel& m = *ex.model;
  const int n = m.n(), p = m.p(), d = m.dim();
  const double tol = ex.tol();
  FdSettings fd = m.fd;
  ValidationReport r;
  r.example = ex.name;
  r.points = points;
  r.dense_points = m.backend() == Backend::Embedded ? dense_points : 0;

  Rng rng(seed);
  std::vector<Point> xs;
  for (int k = 0; k < points; ++k) xs.push_back(m.sample(rng.uniform(m.info().sample_dim)));

  double frame = 0.0, anti = 0.0, jac = 0.0, lift = 0.0, move = 0.0, oracle = 0.0, tg = 0.0, vsec = 0.0, su2 = 0.0;
  MetricFn id = [d](const Point&) -> Mat { return Mat::Identity(d, d); };
  const SubmersionGeometry g0(ex.model, id, fd);
  for (const Point& x : xs) {
    if (m.backend() == Backend::Embedded) {
      const Eigen::MatrixXd F = m.frame_matrix(x);
      const Eigen::VectorXd xv = x;
      frame = std::max(frame, (F.transpose() * F - Eigen::MatrixXd::Identity(d, d)).cwiseAbs().maxCoeff());
      frame = std::max(frame, (xv.transpose() * F).cwiseAbs().maxCoeff());
    }
    const Brackets c = m.brackets(x);
    for (int mu = 0; mu < d; ++mu)
      for (int nu = 0; nu < d; ++nu) anti = std::max(anti, (c.at(mu, nu) + c.at(nu, mu)).cwiseAbs().maxCoeff());
    jac = std::max(jac, jacobi_residual(m, x, fd));
    const Mat R = m.base_lift(x);
    lift = std::max(lift, (R.transpose() * R - Mat::Identity(p, p)).cwiseAbs().maxCoeff());
    Vec s(n);
    for (int a = 0; a < n; ++a) s(a) = 0.7 - 0.4 * a;
    move = std::max(move, (m.project(m.fiber_move(x, s)) - m.project(x)).cwiseAbs().maxCoeff());

    const SubmersionGeometry::ONeill o = g0.oneill(x);
    Mat L = Mat::Zero(d, p);
    L.bottomRows(p) = R;
    for (int i = 0; i < p; ++i)
      for (int j = i + 1; j < p; ++j) {
        const Vec a = g0.A(o, Vec(L.col(i)), Vec(L.col(j)));
        const double k = g0.sectional(x, L.col(i), L.col(j)) + 3.0 * a.squaredNorm();
        oracle = std::max(oracle, std::abs(k - m.base_curvature()));
      }
    tg = std::max(tg, g0.totally_geodesic_residual(x));
    const double sec = g0.sec_vertizontal(o, L.col(0), unit(d, 0));
    for (const RegressionValue& rv : ex.regression)
      if (rv.key == "vertizontal_sec_t0") vsec = std::max(vsec, std::abs(sec - rv.value));
    if (n == 3) su2 = std::max(su2, su2_bracket_residual(m, x, fd));
  }
  if (m.backend() == Backend::Embedded) {
    // cheap checks on a denser sample: tangency, orthonormality and Killing E_a
    double kill = 0.0;
    for (int k = 0; k < dense_points; ++k) {
      const Point x = m.sample(rng.uniform(m.info().sample_dim));
      const Eigen::MatrixXd F = m.frame_matrix(x);
      const Eigen::VectorXd xv = x;
      frame = std::max(frame, (F.transpose() * F - Eigen::MatrixXd::Identity(d, d)).cwiseAbs().maxCoeff());
      frame = std::max(frame, (xv.transpose() * F).cwiseAbs().maxCoeff());
      const Brackets c = m.brackets(x);
      // constant-component fields: (L_{E_a} g0)(F_mu, F_nu) = -c(a,mu)_nu - c(a,nu)_mu
      for (int a = 0; a < n; ++a)
        for (int mu = 0; mu < d; ++mu)
          for (int nu = mu; nu < d; ++nu) kill = std::max(kill, std::abs(c.at(a, mu)(nu) + c.at(a, nu)(mu)));
    }
    r.checks.push_back({"frame_orthonormality", frame, tol});
    r.checks.push_back({"vertical_killing", kill, tol});
  }
  r.checks.push_back({"bracket_antisymmetry", anti, tol});
  r.checks.push_back({"jacobi", jac, tol});
  r.checks.push_back({"base_lift_orthogonality", lift, tol});
  r.checks.push_back({"fiber_move", move, tol});
  // second derivatives of numerically differenced brackets: one order looser
  r.checks.push_back({"base_curvature_oracle", oracle, m.exact_brackets() ? tol : 10.0 * tol});
  r.checks.push_back({"totally_geodesic_t0", tg, tol});
  r.checks.push_back({"vertizontal_sec_t0", vsec, m.exact_brackets() ? tol : 10.0 * tol});
  if (n == 3) r.checks.push_back({"su2_brackets", su2, tol});
  for (const RegressionValue& rv : ex.regression)
    if (rv.key == "base_curvature") r.checks.push_back({"base_curvature", std::abs(m.base_curvature() - rv.value), rv.tol});
  if (ex.name == "hopf_s3") {
    // [E_1, e~_2] = 2 e~_3 and cyclic
    const Brackets c = m.brackets(xs.front());
    double worst = 0.0;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        Vec expect = Vec::Zero(3);
        for (int e = 0; e < 3; ++e) expect(e) = 2.0 * levi_civita(a, b, e);
        worst = std::max(worst, (c.at(a, b) - expect).cwiseAbs().maxCoeff());
      }
    r.checks.push_back({"hopf_brackets", worst, tol});
  }
  for (const NamedSpec& ns : ex.specs) {
    if (!ns.fiber_killing) continue;
    const VariationEngine eng(ex.model, ns.spec);
    double k = 0.0;
    for (const Point& x : xs) k = std::max(k, fiber_killing_residual(eng, x, fd));
    r.checks.push_back({"fiber_killing:" + ns.name, k, tol});
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

}  // namespace subvar
