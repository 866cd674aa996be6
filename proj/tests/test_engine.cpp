#include "subvar/forms.hpp"
#include "subvar/variation.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace subvar;
using subvar::testing::LineModel;
using subvar::testing::sample_point;

namespace {

constexpr double kC = 0.7;

VariationEngine line_engine(double c) {
  return VariationEngine(std::make_shared<LineModel>(), constant_variation("c", Mat::Constant(1, 1, c)));
}

Point origin2() { return Point::Zero(2); }

}  // namespace

TEST(MetricOde, ZeroLambdaIsStationary) {
  const MetricState s = metric_ode_solve([](double) { return Mat::Zero(3, 4); }, 3, 4, 0.8, 50);
  EXPECT_TRUE(s.X.isZero(0.0));
  EXPECT_TRUE(s.Y.isIdentity(0.0));
}

TEST(MetricOde, InitialConditionIsIdentity) {
  const MetricState s = metric_ode_solve([](double) { return Mat::Constant(2, 3, 0.4); }, 2, 3, 0.0, 10);
  EXPECT_TRUE(assemble_metric(s).isIdentity(0.0));
}

TEST(MetricOde, LineModelClosedForm) {
  const VariationEngine eng = line_engine(kC);
  for (double t = -1.0; t <= 1.0 + 1e-12; t += 0.25) {
    const Mat g = eng.metric(origin2(), t);
    EXPECT_NEAR(g(0, 0), 1.0, 1e-14);
    EXPECT_NEAR(g(0, 1), kC * t, 1e-8);
    EXPECT_NEAR(g(1, 1), 1.0 + kC * kC * t * t, 1e-8);
  }
}

TEST(MetricOde, HalvedStepsAgree) {
  Mat lam(2, 2);
  lam << 0.3, -0.5, 0.8, 0.1;
  const MetricState a = metric_ode_solve([&](double) { return lam; }, 2, 2, 0.6, 400);
  const MetricState b = metric_ode_solve([&](double) { return lam; }, 2, 2, 0.6, 800);
  EXPECT_LE((assemble_metric(a) - assemble_metric(b)).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Variation, LambdaFromVerticalData) {
  EXPECT_TRUE(line_engine(0.0).lambda(origin2(), 0.0).isZero(0.0));
  EXPECT_DOUBLE_EQ(line_engine(kC).lambda(origin2(), 0.0)(0, 0), kC);
}

TEST(Variation, HorizontalProjectionOnLine) {
  const VariationEngine eng = line_engine(kC);
  const double t = 0.6;
  const SubmersionGeometry geo = eng.geometry(t);
  const Mat g = eng.metric(origin2(), t);
  const Vec ph = geo.project(g, unit(2, 1), Part::Horizontal);
  EXPECT_NEAR(ph(0), -kC * t, 1e-8);
  EXPECT_NEAR(ph(1), 1.0, 1e-14);
  EXPECT_NEAR(ph.dot(g * unit(2, 0)), 0.0, 1e-12);
  EXPECT_LE(geo.project(g, unit(2, 0), Part::Horizontal).norm(), 1e-12);
  // t = 0 with the identity metric
  const Mat g0 = eng.metric(origin2(), 0.0);
  EXPECT_TRUE(eng.geometry(0.0).project(g0, unit(2, 1), Part::Horizontal).isApprox(unit(2, 1)));
}

TEST(Variation, BSharpOnLine) {
  const VariationEngine eng = line_engine(kC);
  const double t = 0.4;
  const Vec b = eng.bsharp(origin2(), t, unit(1, 0));
  EXPECT_NEAR(b(0), -kC * kC * t, 1e-8);
  EXPECT_NEAR(b(1), kC, 1e-12);
  EXPECT_TRUE(line_engine(0.0).bsharp(origin2(), t, unit(1, 0)).isZero(0.0));
}

TEST(Variation, LineInvariantsVanish) {
  const MetricTrajectory traj = line_engine(kC).evolve(origin2(), 0.5);
  const InvariantReport r = check_invariants(line_engine(kC), traj);
  EXPECT_LE(r.max(), 1e-6);
}

TEST(Variation, HopfLambdaFollowsBaseFrame) {
  // V_2 = f E_1: lambda picks up f through the base lift rotation R.
  const ExampleDescriptor ex = instantiate("hopf_s3");
  const Point x = sample_point(ex, 11);
  VariationSpec s;
  s.name = "f";
  s.vertical = [](const Point& y, double) {
    Mat V = Mat::Zero(1, 2);
    V(0, 0) = 0.5 + y(1);
    return V;
  };
  const VariationEngine eng(ex.model, s);
  const Mat R = ex.model->base_lift(x);
  const Mat lam = eng.lambda(x, 0.0);
  EXPECT_NEAR(lam(0, 0), (0.5 + x(1)) * R(0, 0), 1e-14);
  EXPECT_NEAR(lam(0, 1), (0.5 + x(1)) * R(1, 0), 1e-14);
}

TEST(Variation, RandomConstantLambdaInvariantsOnHopf) {
  const ExampleDescriptor ex = instantiate("hopf_s3");
  Mat V(1, 2);
  V << 0.9, -0.4;
  const VariationEngine eng(ex.model, constant_variation("v", V));
  const InvariantReport r = check_invariants(eng, eng.evolve(sample_point(ex, 12), 0.5));
  EXPECT_LE(r.max(), 1e-6);
}

TEST(Variation, TotallyGeodesicPersistsForKillingV) {
  const ExampleDescriptor ex = instantiate("hopf_s3");
  const VariationEngine eng(ex.model, ex.spec("constant").spec);
  EXPECT_LE(totally_geodesic_residual(eng, sample_point(ex, 13), {-0.5, -0.2, 0.0, 0.2, 0.5}), 1e-6);
  const VariationEngine bad(ex.model, ex.spec("fiber_dependent").spec);
  const Point x = sample_point(ex, 13);
  const double small = totally_geodesic_residual(bad, x, {0.05});
  const double large = totally_geodesic_residual(bad, x, {0.1});
  EXPECT_GT(large, 1e-3);
  EXPECT_NEAR(large / small, 2.0, 0.1);  // grows linearly in t
}

TEST(Forms, ExtractedFormOnFlatProduct) {
  // alpha = x dy: B_t(U, P_H e~_i) = (0, x)
  const ExampleDescriptor ex = instantiate("product_r2_s1");
  const VariationEngine eng(ex.model, ex.spec("x_dy").spec);
  const Point x = sample_point(ex, 14);
  const Mat w = extract_forms(eng, x, 0.3);
  EXPECT_NEAR(w(0, 0), 0.0, 1e-12);
  EXPECT_NEAR(w(1, 0), 0.0, 1e-12);
  EXPECT_NEAR(w(2, 0), ex.model->project(x)(0), 1e-9);
}

TEST(Forms, ExtractedFormOnS3xS3) {
  // V_{n+1} = E_2 gives omega^2(e~_{n+1}) = 1 and nothing else.
  const ExampleDescriptor ex = instantiate("s3xs3_to_s3");
  Mat V = Mat::Zero(3, 3);
  V(1, 0) = 1.0;
  const VariationEngine eng(ex.model, constant_variation("e2", V));
  const Mat w = extract_forms(eng, sample_point(ex, 15), 0.0);
  Mat expect = Mat::Zero(6, 3);
  expect(3, 1) = 1.0;
  EXPECT_LE((w - expect).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Killing, DefectDerivativeOnS3xS3) {
  // K = E_1, V_{n+1} = E_2: d/dt (L_K g)(P_H e~_{n+1}, E_3) = g([E_1, E_2], E_3) = 2, second derivative 0.
  const ExampleDescriptor ex = instantiate("s3xs3_to_s3");
  Mat V = Mat::Zero(3, 3);
  V(1, 0) = 1.0;
  const VariationEngine eng(ex.model, constant_variation("e2", V));
  const FieldFn K = [](const Point&) { return unit(6, 0); };
  const KillingDefectReport r = killing_defect_derivative(eng, K, sample_point(ex, 16), 0.0);
  EXPECT_NEAR(r.predicted(0, 2), 2.0, 1e-12);
  EXPECT_NEAR(r.fd_first(0, 2), 2.0, 1e-6);
  EXPECT_LE(r.fd_second.cwiseAbs().maxCoeff(), 1e-6);
  // commuting case: K = E_1 and V = E_1 c
  Mat W = Mat::Zero(3, 3);
  W(0, 1) = 0.7;
  const VariationEngine com(ex.model, constant_variation("e1", W));
  const KillingDefectReport z = killing_defect_derivative(com, K, sample_point(ex, 16), 0.0);
  EXPECT_LE(z.fd_first.cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Killing, FrameCovariance) {
  Mat lam(2, 3);
  lam << 0.2, -0.7, 0.4, 0.5, 0.1, -0.3;
  const double c = std::cos(0.4), s = std::sin(0.4);
  Mat Mv(2, 2);
  Mv << c, -s, s, c;
  Mat Mh = Mat::Identity(3, 3);
  Mh.block(1, 1, 2, 2) = Mv;
  EXPECT_LE(frame_covariance_residual(lam, Mv, Mh, 0.7, 200), 1e-10);
}
