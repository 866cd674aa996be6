#include "subvar/circle_bundle.hpp"
#include "subvar/models.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

using namespace subvar;
using subvar::testing::sample_point;

namespace {

Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

}  // namespace

TEST(Codifferential, FlatPlane) {
  const ExampleDescriptor ex = instantiate("product_r2_s1");
  const Point x = sample_point(ex, 1);
  const auto x_dx = pullback_form(ex.model, [](const Point& y) { return vec2(y(1), 0.0); });
  const auto x_dy = pullback_form(ex.model, [](const Point& y) { return vec2(0.0, y(1)); });
  const auto c = pullback_form(ex.model, [](const Point&) { return vec2(0.3, -1.1); });
  EXPECT_NEAR(base_codifferential(*ex.model, x_dx, x, ex.model->fd), -1.0, 1e-8);
  EXPECT_NEAR(base_codifferential(*ex.model, x_dy, x, ex.model->fd), 0.0, 1e-8);
  EXPECT_NEAR(base_codifferential(*ex.model, c, x, ex.model->fd), 0.0, 1e-8);
}

TEST(Codifferential, Delta0B0OnFlatProduct) {
  const ExampleDescriptor ex = instantiate("product_r2_s1");
  const Point x = sample_point(ex, 2);
  const Delta0Report good = delta0B0_check(VariationEngine(ex.model, ex.spec("x_dy").spec), x, 1e-6, ex.model->fd);
  EXPECT_TRUE(good.is_zero);
  EXPECT_LE(good.consistency, 1e-6);
  VariationSpec xdx = circle_variation("x_dx", [](const Point& y) { return vec2(y(1), 0.0); });
  const Delta0Report bad = delta0B0_check(VariationEngine(ex.model, xdx), x, 1e-6, ex.model->fd);
  EXPECT_FALSE(bad.is_zero);
  EXPECT_NEAR(bad.delta_n(0), -1.0, 1e-6);
  EXPECT_LE(bad.consistency, 1e-6);
}

TEST(FormDerivatives, FlatPlaneXdy) {
  // d alpha(d_x, d_y) = 1/2, so |i_{d_x} d alpha|^2 = 1/4
  const ExampleDescriptor ex = instantiate("product_r2_s1");
  const VariationEngine eng(ex.model, ex.spec("x_dy").spec);
  const FormDerivatives f = form_based_sec_derivatives(eng, sample_point(ex, 3), 0, 0.0);
  EXPECT_NEAR(f.iota_dalpha_sq, 0.25, 1e-9);
  EXPECT_NEAR(f.order1, 0.0, 1e-9);
  EXPECT_NEAR(f.order2, 0.5, 1e-9);
  EXPECT_NEAR(f.order3, 0.0, 1e-9);
  EXPECT_NEAR(f.order2_printed, 4.0 * f.order2, 1e-9);
  const FormDerivatives zero =
      form_based_sec_derivatives(VariationEngine(ex.model, ex.spec("zero").spec), sample_point(ex, 3), 0, 0.0);
  EXPECT_NEAR(zero.order1, 0.0, 1e-12);
  EXPECT_NEAR(zero.order2, 0.0, 1e-12);
}

TEST(FormDerivatives, ReebDirectionOnS3xS1) {
  const ExampleDescriptor ex = instantiate("product_s3_s1");
  const VariationEngine eng(ex.model, ex.spec("sigma1").spec);
  const Point x = sample_point(ex, 4);
  EXPECT_NEAR(form_based_sec_derivatives(eng, x, 0, 0.0).order2, 0.0, 1e-9);
  EXPECT_GT(form_based_sec_derivatives(eng, x, 1, 0.0).order2, 0.1);
  EXPECT_GT(form_based_sec_derivatives(eng, x, 2, 0.0).order2, 0.1);
}

TEST(Contact, RoundHopfIsSasaki) {
  const ExampleDescriptor ex = instantiate("hopf_s3");
  const ContactReport r = contact_check(VariationEngine(ex.model, ex.spec("zero").spec), sample_point(ex, 5), 0.0,
                                        ContactLevel::Sasaki);
  EXPECT_LE(r.level_residual(ContactLevel::Sasaki), 1e-9);
}

TEST(Contact, ProductIsNotContact) {
  const ExampleDescriptor ex = instantiate("product_r2_s1");
  const ContactReport r = contact_check(VariationEngine(ex.model, ex.spec("zero").spec), sample_point(ex, 6), 0.0,
                                        ContactLevel::ContactMetric, ex.model->fd);
  EXPECT_GT(r.level_residual(ContactLevel::ContactMetric), 0.5);
}

TEST(Contact, ClosedAlphaPreservesSasaki) {
  const ExampleDescriptor ex = instantiate("hopf_s3");
  const VariationEngine eng(ex.model, ex.spec("closed_alpha").spec);
  const Point x = sample_point(ex, 7);
  for (double t : {-0.3, -0.1, 0.2, 0.3})
    EXPECT_LE(contact_check(eng, x, t, ContactLevel::Sasaki).level_residual(ContactLevel::Sasaki), 1e-6) << t;
  const VariationEngine open(ex.model, ex.spec("nonclosed_alpha").spec);
  EXPECT_GT(contact_check(open, x, 0.3, ContactLevel::KContact).level_residual(ContactLevel::KContact), 1e-3);
}

TEST(Contact, IsometryDefectSecondDerivative) {
  const ExampleDescriptor ex = instantiate("hopf_s3");
  const VariationEngine eng(ex.model, ex.spec("nonclosed_alpha").spec);
  const Point x = sample_point(ex, 8);
  for (int i = 0; i < 2; ++i) {
    const IsometryDefect d = a_isometry_defect(eng, x, i);
    EXPECT_GT(std::abs(d.fd_second), 0.1);
    EXPECT_NEAR(d.fd_second, d.corrected, 1e-3 * std::abs(d.corrected));
    EXPECT_NEAR(d.printed, 4.0 * d.corrected, 1e-12);
  }
}

TEST(WeakCms, FlatBaseConditions) {
  const ExampleDescriptor ex = instantiate("heisenberg");
  const Point x = sample_point(ex, 9);
  const std::vector<double> ts{-0.2, 0.0, 0.2};
  EXPECT_LE(weak_cms_check(VariationEngine(ex.model, ex.spec("zero").spec), x, ts).printed_max(), 1e-6);
  const WeakCmsReport good = weak_cms_check(VariationEngine(ex.model, ex.spec("half_x_dy").spec), x, ts);
  EXPECT_LE(good.printed_max(), 1e-6);
  EXPECT_LE(good.direct_max(), 1e-6);
  const WeakCmsReport bad = weak_cms_check(VariationEngine(ex.model, ex.spec("x2_dy").spec), x, ts);
  EXPECT_GT(bad.printed_max(), 1e-3);
  EXPECT_GT(bad.direct_max(), 1e-3);
}

TEST(LieVariation, RotationOnHopfBase) {
  const ExampleDescriptor ex = instantiate("hopf_s3");
  const auto hopf = std::dynamic_pointer_cast<const HopfS3Model>(ex.model);
  ASSERT_TRUE(hopf);
  const FieldFn Z = [hopf](const Point& q) {
    const Eigen::Vector3d y = hopf->project(q);
    Vec out = Vec::Zero(3);
    out.tail(2) = hopf->lift(q, Eigen::Vector3d(0, 0, 1).cross(y));
    return out;
  };
  const LieAlphaReport r = lie_variation_alpha(ex.model, Z, sample_point(ex, 10), 1e-6);
  EXPECT_TRUE(r.killing);
  EXPECT_TRUE(r.closed);
  EXPECT_LE(r.basicness, 1e-6);
}

TEST(LieVariation, DilationIsNotKilling) {
  const ExampleDescriptor ex = instantiate("product_r2_s1");
  const FieldFn Z = [](const Point& q) {
    Vec out = Vec::Zero(3);
    out(1) = q(1);
    return out;
  };
  EXPECT_FALSE(lie_variation_alpha(ex.model, Z, sample_point(ex, 11), 1e-6).killing);
  const FieldFn zero = [](const Point&) { return Vec(Vec::Zero(3)); };
  const LieAlphaReport r0 = lie_variation_alpha(ex.model, zero, sample_point(ex, 11), 1e-6);
  EXPECT_LE(r0.alpha.norm(), 1e-12);
}

TEST(Positivity, FlatBaseWithoutVariation) {
  const ExampleDescriptor ex = instantiate("product_r2_s1");
  PositivitySettings s;
  s.ts = {-0.1, 0.1};
  s.thetas = 8;
  s.planes = 3;
  const PositivityReport r =
      product_positivity_sweep(VariationEngine(ex.model, ex.spec("zero").spec), {sample_point(ex, 12)}, s);
  for (double m : r.min_sec) EXPECT_NEAR(m, 0.0, 1e-9);
}

TEST(Positivity, FlatBaseMixedSign) {
  // horizontal sec = -3 (1/2)^2 t^2 while the vertizontal planes become positive
  const ExampleDescriptor ex = instantiate("product_r2_s1");
  PositivitySettings s;
  s.ts = {0.1, 0.2};
  s.thetas = 16;
  s.planes = 4;
  const PositivityReport r =
      product_positivity_sweep(VariationEngine(ex.model, ex.spec("x_dy").spec), {sample_point(ex, 13)}, s);
  EXPECT_NEAR(r.min_horizontal[1], -0.75 * 0.04, 1e-6);
  EXPECT_GT(r.max_vertizontal[1], 0.0);
  EXPECT_TRUE(r.mixed_sign);
  EXPECT_FALSE(r.positive_for_all_positive_t);
}

TEST(Positivity, RoundBaseAreaForm) {
  const ExampleDescriptor ex = instantiate("product_s2_s1");
  PositivitySettings s;
  s.ts = {0.02, 0.05, 0.1};
  s.thetas = 16;
  s.planes = 4;
  const PositivityReport r = product_positivity_sweep(VariationEngine(ex.model, ex.spec("area_potential").spec),
                                                      {sample_point(ex, 14), sample_point(ex, 15)}, s, ex.model->fd);
  EXPECT_TRUE(r.nondegenerate);
  EXPECT_LE(r.nabla_condition, 1e-6);
  for (double m : r.min_sec) EXPECT_GT(m, 0.0);
  EXPECT_TRUE(r.positive_for_all_positive_t);
  const std::string csv = r.csv();
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "point_id,t,theta,plane_id,sec,min_flag");
}
