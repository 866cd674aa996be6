#include "subvar/fat_homogeneous.hpp"
#include "subvar/models.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

using namespace subvar;
using subvar::testing::sample_point;

namespace {

Point generic_s7_point(const HopfS7Model& m) {
  Eigen::VectorXd y(5);
  y << 0.8, 0.3, 0.4, -0.2, 0.1;
  return m.section(y.normalized());
}

}  // namespace

TEST(Su2, EpsilonContraction) { EXPECT_EQ(epsilon_identity_defect(), 0); }

TEST(Su2, LeviCivita) {
  EXPECT_EQ(levi_civita(0, 1, 2), 1);
  EXPECT_EQ(levi_civita(2, 1, 0), -1);
  EXPECT_EQ(levi_civita(0, 0, 2), 0);
}

TEST(Su2, S7VerticalBrackets) {
  const auto m = std::make_shared<HopfS7Model>();
  EXPECT_LE(su2_bracket_residual(*m, generic_s7_point(*m), m->fd), 1e-6);
  const ExampleDescriptor s3 = instantiate("hopf_s3");
  EXPECT_THROW(su2_bracket_residual(*s3.model, sample_point(s3, 1)), GeometryError);
}

TEST(Fatness, RoundHopfS3) {
  const ExampleDescriptor ex = instantiate("hopf_s3");
  const VariationEngine eng(ex.model, ex.spec("zero").spec);
  const auto fiber = fiber_samples(*ex.model, sample_point(ex, 2), 6);
  const FatnessScan s = fatness_scan(eng, fiber, 0.0, halton_directions(1, 2, 5));
  EXPECT_NEAR(s.min_sec, 1.0, 1e-9);
  EXPECT_LE(s.max_variance, 1e-18);
}

TEST(Fatness, ProductIsNotFat) {
  const ExampleDescriptor ex = instantiate("product_s3_s1");
  const VariationEngine eng(ex.model, ex.spec("zero").spec);
  const auto fiber = fiber_samples(*ex.model, sample_point(ex, 3), 4);
  EXPECT_NEAR(fatness_scan(eng, fiber, 0.0, halton_directions(1, 3, 4)).min_sec, 0.0, 1e-9);
}

TEST(Fatness, S7BumpIsFatButNotConstant) {
  const auto m = std::make_shared<HopfS7Model>();
  const BumpVariation b = build_nonconstant_variation(m, BumpConstruction{});
  EXPECT_GT(b.hypothesis_variance, 1e-3);
  const VariationEngine eng(m, b.spec);
  const FatnessScan s = fatness_scan(eng, b.fiber, 0.2, halton_directions(3, 4, 6), m->fd);
  EXPECT_GT(s.min_sec, 0.0);
  EXPECT_GT(s.max_variance, 1e-4);
  EXPECT_LE(s.totally_geodesic, 1e-4);
}

TEST(Fatness, BracketDirectionCase) {
  const auto m = std::make_shared<HopfS7Model>();
  BumpConstruction c;
  c.kase = BumpCase::BracketDirection;
  const BumpVariation b = build_nonconstant_variation(m, c);
  EXPECT_GT(b.hypothesis_variance, 1e-6);
}

TEST(Fatness, CircleFiberIsInfeasible) {
  const ExampleDescriptor ex = instantiate("hopf_s3");
  try {
    build_nonconstant_variation(ex.model, BumpConstruction{});
    FAIL() << "constructed a bump on a circle bundle";
  } catch (const GeometryError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Infeasible);
  }
}

TEST(Fatness, LeftInvariantSeedIsFiberConstant) {
  // an equivariant seed makes the hypothesis constant along fibers
  const auto m = std::make_shared<HopfS7Model>();
  BumpConstruction c;
  c.seed = SeedKind::LeftInvariant;
  try {
    build_nonconstant_variation(m, c);
    FAIL() << "left-invariant seed accepted";
  } catch (const GeometryError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Infeasible);
  }
}

// The first derivative of sec(P_H X, U) splits into a Lie term with +1/2, a bracket term and,
// off the pole, a base-frame term. The sum reproduces the closed form; flipping the Lie-term sign does not.
TEST(Fatness, FirstDerivativeSplitting) {
  const auto m = std::make_shared<HopfS7Model>();
  const Vec U = Vec(Eigen::Vector3d(0.3, -0.6, 0.5)).normalized();
  const Point x = m->fiber_move(generic_s7_point(*m), Vec(Eigen::Vector3d(0.3, 0.5, -0.2)));
  for (int axis = 0; axis < 3; ++axis) {
    BumpConstruction c;
    c.seed = SeedKind::LeftInvariant;
    c.slope = 0.0;
    c.offset = 1.0;
    c.seed_axis = axis;
    const FirstDerivativeTerms f = first_derivative_terms(m, c, x, U, m->fd);
    SCOPED_TRACE(axis);
    EXPECT_NEAR(f.total(), f.closed_form, 1e-5 * std::max(1.0, std::abs(f.closed_form)));
    EXPECT_GT(std::abs(f.lie_term), 1e-3);
    EXPECT_GT(std::abs(f.total_printed() - f.closed_form), 1e-3);
  }
}

TEST(Homogeneous, LeftInvariantKeepsFundamentalFieldsKilling) {
  const ExampleDescriptor ex = instantiate("hopf_s7");
  const Point x = generic_s7_point(dynamic_cast<const HopfS7Model&>(*ex.model));
  const auto fiber = fiber_samples(*ex.model, x, 4);
  const auto dirs = halton_directions(3, 4, 4);
  const HomogeneousReport li = homogeneous_action_check(VariationEngine(ex.model, ex.spec("left_invariant").spec), x,
                                                        {0.1, 0.3}, fiber, dirs, ex.model->fd);
  EXPECT_LE(li.bracket, 1e-6);
  EXPECT_LE(li.killing_max, 1e-5);
  const HomogeneousReport fu = homogeneous_action_check(VariationEngine(ex.model, ex.spec("fundamental").spec), x,
                                                        {0.1, 0.3}, fiber, dirs, ex.model->fd);
  EXPECT_GT(fu.bracket, 1e-3);
  EXPECT_GT(fu.killing_max, 1e-3);
}

TEST(Homogeneous, CircleFiberTrivial) {
  const ExampleDescriptor ex = instantiate("hopf_s3");
  const Point x = sample_point(ex, 4);
  const HomogeneousReport r =
      homogeneous_action_check(VariationEngine(ex.model, ex.spec("constant").spec), x, {0.2},
                               fiber_samples(*ex.model, x, 3), halton_directions(1, 2, 3));
  EXPECT_LE(r.bracket, 1e-12);
  EXPECT_LE(r.killing_max, 1e-6);
}

TEST(ThreeSasaki, ClosedSingleForm) {
  const ExampleDescriptor ex = instantiate("three_sasaki_s7");
  const Point x = generic_s7_point(dynamic_cast<const HopfS7Model&>(*ex.model));
  const ThreeSasakiReport r =
      su2_3sasaki_check(VariationEngine(ex.model, ex.spec("dy1").spec), x, {0.0, 0.1}, 1e-6, ex.model->fd);
  EXPECT_TRUE(r.closed);
  EXPECT_TRUE(r.wedge_free);
  EXPECT_LE(r.lemma, 1e-5);
  EXPECT_LE(r.axioms, 1e-5);
  EXPECT_LE(r.d2_residual, 1e-5);
  EXPECT_LE(r.d4_residual, 5e-3);
}

TEST(ThreeSasaki, WedgeBreaksFourthOrder) {
  const ExampleDescriptor ex = instantiate("three_sasaki_s7");
  const Point x = generic_s7_point(dynamic_cast<const HopfS7Model&>(*ex.model));
  const ThreeSasakiReport r =
      su2_3sasaki_check(VariationEngine(ex.model, ex.spec("dy1_dy2").spec), x, {0.0, 0.1}, 1e-6, ex.model->fd);
  EXPECT_FALSE(r.wedge_free);
  EXPECT_GT(r.d4_defect, 1e-3);
  EXPECT_LE(r.d4_residual, 5e-3);
}

TEST(ThreeSasaki, SecondOrderSignOnNonClosedForm) {
  const ExampleDescriptor ex = instantiate("three_sasaki_s7");
  const Point x = generic_s7_point(dynamic_cast<const HopfS7Model&>(*ex.model));
  const ThreeSasakiReport r =
      su2_3sasaki_check(VariationEngine(ex.model, ex.spec("y1_dy2").spec), x, {0.0, 0.1}, 1e-6, ex.model->fd);
  EXPECT_FALSE(r.closed);
  EXPECT_LE(r.d2_residual, 1e-5);
  EXPECT_GT(r.d2_printed_residual, 1.0);
}

TEST(ThreeSasaki, ZeroForms) {
  const ExampleDescriptor ex = instantiate("three_sasaki_s7");
  const Point x = generic_s7_point(dynamic_cast<const HopfS7Model&>(*ex.model));
  const ThreeSasakiReport r =
      su2_3sasaki_check(VariationEngine(ex.model, ex.spec("zero").spec), x, {0.0, 0.1}, 1e-6, ex.model->fd);
  EXPECT_LE(r.axioms, 1e-9);
  EXPECT_LE(r.d2_defect, 1e-9);
  EXPECT_LE(r.d4_defect, 1e-9);
}
