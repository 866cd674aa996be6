#include "subvar/calculus.hpp"
#include "subvar/geometry.hpp"
#include "subvar/variation.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

using namespace subvar;
using subvar::testing::sample_point;

namespace {

SubmersionGeometry round_geometry(const ExampleDescriptor& ex) {
  return SubmersionGeometry(ex.model, [](const Point&) { return Mat::Identity(3, 3); });
}

}  // namespace

TEST(Brackets, HopfFrameIsSu2) {
  const ExampleDescriptor ex = instantiate("hopf_s3");
  const Brackets b = ex.model->brackets(sample_point(ex, 1));
  EXPECT_TRUE(b.at(1, 2).isApprox(2.0 * unit(3, 0)));
  EXPECT_TRUE(b.at(0, 1).isApprox(2.0 * unit(3, 2)));
  EXPECT_TRUE(b.at(2, 2).isZero(0.0));
}

TEST(Brackets, ChartBracket) {
  // [d_x, x d_y] = d_y on R^2 x S^1 with coordinates (theta, x, y)
  const ExampleDescriptor ex = instantiate("product_r2_s1");
  const FieldFn X = [](const Point&) { return unit(3, 1); };
  const FieldFn Y = [](const Point& p) { return Vec(p(1) * unit(3, 2)); };
  const Vec v = bracket(*ex.model, X, Y, sample_point(ex, 2), ex.model->fd);
  EXPECT_LE((v - unit(3, 2)).norm(), 1e-8);
}

TEST(Brackets, JacobiOnEveryExample) {
  for (const std::string& name : catalog_names()) {
    const ExampleDescriptor ex = instantiate(name);
    SCOPED_TRACE(name);
    EXPECT_LE(jacobi_residual(*ex.model, sample_point(ex, 3), ex.model->fd), 10 * ex.tol());
  }
}

TEST(Connection, BiInvariantS3) {
  const ExampleDescriptor ex = instantiate("hopf_s3");
  const SubmersionGeometry geo = round_geometry(ex);
  const Point x = sample_point(ex, 4);
  const auto conn = geo.connection(x);
  EXPECT_LE((conn.apply(unit(3, 0), unit(3, 1)) - unit(3, 2)).norm(), 1e-12);
  EXPECT_LE(conn.apply(unit(3, 0), unit(3, 0)).norm(), 1e-12);
  EXPECT_LE(geo.torsion_residual(x, unit(3, 1), unit(3, 2)), 1e-12);
}

TEST(Connection, FlatProduct) {
  const ExampleDescriptor ex = instantiate("product_r2_s1");
  const SubmersionGeometry geo(ex.model, [](const Point&) { return Mat::Identity(3, 3); }, ex.model->fd);
  const auto conn = geo.connection(sample_point(ex, 5));
  for (int m = 0; m < 3; ++m)
    for (int k = 0; k < 3; ++k) EXPECT_LE(conn.apply(unit(3, m), unit(3, k)).norm(), 1e-9);
}

TEST(ONeill, RoundHopf) {
  const ExampleDescriptor ex = instantiate("hopf_s3");
  const SubmersionGeometry geo = round_geometry(ex);
  const auto o = geo.oneill(sample_point(ex, 6));
  EXPECT_LE((geo.A(o, unit(3, 1), unit(3, 2)) - unit(3, 0)).norm(), 1e-12);
  EXPECT_LE((geo.A(o, unit(3, 1), unit(3, 0)) + unit(3, 2)).norm(), 1e-12);
  EXPECT_NEAR(geo.sec_horizontal(o, unit(3, 1), unit(3, 2), ex.base_curvature()), 1.0, 1e-12);
  EXPECT_NEAR(ex.base_curvature(), 4.0, 0.0);
  EXPECT_NEAR(geo.sec_vertizontal(o, unit(3, 1), unit(3, 0)), 1.0, 1e-12);
  // sec from the full curvature tensor agrees
  EXPECT_NEAR(geo.sectional(sample_point(ex, 6), unit(3, 1), unit(3, 2)), 1.0, 1e-9);
  EXPECT_LE(geo.totally_geodesic_residual(sample_point(ex, 6)), 1e-12);
}

TEST(ONeill, ProductHasNoA) {
  const ExampleDescriptor ex = instantiate("product_s2_s1");
  const SubmersionGeometry geo(ex.model, [](const Point&) { return Mat::Identity(3, 3); }, ex.model->fd);
  const auto o = geo.oneill(sample_point(ex, 7));
  for (const Vec& a : o.a) EXPECT_LE(a.norm(), 1e-8);
  EXPECT_NEAR(geo.sec_vertizontal(o, unit(3, 1), unit(3, 0)), 0.0, 1e-8);
}

TEST(Errors, DegeneratePlanes) {
  const ExampleDescriptor ex = instantiate("hopf_s3");
  const SubmersionGeometry geo = round_geometry(ex);
  const auto o = geo.oneill(sample_point(ex, 8));
  EXPECT_THROW(geo.sec_horizontal(o, unit(3, 1), 2.0 * unit(3, 1), 4.0), GeometryError);
  EXPECT_THROW(geo.sec_vertizontal(o, Vec::Zero(3), unit(3, 0)), GeometryError);
}

TEST(Errors, NonDefiniteMetric) {
  const ExampleDescriptor ex = instantiate("hopf_s3");
  Mat g = Mat::Identity(3, 3);
  g(1, 1) = -1.0;
  const SubmersionGeometry geo(ex.model, [g](const Point&) { return g; });
  EXPECT_THROW(geo.project(g, unit(3, 1), Part::Horizontal), GeometryError);
}
