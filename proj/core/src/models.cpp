#include "subvar/models.hpp"

#include <cmath>
#include <numbers>

namespace subvar {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

ModelInfo make_info(std::string name, int n, int p, Backend b, std::string base, double kappa, int sdim) {
  ModelInfo i;
  i.name = std::move(name);
  i.n = n;
  i.p = p;
  i.backend = b;
  i.base = std::move(base);
  i.base_curvature = kappa;
  i.sample_dim = sdim;
  return i;
}

void need(const std::vector<double>& u, int k) {
  if (static_cast<int>(u.size()) < k) throw GeometryError(ErrorKind::InvalidArgument, "too few sample coordinates");
}

// polar angle with area-uniform distribution on a cap of the given angle
double cap_theta(double u, double cap) { return std::acos(1.0 - u * (1.0 - std::cos(cap))); }

}  // namespace

Eigen::MatrixXd sphere_parallel_frame(const Eigen::VectorXd& y) {
  const int m = static_cast<int>(y.size()) - 1;
  const double c = y(0);
  if (1.0 + c < 1e-8) throw GeometryError(ErrorKind::FrameDegeneracy, "parallel frame undefined at the antipode");
  Eigen::VectorXd y0 = Eigen::VectorXd::Zero(m + 1);
  y0(0) = 1.0;
  Eigen::MatrixXd F(m + 1, m);
  for (int i = 0; i < m; ++i) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(m + 1);
    v(i + 1) = 1.0;
    F.col(i) = v - (v.dot(y) / (1.0 + c)) * (y0 + y);
  }
  return F;
}

Eigen::VectorXd sphere_cap_point(double theta, const Eigen::VectorXd& dir) {
  Eigen::VectorXd y = Eigen::VectorXd::Zero(dir.size() + 1);
  y(0) = std::cos(theta);
  y.tail(dir.size()) = std::sin(theta) * dir;
  return y;
}

quat::Q unit_quaternion(double u1, double u2, double u3) {
  const double a = std::sqrt(1.0 - u1), b = std::sqrt(u1);
  return quat::make(b * std::cos(kTwoPi * u3), a * std::sin(kTwoPi * u2), a * std::cos(kTwoPi * u2),
                    b * std::sin(kTwoPi * u3));
}

// --- Hopf S^3 ---------------------------------------------------------------

HopfS3Model::HopfS3Model()
    : LieFrameModel(make_info("hopf_s3", 1, 2, Backend::StructureConstant, "S^2(1/2)", 4.0, 3),
                    {Factor::SU2}, {{0, 0}, {0, 1}, {0, 2}}) {}

Vec HopfS3Model::project(const Point& x) const {
  const quat::Q q = x.head<4>();
  return Vec(quat::imag(quat::mul(quat::mul(q, quat::unit_imag(0)), quat::conj(q))));
}

Eigen::MatrixXd HopfS3Model::base_frame(const Vec& y) const { return 2.0 * sphere_parallel_frame(Eigen::VectorXd(y)); }

Eigen::Vector2d HopfS3Model::lift(const Point& x, const Eigen::Vector3d& w) const {
  // d pi(x (a j + b k)) = 2 x (b j - a k) x^-1
  const quat::Q q = x.head<4>();
  const quat::Q m = quat::mul(quat::mul(quat::conj(q), quat::pure(w)), q);
  return {-0.5 * m(3), 0.5 * m(2)};
}

Mat HopfS3Model::base_lift(const Point& x) const {
  const Eigen::MatrixXd W = base_frame(project(x));
  Mat R(2, 2);
  for (int i = 0; i < 2; ++i) R.col(i) = lift(x, W.col(i));
  return R;
}

Point HopfS3Model::section(const Eigen::Vector3d& y) const {
  // rotation taking i to y
  quat::Q q = quat::one() - quat::mul(quat::pure(y), quat::unit_imag(0));
  const double nq = q.norm();
  if (nq < 1e-12) return Point(quat::unit_imag(2));  // y = -i
  return Point(q / nq);
}

Point HopfS3Model::sample(const std::vector<double>& u) const {
  need(u, 3);
  Eigen::VectorXd dir(2);
  dir << std::cos(kTwoPi * u[1]), std::sin(kTwoPi * u[1]);
  const Eigen::Vector3d y = sphere_cap_point(cap_theta(u[0], cap_angle), dir);
  const quat::Q q = section(y).head<4>();
  return Point(quat::mul(q, quat::exp_imag(Eigen::Vector3d(std::numbers::pi * u[2], 0, 0))));
}

// --- products -----------------------------------------------------------------

ProductR2S1Model::ProductR2S1Model()
    : RepresentedModel(make_info("product_r2_s1", 1, 2, Backend::Chart, "R^2", 0.0, 3),
                       [](const Point&) -> Eigen::MatrixXd { return Eigen::MatrixXd::Identity(3, 3); }) {}

Vec ProductR2S1Model::project(const Point& x) const { return x.tail(2); }

Point ProductR2S1Model::sample(const std::vector<double>& u) const {
  need(u, 3);
  Point x(3);
  x << kTwoPi * u[0], 2.0 * u[1] - 1.0, 2.0 * u[2] - 1.0;
  return x;
}

HeisenbergModel::HeisenbergModel()
    : RepresentedModel(make_info("heisenberg", 1, 2, Backend::Chart, "R^2", 0.0, 3), [](const Point& x) -> Eigen::MatrixXd {
        Eigen::MatrixXd F = Eigen::MatrixXd::Identity(3, 3);
        F(0, 2) = -2.0 * x(1);
        return F;
      }) {}

Vec HeisenbergModel::project(const Point& x) const { return x.tail(2); }

Point HeisenbergModel::sample(const std::vector<double>& u) const {
  need(u, 3);
  Point x(3);
  x << kTwoPi * u[0], 2.0 * u[1] - 1.0, 2.0 * u[2] - 1.0;
  return x;
}

ProductS2S1Model::ProductS2S1Model()
    : RepresentedModel(make_info("product_s2_s1", 1, 2, Backend::Chart, "S^2", 1.0, 3), [](const Point& x) -> Eigen::MatrixXd {
        const double s = std::sin(x(1));
        if (std::abs(s) < 1e-8) throw GeometryError(ErrorKind::FrameDegeneracy, "chart frame singular at a pole");
        Eigen::MatrixXd F = Eigen::MatrixXd::Identity(3, 3);
        F(2, 2) = 1.0 / s;
        return F;
      }) {}

Vec ProductS2S1Model::project(const Point& x) const { return x.tail(2); }

Point ProductS2S1Model::sample(const std::vector<double>& u) const {
  need(u, 3);
  Point x(3);
  x << kTwoPi * u[0], 0.5 + 2.1 * u[1], kTwoPi * u[2];
  return x;
}

ProductS3S1Model::ProductS3S1Model()
    : LieFrameModel(make_info("product_s3_s1", 1, 3, Backend::StructureConstant, "S^3", 1.0, 4),
                    {Factor::SU2, Factor::U1}, {{1, 0}, {0, 0}, {0, 1}, {0, 2}}) {}

Vec ProductS3S1Model::project(const Point& x) const { return x.head(4); }

Point ProductS3S1Model::sample(const std::vector<double>& u) const {
  need(u, 4);
  Point x(5);
  x.head<4>() = unit_quaternion(u[0], u[1], u[2]);
  x(4) = kTwoPi * u[3];
  return x;
}

S3xS3Model::S3xS3Model()
    : LieFrameModel(make_info("s3xs3_to_s3", 3, 3, Backend::StructureConstant, "S^3", 1.0, 6),
                    {Factor::SU2, Factor::SU2}, {{1, 0}, {1, 1}, {1, 2}, {0, 0}, {0, 1}, {0, 2}}) {}

Vec S3xS3Model::project(const Point& x) const { return x.head(4); }

Point S3xS3Model::sample(const std::vector<double>& u) const {
  need(u, 6);
  Point x(8);
  x.head<4>() = unit_quaternion(u[0], u[1], u[2]);
  x.tail<4>() = unit_quaternion(u[3], u[4], u[5]);
  return x;
}

// --- Hopf S^7 -----------------------------------------------------------------

HopfS7Model::HopfS7Model(std::string name)
    : RepresentedModel(make_info(std::move(name), 3, 4, Backend::Embedded, "S^4(1/2)", 4.0, 7), &HopfS7Model::frame) {}

Eigen::Matrix<double, 5, 8> HopfS7Model::jacobian(const Eigen::Matrix<double, 8, 1>& x) {
  const quat::Q q1 = x.head<4>(), q2 = x.tail<4>();
  Eigen::Matrix<double, 5, 8> J;
  for (int c = 0; c < 8; ++c) {
    Eigen::Matrix<double, 8, 1> h = Eigen::Matrix<double, 8, 1>::Zero();
    h(c) = 1.0;
    const quat::Q h1 = h.head<4>(), h2 = h.tail<4>();
    J(0, c) = 2.0 * q1.dot(h1) - 2.0 * q2.dot(h2);
    J.block<4, 1>(1, c) = 2.0 * (quat::mul(h1, quat::conj(q2)) + quat::mul(q1, quat::conj(h2)));
  }
  return J;
}

Eigen::Matrix<double, 8, 1> HopfS7Model::lift(const Eigen::Matrix<double, 8, 1>& x, const Eigen::Matrix<double, 5, 1>& w) {
  // d pi restricted to the horizontal space is 2 x an isometry, so the lift is J^T w / 4
  return 0.25 * jacobian(x).transpose() * w;
}

Eigen::MatrixXd HopfS7Model::frame(const Point& xp) {
  const Eigen::Matrix<double, 8, 1> x = xp;
  const quat::Q q1 = x.head<4>(), q2 = x.tail<4>();
  Eigen::MatrixXd F(8, 7);
  for (int a = 0; a < 3; ++a) {
    F.block<4, 1>(0, a) = quat::mul(q1, quat::unit_imag(a));
    F.block<4, 1>(4, a) = quat::mul(q2, quat::unit_imag(a));
  }
  Eigen::Matrix<double, 5, 1> y;
  y(0) = q1.squaredNorm() - q2.squaredNorm();
  y.tail<4>() = 2.0 * quat::mul(q1, quat::conj(q2));
  y /= y.norm();
  const Eigen::MatrixXd P = sphere_parallel_frame(Eigen::VectorXd(y));
  for (int i = 0; i < 4; ++i) {
    const Eigen::Matrix<double, 5, 1> w = 2.0 * P.col(i);
    F.col(3 + i) = lift(x, w);
  }
  return F;
}

Vec HopfS7Model::project(const Point& x) const {
  const quat::Q q1 = x.head<4>(), q2 = x.tail<4>();
  Vec y(5);
  y(0) = q1.squaredNorm() - q2.squaredNorm();
  y.tail<4>() = 2.0 * quat::mul(q1, quat::conj(q2));
  return y;
}

Point HopfS7Model::section(const Eigen::VectorXd& y) const {
  const double q1 = std::sqrt(std::max(0.0, 0.5 * (1.0 + y(0))));
  if (q1 < 1e-12) throw GeometryError(ErrorKind::FrameDegeneracy, "section undefined at the antipode");
  const quat::Q yv = y.tail<4>();
  Point x = Point::Zero(8);
  x(0) = q1;
  x.tail<4>() = quat::conj(yv) / (2.0 * q1);
  return x;
}

Point HopfS7Model::sample(const std::vector<double>& u) const {
  need(u, 7);
  const quat::Q dir = unit_quaternion(u[1], u[2], u[3]);
  const Eigen::VectorXd y = sphere_cap_point(cap_theta(u[0], cap_angle), Eigen::VectorXd(dir));
  const Point s = section(y);
  const quat::Q g = unit_quaternion(u[4], u[5], u[6]);
  Point x(8);
  x.head<4>() = quat::mul(s.head<4>(), g);
  x.tail<4>() = quat::mul(s.tail<4>(), g);
  return x;
}

Point HopfS7Model::fiber_move(const Point& x, const Vec& s) const {
  const quat::Q g = quat::exp_imag(Eigen::Vector3d(s(0), s(1), s(2)));
  Point y(8);
  y.head<4>() = quat::mul(x.head<4>(), g);
  y.tail<4>() = quat::mul(x.tail<4>(), g);
  return y;
}

Eigen::Vector3d HopfS7Model::left_invariant(const Point& x, int a) {
  const quat::Q q1 = x.head<4>();
  const double n2 = q1.squaredNorm();
  if (n2 < 1e-12) throw GeometryError(ErrorKind::FrameDegeneracy, "equivariant field singular at q1 = 0");
  return quat::imag(quat::mul(quat::mul(quat::conj(q1), quat::unit_imag(a)), q1)) / n2;
}

}  // namespace subvar
