#include "subvar/manifold.hpp"

#include "subvar/quaternion.hpp"

#include <algorithm>
#include <cmath>

namespace subvar {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::GeometryConsistency: return "geometry-consistency";
    case ErrorKind::FrameDegeneracy: return "frame-degeneracy";
    case ErrorKind::MetricDegeneracy: return "metric-degeneracy";
    case ErrorKind::DegenerateDirection: return "degenerate-direction";
    case ErrorKind::DegeneratePlane: return "degenerate-plane";
    case ErrorKind::Precondition: return "precondition";
    case ErrorKind::Infeasible: return "infeasible";
    case ErrorKind::UnsupportedOrder: return "unsupported-order";
    case ErrorKind::InvalidArgument: return "invalid-argument";
  }
  return "unknown";
}

const char* to_string(Backend b) {
  switch (b) {
    case Backend::StructureConstant: return "structure-constant";
    case Backend::Chart: return "chart";
    case Backend::Embedded: return "embedded";
  }
  return "unknown";
}

Vec Brackets::apply(const Vec& X, const Vec& Y) const {
  Vec out = Vec::Zero(d_);
  for (int mu = 0; mu < d_; ++mu) {
    if (X(mu) == 0.0) continue;
    for (int nu = 0; nu < d_; ++nu) {
      if (Y(nu) == 0.0) continue;
      out += (X(mu) * Y(nu)) * at(mu, nu);
    }
  }
  return out;
}

Mat ManifoldModel::base_lift(const Point&) const { return Mat::Identity(p(), p()); }

Point ManifoldModel::fiber_move(const Point& x, const Vec& s) const {
  Vec v = Vec::Zero(dim());
  v.head(n()) = s;
  return retract(x, v);
}

Eigen::MatrixXd ManifoldModel::frame_matrix(const Point&) const { return {}; }

// ---------------------------------------------------------------------------

LieFrameModel::LieFrameModel(ModelInfo info, std::vector<Factor> factors, std::vector<Generator> frame)
    : ManifoldModel(std::move(info)), factors_(std::move(factors)), frame_(std::move(frame)) {
  for (Factor f : factors_) {
    offsets_.push_back(size_);
    size_ += (f == Factor::SU2) ? 4 : 1;
  }
  const int d = dim();
  if (static_cast<int>(frame_.size()) != d)
    throw GeometryError(ErrorKind::GeometryConsistency, "frame size does not match n + p");
  auto index_of = [&](int factor, int axis) {
    for (int k = 0; k < d; ++k)
      if (frame_[static_cast<size_t>(k)].factor == factor && frame_[static_cast<size_t>(k)].axis == axis) return k;
    throw GeometryError(ErrorKind::GeometryConsistency, "frame does not span an su(2) factor");
  };
  table_ = Brackets(d);
  for (int mu = 0; mu < d; ++mu) {
    for (int nu = 0; nu < d; ++nu) {
      const Generator& a = frame_[static_cast<size_t>(mu)];
      const Generator& b = frame_[static_cast<size_t>(nu)];
      if (a.factor != b.factor || factors_[static_cast<size_t>(a.factor)] != Factor::SU2 || a.axis == b.axis) continue;
      const int c = 3 - a.axis - b.axis;
      const double sign = ((b.axis - a.axis + 3) % 3 == 1) ? 1.0 : -1.0;
      table_.at(mu, nu)(index_of(a.factor, c)) = 2.0 * sign;
    }
  }
}

Point LieFrameModel::retract(const Point& x, const Vec& v) const {
  Point y = x;
  for (size_t f = 0; f < factors_.size(); ++f) {
    const int off = offsets_[f];
    if (factors_[f] == Factor::U1) {
      for (int k = 0; k < dim(); ++k)
        if (frame_[static_cast<size_t>(k)].factor == static_cast<int>(f)) y(off) += v(k);
      continue;
    }
    Eigen::Vector3d w = Eigen::Vector3d::Zero();
    for (int k = 0; k < dim(); ++k)
      if (frame_[static_cast<size_t>(k)].factor == static_cast<int>(f)) w(frame_[static_cast<size_t>(k)].axis) += v(k);
    if (w.isZero(0.0)) continue;
    const quat::Q q = x.segment<4>(off);
    y.segment<4>(off) = quat::mul(q, quat::exp_imag(w));
  }
  return y;
}

Brackets LieFrameModel::brackets(const Point&) const { return table_; }

// ---------------------------------------------------------------------------

RepresentedModel::RepresentedModel(ModelInfo info, FrameFn frame)
    : ManifoldModel(std::move(info)), frame_(std::move(frame)) {}

Point RepresentedModel::retract(const Point& x, const Vec& v) const {
  if (v.isZero(0.0)) return x;
  Eigen::VectorXd w = Eigen::VectorXd(x) + frame_(x) * Eigen::VectorXd(v);
  if (backend() == Backend::Embedded) w.normalize();
  return Point(w);
}

Vec RepresentedModel::components(const Point& x, const Eigen::VectorXd& w) const {
  const Eigen::MatrixXd F = frame_(x);
  const Eigen::MatrixXd gram = F.transpose() * F;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram, Eigen::EigenvaluesOnly);
  if (es.eigenvalues()(0) < 1e-12 * std::max(1.0, es.eigenvalues().maxCoeff()))
    throw GeometryError(ErrorKind::FrameDegeneracy, "frame is singular at sample point of " + name());
  return Vec(gram.ldlt().solve(F.transpose() * w));
}

Brackets RepresentedModel::brackets(const Point& x) const {
  const int d = dim();
  const double h = fd.h * std::max(1.0, x.cwiseAbs().maxCoeff());
  std::vector<Eigen::MatrixXd> dF;
  dF.reserve(static_cast<size_t>(d));
  for (int mu = 0; mu < d; ++mu) {
    const Vec e = unit(d, mu);
    auto curve = [&](double s) -> Eigen::MatrixXd { return frame_(retract(x, s * e)); };
    dF.push_back(nth_derivative(curve, 0.0, 1, h, fd.richardson));
  }
  Brackets out(d);
  for (int mu = 0; mu < d; ++mu) {
    for (int nu = mu + 1; nu < d; ++nu) {
      const Eigen::VectorXd w = dF[static_cast<size_t>(mu)].col(nu) - dF[static_cast<size_t>(nu)].col(mu);
      out.at(mu, nu) = components(x, w);
      out.at(nu, mu) = -out.at(mu, nu);
    }
  }
  return out;
}

}  // namespace subvar
