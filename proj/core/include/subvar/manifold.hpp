#pragma once

#include "subvar/fd.hpp"
#include "subvar/types.hpp"

#include <memory>
#include <string>
#include <vector>

namespace subvar {

enum class Backend { StructureConstant, Chart, Embedded };
const char* to_string(Backend b);

// Structure functions of the adapted frame at one point:
// [F_mu, F_nu] = sum_sigma c(mu, nu)_sigma F_sigma.
class Brackets {
 public:
  explicit Brackets(int dim = 0) : d_(dim), c_(static_cast<size_t>(dim * dim), Vec::Zero(dim)) {}
  int dim() const { return d_; }
  Vec& at(int mu, int nu) { return c_[static_cast<size_t>(mu * d_ + nu)]; }
  const Vec& at(int mu, int nu) const { return c_[static_cast<size_t>(mu * d_ + nu)]; }
  // Bracket of two vectors extended with constant frame components.
  Vec apply(const Vec& X, const Vec& Y) const;

 private:
  int d_;
  std::vector<Vec> c_;
};

struct ModelInfo {
  std::string name;
  int n = 0;  // fiber dimension (vertical frame E_1..E_n come first)
  int p = 0;  // base dimension
  Backend backend = Backend::Chart;
  std::string base;        // human readable base description
  double base_curvature = 0.0;  // constant sectional curvature of the base
  int sample_dim = 0;      // number of unit-cube coordinates consumed by sample()
};

// A point set with an adapted frame {E_a, e~_i}, a retraction moving along frame
// directions, frame structure functions, and the submersion data used by the labs.
class ManifoldModel {
 public:
  explicit ManifoldModel(ModelInfo info) : info_(std::move(info)) {}
  virtual ~ManifoldModel() = default;

  const ModelInfo& info() const { return info_; }
  const std::string& name() const { return info_.name; }
  int n() const { return info_.n; }
  int p() const { return info_.p; }
  int dim() const { return info_.n + info_.p; }
  Backend backend() const { return info_.backend; }
  double base_curvature() const { return info_.base_curvature; }

  // Curve through x with velocity v (frame components) at s = 0.
  virtual Point retract(const Point& x, const Vec& v) const = 0;
  virtual Brackets brackets(const Point& x) const = 0;
  // True when brackets are exact table lookups (no differencing).
  virtual bool exact_brackets() const { return false; }

  // Projection to a representation of the base point.
  virtual Vec project(const Point& x) const = 0;
  // Columns: g0-basic lifts pi^*W_i of the base frame in e~-components.
  virtual Mat base_lift(const Point& x) const;
  // Point reached by moving inside the fiber through x; s has n entries.
  virtual Point fiber_move(const Point& x, const Vec& s) const;
  // Deterministic point from unit-cube coordinates (length info().sample_dim).
  virtual Point sample(const std::vector<double>& u) const = 0;

  // Frame fields as vectors in the ambient or coordinate representation (chart
  // and embedded backends); empty for the structure-constant backend.
  virtual Eigen::MatrixXd frame_matrix(const Point& x) const;

  FdSettings fd;  // differencing used for numerically computed brackets

 private:
  ModelInfo info_;
};

using ModelPtr = std::shared_ptr<const ManifoldModel>;

// Lie group built from SU(2) and U(1) factors with a left-invariant frame.
// su(2) generators are x*i, x*j, x*k with [e_a, e_b] = 2 eps_abc e_c.
class LieFrameModel : public ManifoldModel {
 public:
  enum class Factor { SU2, U1 };
  struct Generator {
    int factor;  // index into factors
    int axis;    // 0..2 for SU2, 0 for U1
  };

  LieFrameModel(ModelInfo info, std::vector<Factor> factors, std::vector<Generator> frame);

  Point retract(const Point& x, const Vec& v) const override;
  Brackets brackets(const Point& x) const override;
  bool exact_brackets() const override { return true; }

  int factor_offset(int f) const { return offsets_[static_cast<size_t>(f)]; }
  const std::vector<Factor>& factors() const { return factors_; }
  const std::vector<Generator>& frame() const { return frame_; }
  int point_size() const { return size_; }

 private:
  std::vector<Factor> factors_;
  std::vector<Generator> frame_;
  std::vector<int> offsets_;
  int size_ = 0;
  Brackets table_;
};

// Frame given as columns in a representation space: coordinates of a chart
// (retraction x + F v) or ambient vectors of an embedded sphere (retraction
// normalize(x + F v)). Brackets come from differencing the frame along curves.
class RepresentedModel : public ManifoldModel {
 public:
  using FrameFn = std::function<Eigen::MatrixXd(const Point&)>;
  RepresentedModel(ModelInfo info, FrameFn frame);

  Point retract(const Point& x, const Vec& v) const override;
  Brackets brackets(const Point& x) const override;
  Eigen::MatrixXd frame_matrix(const Point& x) const override { return frame_(x); }

  // Frame components of a representation-space vector (least squares for
  // embedded). Throws FrameDegeneracy when the frame is singular at x.
  Vec components(const Point& x, const Eigen::VectorXd& w) const;

 private:
  FrameFn frame_;
};

}  // namespace subvar
