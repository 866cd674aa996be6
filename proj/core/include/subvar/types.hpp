#pragma once

#include <Eigen/Dense>

#include <functional>
#include <stdexcept>
#include <string>

namespace subvar {

// Every model here has total dimension <= 8 (points of S^7 live in R^8), so
// the small vectors and matrices are stack allocated.
constexpr int kMaxDim = 8;

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;
using Point = Vec;

using ScalarFn = std::function<double(const Point&)>;
using FieldFn = std::function<Vec(const Point&)>;
// Several vector fields evaluated together; column k is field k in frame components.
using MultiFieldFn = std::function<Mat(const Point&)>;
using MetricFn = std::function<Mat(const Point&)>;

enum class ErrorKind {
  GeometryConsistency,
  FrameDegeneracy,
  MetricDegeneracy,
  DegenerateDirection,
  DegeneratePlane,
  Precondition,
  Infeasible,
  UnsupportedOrder,
  InvalidArgument,
};

const char* to_string(ErrorKind kind);

class GeometryError : public std::runtime_error {
 public:
  GeometryError(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

inline Vec unit(int dim, int k) {
  Vec v = Vec::Zero(dim);
  v(k) = 1.0;
  return v;
}

}  // namespace subvar
