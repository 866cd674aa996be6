#pragma once

#include "subvar/gallery.hpp"
#include "subvar/manifold.hpp"
#include "subvar/sampling.hpp"

#include <memory>

namespace subvar::testing {

// Trivial 1+1 model R x R with coordinates (theta, s) and the coordinate frame.
class LineModel : public RepresentedModel {
 public:
  LineModel()
      : RepresentedModel(ModelInfo{"line", 1, 1, Backend::Chart, "R", 0.0, 2},
                         [](const Point&) { return Eigen::MatrixXd::Identity(2, 2); }) {}
  Vec project(const Point& x) const override { return x.tail(1); }
  Point sample(const std::vector<double>& u) const override {
    Point x(2);
    x << u[0], u[1];
    return x;
  }
};

inline Point sample_point(const ExampleDescriptor& ex, std::uint64_t seed) {
  Rng rng(seed);
  return ex.model->sample(rng.uniform(ex.model->info().sample_dim));
}

}  // namespace subvar::testing
