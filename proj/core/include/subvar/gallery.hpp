#pragma once

#include "subvar/fat_homogeneous.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace subvar {

class CatalogError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct NamedSpec {
  std::string name;
  std::string description;
  VariationSpec spec;
  bool fiber_killing = true;  // V_i restricted to each fiber is Killing
};

// Stored values checked by self-validation. origin says where the number comes from.
struct RegressionValue {
  std::string key;
  double value = 0.0;
  double tol = 0.0;
  std::string origin;
};

struct ExampleDescriptor {
  std::string name;
  ModelPtr model;
  bool auxiliary = false;  // usable by name but not part of the published catalog
  std::string frame;       // how the adapted frame is built
  double tol_algebraic = 1e-9;
  double tol_numerical = 1e-5;
  std::vector<NamedSpec> specs;
  std::vector<RegressionValue> regression;

  int n() const { return model->n(); }
  int p() const { return model->p(); }
  double base_curvature() const { return model->base_curvature(); }
  // Tolerance for checks that are exact up to round-off on this backend.
  double tol() const { return model->exact_brackets() ? tol_algebraic : tol_numerical; }
  const NamedSpec& spec(const std::string& name) const;  // throws CatalogError
  std::vector<std::string> spec_names() const;
};

// Catalog names in listing order; auxiliary instances come last.
std::vector<std::string> catalog_names(bool include_auxiliary = true);
ExampleDescriptor instantiate(const std::string& name);  // throws CatalogError

struct ValidationCheck {
  std::string name;
  double residual = 0.0;
  double tol = 0.0;
  bool pass() const { return residual <= tol; }
};

struct ValidationReport {
  std::string example;
  int points = 0;
  int dense_points = 0;
  std::vector<ValidationCheck> checks;
  double seconds = 0.0;
  bool pass() const;
  const ValidationCheck* find(const std::string& name) const;
};

// Frame orthonormality and tangency, bracket antisymmetry and Jacobi, base lift orthogonality,
// fiber moves, the O'Neill horizontal identity against the base curvature, the fiber-Killing
// property of canonical specs and the stored regression values, at points sampled from the seed.
// Embedded backends also get tangency, orthonormality and Killing E_a at dense_points further points.
ValidationReport self_validate(const ExampleDescriptor& ex, int points = 8, int dense_points = 200,
                               std::uint64_t seed = 1);

}  // namespace subvar
