#pragma once

#include "subvar/gallery.hpp"
#include "subvar/toml.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace subvar {

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

class ReportIoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

const std::vector<std::string>& suite_names();

struct Tolerances {
  double algebraic = 1e-9;
  double numerical = 1e-5;
  double invariants = 1e-4;
  double totally_geodesic = 1e-6;
  double derivative = 1e-3;
  double contact = 1e-6;
  double weak_cms = 1e-6;
  double killing = 1e-5;
  double lemma = 1e-5;
  double d4 = 5e-3;
  double leading = 0.05;  // positivity sweep: max |sec - leading law| / t^2
  void scale(double k);
};

struct ExperimentConfig {
  std::string name = "experiment";
  std::string example;
  std::string spec = "zero";
  std::optional<Mat> constant_v;  // replaces the named spec when present
  std::vector<std::string> suites;
  std::vector<double> ts{-0.2, -0.1, 0.0, 0.1, 0.2};
  int points = 2;
  std::uint64_t seed = 1;
  int workers = 1;
  bool expect_fail = false;  // negative control: the run succeeds iff some gated metric fails
  Tolerances tol;

  std::vector<int> orders{1, 2, 3, 4};
  std::vector<std::string> kinds{"vertizontal", "horizontal"};
  int directions = 6;     // fatness / homogeneous plane directions
  int fiber_samples = 8;
  int thetas = 32;        // positivity sweep
  int planes = 4;

  std::string out_dir = "out";
};

// Schema check and defaults; throws ConfigError listing every problem found.
ExperimentConfig config_from_toml(const toml::Value& root);
ExperimentConfig load_config(const std::string& path);  // also maps parse errors to ConfigError
// Cross-field checks (catalog names, suite applicability, symmetric grid for derivatives).
void validate(const ExperimentConfig& c);

struct Metric {
  Metric() = default;
  Metric(std::string n, double v, double t, std::string o = "le")
      : name(std::move(n)), value(v), tol(t), op(std::move(o)) {}
  std::string name;
  double value = 0.0;
  double tol = 0.0;
  std::string op = "le";  // le: value <= tol, gt: value > tol, info: reported only
  bool pass() const;
};

struct SuiteResult {
  std::string suite;
  std::vector<Metric> metrics;
  std::vector<std::string> notes;
  std::string csv_name;
  std::string csv;
  bool pass() const;
};

struct RunResult {
  ExperimentConfig config;
  std::vector<SuiteResult> suites;
  bool gated_pass() const;
  // expect_fail inverts the verdict
  bool pass() const { return config.expect_fail ? !gated_pass() : gated_pass(); }
};

// Executes the selected suites. GeometryError and CatalogError propagate.
RunResult run_experiment(const ExperimentConfig& c);

// t-sweep of O'Neill curvatures (gnuplot-ready CSV: t then one column per plane).
std::string curvature_sweep_csv(const ExperimentConfig& c);

// summary.json text and the file writers (throw ReportIoError).
std::string summary_json(const std::vector<RunResult>& runs);
void write_run(const RunResult& r, const std::string& dir);
void write_text(const std::string& path, const std::string& text);

// The built-in battery behind verify-all.
std::vector<ExperimentConfig> verification_battery(std::uint64_t seed, int workers);

}  // namespace subvar
