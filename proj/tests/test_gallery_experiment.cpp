#include "subvar/experiment.hpp"
#include "subvar/parallel.hpp"

#include <gtest/gtest.h>

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

using namespace subvar;

TEST(Parallel, ResultsLandInOrder) {
  for (int w : {1, 3, 8}) {
    const auto out = parallel_map<int>(100, w, [](int k) { return k * k; });
    ASSERT_EQ(out.size(), 100u);
    for (int k = 0; k < 100; ++k) EXPECT_EQ(out[static_cast<size_t>(k)], k * k);
  }
  EXPECT_TRUE(parallel_map<int>(0, 4, [](int k) { return k; }).empty());
}

TEST(Parallel, LowestFailingIndexWins) {
  try {
    parallel_map<int>(50, 4, [](int k) -> int {
      if (k == 7 || k == 30) throw std::runtime_error(std::to_string(k));
      return k;
    });
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_STREQ(e.what(), "7");
  }
}

TEST(Gallery, Catalog) {
  const auto names = catalog_names(false);
  EXPECT_EQ(names.size(), 7u);
  EXPECT_EQ(catalog_names(true).back(), "heisenberg");
  EXPECT_THROW(instantiate("klein_bottle"), CatalogError);
  const ExampleDescriptor ex = instantiate("hopf_s3");
  EXPECT_EQ(ex.n(), 1);
  EXPECT_EQ(ex.p(), 2);
  EXPECT_EQ(ex.model->backend(), Backend::StructureConstant);
  EXPECT_THROW(ex.spec("missing"), CatalogError);
  const ExampleDescriptor s7 = instantiate("hopf_s7");
  EXPECT_EQ(s7.model->backend(), Backend::Embedded);
  EXPECT_EQ(s7.n(), 3);
  EXPECT_EQ(s7.p(), 4);
}

TEST(Gallery, SelfValidation) {
  for (const std::string& name : catalog_names()) {
    const auto t0 = std::chrono::steady_clock::now();
    const ValidationReport r = self_validate(instantiate(name));
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    SCOPED_TRACE(name);
    for (const ValidationCheck& c : r.checks) EXPECT_TRUE(c.pass()) << c.name << " " << c.residual << " > " << c.tol;
    EXPECT_LT(secs, 5.0);
  }
}

TEST(Gallery, EmbeddedDensePoints) {
  const ValidationReport r = self_validate(instantiate("hopf_s7"));
  EXPECT_EQ(r.dense_points, 200);
  const ValidationCheck* k = r.find("vertical_killing");
  ASSERT_NE(k, nullptr);
  EXPECT_LE(k->residual, 1e-10);
}

namespace {

ExperimentConfig quick(const std::string& example, const std::string& spec, std::vector<std::string> suites) {
  ExperimentConfig c;
  c.name = example + "_" + spec;
  c.example = example;
  c.spec = spec;
  c.suites = std::move(suites);
  c.points = 2;
  c.ts = {-0.1, 0.0, 0.1};
  c.orders = {1, 2};
  return c;
}

std::string all_text(const RunResult& r) {
  std::string s = summary_json({r});
  for (const SuiteResult& x : r.suites) s += x.csv;
  return s;
}

}  // namespace

TEST(Experiment, InvariantsOnRoundHopf) {
  const RunResult r = run_experiment(quick("hopf_s3", "zero", {"invariants"}));
  EXPECT_TRUE(r.pass());
  for (const Metric& m : r.suites.at(0).metrics)
    if (m.op == "le") EXPECT_LE(m.value, 1e-9) << m.name;
}

TEST(Experiment, FlatProductDerivativesReport) {
  const RunResult r = run_experiment(quick("product_r2_s1", "x_dy", {"derivatives"}));
  EXPECT_TRUE(r.pass());
  const std::string& csv = r.suites.at(0).csv;
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "suite,example,request,closed_form,fd,residual,verdict");
  const size_t row = csv.find("vertizontal[k=2 i=0");
  ASSERT_NE(row, std::string::npos);
  // closed_form column: 2 |i d alpha|^2 = 1/2
  const size_t c0 = csv.find("],", row) + 2;
  EXPECT_NEAR(std::stod(csv.substr(c0, csv.find(',', c0) - c0)), 0.5, 1e-9);
}

TEST(Experiment, FatnessReport) {
  ExperimentConfig c = quick("hopf_s7", "bump", {"fatness"});
  c.ts = {0.1};
  const RunResult r = run_experiment(c);
  EXPECT_TRUE(r.pass());
  const nlohmann::json j = nlohmann::json::parse(summary_json({r}));
  const auto& metrics = j["runs"][0]["suites"][0]["metrics"];
  bool min_positive = false, variance_positive = false;
  for (const auto& m : metrics) {
    if (m["name"] == "min_sec") min_positive = m["value"].get<double>() > 0.0;
    if (m["name"] == "max_fiber_variance") variance_positive = m["value"].get<double>() > 0.0;
  }
  EXPECT_TRUE(min_positive);
  EXPECT_TRUE(variance_positive);
}

TEST(Experiment, NegativeControlInvertsVerdict) {
  ExperimentConfig c = quick("heisenberg", "x2_dy", {"weak-cms"});
  EXPECT_FALSE(run_experiment(c).pass());
  c.expect_fail = true;
  EXPECT_TRUE(run_experiment(c).pass());
}

TEST(Experiment, GeometryErrorsPropagate) {
  EXPECT_THROW(run_experiment(quick("hopf_s3", "bump", {"invariants"})), GeometryError);
  EXPECT_THROW(run_experiment(quick("hopf_s3", "nope", {"invariants"})), ConfigError);
}

TEST(Experiment, WorkerCountDoesNotChangeOutput) {
  ExperimentConfig c = quick("hopf_s3", "nonclosed_alpha", {"invariants", "derivatives", "contact"});
  c.points = 3;
  c.workers = 1;
  const std::string one = all_text(run_experiment(c));
  for (int w : {4, 8}) {
    c.workers = w;
    EXPECT_EQ(all_text(run_experiment(c)), one) << w;
  }
}

TEST(Experiment, SeedChangesSamples) {
  ExperimentConfig c = quick("hopf_s3", "constant", {"invariants"});
  const std::string a = run_experiment(c).suites[0].csv;
  c.seed = 99;
  EXPECT_NE(run_experiment(c).suites[0].csv, a);
}

TEST(Reports, EmptySummary) {
  const nlohmann::json j = nlohmann::json::parse(summary_json({}));
  EXPECT_TRUE(j["runs"].empty());
  EXPECT_EQ(j["suites"].get<int>(), 0);
  EXPECT_TRUE(j["pass"].get<bool>());
}

TEST(Reports, WriteFailureIsIoError) {
  EXPECT_THROW(write_text("/proc/nonexistent/dir/x.json", "{}"), ReportIoError);
}

TEST(Reports, WriteRunLayout) {
  const auto dir = std::filesystem::temp_directory_path() / "subvar_write_run_test";
  std::filesystem::remove_all(dir);
  const RunResult r = run_experiment(quick("hopf_s3", "zero", {"invariants"}));
  write_run(r, dir.string());
  EXPECT_TRUE(std::filesystem::exists(dir / "summary.json"));
  EXPECT_TRUE(std::filesystem::exists(dir / "invariants.csv"));
  std::filesystem::remove_all(dir);
}

TEST(Sweep, CurvatureColumns) {
  ExperimentConfig c = quick("product_r2_s1", "x_dy", {"invariants"});
  const std::string csv = curvature_sweep_csv(c);
  std::istringstream in(csv);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header.rfind("t,", 0), 0u);
  int rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  EXPECT_EQ(rows, 3);
}
