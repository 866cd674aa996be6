#include "subvar/experiment.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <chrono>
#include <filesystem>
#include <optional>

namespace {

enum Exit { kOk = 0, kSuiteFailure = 1, kInvalidConfig = 2, kGeometry = 3, kIo = 4 };

struct Overrides {
  std::string config;
  std::string out;
  int workers = 0;
  std::optional<std::uint64_t> seed;
  double tol_scale = 1.0;
};

void apply(const Overrides& o, subvar::ExperimentConfig& c) {
  if (!o.out.empty()) c.out_dir = o.out;
  if (o.workers > 0) c.workers = o.workers;
  if (o.seed) c.seed = *o.seed;
  c.tol.scale(o.tol_scale);
}

void print_run(const subvar::RunResult& r) {
  fmt::print("{} ({} / {}): {}{}\n", r.config.name, r.config.example, r.config.constant_v ? "v" : r.config.spec,
             r.pass() ? "PASS" : "FAIL", r.config.expect_fail ? " [negative control]" : "");
  for (const subvar::SuiteResult& s : r.suites) {
    fmt::print("  {:<18} {}\n", s.suite, s.pass() ? "pass" : "fail");
    for (const subvar::Metric& m : s.metrics)
      if (!m.pass()) fmt::print("    {} = {:.6e} (needs {} {:.1e})\n", m.name, m.value, m.op == "gt" ? ">" : "<=", m.tol);
    for (const std::string& n : s.notes) fmt::print("    note: {}\n", n);
  }
}

int cmd_run(const Overrides& o) {
  subvar::ExperimentConfig c = subvar::load_config(o.config);
  apply(o, c);
  const auto t0 = std::chrono::steady_clock::now();
  const subvar::RunResult r = subvar::run_experiment(c);
  spdlog::info("{} finished in {:.2f} s", c.name,
               std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  subvar::write_run(r, c.out_dir);
  print_run(r);
  return r.pass() ? kOk : kSuiteFailure;
}

int cmd_verify_all(const Overrides& o) {
  const std::string out = o.out.empty() ? "verify-out" : o.out;
  std::vector<subvar::RunResult> runs;
  bool pass = true;
  for (subvar::ExperimentConfig c : subvar::verification_battery(o.seed.value_or(1), std::max(o.workers, 1))) {
    c.tol.scale(o.tol_scale);
    c.out_dir = out + "/" + c.name;
    const auto t0 = std::chrono::steady_clock::now();
    runs.push_back(subvar::run_experiment(c));
    spdlog::info("{} finished in {:.2f} s", c.name,
                 std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    subvar::write_run(runs.back(), c.out_dir);
    print_run(runs.back());
    pass = pass && runs.back().pass();
  }
  subvar::write_text(out + "/summary.json", subvar::summary_json(runs));
  fmt::print("verify-all: {} of {} runs as expected\n",
             std::count_if(runs.begin(), runs.end(), [](const auto& r) { return r.pass(); }), runs.size());
  return pass ? kOk : kSuiteFailure;
}

int cmd_list(bool json) {
  std::string out = json ? "[\n" : "";
  bool first = true;
  for (const std::string& name : subvar::catalog_names()) {
    const subvar::ExampleDescriptor ex = subvar::instantiate(name);
    const std::string specs = fmt::format("{}", fmt::join(ex.spec_names(), ","));
    if (json) {
      out += fmt::format("{}  {{\"name\": \"{}\", \"n\": {}, \"p\": {}, \"backend\": \"{}\", \"specs\": \"{}\"}}",
                         first ? "" : ",\n", ex.name, ex.n(), ex.p(), subvar::to_string(ex.model->backend()), specs);
    } else {
      out += fmt::format("{:<16} n={} p={}  {:<18} {}{}\n", ex.name, ex.n(), ex.p(),
                         subvar::to_string(ex.model->backend()), specs, ex.auxiliary ? "  (auxiliary)" : "");
    }
    first = false;
  }
  if (json) out += "\n]\n";
  fmt::print("{}", out);
  return kOk;
}

int cmd_sweep(const Overrides& o) {
  subvar::ExperimentConfig c = subvar::load_config(o.config);
  apply(o, c);
  std::error_code ec;
  std::filesystem::create_directories(c.out_dir, ec);
  if (ec) throw subvar::ReportIoError("cannot create " + c.out_dir + ": " + ec.message());
  subvar::write_text(c.out_dir + "/sweep.csv", subvar::curvature_sweep_csv(c));
  fmt::print("wrote {}/sweep.csv\n", c.out_dir);
  if (std::find(c.suites.begin(), c.suites.end(), "positivity-sweep") != c.suites.end()) {
    subvar::ExperimentConfig p = c;
    p.suites = {"positivity-sweep"};
    const subvar::RunResult r = subvar::run_experiment(p);
    subvar::write_run(r, c.out_dir);
    print_run(r);
    return r.pass() ? kOk : kSuiteFailure;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  auto log = spdlog::stderr_color_mt("subvar");
  spdlog::set_default_logger(log);
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::warn);

  CLI::App app{"Variations of Riemannian submersions: verification suites and sweeps"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "log progress to stderr");

  Overrides o;
  auto common = [&](CLI::App* sub, bool needs_config) {
    auto* opt = sub->add_option("--config", o.config, "experiment config (TOML)");
    if (needs_config) opt->required()->check(CLI::ExistingFile);
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--workers", o.workers, "worker threads")->check(CLI::Range(1, 256));
    sub->add_option_function<std::uint64_t>("--seed", [&](const std::uint64_t& s) { o.seed = s; }, "sampling seed");
    sub->add_option("--tol-scale", o.tol_scale, "multiply every tolerance")->check(CLI::PositiveNumber);
  };
  auto* run = app.add_subcommand("run", "run the suites selected by a config");
  common(run, true);
  auto* verify = app.add_subcommand("verify-all", "run the built-in verification battery");
  common(verify, false);
  bool json = false;
  auto* list = app.add_subcommand("list-examples", "list catalog examples and their canonical specs");
  list->add_flag("--json", json, "JSON output");
  auto* sweep = app.add_subcommand("sweep", "t-sweep of O'Neill curvatures, plus the positivity sweep if selected");
  common(sweep, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInvalidConfig;
  }
  if (verbose) spdlog::set_level(spdlog::level::info);

  try {
    if (run->parsed()) return cmd_run(o);
    if (verify->parsed()) return cmd_verify_all(o);
    if (list->parsed()) return cmd_list(json);
    if (sweep->parsed()) return cmd_sweep(o);
  } catch (const subvar::ConfigError& e) {
    for (const std::string& p : e.problems()) fmt::print(stderr, "config error: {}\n", p);
    return kInvalidConfig;
  } catch (const subvar::CatalogError& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return kInvalidConfig;
  } catch (const subvar::GeometryError& e) {
    fmt::print(stderr, "geometry error: {}\n", e.what());
    return kGeometry;
  } catch (const subvar::ReportIoError& e) {
    fmt::print(stderr, "I/O error: {}\n", e.what());
    return kIo;
  } catch (const std::filesystem::filesystem_error& e) {
    fmt::print(stderr, "I/O error: {}\n", e.what());
    return kIo;
  }
  return kOk;
}
