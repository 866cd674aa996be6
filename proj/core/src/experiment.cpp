#include "subvar/experiment.hpp"

#include "subvar/circle_bundle.hpp"
#include "subvar/formulas.hpp"
#include "subvar/parallel.hpp"
#include "subvar/sampling.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

namespace subvar {

namespace {

std::string join(const std::vector<std::string>& v, const char* sep = ", ") {
  std::string out;
  for (const std::string& s : v) out += (out.empty() ? "" : sep) + s;
  return out;
}

std::string fmt_e(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12e", v);
  return buf;
}

bool is_sphere_base_s7(const ExampleDescriptor& ex) { return ex.name == "hopf_s7" || ex.name == "three_sasaki_s7"; }

// --- config reading -------------------------------------------------------------

class Reader {
 public:
  std::vector<std::string> problems;

  void check_keys(const toml::Table& t, const std::string& where, const std::set<std::string>& allowed) {
    for (const auto& [k, v] : t)
      if (!allowed.count(k)) problems.push_back(where + ": unknown key '" + k + "'");
  }
  const toml::Value* get(const toml::Table& t, const std::string& k) {
    auto it = t.find(k);
    return it == t.end() ? nullptr : &it->second;
  }
  void str(const toml::Table& t, const std::string& k, std::string& out) {
    if (const toml::Value* v = get(t, k)) {
      if (v->is_string()) out = v->str();
      else problems.push_back(k + ": expected a string, got " + v->type_name());
    }
  }
  void num(const toml::Table& t, const std::string& k, double& out, bool positive = true) {
    if (const toml::Value* v = get(t, k)) {
      if (!v->is_number()) {
        problems.push_back(k + ": expected a number, got " + v->type_name());
      } else {
        out = v->number();
        if (positive && !(out > 0.0)) problems.push_back(k + ": must be positive");
      }
    }
  }
  void integer(const toml::Table& t, const std::string& k, int& out, int lo, int hi) {
    if (const toml::Value* v = get(t, k)) {
      if (!v->is_int()) {
        problems.push_back(k + ": expected an integer, got " + v->type_name());
      } else if (v->integer() < lo || v->integer() > hi) {
        problems.push_back(k + ": must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
      } else {
        out = static_cast<int>(v->integer());
      }
    }
  }
  void boolean(const toml::Table& t, const std::string& k, bool& out) {
    if (const toml::Value* v = get(t, k)) {
      if (v->is_bool()) out = v->boolean();
      else problems.push_back(k + ": expected true or false");
    }
  }
  bool numbers(const toml::Value& v, const std::string& k, std::vector<double>& out) {
    if (!v.is_array()) {
      problems.push_back(k + ": expected an array of numbers");
      return false;
    }
    out.clear();
    for (const toml::Value& e : v.array()) {
      if (!e.is_number()) {
        problems.push_back(k + ": array entries must be numbers");
        return false;
      }
      out.push_back(e.number());
    }
    return true;
  }
  void strings(const toml::Table& t, const std::string& k, std::vector<std::string>& out) {
    const toml::Value* v = get(t, k);
    if (!v) return;
    if (!v->is_array()) {
      problems.push_back(k + ": expected an array of strings");
      return;
    }
    out.clear();
    for (const toml::Value& e : v->array()) {
      if (!e.is_string()) {
        problems.push_back(k + ": array entries must be strings");
        return;
      }
      out.push_back(e.str());
    }
  }
  const toml::Table* table(const toml::Table& t, const std::string& k) {
    const toml::Value* v = get(t, k);
    if (!v) return nullptr;
    if (!v->is_table()) {
      problems.push_back(k + ": expected a table");
      return nullptr;
    }
    return &v->table();
  }
};

}  // namespace

ConfigError::ConfigError(std::vector<std::string> problems)
    : std::runtime_error("invalid config: " + join(problems, "; ")), problems_(std::move(problems)) {}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"invariants", "derivatives", "contact",     "weak-cms",
                                              "fatness",    "homogeneous", "3-sasaki", "positivity-sweep"};
  return names;
}

void Tolerances::scale(double k) {
  for (double* v : {&algebraic, &numerical, &invariants, &totally_geodesic, &derivative, &contact, &weak_cms, &killing,
                    &lemma, &d4, &leading})
    *v *= k;
}

ExperimentConfig config_from_toml(const toml::Value& root) {
  ExperimentConfig c;
  Reader r;
  const toml::Table& t = root.table();
  r.check_keys(t, "top level",
               {"name", "example", "spec", "v", "suites", "seed", "workers", "points", "expect", "grid", "tolerances",
                "derivatives", "fatness", "positivity", "output"});
  r.str(t, "name", c.name);
  r.str(t, "example", c.example);
  if (c.example.empty()) r.problems.push_back("example: required");
  r.str(t, "spec", c.spec);
  if (const toml::Value* v = r.get(t, "v")) {
    bool ok = v->is_array() && !v->array().empty();
    std::vector<std::vector<double>> rows;
    if (ok)
      for (const toml::Value& row : v->array()) {
        std::vector<double> vals;
        if (!r.numbers(row, "v", vals)) {
          ok = false;
          break;
        }
        rows.push_back(vals);
      }
    if (ok)
      for (const auto& row : rows) ok = ok && row.size() == rows.front().size() && !row.empty();
    if (!ok) {
      r.problems.push_back("v: expected a non-empty rectangular array of number rows (n x p)");
    } else {
      Mat V(static_cast<int>(rows.size()), static_cast<int>(rows.front().size()));
      for (size_t i = 0; i < rows.size(); ++i)
        for (size_t j = 0; j < rows[i].size(); ++j) V(static_cast<int>(i), static_cast<int>(j)) = rows[i][j];
      c.constant_v = V;
    }
  }
  r.strings(t, "suites", c.suites);
  if (const toml::Value* v = r.get(t, "seed")) {
    if (!v->is_int() || v->integer() < 0) r.problems.push_back("seed: expected a non-negative integer");
    else c.seed = static_cast<std::uint64_t>(v->integer());
  }
  r.integer(t, "workers", c.workers, 1, 256);
  r.integer(t, "points", c.points, 1, 10000);
  std::string expect = "pass";
  r.str(t, "expect", expect);
  if (expect != "pass" && expect != "fail") r.problems.push_back("expect: must be \"pass\" or \"fail\"");
  c.expect_fail = expect == "fail";

  if (const toml::Table* g = r.table(t, "grid")) {
    r.check_keys(*g, "grid", {"ts", "t_max", "t_count"});
    const toml::Value* ts = r.get(*g, "ts");
    const bool range = r.get(*g, "t_max") || r.get(*g, "t_count");
    if (ts && range) r.problems.push_back("grid: give either ts or t_max/t_count");
    if (ts) {
      r.numbers(*ts, "grid.ts", c.ts);
    } else if (range) {
      double tmax = 0.2;
      int count = 5;
      r.num(*g, "t_max", tmax);
      r.integer(*g, "t_count", count, 2, 10001);
      c.ts.clear();
      for (int k = 0; k < count; ++k) c.ts.push_back(-tmax + 2.0 * tmax * k / (count - 1));
    }
    if (c.ts.empty()) r.problems.push_back("grid: empty t-grid");
  }
  if (const toml::Table* tt = r.table(t, "tolerances")) {
    r.check_keys(*tt, "tolerances",
                 {"algebraic", "numerical", "invariants", "totally_geodesic", "derivative", "contact", "weak_cms",
                  "killing", "lemma", "d4", "leading"});
    Tolerances& o = c.tol;
    r.num(*tt, "algebraic", o.algebraic);
    r.num(*tt, "numerical", o.numerical);
    r.num(*tt, "invariants", o.invariants);
    r.num(*tt, "totally_geodesic", o.totally_geodesic);
    r.num(*tt, "derivative", o.derivative);
    r.num(*tt, "contact", o.contact);
    r.num(*tt, "weak_cms", o.weak_cms);
    r.num(*tt, "killing", o.killing);
    r.num(*tt, "lemma", o.lemma);
    r.num(*tt, "d4", o.d4);
    r.num(*tt, "leading", o.leading);
  }
  if (const toml::Table* d = r.table(t, "derivatives")) {
    r.check_keys(*d, "derivatives", {"orders", "kinds"});
    if (const toml::Value* o = r.get(*d, "orders")) {
      std::vector<double> v;
      if (r.numbers(*o, "derivatives.orders", v)) {
        c.orders.clear();
        for (double x : v) {
          if (x != std::floor(x) || x < 1 || x > 5) r.problems.push_back("derivatives.orders: entries must be 1..5");
          c.orders.push_back(static_cast<int>(x));
        }
      }
    }
    r.strings(*d, "kinds", c.kinds);
    for (const std::string& k : c.kinds)
      if (k != "vertizontal" && k != "horizontal" && k != "pairing")
        r.problems.push_back("derivatives.kinds: unknown kind '" + k + "'");
  }
  if (const toml::Table* f = r.table(t, "fatness")) {
    r.check_keys(*f, "fatness", {"directions", "fiber_samples"});
    r.integer(*f, "directions", c.directions, 1, 1000);
    r.integer(*f, "fiber_samples", c.fiber_samples, 2, 1000);
  }
  if (const toml::Table* p = r.table(t, "positivity")) {
    r.check_keys(*p, "positivity", {"thetas", "planes"});
    r.integer(*p, "thetas", c.thetas, 1, 100000);
    r.integer(*p, "planes", c.planes, 1, 1000);
  }
  if (const toml::Table* o = r.table(t, "output")) {
    r.check_keys(*o, "output", {"dir"});
    r.str(*o, "dir", c.out_dir);
  }
  if (!r.problems.empty()) throw ConfigError(r.problems);
  validate(c);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  toml::Value root;
  try {
    root = toml::parse_file(path);
  } catch (const toml::ParseError& e) {
    throw ConfigError({path + ": " + e.what()});
  } catch (const std::ios_base::failure& e) {
    throw ConfigError({e.what()});
  }
  return config_from_toml(root);
}

void validate(const ExperimentConfig& c) {
  std::vector<std::string> p;
  std::optional<ExampleDescriptor> ex;
  try {
    ex = instantiate(c.example);
  } catch (const CatalogError& e) {
    p.push_back(std::string("example: ") + e.what());
  }
  if (ex) {
    if (c.constant_v) {
      if (c.constant_v->rows() != ex->n() || c.constant_v->cols() != ex->p())
        p.push_back("v: must be " + std::to_string(ex->n()) + " x " + std::to_string(ex->p()) + " for " + ex->name);
    } else if (!(c.spec == "bump" && c.example == "hopf_s3")) {
      // the S^3 bump is built at run time and fails there (geometry error, exit 3)
      try {
        ex->spec(c.spec);
      } catch (const CatalogError& e) {
        p.push_back(std::string("spec: ") + e.what());
      }
    }
  }
  if (c.suites.empty()) p.push_back("suites: select at least one of " + join(suite_names()));
  std::set<std::string> seen;
  for (const std::string& s : c.suites) {
    if (std::find(suite_names().begin(), suite_names().end(), s) == suite_names().end()) {
      p.push_back("suites: unknown suite '" + s + "' (known: " + join(suite_names()) + ")");
      continue;
    }
    if (!seen.insert(s).second) p.push_back("suites: '" + s + "' listed twice");
    if (!ex) continue;
    const bool circle = ex->n() == 1;
    if ((s == "contact" || s == "weak-cms") && !circle) p.push_back(s + ": needs a circle bundle (n = 1)");
    if (s == "positivity-sweep" && (!circle || ex->name.rfind("product_", 0) != 0))
      p.push_back("positivity-sweep: needs a product with a circle factor");
    if (s == "3-sasaki" && !is_sphere_base_s7(*ex)) p.push_back("3-sasaki: needs an S^7 example");
    if (s == "homogeneous" && ex->n() != 3) p.push_back("homogeneous: needs a three-dimensional fiber");
  }
  if (seen.count("derivatives") || seen.count("3-sasaki")) {
    std::vector<double> s = c.ts;
    std::sort(s.begin(), s.end());
    bool sym = true;
    for (size_t i = 0; i < s.size(); ++i) sym = sym && std::abs(s[i] + s[s.size() - 1 - i]) <= 1e-12;
    if (!sym) p.push_back("grid: t-grid must be symmetric about 0 when derivative suites are selected");
  }
  for (double t : c.ts)
    if (!std::isfinite(t) || std::abs(t) > 2.0) p.push_back("grid: t values must be finite with |t| <= 2");
  if (!p.empty()) throw ConfigError(p);
}

// --- metrics ---------------------------------------------------------------------

bool Metric::pass() const {
  if (op == "info") return true;
  if (std::isnan(value)) return false;
  return op == "gt" ? value > tol : value <= tol;
}

bool SuiteResult::pass() const {
  for (const Metric& m : metrics)
    if (!m.pass()) return false;
  return true;
}

bool RunResult::gated_pass() const {
  for (const SuiteResult& s : suites)
    if (!s.pass()) return false;
  return true;
}

// --- suites ----------------------------------------------------------------------

namespace {

struct Context {
  const ExperimentConfig& c;
  ExampleDescriptor ex;
  VariationSpec spec;
  bool fiber_killing = true;
  std::vector<Point> points;
  FdSettings fd;

  double tmax() const {
    double m = 0.0;
    for (double t : c.ts) m = std::max(m, std::abs(t));
    return m;
  }
  std::vector<double> nonzero_ts() const {
    std::vector<double> out;
    for (double t : c.ts)
      if (t != 0.0) out.push_back(t);
    return out;
  }
};

SuiteResult suite_invariants(const Context& k, const VariationEngine& eng) {
  SuiteResult r;
  r.suite = "invariants";
  struct Item {
    InvariantReport inv;
    double tg = 0.0, fk = 0.0;
  };
  const double span = std::max(k.tmax(), 1e-3);
  const auto items = parallel_map<Item>(static_cast<int>(k.points.size()), k.c.workers, [&](int i) {
    const Point& x = k.points[static_cast<size_t>(i)];
    Item it;
    it.inv = check_invariants(eng, eng.evolve(x, span));
    it.tg = totally_geodesic_residual(eng, x, k.c.ts, k.fd);
    it.fk = fiber_killing_residual(eng, x, k.fd);
    return it;
  });
  r.csv_name = "invariants.csv";
  r.csv = "point_id,vertical_block,lift_orthonormality,lift_derivative,b_identity,bsharp_raise,ode_consistency,"
          "totally_geodesic,fiber_killing\n";
  InvariantReport worst;
  double tg = 0.0, fk = 0.0;
  for (size_t i = 0; i < items.size(); ++i) {
    const Item& it = items[i];
    r.csv += std::to_string(i);
    for (double v : {it.inv.vertical_block, it.inv.lift_orthonormality, it.inv.lift_derivative, it.inv.b_identity,
                     it.inv.bsharp_raise, it.inv.ode_consistency, it.tg, it.fk})
      r.csv += "," + fmt_e(v);
    r.csv += "\n";
    worst.vertical_block = std::max(worst.vertical_block, it.inv.vertical_block);
    worst.lift_orthonormality = std::max(worst.lift_orthonormality, it.inv.lift_orthonormality);
    worst.lift_derivative = std::max(worst.lift_derivative, it.inv.lift_derivative);
    worst.b_identity = std::max(worst.b_identity, it.inv.b_identity);
    worst.bsharp_raise = std::max(worst.bsharp_raise, it.inv.bsharp_raise);
    worst.ode_consistency = std::max(worst.ode_consistency, it.inv.ode_consistency);
    tg = std::max(tg, it.tg);
    fk = std::max(fk, it.fk);
  }
  const double tol = k.c.tol.invariants;
  r.metrics = {{"vertical_block", worst.vertical_block, k.c.tol.algebraic},
               {"lift_orthonormality", worst.lift_orthonormality, tol},
               {"lift_derivative", worst.lift_derivative, tol},
               {"b_identity", worst.b_identity, tol},
               {"bsharp_raise", worst.bsharp_raise, tol},
               {"ode_consistency", worst.ode_consistency, tol}};
  const bool killing = fk <= k.c.tol.killing;
  r.metrics.push_back({"fiber_killing", fk, k.c.tol.killing, "info"});
  if (killing) {
    r.metrics.push_back({"totally_geodesic", tg, k.c.tol.totally_geodesic});
  } else {
    r.metrics.push_back({"totally_geodesic", tg, k.c.tol.totally_geodesic, "info"});
    r.notes.push_back("V_i is not fiber-Killing: totally geodesic fibers are not expected to persist");
    if (tg > 1e-3) r.notes.push_back("flagged: totally geodesic residual exceeds 1e-3");
  }
  return r;
}

std::vector<DerivativeRequest> derivative_requests(const Context& k) {
  const int n = k.ex.n(), p = k.ex.p();
  std::vector<DerivativeRequest> out;
  for (int order : k.c.orders)
    for (const std::string& kind : k.c.kinds) {
      DerivativeRequest q;
      q.order = order;
      if (kind == "vertizontal") {
        q.kind = PlaneKind::Vertizontal;
        for (int i = 0; i < p; ++i)
          for (int a = 0; a < n; ++a) {
            q.i = i;
            q.U = unit(n, a);
            out.push_back(q);
          }
      } else if (kind == "horizontal") {
        q.kind = PlaneKind::Horizontal;
        for (int i = 0; i < p; ++i)
          for (int j = i + 1; j < p; ++j) {
            q.i = i;
            q.j = j;
            out.push_back(q);
          }
      } else {
        q.kind = PlaneKind::Pairing;
        for (int i = 0; i < p; ++i)
          for (int l = i; l < p; ++l) {
            q.i = i;
            q.j = l;
            q.U = unit(n, 0);
            q.U2 = unit(n, n - 1);
            out.push_back(q);
          }
      }
    }
  return out;
}

SuiteResult suite_derivatives(const Context& k, const VariationEngine& eng) {
  SuiteResult r;
  r.suite = "derivatives";
  const std::vector<DerivativeRequest> reqs = derivative_requests(k);
  const int per = static_cast<int>(reqs.size());
  const auto items = parallel_map<ComparisonReport>(per * static_cast<int>(k.points.size()), k.c.workers, [&](int q) {
    return fd_compare(eng, k.points[static_cast<size_t>(q / per)], reqs[static_cast<size_t>(q % per)],
                      k.c.tol.derivative, 0.0, k.fd);
  });
  r.csv_name = "derivatives.csv";
  r.csv = comparison_csv_header();
  double worst = 0.0, worst5 = 0.0;
  int fails = 0;
  for (size_t q = 0; q < items.size(); ++q) {
    ComparisonReport c = items[q];
    c.request = "p" + std::to_string(q / static_cast<size_t>(per)) + " " + c.request;
    r.csv += comparison_csv_row("derivatives", k.ex.name, c);
    if (reqs[q % static_cast<size_t>(per)].order == 5) worst5 = std::max(worst5, c.abs_residual);
    else worst = std::max(worst, c.rel_residual);
    fails += c.pass ? 0 : 1;
  }
  r.metrics = {{"max_rel_residual", worst, k.c.tol.derivative},
               {"requests", static_cast<double>(items.size()), 0.0, "info"},
               {"failed_requests", static_cast<double>(fails), 0.0}};
  if (std::find(k.c.orders.begin(), k.c.orders.end(), 5) != k.c.orders.end())
    r.metrics.push_back({"order5_abs", worst5, k.c.tol.derivative});
  return r;
}

SuiteResult suite_contact(const Context& k, const VariationEngine& eng) {
  SuiteResult r;
  r.suite = "contact";
  const int nt = static_cast<int>(k.c.ts.size());
  const auto items = parallel_map<ContactReport>(nt * static_cast<int>(k.points.size()), k.c.workers, [&](int q) {
    return contact_check(eng, k.points[static_cast<size_t>(q / nt)], k.c.ts[static_cast<size_t>(q % nt)],
                         ContactLevel::Sasaki, k.fd);
  });
  struct Extra {
    IsometryDefect iso;
    double dalpha = 0.0;
  };
  const auto extra = parallel_map<Extra>(static_cast<int>(k.points.size()), k.c.workers, [&](int i) {
    const Point& x = k.points[static_cast<size_t>(i)];
    Extra e;
    e.iso = a_isometry_defect(eng, x, 0, k.fd);
    e.dalpha = form_based_sec_derivatives(eng, x, 0, 0.0, k.fd).dalpha.cwiseAbs().maxCoeff();
    return e;
  });
  r.csv_name = "contact.csv";
  r.csv = "point_id,t,d_eta,iota_u,phi_squared,isometry,killing,sasaki\n";
  double lv[3] = {0, 0, 0};
  double t0_sasaki = 0.0;
  for (size_t q = 0; q < items.size(); ++q) {
    const ContactReport& c = items[q];
    const double t = k.c.ts[q % static_cast<size_t>(nt)];
    r.csv += std::to_string(q / static_cast<size_t>(nt)) + "," + fmt_e(t);
    for (double v : {c.d_eta, c.iota_u, c.phi_squared, c.isometry, c.killing, c.sasaki}) r.csv += "," + fmt_e(v);
    r.csv += "\n";
    lv[0] = std::max(lv[0], c.level_residual(ContactLevel::ContactMetric));
    lv[1] = std::max(lv[1], c.level_residual(ContactLevel::KContact));
    lv[2] = std::max(lv[2], c.level_residual(ContactLevel::Sasaki));
    if (t == 0.0) t0_sasaki = std::max(t0_sasaki, c.level_residual(ContactLevel::Sasaki));
  }
  double dalpha = 0.0, fd2 = 0.0, corr = 0.0, printed = 0.0;
  for (const Extra& e : extra) {
    dalpha = std::max(dalpha, e.dalpha);
    fd2 = std::max(fd2, std::abs(e.iso.fd_second));
    corr = std::max(corr, std::abs(e.iso.corrected));
    printed = std::max(printed, std::abs(e.iso.printed));
  }
  const bool closed = dalpha <= k.c.tol.numerical;
  const std::string op = closed ? "le" : "info";
  r.metrics = {{"contact_metric", lv[0], k.c.tol.contact, op},
               {"k_contact", lv[1], k.c.tol.contact, op},
               {"sasaki", lv[2], k.c.tol.contact, op},
               {"sasaki_t0", t0_sasaki, k.c.tol.contact, "info"},
               {"max_dalpha", dalpha, k.c.tol.numerical, "info"},
               {"isometry_d2_fd", fd2, 0.0, "info"},
               {"isometry_d2_formula", corr, 0.0, "info"},
               {"isometry_d2_printed", printed, 0.0, "info"}};
  double gap = 0.0;
  for (const Extra& e : extra) gap = std::max(gap, std::abs(e.iso.fd_second - e.iso.corrected));
  r.metrics.push_back({"isometry_d2_residual", gap, 1e-3 * std::max(1.0, corr)});
  if (!closed) r.notes.push_back("alpha is not closed: structure preservation is reported, not gated");
  return r;
}

SuiteResult suite_weak_cms(const Context& k, const VariationEngine& eng) {
  SuiteResult r;
  r.suite = "weak-cms";
  const std::vector<double> ts = k.nonzero_ts();
  const auto items = parallel_map<WeakCmsReport>(static_cast<int>(k.points.size()), k.c.workers, [&](int i) {
    return weak_cms_check(eng, k.points[static_cast<size_t>(i)], ts, k.fd);
  });
  r.csv_name = "weak_cms.csv";
  r.csv = "point_id,weakcms0,weakcms1,weakcms2,rweak0,rweak1,rweak2,rweak3,nabla_q,curvature,vertical_part,min_fatness\n";
  WeakCmsReport w;
  w.min_fatness = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < items.size(); ++i) {
    const WeakCmsReport& a = items[i];
    r.csv += std::to_string(i);
    for (double v : {a.weakcms0, a.weakcms1, a.weakcms2, a.rweak0, a.rweak1, a.rweak2, a.rweak3, a.nabla_q, a.curvature,
                     a.vertical_part, a.min_fatness})
      r.csv += "," + fmt_e(v);
    r.csv += "\n";
    w.weakcms0 = std::max(w.weakcms0, a.weakcms0);
    w.weakcms1 = std::max(w.weakcms1, a.weakcms1);
    w.weakcms2 = std::max(w.weakcms2, a.weakcms2);
    w.rweak0 = std::max(w.rweak0, a.rweak0);
    w.rweak1 = std::max(w.rweak1, a.rweak1);
    w.rweak2 = std::max(w.rweak2, a.rweak2);
    w.rweak3 = std::max(w.rweak3, a.rweak3);
    w.nabla_q = std::max(w.nabla_q, a.nabla_q);
    w.curvature = std::max(w.curvature, a.curvature);
    w.vertical_part = std::max(w.vertical_part, a.vertical_part);
    w.min_fatness = std::min(w.min_fatness, a.min_fatness);
  }
  const double tol = k.c.tol.weak_cms;
  r.metrics = {{"printed_conditions", w.printed_max(), tol},
               {"direct_nabla_q", w.nabla_q, tol},
               {"direct_curvature", w.curvature, tol},
               {"vertical_part", w.vertical_part, 0.0, "info"},
               {"min_fatness", w.min_fatness, 0.0, "info"}};
  return r;
}

SuiteResult suite_fatness(const Context& k, const VariationEngine& eng) {
  SuiteResult r;
  r.suite = "fatness";
  const ManifoldModel& m = *k.ex.model;
  std::vector<Point> centers = k.points;
  if (!k.c.constant_v && k.c.spec == "bump") centers = {pole_point(m)};
  const auto dirs = halton_directions(m.n(), m.p(), k.c.directions);
  const int nt = static_cast<int>(k.c.ts.size());
  const auto scans = parallel_map<FatnessScan>(nt * static_cast<int>(centers.size()), k.c.workers, [&](int q) {
    const auto fiber = fiber_samples(m, centers[static_cast<size_t>(q / nt)], k.c.fiber_samples);
    return fatness_scan(eng, fiber, k.c.ts[static_cast<size_t>(q % nt)], dirs, k.fd);
  });
  r.csv_name = "fatness.csv";
  r.csv = "point_id,sample_id,direction_id,sec,t\n";
  double min_sec = std::numeric_limits<double>::infinity(), var = 0.0, tg = 0.0;
  for (size_t q = 0; q < scans.size(); ++q) {
    const FatnessScan& s = scans[q];
    for (const ScanRow& row : s.rows) {
      char buf[128];
      std::snprintf(buf, sizeof buf, "%zu,%d,%d,%.12e,%.6f\n", q / static_cast<size_t>(nt), row.sample_id,
                    row.direction_id, row.sec, row.t);
      r.csv += buf;
    }
    min_sec = std::min(min_sec, s.min_sec);
    var = std::max(var, s.max_variance);
    tg = std::max(tg, s.totally_geodesic);
  }
  r.metrics = {{"min_sec", min_sec, 0.0, "gt"},
               {"max_fiber_variance", var, 0.0, "info"},
               {"totally_geodesic", tg, 1e-4}};
  return r;
}

SuiteResult suite_homogeneous(const Context& k, const VariationEngine& eng) {
  SuiteResult r;
  r.suite = "homogeneous";
  const ManifoldModel& m = *k.ex.model;
  const auto dirs = halton_directions(m.n(), m.p(), k.c.directions);
  const std::vector<double> ts = k.nonzero_ts();
  const auto items = parallel_map<HomogeneousReport>(static_cast<int>(k.points.size()), k.c.workers, [&](int i) {
    const Point& x = k.points[static_cast<size_t>(i)];
    return homogeneous_action_check(eng, x, ts, fiber_samples(m, x, k.c.fiber_samples), dirs, k.fd);
  });
  r.csv_name = "homogeneous.csv";
  r.csv = "point_id,t,killing\n";
  double br = 0.0, init = 0.0, kill = 0.0, var = 0.0;
  for (size_t i = 0; i < items.size(); ++i) {
    const HomogeneousReport& h = items[i];
    for (size_t q = 0; q < h.ts.size(); ++q) r.csv += std::to_string(i) + "," + fmt_e(h.ts[q]) + "," + fmt_e(h.killing[q]) + "\n";
    br = std::max(br, h.bracket);
    init = std::max(init, h.initial_killing);
    kill = std::max(kill, h.killing_max);
    var = std::max(var, h.variance);
  }
  const bool hyp = br <= k.c.tol.killing;
  r.metrics = {{"bracket", br, k.c.tol.killing, "info"},
               {"initial_killing", init, k.c.tol.killing},
               {"killing_max", kill, k.c.tol.killing, hyp ? "le" : "info"},
               {"fiber_variance", var, 0.0, "info"}};
  if (!hyp) {
    r.notes.push_back("[E_b, V_i] != 0: Killing defects are reported, not gated");
    if (kill > 1e-3) r.notes.push_back("flagged: Killing defect exceeds 1e-3");
  }
  return r;
}

SuiteResult suite_3sasaki(const Context& k, const VariationEngine& eng) {
  SuiteResult r;
  r.suite = "3-sasaki";
  const std::vector<double> ts = k.c.ts;
  const auto items = parallel_map<ThreeSasakiReport>(static_cast<int>(k.points.size()), k.c.workers, [&](int i) {
    return su2_3sasaki_check(eng, k.points[static_cast<size_t>(i)], ts, k.c.tol.lemma, k.fd);
  });
  r.csv_name = "three_sasaki.csv";
  r.csv = "point_id,lemma,axioms,d2_residual,d2_printed_residual,d4_residual,d2_defect,d4_defect,closed,wedge_free,"
          "rank_le_one\n";
  double lemma = 0, ax = 0, d2 = 0, d2p = 0, d4 = 0, d2d = 0, d4d = 0;
  bool closed = true, wf = true;
  for (size_t i = 0; i < items.size(); ++i) {
    const ThreeSasakiReport& a = items[i];
    r.csv += std::to_string(i);
    for (double v : {a.lemma, a.axioms, a.d2_residual, a.d2_printed_residual, a.d4_residual, a.d2_defect, a.d4_defect})
      r.csv += "," + fmt_e(v);
    r.csv += std::string(",") + (a.closed ? "1" : "0") + "," + (a.wedge_free ? "1" : "0") + "," +
             (a.rank_le_one ? "1" : "0") + "\n";
    lemma = std::max(lemma, a.lemma);
    ax = std::max(ax, a.axioms);
    d2 = std::max(d2, a.d2_residual);
    d2p = std::max(d2p, a.d2_printed_residual);
    d4 = std::max(d4, a.d4_residual);
    d2d = std::max(d2d, a.d2_defect);
    d4d = std::max(d4d, a.d4_defect);
    closed = closed && a.closed;
    wf = wf && a.wedge_free;
  }
  const double tol = k.c.tol.lemma;
  r.metrics = {{"lemma", lemma, tol},
               {"axioms", ax, tol, closed && wf ? "le" : "info"},
               {"d2_residual", d2, tol, wf ? "le" : "info"},
               {"d2_printed_residual", d2p, tol, "info"},
               {"d4_residual", d4, k.c.tol.d4, closed ? "le" : "info"},
               {"d2_defect", d2d, 0.0, "info"},
               {"d4_defect", d4d, 0.0, "info"}};
  if (!closed) r.notes.push_back("omega^a not closed: axioms and fourth derivative are reported, not gated");
  if (!wf) r.notes.push_back("omega^b ^ omega^c != 0: axioms and second derivative are reported, not gated");
  return r;
}

SuiteResult suite_positivity(const Context& k, const VariationEngine& eng) {
  SuiteResult r;
  r.suite = "positivity-sweep";
  PositivitySettings s;
  s.ts = k.nonzero_ts();
  s.thetas = k.c.thetas;
  s.planes = k.c.planes;
  const PositivityReport p = product_positivity_sweep(eng, k.points, s, k.fd);
  r.csv_name = "positivity.csv";
  r.csv = p.csv();
  double lead = 0.0, min_pos = std::numeric_limits<double>::infinity();
  for (size_t q = 0; q < p.ts.size(); ++q) {
    const double t = p.ts[q];
    lead = std::max(lead, p.leading_deviation[q] / (t * t));
    if (t > 0.0) min_pos = std::min(min_pos, p.min_sec[q]);
  }
  // the leading law has error O(t^3), so deviation / t^2 shrinks with the grid
  r.metrics = {{"leading_deviation_over_t2", lead, k.c.tol.leading},
               {"min_sec_positive_t", min_pos, 0.0, "info"},
               {"nondegeneracy", p.nondegeneracy, 0.0, "info"},
               {"nabla_condition", p.nabla_condition, 0.0, "info"},
               {"t_x", p.t_x, 0.0, "info"},
               {"positive_for_all_positive_t", p.positive_for_all_positive_t ? 1.0 : 0.0, 0.0, "info"},
               {"mixed_sign", p.mixed_sign ? 1.0 : 0.0, 0.0, "info"}};
  return r;
}

Context make_context(const ExperimentConfig& c) {
  Context k{c, instantiate(c.example), {}, true, {}, {}};
  if (c.constant_v) {
    k.spec = constant_variation("v", *c.constant_v);
  } else if (c.spec == "bump" && c.example == "hopf_s3") {
    k.spec = build_nonconstant_variation(k.ex.model, BumpConstruction{}).spec;
  } else {
    const NamedSpec& ns = k.ex.spec(c.spec);
    k.spec = ns.spec;
    k.fiber_killing = ns.fiber_killing;
  }
  k.fd = k.ex.model->fd;
  Rng rng(c.seed);
  for (int i = 0; i < c.points; ++i) k.points.push_back(k.ex.model->sample(rng.uniform(k.ex.model->info().sample_dim)));
  return k;
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& c) {
  validate(c);
  const Context k = make_context(c);
  const VariationEngine eng(k.ex.model, k.spec);
  RunResult out;
  out.config = c;
  for (const std::string& s : c.suites) {
    if (s == "invariants") out.suites.push_back(suite_invariants(k, eng));
    else if (s == "derivatives") out.suites.push_back(suite_derivatives(k, eng));
    else if (s == "contact") out.suites.push_back(suite_contact(k, eng));
    else if (s == "weak-cms") out.suites.push_back(suite_weak_cms(k, eng));
    else if (s == "fatness") out.suites.push_back(suite_fatness(k, eng));
    else if (s == "homogeneous") out.suites.push_back(suite_homogeneous(k, eng));
    else if (s == "3-sasaki") out.suites.push_back(suite_3sasaki(k, eng));
    else if (s == "positivity-sweep") out.suites.push_back(suite_positivity(k, eng));
  }
  return out;
}

std::string curvature_sweep_csv(const ExperimentConfig& c) {
  validate(c);
  const Context k = make_context(c);
  const VariationEngine eng(k.ex.model, k.spec);
  const int n = k.ex.n(), p = k.ex.p();
  std::vector<DerivativeRequest> reqs;
  std::string header = "t";
  for (int i = 0; i < p; ++i) {
    DerivativeRequest q;
    q.kind = PlaneKind::Vertizontal;
    q.i = i;
    q.U = unit(n, 0);
    reqs.push_back(q);
    header += ",vz_" + std::to_string(i);
  }
  for (int i = 0; i < p; ++i)
    for (int j = i + 1; j < p; ++j) {
      DerivativeRequest q;
      q.kind = PlaneKind::Horizontal;
      q.i = i;
      q.j = j;
      reqs.push_back(q);
      header += ",h_" + std::to_string(i) + std::to_string(j);
    }
  std::vector<double> ts = c.ts;
  std::sort(ts.begin(), ts.end());
  const Point x = k.points.front();
  const int per = static_cast<int>(reqs.size());
  const auto vals = parallel_map<double>(per * static_cast<int>(ts.size()), c.workers, [&](int q) {
    return plane_quantity(eng, x, reqs[static_cast<size_t>(q % per)], ts[static_cast<size_t>(q / per)], k.fd);
  });
  std::string out = header + "\n";
  for (size_t a = 0; a < ts.size(); ++a) {
    out += fmt_e(ts[a]);
    for (int q = 0; q < per; ++q) out += "," + fmt_e(vals[a * static_cast<size_t>(per) + static_cast<size_t>(q)]);
    out += "\n";
  }
  return out;
}

// --- reports ---------------------------------------------------------------------

namespace {

nlohmann::ordered_json number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

nlohmann::ordered_json run_json(const RunResult& r) {
  const ExperimentConfig& c = r.config;
  nlohmann::ordered_json j;
  j["name"] = c.name;
  j["example"] = c.example;
  j["spec"] = c.constant_v ? "v" : c.spec;
  j["seed"] = c.seed;
  j["points"] = c.points;
  j["ts"] = c.ts;
  j["expect"] = c.expect_fail ? "fail" : "pass";
  j["pass"] = r.pass();
  j["suites"] = nlohmann::ordered_json::array();
  for (const SuiteResult& s : r.suites) {
    nlohmann::ordered_json js;
    js["suite"] = s.suite;
    js["pass"] = s.pass();
    js["artifact"] = s.csv_name;
    js["metrics"] = nlohmann::ordered_json::array();
    for (const Metric& m : s.metrics)
      js["metrics"].push_back({{"name", m.name}, {"value", number(m.value)}, {"tol", number(m.tol)}, {"op", m.op},
                               {"pass", m.pass()}});
    js["notes"] = s.notes;
    j["suites"].push_back(js);
  }
  return j;
}

}  // namespace

std::string summary_json(const std::vector<RunResult>& runs) {
  nlohmann::ordered_json j;
  int suites = 0, failed = 0;
  bool pass = true;
  j["runs"] = nlohmann::ordered_json::array();
  for (const RunResult& r : runs) {
    j["runs"].push_back(run_json(r));
    suites += static_cast<int>(r.suites.size());
    for (const SuiteResult& s : r.suites) failed += s.pass() ? 0 : 1;
    pass = pass && r.pass();
  }
  j["suites"] = suites;
  j["failed_suites"] = failed;
  j["pass"] = pass;
  return j.dump(2) + "\n";
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ReportIoError("cannot write " + path);
  out << text;
  out.flush();
  if (!out) throw ReportIoError("write failed for " + path);
}

void write_run(const RunResult& r, const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ReportIoError("cannot create " + dir + ": " + ec.message());
  for (const SuiteResult& s : r.suites)
    if (!s.csv_name.empty()) write_text(dir + "/" + s.csv_name, s.csv);
  write_text(dir + "/summary.json", summary_json({r}));
}

// --- verify-all battery ----------------------------------------------------------

std::vector<ExperimentConfig> verification_battery(std::uint64_t seed, int workers) {
  auto make = [&](std::string name, std::string example, std::string spec, std::vector<std::string> suites) {
    ExperimentConfig c;
    c.name = std::move(name);
    c.example = std::move(example);
    c.spec = std::move(spec);
    c.suites = std::move(suites);
    c.seed = seed;
    c.workers = workers;
    return c;
  };
  std::vector<ExperimentConfig> out;
  out.push_back(make("hopf_s3_zero", "hopf_s3", "zero", {"invariants", "contact"}));
  out.push_back(make("hopf_s3_constant", "hopf_s3", "constant", {"invariants", "derivatives"}));
  {
    auto c = make("hopf_s3_closed_alpha", "hopf_s3", "closed_alpha", {"contact"});
    c.ts = {0.0, 0.1, 0.3};
    out.push_back(c);
  }
  {
    auto c = make("hopf_s3_nonclosed_alpha", "hopf_s3", "nonclosed_alpha", {"contact"});
    c.ts = {0.0, 0.1};
    out.push_back(c);
  }
  {
    auto c = make("hopf_s3_fiber_dependent", "hopf_s3", "fiber_dependent", {"invariants"});
    out.push_back(c);
  }
  out.push_back(make("product_r2_s1_x_dy", "product_r2_s1", "x_dy", {"invariants", "derivatives"}));
  {
    auto c = make("product_r2_s1_positivity", "product_r2_s1", "x_dy", {"positivity-sweep"});
    c.ts = {-0.04, -0.02, 0.02, 0.04};
    out.push_back(c);
  }
  {
    auto c = make("product_s2_s1_area", "product_s2_s1", "area_potential", {"invariants", "positivity-sweep"});
    c.ts = {-0.04, -0.02, 0.02, 0.04};
    out.push_back(c);
  }
  out.push_back(make("product_s3_s1_sigma1", "product_s3_s1", "sigma1", {"invariants", "derivatives"}));
  out.push_back(make("s3xs3_constant", "s3xs3_to_s3", "constant", {"invariants", "derivatives"}));
  {
    auto c = make("heisenberg_weak_cms", "heisenberg", "half_x_dy", {"weak-cms"});
    c.ts = {-0.2, 0.1, 0.2};
    out.push_back(c);
  }
  {
    auto c = make("heisenberg_weak_cms_negative", "heisenberg", "x2_dy", {"weak-cms"});
    c.ts = {-0.2, 0.1, 0.2};
    c.expect_fail = true;
    out.push_back(c);
  }
  {
    auto c = make("hopf_s7_bump", "hopf_s7", "bump", {"fatness"});
    c.ts = {0.1, 0.2};
    out.push_back(c);
  }
  {
    auto c = make("hopf_s7_left_invariant", "hopf_s7", "left_invariant", {"homogeneous"});
    c.ts = {0.1, 0.3};
    c.fiber_samples = 4;
    c.directions = 3;
    out.push_back(c);
  }
  {
    auto c = make("three_sasaki_dy1", "three_sasaki_s7", "dy1", {"3-sasaki"});
    c.ts = {-0.1, 0.0, 0.1};
    out.push_back(c);
  }
  {
    auto c = make("three_sasaki_dy1_dy2", "three_sasaki_s7", "dy1_dy2", {"3-sasaki"});
    c.ts = {-0.1, 0.0, 0.1};
    out.push_back(c);
  }
  {
    auto c = make("three_sasaki_y1_dy2", "three_sasaki_s7", "y1_dy2", {"3-sasaki"});
    c.ts = {-0.1, 0.0, 0.1};
    out.push_back(c);
  }
  {
    auto c = make("hopf_s7_fundamental", "hopf_s7", "fundamental", {"homogeneous"});
    c.ts = {0.1, 0.3};
    c.fiber_samples = 4;
    c.directions = 3;
    out.push_back(c);
  }
  return out;
}

}  // namespace subvar
