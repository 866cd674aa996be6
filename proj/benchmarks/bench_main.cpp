#include "subvar/experiment.hpp"
#include "subvar/fat_homogeneous.hpp"
#include "subvar/formulas.hpp"
#include "subvar/sampling.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace subvar;

struct Fixture {
  ExampleDescriptor ex;
  VariationSpec spec;
  Point x;
  Fixture(const std::string& name, const std::string& spec_name) : ex(instantiate(name)), spec(ex.spec(spec_name).spec) {
    Rng rng(7);
    x = ex.model->sample(rng.uniform(ex.model->info().sample_dim));
  }
};

void BM_MetricOde(benchmark::State& state) {
  const int steps = static_cast<int>(state.range(0));
  Rng rng(3);
  Mat lam = Mat::Zero(3, 4);
  for (int a = 0; a < 3; ++a)
    for (int k = 0; k < 4; ++k) lam(a, k) = rng.uniform() - 0.5;
  for (auto _ : state) benchmark::DoNotOptimize(metric_ode_solve([&](double) { return lam; }, 3, 4, 0.5, steps));
  state.SetItemsProcessed(state.iterations() * steps);
}
BENCHMARK(BM_MetricOde)->Arg(16)->Arg(128)->Arg(1024);

void BM_Evolve(benchmark::State& state) {
  Fixture f("hopf_s3", "nonclosed_alpha");
  const VariationEngine eng(f.ex.model, f.spec);
  for (auto _ : state) benchmark::DoNotOptimize(eng.evolve(f.x, 0.5));
}
BENCHMARK(BM_Evolve)->Unit(benchmark::kMillisecond);

void BM_BracketTable(benchmark::State& state) {
  Fixture f(state.range(0) ? "hopf_s7" : "hopf_s3", state.range(0) ? "fundamental" : "nonclosed_alpha");
  const VariationEngine eng(f.ex.model, f.spec);
  for (auto _ : state) benchmark::DoNotOptimize(bracket_data(eng, f.x, 0.1, false));
}
BENCHMARK(BM_BracketTable)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_ClosedForm(benchmark::State& state) {
  Fixture f("hopf_s3", "nonclosed_alpha");
  const VariationEngine eng(f.ex.model, f.spec);
  DerivativeRequest req;
  req.order = static_cast<int>(state.range(0));
  req.U = Vec::Ones(1);
  for (auto _ : state) benchmark::DoNotOptimize(closed_form(eng, f.x, req));
}
BENCHMARK(BM_ClosedForm)->DenseRange(1, 4)->Unit(benchmark::kMicrosecond);

void BM_FatnessScan(benchmark::State& state) {
  Fixture f("hopf_s7", "bump");
  const VariationEngine eng(f.ex.model, f.spec);
  const auto fiber = fiber_samples(*f.ex.model, pole_point(*f.ex.model), static_cast<int>(state.range(0)));
  const auto dirs = halton_directions(3, 4, 6);
  for (auto _ : state) benchmark::DoNotOptimize(fatness_scan(eng, fiber, 0.1, dirs));
}
BENCHMARK(BM_FatnessScan)->Arg(1)->Arg(8)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
