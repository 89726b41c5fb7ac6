#include <benchmark/benchmark.h>

#include <cmath>

#include "blayer/existence_engine.hpp"
#include "blayer/manifold_tracer.hpp"

using namespace blayer;

namespace {

const GasParams kGas(1.4, 1.0, 1.0, 1.0);

SystemData system_at(double u_plus) { return build_system(kGas, EndState(1.0, u_plus, 1.0)); }

void BM_RhsPoly(benchmark::State& state) {
  const SystemData s = system_at(1.0);
  PhasePoint p{0.7, 1.1};
  for (auto _ : state) {
    benchmark::DoNotOptimize(p.u);
    benchmark::DoNotOptimize(rhs_poly(p, s));
  }
}
BENCHMARK(BM_RhsPoly);

void BM_RhsExact(benchmark::State& state) {
  const SystemData s = system_at(1.0);
  PhasePoint p{0.7, 1.1};
  for (auto _ : state) {
    benchmark::DoNotOptimize(p.u);
    benchmark::DoNotOptimize(rhs_exact(p, s));
  }
}
BENCHMARK(BM_RhsExact);

void BM_TraceGamma(benchmark::State& state) {
  const SystemData s = system_at(state.range(0) / 100.0);
  const EigenPair e = eigen_2x2(s.A);
  const auto label = static_cast<CurveLabel>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(trace_gamma(s, e, label));
}
BENCHMARK(BM_TraceGamma)
    ->Args({100, static_cast<int>(CurveLabel::Gamma1)})
    ->Args({100, static_cast<int>(CurveLabel::Gamma2)})
    ->Args({30, static_cast<int>(CurveLabel::Gamma2)})
    ->Unit(benchmark::kMillisecond);

void BM_TraceSigma(benchmark::State& state) {
  const SystemData s = system_at(std::sqrt(1.4));
  const TransonicFrame f = transonic_frame(s);
  for (auto _ : state) benchmark::DoNotOptimize(trace_sigma(s, f));
}
BENCHMARK(BM_TraceSigma)->Unit(benchmark::kMillisecond);

// Membership decision against cached curves.
void BM_DecideCached(benchmark::State& state) {
  ExistenceEngine eng;
  const EndState right(1.0, 1.0, 1.0);
  const Curve& g1 = eng.curves(kGas, right)->at(0);
  const PhasePoint p = g1.samples[g1.samples.size() / 2];
  const Query q{EndState(p.u, p.u, p.theta), right, kGas};
  for (auto _ : state) benchmark::DoNotOptimize(eng.decide(q));
}
BENCHMARK(BM_DecideCached)->Unit(benchmark::kMicrosecond);

void BM_Profile(benchmark::State& state) {
  const double up = state.range(0) == 0 ? 1.0 : std::sqrt(1.4);
  ExistenceEngine eng;
  const EndState right(1.0, up, 1.0);
  const Curve& c = eng.curves(kGas, right)->at(0);
  const PhasePoint p = c.samples[c.samples.size() / 2];
  const Query q{EndState(p.u / up, p.u, p.theta), right, kGas};
  const Verdict v = eng.decide(q);
  for (auto _ : state) benchmark::DoNotOptimize(compute_profile(q, v));
}
BENCHMARK(BM_Profile)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
