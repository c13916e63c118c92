// Serial reference kernels against their OpenMP counterparts.
// Thread count follows OMP_NUM_THREADS.
#include <benchmark/benchmark.h>

#include "mpmp/geometry.hpp"
#include "mpmp/phantoms.hpp"
#include "mpmp/physics.hpp"
#include "mpmp/rng.hpp"
#include "mpmp/stage1.hpp"
#include "mpmp/stage2.hpp"

using namespace mpmp;

namespace {

Grid grid(int n) { return Grid(n, n, {-2, 2, -2, 2}); }

std::vector<ScanSample> samples(const Grid &g, int per_period) {
  LissajousParams base;
  base.samples_per_period = per_period;
  return sample_plan(make_grid_plan(g.domain, base, 2, 2), g.domain);
}

template <auto Kernel>
void BM_signals(benchmark::State &state) {
  const Grid g = grid(static_cast<int>(state.range(0)));
  const DenseField rho = render(make_phantom_spec(PhantomKind::Vessel, g));
  auto s = samples(g, 408);
  for (auto _ : state) {
    Kernel(rho, ResolutionParam(0.01), s);
    benchmark::DoNotOptimize(s.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(s.size()));
}

template <auto Kernel>
void BM_spread(benchmark::State &state) {
  const Grid g = grid(static_cast<int>(state.range(0)));
  const SampleCache cache(g, samples(g, 1632));
  std::vector<Vec2> values(cache.size());
  CounterRng rng(1);
  for (Vec2 &v : values) v = {rng.normal(), rng.normal()};
  for (auto _ : state) {
    CoreOperatorField out(g);
    Kernel(values, cache, 0.5, out);
    benchmark::DoNotOptimize(out.values.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(values.size()));
}

void BM_convolve_fft(benchmark::State &state) {
  const Grid g = grid(static_cast<int>(state.range(0)));
  const ConvolutionOperator K(g, ResolutionParam(0.01));
  const DenseField rho = render(make_phantom_spec(PhantomKind::Vessel, g));
  for (auto _ : state) benchmark::DoNotOptimize(K.convolve(rho).values.data());
}

void BM_convolve_direct(benchmark::State &state) {
  const Grid g = grid(static_cast<int>(state.range(0)));
  const ConvolutionOperator K(g, ResolutionParam(0.01));
  const DenseField rho = render(make_phantom_spec(PhantomKind::Vessel, g));
  for (auto _ : state) benchmark::DoNotOptimize(convolve_direct(K, rho).values.data());
}

}  // namespace

BENCHMARK(BM_signals<kernels::signals_serial>)->Name("signals/serial")->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_signals<kernels::signals_parallel>)->Name("signals/parallel")->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_spread<kernels::spread_serial>)->Name("spread/serial")->Arg(64)->Arg(128)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_spread<kernels::spread_parallel>)->Name("spread/parallel")->Arg(64)->Arg(128)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_convolve_fft)->Arg(32)->Arg(64)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_convolve_direct)->Arg(32)->Arg(64)->Unit(benchmark::kMicrosecond);
BENCHMARK_MAIN();
