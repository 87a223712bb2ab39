// Kernel and filter micro benchmarks on generated data.

#include <benchmark/benchmark.h>

#include <random>

#include "masklink/linkage.hpp"
#include "masklink/synth.hpp"

namespace masklink {
namespace {

struct Data {
  GridIndex grid;
  std::vector<geom::Geometry> sources;

  static const Data& get() {
    static const Data d = [] {
      SynthOptions opts;
      opts.n_targets = 2000;
      opts.coverage = 0.4;
      SourceGenerator gen(opts, 4096);
      std::vector<geom::Geometry> sources;
      while (auto s = gen.next()) sources.push_back(s->second);
      return Data{build_grid(generate_targets(opts), kDefaultCellSize), std::move(sources)};
    }();
    return d;
  }
};

void BM_Relate(benchmark::State& state) {
  const auto& d = Data::get();
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& a = d.sources[i++ % d.sources.size()];
    const auto c = d.grid.candidates(a);
    for (TargetIndex t : c) benchmark::DoNotOptimize(geom::relate(a, d.grid.target(t).geometry));
  }
}
BENCHMARK(BM_Relate);

void BM_Distance(benchmark::State& state) {
  const auto& d = Data::get();
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& a = d.sources[i++ % d.sources.size()];
    const auto c = d.grid.candidates(a);
    for (TargetIndex t : c) benchmark::DoNotOptimize(geom::distance(a, d.grid.target(t).geometry));
  }
}
BENCHMARK(BM_Distance);

void BM_MaskTest(benchmark::State& state) {
  const auto& d = Data::get();
  const MaskStore masks = build_masks(d.grid);
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& a = d.sources[i++ % d.sources.size()];
    for (const auto& cell : d.grid.locate_cells(a)) {
      benchmark::DoNotOptimize(mask_encloses(masks.at(cell.key), a));
    }
  }
}
BENCHMARK(BM_MaskTest);

void BM_BuildMasks(benchmark::State& state) {
  const auto& d = Data::get();
  const MaskOptions opts{state.range(0) ? MaskKind::Buffered : MaskKind::Plain, state.range(0) ? 0.5 : 0.0};
  for (auto _ : state) benchmark::DoNotOptimize(build_masks(d.grid, opts).size());
}
BENCHMARK(BM_BuildMasks)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_LinkSource(benchmark::State& state) {
  const auto& d = Data::get();
  const MaskStore masks = build_masks(d.grid);
  const Engine engine(d.grid, state.range(0) ? &masks : nullptr,
                      EngineOptions{LinkMode::Topological, state.range(0) ? Strategy::MaskLink : Strategy::Baseline});
  ComparisonStats stats;
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& a = d.sources[i++ % d.sources.size()];
    benchmark::DoNotOptimize(engine.link("a", a, stats));
  }
}
BENCHMARK(BM_LinkSource)->Arg(0)->Arg(1);

}  // namespace
}  // namespace masklink

BENCHMARK_MAIN();
