#include <benchmark/benchmark.h>

#include <vector>

#include "tfe/initial_data.hpp"
#include "tfe/solver.hpp"

namespace {

tfe::Profile drop(std::size_t nodes) {
  const auto g = tfe::make_grid(-1.0, 1.0, nodes);
  std::vector<double> u(g.n_nodes, 0.0);
  for (std::size_t i = 0; i < g.n_nodes; ++i) {
    const double s = g.x(i) / 0.3;
    if (s * s < 1.0) u[i] = (1.0 - s * s) * (1.0 - s * s);
  }
  return tfe::Profile(g, std::move(u));
}

void BM_Step(benchmark::State& state) {
  const auto p = drop(static_cast<std::size_t>(state.range(0)));
  tfe::SolverConfig cfg;
  cfg.mobility.kind = static_cast<tfe::MobilityKind>(state.range(1));
  for (auto _ : state) {
    auto r = tfe::step(p, 1e-6, cfg);
    benchmark::DoNotOptimize(r.profile);
  }
}
BENCHMARK(BM_Step)
    ->ArgsProduct({{256, 1024, 4096}, {static_cast<int>(tfe::MobilityKind::entropy_consistent),
                                       static_cast<int>(tfe::MobilityKind::upwind)}});

void BM_Run(benchmark::State& state) {
  const auto p = drop(static_cast<std::size_t>(state.range(0)));
  tfe::SolverConfig cfg;
  cfg.mobility.kind = tfe::MobilityKind::upwind;
  for (auto _ : state) {
    auto s = tfe::run(p, cfg, 1e-3, 1e-4);
    benchmark::DoNotOptimize(s.accepted_steps);
    state.counters["steps"] = static_cast<double>(s.accepted_steps);
  }
}
BENCHMARK(BM_Run)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

void BM_CriterionMass(benchmark::State& state) {
  const auto g = tfe::make_grid(-1.0, 2.0, static_cast<std::size_t>(state.range(0)));
  const auto p = tfe::oscillatory(g, 0.0, 2.5, 1.0);
  const auto radii = tfe::dyadic_radii(g, 0.5);
  for (auto _ : state) {
    auto r = tfe::criterion_mass(p, 0.0, 2.5, radii);
    benchmark::DoNotOptimize(r.supremum);
  }
}
BENCHMARK(BM_CriterionMass)->Arg(2401)->Arg(9601);

}  // namespace

BENCHMARK_MAIN();
