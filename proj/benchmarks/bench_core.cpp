#include <benchmark/benchmark.h>

#include "kou/rates.hpp"
#include "kou/solver.hpp"

namespace {

const kou::Equilibrium& gaussian() {
  static const kou::Equilibrium eq = kou::build_equilibrium(2.0, 1);
  return eq;
}

const kou::Equilibrium& subexp() {
  static const kou::Equilibrium eq = kou::build_equilibrium(0.5, 1);
  return eq;
}

kou::DomainSpec torus() { return {}; }

void BM_assemble_mode_operator_hermite(benchmark::State& state) {
  const auto disc =
      kou::build_discretization(gaussian(), kou::Basis::Hermite, static_cast<int>(state.range(0)), 4, 0.01);
  for (auto _ : state) {
    auto op = kou::assemble_mode_operator(gaussian(), torus(), disc, 1);
    benchmark::DoNotOptimize(op.matrix.data());
  }
}
BENCHMARK(BM_assemble_mode_operator_hermite)->Arg(64)->Arg(128);

void BM_assemble_mode_operator_grid(benchmark::State& state) {
  const auto disc =
      kou::build_discretization(subexp(), kou::Basis::Grid, static_cast<int>(state.range(0)), 4, 0.01);
  for (auto _ : state) {
    auto op = kou::assemble_mode_operator(subexp(), torus(), disc, 1);
    benchmark::DoNotOptimize(op.matrix.data());
  }
}
BENCHMARK(BM_assemble_mode_operator_grid)->Arg(192)->Arg(384);

void BM_mode_spectral_gap(benchmark::State& state) {
  for (auto _ : state) {
    const double gap = kou::mode_spectral_gap(gaussian(), torus(), 1, static_cast<int>(state.range(0)));
    benchmark::DoNotOptimize(gap);
  }
}
BENCHMARK(BM_mode_spectral_gap)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_propagator_build(benchmark::State& state) {
  const auto disc =
      kou::build_discretization(gaussian(), kou::Basis::Hermite, static_cast<int>(state.range(0)), 4, 0.01);
  for (auto _ : state) {
    kou::ModePropagator prop(gaussian(), torus(), disc);
    benchmark::DoNotOptimize(prop.scheme_used());
  }
}
BENCHMARK(BM_propagator_build)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_step_throughput(benchmark::State& state) {
  const auto disc =
      kou::build_discretization(gaussian(), kou::Basis::Hermite, static_cast<int>(state.range(0)), 8, 0.01);
  const kou::ModePropagator prop(gaussian(), torus(), disc);
  kou::Field f = kou::random_smooth_datum(gaussian(), disc, 7, 1.0);
  for (auto _ : state) {
    prop.advance(f);
    benchmark::DoNotOptimize(f.coeff.data());
  }
  state.SetItemsProcessed(state.iterations() * (2 * disc.xi_max + 1));
}
BENCHMARK(BM_step_throughput)->Arg(32)->Arg(64)->Arg(128);

void BM_norm_evaluation(benchmark::State& state) {
  const auto disc =
      kou::build_discretization(subexp(), kou::Basis::Grid, static_cast<int>(state.range(0)), 4, 0.01);
  const kou::NormEvaluator eval(subexp(), disc, 1.0);
  const kou::Field f = kou::random_smooth_datum(subexp(), disc, 11, 1.0);
  for (auto _ : state) {
    const kou::Norms n = eval(f);
    benchmark::DoNotOptimize(n.l2_sq);
  }
}
BENCHMARK(BM_norm_evaluation)->Arg(96)->Arg(192);

}  // namespace

BENCHMARK_MAIN();
