#include <benchmark/benchmark.h>

#include "qndepp/homodyne.hpp"
#include "qndepp/kerr.hpp"
#include "qndepp/lindblad.hpp"
#include "qndepp/pdc.hpp"
#include "qndepp/protocol.hpp"

using namespace qndepp;

namespace {

const kerr::PhaseShiftTable& table() {
  static const auto t = kerr::build_phase_table(kerr::KerrSystemParams::reference(), 2);
  return t;
}

void BM_StorageEvolve(benchmark::State& state) {
  const auto steps = static_cast<double>(state.range(0));
  for (auto _ : state) {
    const auto r = lindblad::storage_fidelity(lindblad::FockLabel{{1, 1}}, 1.0 / 20e-6, 1.0 / 10e-9, 8.0,
                                              8.0 * 10e-9 / steps);
    benchmark::DoNotOptimize(r.fidelity);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_StorageEvolve)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);

void BM_ExactRound(benchmark::State& state) {
  const auto enc = kerr::PolarizationEncoding::standard();
  for (auto _ : state) {
    const auto r = protocol::run_round(0.8, table(), enc, protocol::RuleSet::ideal_phase);
    benchmark::DoNotOptimize(r.kept_fidelity);
  }
}
BENCHMARK(BM_ExactRound)->Unit(benchmark::kMicrosecond);

void BM_PdcTwoPairBranches(benchmark::State& state) {
  const auto enc = kerr::PolarizationEncoding::standard();
  const int errors = static_cast<int>(state.range(0));
  for (auto _ : state) {
    const auto r = protocol::pdc_two_pair_round(errors, table(), enc);
    benchmark::DoNotOptimize(r.kept_weight);
  }
}
BENCHMARK(BM_PdcTwoPairBranches)->DenseRange(0, 2)->Unit(benchmark::kMillisecond);

void BM_MonteCarloRound(benchmark::State& state) {
  const auto enc = kerr::PolarizationEncoding::standard();
  protocol::MonteCarloConfig cfg;
  cfg.trials = static_cast<std::uint64_t>(state.range(0));
  cfg.seed = 1;
  cfg.readout.alpha = 24.7;
  for (auto _ : state) {
    const auto r = protocol::monte_carlo_round(0.8, table(), enc, protocol::RuleSet::ideal_phase, cfg);
    benchmark::DoNotOptimize(r.kept_fidelity);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MonteCarloRound)->Arg(100000)->Unit(benchmark::kMillisecond);

void BM_HomodyneClassify(benchmark::State& state) {
  const homodyne::PhaseBinSet bins({{"t0", 0.0}, {"t1", 0.5858}, {"t2", 1.1717}, {"t3", 1.0855}});
  const auto probe = homodyne::ProbeState::make(24.7, 1.0855);
  Rng rng(3);
  for (auto _ : state) benchmark::DoNotOptimize(homodyne::sample_and_classify(probe, bins, rng).assigned);
}
BENCHMARK(BM_HomodyneClassify);

}  // namespace
BENCHMARK_MAIN();
