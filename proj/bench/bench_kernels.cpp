// Serial reference vs OpenMP kernels. Argument 0 = serial, 1 = parallel.
#include <benchmark/benchmark.h>

#include "wbhp/codebook.hpp"
#include "wbhp/experiment.hpp"
#include "wbhp/greedy.hpp"

namespace {

using namespace wbhp;

Exec exec_of(const benchmark::State& st) { return st.range(0) ? Exec::Parallel : Exec::Serial; }

SystemConfig desk() {
  SystemConfig s;
  s.n_bs = 32;
  s.n_ms = 8;
  s.n_rf = 3;
  s.n_s = 2;
  s.k_sub = 64;
  s.cp_len = 16;
  return s;
}

void BM_TrainingSet(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(build_training_set(desk(), ChannelStatsConfig{}, 64, 2, 1, exec_of(st)));
}

void BM_Assign(benchmark::State& st) {
  const auto ts = build_training_set(desk(), ChannelStatsConfig{}, 200, 2, 1);
  std::mt19937_64 rng(2);
  const auto cws = as_subspaces(init_codebook(64, 32, 3, rng));
  for (auto _ : st) benchmark::DoNotOptimize(assign(cws, ts, true, exec_of(st)));
}

void BM_ExhaustiveRf(benchmark::State& st) {
  const auto ch = generate_channel(desk(), ChannelStatsConfig{}, 3, 0);
  std::mt19937_64 rng(3);
  std::vector<CMat> cb;
  for (const auto& q : init_codebook(128, 32, 3, rng)) cb.push_back(rf_project(q, 6));
  for (auto _ : st) benchmark::DoNotOptimize(exhaustive_rf_search(cb, ch, 1.0, 2, PowerConstraint::Unitary, exec_of(st)));
}

void BM_GsHp(benchmark::State& st) {
  const auto ch = generate_channel(desk(), ChannelStatsConfig{}, 4, 0);
  const CMat vcb = beamsteering_codebook(64, 32, 0.5, 6).columns();
  for (auto _ : st)
    benchmark::DoNotOptimize(gs_hp(vcb, ch, 1.0, 3, 2, GsEigenMode::RankOneUpdate, exec_of(st)));
}

void BM_Sweep(benchmark::State& st) {
  ExperimentConfig cfg;
  cfg.system = desk();
  cfg.n_realizations = 16;
  cfg.schemes = {SchemeSpec{SchemeKind::UnconstrainedSvd, PowerConstraint::Total, "", "", ""},
                 SchemeSpec{SchemeKind::ApproxGsHp, PowerConstraint::Unitary, "beamsteering:32:6", "", ""}};
  for (auto _ : st) benchmark::DoNotOptimize(run_sweep(cfg, exec_of(st)));
}

}  // namespace

BENCHMARK(BM_TrainingSet)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Assign)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ExhaustiveRf)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GsHp)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Sweep)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
