// Copyright 2026 The llpbag Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <benchmark/benchmark.h>

#include "llpbag/hypergeom.h"
#include "llpbag/losses.h"
#include "llpbag/model.h"

namespace llpbag {
namespace {

void BM_MultivariateSample(benchmark::State& state) {
  const auto n = static_cast<std::int64_t>(state.range(0));
  const MultivariateHypergeometric h({25, 14, 30, 11, 20, 22, 18, 21, 19, 20}, n);
  Rng rng = MakeStream(1, "bench.sample");
  for (auto _ : state) benchmark::DoNotOptimize(h.Sample(rng));
}
BENCHMARK(BM_MultivariateSample)->Arg(12)->Arg(50)->Arg(150);

void BM_UnivariateSampleLarge(benchmark::State& state) {
  const UnivariateHypergeometric u(100000, 30000, state.range(0));
  Rng rng = MakeStream(2, "bench.univariate");
  for (auto _ : state) benchmark::DoNotOptimize(u.Sample(rng));
}
BENCHMARK(BM_UnivariateSampleLarge)->Arg(100)->Arg(10000);

void BM_LogPmf(benchmark::State& state) {
  const MultivariateHypergeometric h({25, 14, 30, 11, 20, 22, 18, 21, 19, 20}, 12);
  const ClassCountVector k({2, 1, 2, 1, 1, 1, 1, 1, 1, 1});
  for (auto _ : state) benchmark::DoNotOptimize(h.LogPmf(k));
}
BENCHMARK(BM_LogPmf);

void BM_PerturbSupervision(benchmark::State& state) {
  const ClassCountVector k({25, 14, 30, 11, 20, 22, 18, 21, 19, 20});
  Rng rng = MakeStream(3, "bench.perturb");
  for (auto _ : state) benchmark::DoNotOptimize(PerturbSupervision(k, 12, rng));
}
BENCHMARK(BM_PerturbSupervision);

void BM_BatchGradient(benchmark::State& state) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  const ModelShape shape{16, 64, 10};
  Rng rng = MakeStream(4, "bench.gradient");
  const ClassifierParams params = InitParams(shape, rng);
  std::vector<BatchEntry> batch;
  for (int b = 0; b < 8; ++b) {
    batch.push_back({Eigen::MatrixXd::Random(n, 16), ProportionVector::Uniform(10), 1.0});
  }
  for (auto _ : state) benchmark::DoNotOptimize(BatchGradient(params, batch));
  state.SetItemsProcessed(state.iterations() * 8 * n);
}
BENCHMARK(BM_BatchGradient)->Arg(12)->Arg(50)->Arg(200);

}  // namespace
}  // namespace llpbag

BENCHMARK_MAIN();
