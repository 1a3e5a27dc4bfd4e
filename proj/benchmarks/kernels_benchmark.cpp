// Copyright (C) 2026 The sparseglu Authors
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include <cmath>
#include <string>

#include "sparseglu/glu_ffn.hpp"
#include "sparseglu/random.hpp"
#include "sparseglu/sparsify.hpp"

namespace {

using namespace sparseglu;

// Keeps every `stride`-th index; sparsity 1 - 1/stride.
SparsityMask strided_mask(std::size_t n, std::size_t stride) {
  SparsityMask m(n);
  for (std::size_t i = 0; i < n; i += stride) m.set(i, true);
  return m;
}

FfnWeights make_ffn(std::size_t h, std::size_t d) {
  const float sh = 1.0f / std::sqrt(static_cast<float>(h));
  const float sd = 1.0f / std::sqrt(static_cast<float>(d));
  return {seeded_tensor(1, {d, h}, sh, "w_up"), seeded_tensor(2, {d, h}, sh, "w_gate"),
          seeded_tensor(3, {h, d}, sd, "w_down"), Activation::SiLU};
}

void BM_GemvDense(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto w = seeded_tensor(7, {n, n}, 1.0f);
  const auto x = seeded_tensor(8, {n}, 1.0f);
  for (auto _ : state) benchmark::DoNotOptimize(gemv(MatrixView(w), x.data()));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(n * n));
}
BENCHMARK(BM_GemvDense)->Arg(256)->Arg(1024);

void BM_GemvSkipCols(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto stride = static_cast<std::size_t>(state.range(1));
  const auto w = seeded_tensor(7, {n, n}, 1.0f);
  const auto x = seeded_tensor(8, {n}, 1.0f);
  const auto mask = strided_mask(n, stride);
  for (auto _ : state) benchmark::DoNotOptimize(gemv_skip_cols(MatrixView(w), x.data(), mask));
}
BENCHMARK(BM_GemvSkipCols)->Args({1024, 2})->Args({1024, 10});

void BM_GemvSkipRows(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto stride = static_cast<std::size_t>(state.range(1));
  const auto w = seeded_tensor(7, {n, n}, 1.0f);
  const auto x = seeded_tensor(8, {n}, 1.0f);
  const auto mask = strided_mask(n, stride);
  for (auto _ : state) benchmark::DoNotOptimize(gemv_skip_rows(MatrixView(w), x.data(), mask));
}
BENCHMARK(BM_GemvSkipRows)->Args({1024, 2})->Args({1024, 10});

void BM_TopPMask(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto v = seeded_tensor(9, {n}, 1.0f);
  for (auto _ : state) benchmark::DoNotOptimize(top_p_mask(v.data(), 0.9));
}
BENCHMARK(BM_TopPMask)->Arg(1024)->Arg(8192);

void BM_FfnDense(benchmark::State& state) {
  const auto ffn = make_ffn(256, 1024);
  const auto x = seeded_tensor(10, {256}, 1.0f);
  for (auto _ : state) benchmark::DoNotOptimize(ffn_dense(x.data(), ffn));
}
BENCHMARK(BM_FfnDense);

void BM_FfnSparsified(benchmark::State& state) {
  const auto site = static_cast<ActivationSite>(state.range(0));
  const auto ffn = make_ffn(256, 1024);
  const auto x = seeded_tensor(10, {256}, 1.0f);
  const auto rule = SparsifyRule::top_p(0.7);
  for (auto _ : state) benchmark::DoNotOptimize(ffn_sparsified(x.data(), ffn, site, rule));
  state.SetLabel(std::string(to_string(site)));
}
BENCHMARK(BM_FfnSparsified)->DenseRange(0, 3);

void BM_FfnPredictedIntermediate(benchmark::State& state) {
  const auto ffn = make_ffn(256, 1024);
  const auto x = seeded_tensor(10, {256}, 1.0f);
  const auto mask = strided_mask(1024, 10);
  for (auto _ : state) benchmark::DoNotOptimize(ffn_with_intermediate_mask(x.data(), ffn, mask));
}
BENCHMARK(BM_FfnPredictedIntermediate);

}  // namespace
BENCHMARK_MAIN();
