// Copyright 2026 The xlalign Authors.
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

#include <string>
#include <vector>

#include "xlalign/alignment.hpp"
#include "xlalign/dictionary.hpp"
#include "xlalign/linalg.hpp"
#include "xlalign/random.hpp"
#include "xlalign/retrieval.hpp"

namespace {

using namespace xlalign;

Matrix gaussian(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = rng.normal();
  }
  return m;
}

Matrix unit_rows(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  Matrix m = gaussian(rows, cols, seed);
  normalize_rows_in_place(m);
  return m;
}

PairedMatrices paired(std::size_t n, std::size_t d) {
  PairedMatrices p;
  p.x_d = unit_rows(n, d, 1);
  p.y_d = unit_rows(n, d, 2);
  for (std::size_t i = 0; i < n; ++i) {
    p.kept_pairs.emplace_back("s" + std::to_string(i), "t" + std::to_string(i));
  }
  return p;
}

void BM_SvdSquare(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix m = gaussian(n, n, 3);
  for (auto _ : state) benchmark::DoNotOptimize(svd(m));
}
BENCHMARK(BM_SvdSquare)->Arg(50)->Arg(100)->Arg(300)->Unit(benchmark::kMillisecond);

void BM_SvdTall(benchmark::State& state) {
  const Matrix m = gaussian(static_cast<std::size_t>(state.range(0)), 50, 4);
  for (auto _ : state) benchmark::DoNotOptimize(svd(m));
}
BENCHMARK(BM_SvdTall)->Arg(1000)->Arg(5000)->Unit(benchmark::kMillisecond);

void BM_FitProcrustes(benchmark::State& state) {
  const auto pairs = paired(static_cast<std::size_t>(state.range(0)), 300);
  for (auto _ : state) benchmark::DoNotOptimize(fit_procrustes(pairs));
}
BENCHMARK(BM_FitProcrustes)->Arg(5000)->Unit(benchmark::kMillisecond);

void BM_FitLeastSquares(benchmark::State& state) {
  const auto pairs = paired(static_cast<std::size_t>(state.range(0)), 100);
  for (auto _ : state) benchmark::DoNotOptimize(fit_least_squares(pairs));
}
BENCHMARK(BM_FitLeastSquares)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_RetrieveQuery(benchmark::State& state, Method method) {
  const auto targets = static_cast<std::size_t>(state.range(0));
  const Matrix src = unit_rows(4000, 100, 5), tgt = unit_rows(targets, 100, 6);
  RetrievalConfig cfg;
  cfg.method = method;
  cfg.beta = 20.0;
  cfg.n_s = 500;
  const Retriever retriever(src, tgt, cfg);
  std::size_t query = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(retriever.rank(query, 10));
    query = (query + 1) % src.rows();
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK_CAPTURE(BM_RetrieveQuery, nn, Method::kNearestNeighbour)
    ->Arg(20000)
    ->Unit(benchmark::kMicrosecond);
BENCHMARK_CAPTURE(BM_RetrieveQuery, isf, Method::kInvertedSoftmax)
    ->Arg(20000)
    ->Unit(benchmark::kMillisecond);

void BM_FitBeta(benchmark::State& state) {
  const auto pairs = paired(static_cast<std::size_t>(state.range(0)), 50);
  const FittedMap map = fit_procrustes(pairs);
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit_beta(pairs, map, RetrievalConfig{}, Method::kInvertedSoftmax));
  }
}
BENCHMARK(BM_FitBeta)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
