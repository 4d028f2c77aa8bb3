// Copyright 2026 The mfac Authors. All Rights Reserved.
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
// =============================================================================

// Serial versus OpenMP timings for the data-parallel kernels.

#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "mfac/kernels.hpp"
#include "mfac/optim.hpp"

namespace {

using namespace mfac;

Eigen::MatrixXd random_points(Eigen::Index n, Eigen::Index d, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXd X(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j) X(i, j) = u(rng);
  return X;
}

const std::vector<double> kLengths{0.3, 0.2, 0.5, 0.4};

template <ExecPolicy P>
void BM_covariance(benchmark::State& state) {
  const auto X = random_points(state.range(0), 4, 1);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::covariance(X, 1.3, kLengths, P));
  state.SetComplexityN(state.range(0));
}

template <ExecPolicy P>
void BM_cross_covariance(benchmark::State& state) {
  const auto A = random_points(state.range(0), 4, 2);
  const auto B = random_points(256, 4, 3);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::cross_covariance(A, B, 1.3, kLengths, P));
}

// A deliberately bumpy objective so each start does its full evaluation budget.
double bumpy(std::span<const double> x) {
  double s = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) s += std::sin(9.0 * x[k] + k) * std::exp(-x[k]);
  return s;
}

template <ExecPolicy P>
void BM_multistart(benchmark::State& state) {
  const auto starts = halton_points(static_cast<std::size_t>(state.range(0)), 3, 5);
  const std::vector<double> lo(3, 0.0), hi(3, 1.0);
  PatternSearchOptions o;
  o.max_evals = 400;
  o.min_step = 1e-9;
  for (auto _ : state) benchmark::DoNotOptimize(kernels::multistart_maximize(bumpy, starts, lo, hi, o, P));
}

template <ExecPolicy P>
void BM_predict_points(benchmark::State& state) {
  const auto Q = random_points(state.range(0), 2, 4);
  const auto train = random_points(64, 2, 6);
  const PointPredictor predict = [&](std::span<const double> x) {
    double m = 0.0, v = 1.0;
    for (Eigen::Index i = 0; i < train.rows(); ++i) {
      const double d0 = x[0] - train(i, 0), d1 = x[1] - train(i, 1);
      const double k = std::exp(-0.5 * (d0 * d0 + d1 * d1) / 0.04);
      m += k;
      v -= k * k / 64.0;
    }
    return std::pair{m, v};
  };
  for (auto _ : state) benchmark::DoNotOptimize(kernels::predict_points(predict, Q, P));
}

}  // namespace

BENCHMARK(BM_covariance<ExecPolicy::serial>)->RangeMultiplier(2)->Range(64, 1024)->Complexity();
BENCHMARK(BM_covariance<ExecPolicy::parallel>)->RangeMultiplier(2)->Range(64, 1024)->Complexity()->UseRealTime();
BENCHMARK(BM_cross_covariance<ExecPolicy::serial>)->Arg(256)->Arg(2048);
BENCHMARK(BM_cross_covariance<ExecPolicy::parallel>)->Arg(256)->Arg(2048)->UseRealTime();
BENCHMARK(BM_multistart<ExecPolicy::serial>)->Arg(8)->Arg(32);
BENCHMARK(BM_multistart<ExecPolicy::parallel>)->Arg(8)->Arg(32)->UseRealTime();
BENCHMARK(BM_predict_points<ExecPolicy::serial>)->Arg(1000)->Arg(10000);
BENCHMARK(BM_predict_points<ExecPolicy::parallel>)->Arg(1000)->Arg(10000)->UseRealTime();

BENCHMARK_MAIN();
