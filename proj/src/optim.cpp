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

#include "mfac/optim.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

#include "mfac/error.hpp"

namespace mfac {

LocalResult pattern_search_max(const Objective& f, std::vector<double> x0, std::span<const double> lower,
                               std::span<const double> upper, const PatternSearchOptions& opts) {
  const std::size_t d = x0.size();
  for (std::size_t j = 0; j < d; ++j) x0[j] = std::clamp(x0[j], lower[j], upper[j]);
  LocalResult res{std::move(x0), 0.0, 0};
  res.value = f(res.x);
  res.evals = 1;
  double step = opts.initial_step;
  std::vector<double> trial(d);
  while (res.evals < opts.max_evals && step >= opts.min_step) {
    bool moved = false;
    for (std::size_t j = 0; j < d && !moved && res.evals < opts.max_evals; ++j) {
      for (double sign : {1.0, -1.0}) {
        trial = res.x;
        trial[j] = std::clamp(res.x[j] + sign * step, lower[j], upper[j]);
        if (trial[j] == res.x[j]) continue;
        const double v = f(trial);
        ++res.evals;
        const bool better = std::isfinite(v) && (!std::isfinite(res.value) || v > res.value);
        if (better) {
          res.x = trial;
          res.value = v;
          moved = true;
          break;
        }
        if (res.evals >= opts.max_evals) break;
      }
    }
    if (!moved) step *= 0.5;
  }
  return res;
}

namespace {

constexpr std::array<unsigned, 32> kPrimes{2,  3,  5,  7,  11, 13, 17, 19, 23,  29,  31,  37,  41,  43,  47,  53,
                                           59, 61, 67, 71, 73, 79, 83, 89, 97, 101, 103, 107, 109, 113, 127, 131};

double radical_inverse(std::uint64_t i, unsigned base) {
  double inv = 1.0 / base;
  double f = inv;
  double r = 0.0;
  while (i > 0) {
    r += f * static_cast<double>(i % base);
    i /= base;
    f *= inv;
  }
  return r;
}

}  // namespace

std::vector<std::vector<double>> halton_points(std::size_t n, std::size_t dim, std::uint64_t seed, std::size_t skip) {
  if (dim > kPrimes.size()) throw InvalidArgument("halton_points supports at most 32 dimensions");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> shift(dim);
  for (auto& s : shift) s = u(rng);
  std::vector<std::vector<double>> pts(n, std::vector<double>(dim));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < dim; ++j) {
      double v = radical_inverse(i + 1 + skip, kPrimes[j]) + shift[j];
      if (v >= 1.0) v -= 1.0;
      pts[i][j] = v;
    }
  }
  return pts;
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(mix(mix(a) ^ b) ^ c);
}

}  // namespace mfac
