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

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace mfac {

using Objective = std::function<double(std::span<const double>)>;

struct PatternSearchOptions {
  double initial_step = 0.1;
  double min_step = 1e-6;
  int max_evals = 200;
};

struct LocalResult {
  std::vector<double> x;
  double value = 0.0;
  int evals = 0;
};

/// Compass search maximizing f inside [lower, upper]. Polls +/- step along each
/// axis in a fixed order, moves on the first strict improvement, halves the step
/// after an unsuccessful sweep. Non-finite objective values never count as an
/// improvement, so f may return -inf to mark excluded points.
LocalResult pattern_search_max(const Objective& f, std::vector<double> x0, std::span<const double> lower,
                               std::span<const double> upper, const PatternSearchOptions& opts);

/// Halton points in [0, 1)^dim with a seed-dependent Cranley-Patterson shift.
/// `skip` drops that many leading sequence entries.
std::vector<std::vector<double>> halton_points(std::size_t n, std::size_t dim, std::uint64_t seed,
                                               std::size_t skip = 0);

/// SplitMix64 finalizer; used to derive independent stream seeds from keys.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0);

}  // namespace mfac
