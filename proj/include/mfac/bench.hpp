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

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mfac/domain.hpp"
#include "mfac/serialize.hpp"

namespace mfac {

using PointFunction = std::function<double(const DesignPoint&)>;

/// One fidelity level of a synthetic problem. All closures take problem
/// units.
struct LevelModel {
  std::string name;
  std::string queue;
  PointFunction objective;
  CostModel cost;
  TrustPrior trust;
  PointFunction noise_var;  // empty: deterministic level
  std::function<bool(const DesignPoint&)> hidden_ok;  // empty: no hidden constraint
  Feasibility feasibility;
};

struct TrueOptimum {
  DesignPoint point;
  double value = 0.0;
};

struct BenchmarkProblem {
  std::string name;
  Domain domain;
  Direction direction = Direction::maximize;
  std::vector<LevelModel> levels;
  std::optional<TrueOptimum> optimum;
  std::vector<int> bridge_degrees;  // -1 entries mean automatic

  Hierarchy hierarchy() const;
  /// Evaluates one task. Stochastic levels draw from a stream keyed by
  /// (seed, task id), so retries and thread interleaving cannot change it.
  Observation evaluate(int level, const DesignPoint& x, std::uint64_t seed, TaskId task_id) const;
  double noiseless(int level, const DesignPoint& x) const;
};

/// 1D pair on [0, 1]: high = (6x-2)^2 sin(12x-4), low = 0.5 high + 10(x-0.5) - 5.
/// Minimize; high costs 10, low costs 1.
BenchmarkProblem forrester_pair();
/// 2D sum of two Gaussians on the unit box with one interior maximum and a
/// walltime that grows with x_0. Single level.
BenchmarkProblem eh_analogue();
/// 2D two-level problem; the top level carries heteroskedastic Gaussian noise.
BenchmarkProblem stochastic_micro();

double forrester_high(double x);
double forrester_low(double x);
// Noise variance field of stochastic_micro and its declared minimizer.
double stochastic_micro_noise(const DesignPoint& x);
DesignPoint stochastic_micro_noise_argmin();

/// Keeps only the listed levels (re-indexed from 0).
BenchmarkProblem restrict_levels(const BenchmarkProblem& p, const std::vector<int>& keep);

std::vector<std::string> benchmark_names();
BenchmarkProblem benchmark_by_name(const std::string& name);

/// Declarative problem: domain, per-level polynomial or Gaussian-sum
/// objective over normalized coordinates, cost, trust, noise polynomial,
/// feasibility constraints and hidden infeasible balls, plus bridge degrees.
BenchmarkProblem problem_from_json(const json& j);

}  // namespace mfac
