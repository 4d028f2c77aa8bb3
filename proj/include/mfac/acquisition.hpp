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

#include <cstdint>
#include <vector>

#include "mfac/domain.hpp"
#include "mfac/mf_surrogate.hpp"

namespace mfac {

enum class CampaignGoal { optimize, reduce_variance };

/// A proposed evaluation awaiting the selection decision.
struct CandidateTask {
  int m = 0;  // index within its level's batch
  int level = 0;
  DesignPoint point;  // problem units
  double acq_value = 0.0;
  double cost = 0.0;
  double walltime = 0.0;
  double benefit = 0.0;  // acq_value / cost
};

/// Expected improvement over `best` (maximization). Falls back to
/// max(mean - best, 0) when the standard deviation is below 1e-12.
double expected_improvement(double mean, double variance, double best);

/// var(x, level) - var(x, level - 1), or var(x, 0) on level 0. Variances
/// include each level's trust term. May be negative.
double variance_reduction_benefit(const MfSurrogate& s, const DesignPoint& x, int level);

struct ProposalContext {
  const Hierarchy* hierarchy = nullptr;
  CampaignGoal goal = CampaignGoal::optimize;
  // Incumbent for EI: best feasible top-level value, maximization convention.
  double best = 0.0;
  // Normalized locations of infeasible observations.
  std::vector<std::vector<double>> repulsion;
  double repulsion_radius = 0.02;
  // Candidates of one level closer than this (normalized) are disqualified.
  double duplicate_radius = 1e-3;
  int n_starts = 32;
  int max_evals_per_start = 200;
  ExecPolicy policy = default_policy();
};

/// Acquisition value of a unit point on a level (before clamping).
double acquisition_value(const MfSurrogate& s, std::span<const double> unit_x, int level, const ProposalContext& ctx);

/// Builds counts[l] candidates per level with mean-placeholder batching on a
/// private copy of the surrogate. Throws NoCandidates when a level with a
/// non-zero count has no admissible point.
std::vector<CandidateTask> propose_batch(const MfSurrogate& s, const std::vector<int>& counts,
                                         const ProposalContext& ctx, std::uint64_t seed);

}  // namespace mfac
