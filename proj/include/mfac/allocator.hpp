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

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "mfac/acquisition.hpp"
#include "mfac/domain.hpp"

namespace mfac {

struct BudgetState {
  double T_remaining = 0.0;  // seconds
  double B_remaining = 0.0;  // resource units
  int I = 1;                 // iteration cap
  int i = 1;                 // current iteration, 1-based
  double T_i = 0.0;
  double B_i = 0.0;
  bool terminated = false;

  bool operator==(const BudgetState&) const = default;
};

struct SelectionDecision {
  // (m, level) -> y
  std::map<std::pair<int, int>, int> decisions;
  std::vector<std::size_t> selected;  // indices into the candidate list, ascending
  double total_benefit = 0.0;
  double total_cost = 0.0;
  double total_walltime = 0.0;  // makespan of the selected set
  bool optimal = false;
};

/// Workers available per queue name.
using WorkerCounts = std::map<std::string, int>;

inline constexpr std::size_t kExactSelectionLimit = 24;

/// Longest-processing-time packing of walltimes onto `workers` machines;
/// returns the makespan (infinity when workers == 0 and tasks exist).
double lpt_makespan(std::vector<double> walltimes, int workers);

/// Makespan of a candidate subset: each level's tasks are packed onto the
/// workers of its queue; the result is the largest queue makespan.
double subset_makespan(const std::vector<CandidateTask>& candidates, const std::vector<std::size_t>& subset,
                       const Hierarchy& hierarchy, const WorkerCounts& workers);

/// Chooses y_{m,l} maximizing total benefit subject to total cost <= B_i and
/// makespan <= T_i. Exact branch and bound up to kExactSelectionLimit
/// candidates, greedy density plus 1-swap local search above that.
SelectionDecision select_tasks(const std::vector<CandidateTask>& candidates, double T_i, double B_i,
                               const Hierarchy& hierarchy, const WorkerCounts& workers);

/// Same contract, forcing the heuristic path. Exposed for testing.
SelectionDecision select_tasks_heuristic(const std::vector<CandidateTask>& candidates, double T_i, double B_i,
                                         const Hierarchy& hierarchy, const WorkerCounts& workers);
/// Greedy by benefit density without the swap phase.
SelectionDecision select_tasks_greedy(const std::vector<CandidateTask>& candidates, double T_i, double B_i,
                                      const Hierarchy& hierarchy, const WorkerCounts& workers);

enum class BatchHeuristic { longest_sim, proportional_steps };

struct IterationPlan {
  double T_i = 0.0;
  double B_i = 0.0;
  std::vector<int> counts;  // M_l
  int estimated_batches = 1;
  bool terminated = false;
};

/// Assigns T_i, B_i and M_l for the current iteration. Terminates when a
/// budget is exhausted, when i > I, or when the planned wall-clock allowance
/// exceeds what remains.
IterationPlan plan_iteration(const BudgetState& state, const Hierarchy& hierarchy, std::size_t dim,
                             BatchHeuristic heuristic, int max_candidates_per_level);

/// T^r -= spent_T; B^r -= spent_B; i += 1; terminated when either goes negative.
BudgetState update_budgets(const BudgetState& state, double spent_T, double spent_B);

}  // namespace mfac
