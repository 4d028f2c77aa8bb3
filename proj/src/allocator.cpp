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

#include "mfac/allocator.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "mfac/error.hpp"

namespace mfac {

double lpt_makespan(std::vector<double> walltimes, int workers) {
  if (walltimes.empty()) return 0.0;
  if (workers <= 0) return std::numeric_limits<double>::infinity();
  std::stable_sort(walltimes.begin(), walltimes.end(), std::greater<>());
  std::vector<double> load(static_cast<std::size_t>(workers), 0.0);
  for (double w : walltimes) {
    auto it = std::min_element(load.begin(), load.end());
    *it += w;
  }
  return *std::max_element(load.begin(), load.end());
}

namespace {

int workers_for(const Hierarchy& h, int level, const WorkerCounts& workers) {
  const auto it = workers.find(h[static_cast<std::size_t>(level)].queue_name);
  return it == workers.end() ? 0 : it->second;
}

struct Evaluation {
  double benefit = 0.0;
  double cost = 0.0;
  double makespan = 0.0;
  bool feasible = false;
};

// Canonical evaluation of a subset: sums in ascending candidate order so
// every search path reports identical totals.
Evaluation evaluate(const std::vector<CandidateTask>& c, std::vector<std::size_t> subset, double T_i, double B_i,
                    const Hierarchy& h, const WorkerCounts& workers) {
  std::sort(subset.begin(), subset.end());
  Evaluation e;
  for (std::size_t k : subset) {
    e.benefit += c[k].benefit;
    e.cost += c[k].cost;
  }
  e.makespan = subset_makespan(c, subset, h, workers);
  e.feasible = e.cost <= B_i && e.makespan <= T_i;
  return e;
}

SelectionDecision make_decision(const std::vector<CandidateTask>& c, std::vector<std::size_t> subset, double T_i,
                                double B_i, const Hierarchy& h, const WorkerCounts& workers, bool optimal) {
  std::sort(subset.begin(), subset.end());
  SelectionDecision d;
  for (const auto& t : c) d.decisions[{t.m, t.level}] = 0;
  for (std::size_t k : subset) d.decisions[{c[k].m, c[k].level}] = 1;
  const auto e = evaluate(c, subset, T_i, B_i, h, workers);
  d.selected = std::move(subset);
  d.total_benefit = e.benefit;
  d.total_cost = e.cost;
  d.total_walltime = e.makespan;
  d.optimal = optimal;
  return d;
}

// Candidates that can appear in some feasible selection, sorted by benefit
// density with ties broken by higher benefit, lower level, lower m.
std::vector<std::size_t> eligible_by_density(const std::vector<CandidateTask>& c, double T_i, double B_i,
                                             const Hierarchy& h, const WorkerCounts& workers) {
  std::vector<std::size_t> idx;
  for (std::size_t k = 0; k < c.size(); ++k) {
    const auto& t = c[k];
    if (!(t.cost > 0.0) || !(t.walltime > 0.0)) throw InvalidArgument("candidate cost and walltime must be positive");
    if (t.level < 0 || static_cast<std::size_t>(t.level) >= h.size()) {
      throw InvalidArgument("candidate level out of range");
    }
    if (!(t.benefit > 0.0)) continue;
    if (t.cost > B_i || t.walltime > T_i) continue;
    if (workers_for(h, t.level, workers) <= 0) continue;
    idx.push_back(k);
  }
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    const double da = c[a].benefit / c[a].cost;
    const double db = c[b].benefit / c[b].cost;
    if (da != db) return da > db;
    if (c[a].benefit != c[b].benefit) return c[a].benefit > c[b].benefit;
    if (c[a].level != c[b].level) return c[a].level < c[b].level;
    return c[a].m < c[b].m;
  });
  return idx;
}

double slack(double v) { return 1e-9 * std::max(1.0, std::abs(v)); }

class BranchAndBound {
 public:
  BranchAndBound(const std::vector<CandidateTask>& c, std::vector<std::size_t> order, double T_i, double B_i,
                 const Hierarchy& h, const WorkerCounts& workers)
      : c_(c), order_(std::move(order)), T_i_(T_i), B_i_(B_i), h_(h), workers_(workers) {
    for (const auto& lv : h.levels) {
      const auto it = workers.find(lv.queue_name);
      queue_capacity_[lv.queue_name] = (it == workers.end() ? 0 : it->second) * T_i;
    }
  }

  std::vector<std::size_t> solve() {
    std::vector<std::size_t> current;
    descend(0, current, 0.0, 0.0);
    return best_set_;
  }

 private:
  double fractional_bound(std::size_t pos, double benefit, double cost) const {
    double cap = B_i_ - cost;
    double bound = benefit;
    for (std::size_t k = pos; k < order_.size() && cap > 0.0; ++k) {
      const auto& t = c_[order_[k]];
      if (t.cost <= cap) {
        bound += t.benefit;
        cap -= t.cost;
      } else {
        bound += t.benefit * (cap / t.cost);
        cap = 0.0;
      }
    }
    return bound;
  }

  void descend(std::size_t pos, std::vector<std::size_t>& current, double benefit, double cost) {
    if (pos == order_.size()) return;
    if (fractional_bound(pos, benefit, cost) + slack(best_value_) <= best_value_) return;

    const std::size_t k = order_[pos];
    const auto& t = c_[k];
    const std::string& queue = h_[static_cast<std::size_t>(t.level)].queue_name;
    // Total work per queue over workers * T_i is a monotone necessary
    // condition for makespan feasibility; the exact LPT check runs per node.
    if (cost + t.cost <= B_i_ + slack(B_i_) && queue_load_[queue] + t.walltime <= queue_capacity_[queue] + slack(T_i_)) {
      current.push_back(k);
      queue_load_[queue] += t.walltime;
      const auto e = evaluate(c_, current, T_i_, B_i_, h_, workers_);
      if (e.feasible && e.benefit > best_value_) {
        best_value_ = e.benefit;
        best_set_ = current;
      }
      descend(pos + 1, current, benefit + t.benefit, cost + t.cost);
      queue_load_[queue] -= t.walltime;
      current.pop_back();
    }
    descend(pos + 1, current, benefit, cost);
  }

  const std::vector<CandidateTask>& c_;
  std::vector<std::size_t> order_;
  double T_i_;
  double B_i_;
  const Hierarchy& h_;
  const WorkerCounts& workers_;
  std::map<std::string, double> queue_capacity_;
  std::map<std::string, double> queue_load_;
  double best_value_ = 0.0;
  std::vector<std::size_t> best_set_;
};

std::vector<std::size_t> greedy_set(const std::vector<CandidateTask>& c, const std::vector<std::size_t>& order,
                                    double T_i, double B_i, const Hierarchy& h, const WorkerCounts& workers) {
  std::vector<std::size_t> set;
  for (std::size_t k : order) {
    set.push_back(k);
    if (!evaluate(c, set, T_i, B_i, h, workers).feasible) set.pop_back();
  }
  return set;
}

}  // namespace

double subset_makespan(const std::vector<CandidateTask>& candidates, const std::vector<std::size_t>& subset,
                       const Hierarchy& hierarchy, const WorkerCounts& workers) {
  std::map<std::string, std::vector<double>> per_queue;
  for (std::size_t k : subset) {
    const auto& t = candidates[k];
    per_queue[hierarchy[static_cast<std::size_t>(t.level)].queue_name].push_back(t.walltime);
  }
  double makespan = 0.0;
  for (auto& [queue, walltimes] : per_queue) {
    const auto it = workers.find(queue);
    makespan = std::max(makespan, lpt_makespan(std::move(walltimes), it == workers.end() ? 0 : it->second));
  }
  return makespan;
}

SelectionDecision select_tasks_greedy(const std::vector<CandidateTask>& candidates, double T_i, double B_i,
                                      const Hierarchy& hierarchy, const WorkerCounts& workers) {
  const auto order = eligible_by_density(candidates, T_i, B_i, hierarchy, workers);
  return make_decision(candidates, greedy_set(candidates, order, T_i, B_i, hierarchy, workers), T_i, B_i, hierarchy,
                       workers, false);
}

SelectionDecision select_tasks_heuristic(const std::vector<CandidateTask>& candidates, double T_i, double B_i,
                                         const Hierarchy& hierarchy, const WorkerCounts& workers) {
  const auto order = eligible_by_density(candidates, T_i, B_i, hierarchy, workers);
  auto set = greedy_set(candidates, order, T_i, B_i, hierarchy, workers);
  double value = evaluate(candidates, set, T_i, B_i, hierarchy, workers).benefit;

  // First-improvement local search over single additions and 1-for-1 swaps.
  bool improved = true;
  while (improved) {
    improved = false;
    for (std::size_t j : order) {
      if (std::find(set.begin(), set.end(), j) != set.end()) continue;
      auto trial = set;
      trial.push_back(j);
      auto e = evaluate(candidates, trial, T_i, B_i, hierarchy, workers);
      if (e.feasible && e.benefit > value + slack(value)) {
        set = std::move(trial);
        value = e.benefit;
        improved = true;
        break;
      }
      for (std::size_t pos = 0; pos < set.size(); ++pos) {
        trial = set;
        trial[pos] = j;
        e = evaluate(candidates, trial, T_i, B_i, hierarchy, workers);
        if (e.feasible && e.benefit > value + slack(value)) {
          set = std::move(trial);
          value = e.benefit;
          improved = true;
          break;
        }
      }
      if (improved) break;
    }
  }
  return make_decision(candidates, std::move(set), T_i, B_i, hierarchy, workers, false);
}

SelectionDecision select_tasks(const std::vector<CandidateTask>& candidates, double T_i, double B_i,
                               const Hierarchy& hierarchy, const WorkerCounts& workers) {
  if (!(T_i >= 0.0) || !(B_i >= 0.0)) throw InvalidArgument("iteration budgets must be non-negative");
  if (candidates.size() > kExactSelectionLimit) {
    return select_tasks_heuristic(candidates, T_i, B_i, hierarchy, workers);
  }
  auto order = eligible_by_density(candidates, T_i, B_i, hierarchy, workers);
  BranchAndBound bb(candidates, std::move(order), T_i, B_i, hierarchy, workers);
  return make_decision(candidates, bb.solve(), T_i, B_i, hierarchy, workers, true);
}

IterationPlan plan_iteration(const BudgetState& state, const Hierarchy& hierarchy, std::size_t dim,
                             BatchHeuristic heuristic, int max_candidates_per_level) {
  IterationPlan plan;
  plan.counts.assign(hierarchy.size(), 0);
  if (state.terminated || state.i > state.I || !(state.T_remaining > 0.0) || !(state.B_remaining > 0.0)) {
    plan.terminated = true;
    return plan;
  }
  if (heuristic == BatchHeuristic::longest_sim) {
    double longest = 0.0;
    for (const auto& lv : hierarchy.levels) longest = std::max(longest, lv.cost.max_walltime(dim));
    plan.T_i = longest;
    if (plan.T_i > state.T_remaining) {
      plan.terminated = true;
      return plan;
    }
    plan.estimated_batches = std::max(1, static_cast<int>(std::floor(state.T_remaining / plan.T_i)));
    plan.B_i = state.B_remaining / plan.estimated_batches;
  } else {
    const int left = state.I - state.i + 1;
    plan.estimated_batches = left;
    plan.T_i = state.T_remaining / left;
    plan.B_i = state.B_remaining / left;
  }
  for (std::size_t l = 0; l < hierarchy.size(); ++l) {
    const double per = hierarchy[l].cost.base_cost;
    const double m = std::ceil(plan.B_i / per - 1e-9);
    plan.counts[l] = static_cast<int>(std::clamp(m, 0.0, static_cast<double>(std::max(0, max_candidates_per_level))));
  }
  return plan;
}

BudgetState update_budgets(const BudgetState& state, double spent_T, double spent_B) {
  if (!(spent_T >= 0.0) || !(spent_B >= 0.0)) throw InvalidArgument("spent budgets must be non-negative");
  BudgetState next = state;
  next.T_remaining = state.T_remaining - spent_T;
  next.B_remaining = state.B_remaining - spent_B;
  next.i = state.i + 1;
  next.terminated = state.terminated || next.T_remaining < 0.0 || next.B_remaining < 0.0;
  return next;
}

}  // namespace mfac
