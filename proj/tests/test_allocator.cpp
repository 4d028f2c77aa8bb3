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

#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "mfac/allocator.hpp"
#include "mfac/error.hpp"
#include "support.hpp"

using namespace mfac;

namespace {

Hierarchy make_hierarchy(const std::vector<std::pair<double, double>>& cost_wall) {
  Hierarchy h;
  for (std::size_t l = 0; l < cost_wall.size(); ++l) {
    FidelityLevel lv;
    lv.index = static_cast<int>(l);
    lv.name = "L" + std::to_string(l);
    lv.queue_name = "q" + std::to_string(l);
    lv.cost.base_cost = cost_wall[l].first;
    lv.cost.walltime = cost_wall[l].second;
    h.levels.push_back(lv);
  }
  return h;
}

// Independent LPT: repeatedly give the longest remaining job to the least
// loaded machine (lowest index on ties).
double oracle_lpt(std::vector<double> w, int machines) {
  if (w.empty()) return 0.0;
  if (machines <= 0) return INFINITY;
  std::sort(w.begin(), w.end(), [](double a, double b) { return a > b; });
  std::vector<double> load(static_cast<std::size_t>(machines), 0.0);
  for (double x : w) {
    std::size_t m = 0;
    for (std::size_t k = 1; k < load.size(); ++k) {
      if (load[k] < load[m]) m = k;
    }
    load[m] += x;
  }
  return *std::max_element(load.begin(), load.end());
}

struct Oracle {
  double value = 0.0;
  std::uint32_t mask = 0;
};

// All 2^M subsets; benefits summed in ascending index order.
Oracle enumerate(const std::vector<CandidateTask>& c, double T, double B, const Hierarchy& h, const WorkerCounts& w) {
  Oracle best;
  const std::uint32_t total = 1U << c.size();
  for (std::uint32_t mask = 0; mask < total; ++mask) {
    double benefit = 0.0, cost = 0.0;
    std::map<std::string, std::vector<double>> per_queue;
    for (std::size_t k = 0; k < c.size(); ++k) {
      if (!(mask >> k & 1U)) continue;
      benefit += c[k].benefit;
      cost += c[k].cost;
      per_queue[h[static_cast<std::size_t>(c[k].level)].queue_name].push_back(c[k].walltime);
    }
    if (cost > B) continue;
    double makespan = 0.0;
    for (auto& [q, ws] : per_queue) {
      const auto it = w.find(q);
      makespan = std::max(makespan, oracle_lpt(ws, it == w.end() ? 0 : it->second));
    }
    if (makespan > T) continue;
    if (benefit > best.value) best = {benefit, mask};
  }
  return best;
}

std::vector<CandidateTask> random_candidates(std::mt19937_64& rng, int m, const Hierarchy& h) {
  std::uniform_int_distribution<int> level(0, static_cast<int>(h.size()) - 1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<CandidateTask> c;
  std::vector<int> per_level(h.size(), 0);
  for (int k = 0; k < m; ++k) {
    CandidateTask t;
    t.level = level(rng);
    t.m = per_level[static_cast<std::size_t>(t.level)]++;
    const auto& cm = h[static_cast<std::size_t>(t.level)].cost;
    t.cost = cm.base_cost * (0.5 + u(rng));
    t.walltime = cm.walltime * (0.5 + u(rng));
    t.acq_value = u(rng) < 0.1 ? 0.0 : u(rng) * 3.0;
    t.benefit = t.acq_value / t.cost;
    c.push_back(t);
  }
  return c;
}

}  // namespace

TEST_CASE("lpt makespan") {
  CHECK(lpt_makespan({}, 0) == 0.0);
  CHECK(std::isinf(lpt_makespan({1.0}, 0)));
  CHECK(lpt_makespan({3.0, 3.0, 2.0, 2.0, 2.0}, 2) == 7.0);  // LPT, optimum is 6
  CHECK(lpt_makespan({5.0, 1.0, 1.0}, 3) == 5.0);
  std::mt19937_64 rng(1);
  for (int k = 0; k < 200; ++k) {
    const auto w = testing::uniform_vector(rng, 1 + k % 9, 0.1, 5.0);
    const int m = 1 + k % 4;
    CHECK(lpt_makespan(w, m) == oracle_lpt(w, m));
  }
}

TEST_CASE("exact selection equals exhaustive enumeration") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 300; ++trial) {
    const Hierarchy h = make_hierarchy({{1.0, 1.0}, {4.0, 3.0}, {10.0, 8.0}});
    const WorkerCounts w{{"q0", 1 + trial % 3}, {"q1", 1 + trial % 2}, {"q2", trial % 4 == 0 ? 0 : 1}};
    const auto c = random_candidates(rng, 1 + trial % 12, h);
    const double T = 1.0 + 12.0 * u(rng), B = 1.0 + 25.0 * u(rng);
    const auto d = select_tasks(c, T, B, h, w);
    const auto o = enumerate(c, T, B, h, w);
    CHECK(d.total_benefit == o.value);
    CHECK(d.optimal);
    CHECK(d.total_cost <= B);
    CHECK(d.total_walltime <= T);
    CHECK(d.decisions.size() == c.size());
    int chosen = 0;
    for (const auto& [key, y] : d.decisions) chosen += y;
    CHECK(chosen == static_cast<int>(d.selected.size()));
  }
}

TEST_CASE("heuristic and greedy selections are feasible and never beat the optimum") {
  std::mt19937_64 rng(5);
  const Hierarchy h = make_hierarchy({{1.0, 1.0}, {6.0, 4.0}});
  const WorkerCounts w{{"q0", 3}, {"q1", 1}};
  for (int trial = 0; trial < 100; ++trial) {
    const auto c = random_candidates(rng, 10, h);
    const auto exact = select_tasks(c, 8.0, 15.0, h, w);
    for (const auto& d : {select_tasks_heuristic(c, 8.0, 15.0, h, w), select_tasks_greedy(c, 8.0, 15.0, h, w)}) {
      CHECK_FALSE(d.optimal);
      CHECK(d.total_cost <= 15.0);
      CHECK(d.total_walltime <= 8.0);
      CHECK(d.total_benefit <= exact.total_benefit);
    }
  }
  // Above the exact limit the heuristic path is used.
  const auto many = random_candidates(rng, static_cast<int>(kExactSelectionLimit) + 6, h);
  const auto d = select_tasks(many, 10.0, 30.0, h, w);
  CHECK_FALSE(d.optimal);
  CHECK(d.total_cost <= 30.0);
}

TEST_CASE("selection rejects malformed input") {
  const Hierarchy h = make_hierarchy({{1.0, 1.0}});
  CandidateTask t;
  t.cost = 0.0;
  t.walltime = 1.0;
  t.benefit = 1.0;
  CHECK_THROWS_AS(select_tasks({t}, 1.0, 1.0, h, {{"q0", 1}}), InvalidArgument);
  CHECK_THROWS_AS(select_tasks({}, -1.0, 1.0, h, {{"q0", 1}}), InvalidArgument);
  CHECK(select_tasks({}, 1.0, 1.0, h, {{"q0", 1}}).selected.empty());
}

TEST_CASE("plan_iteration, longest simulation heuristic") {
  Hierarchy h = make_hierarchy({{1.0, 2.0}, {10.0, 7.0}});
  BudgetState s{100.0, 60.0, 5, 1};
  const auto p = plan_iteration(s, h, 1, BatchHeuristic::longest_sim, 4);
  CHECK(p.T_i == 7.0);
  CHECK(p.estimated_batches == 14);  // floor(100 / 7)
  CHECK(p.B_i == 60.0 / 14);
  CHECK(p.counts == std::vector<int>{4, 1});  // min(4, ceil(4.29)), ceil(0.43)
  CHECK_FALSE(p.terminated);

  // Walltime shorter than the longest simulation terminates.
  s.T_remaining = 6.0;
  CHECK(plan_iteration(s, h, 1, BatchHeuristic::longest_sim, 4).terminated);
  // Fewer than one full batch left still plans one.
  s.T_remaining = 9.0;
  CHECK(plan_iteration(s, h, 1, BatchHeuristic::longest_sim, 4).estimated_batches == 1);

  // The multiplier's maximum over the box sets T_i.
  h.levels[1].cost.multiplier = Polynomial(1, 1, {1.0, 1.0});
  s.T_remaining = 100.0;
  CHECK(plan_iteration(s, h, 1, BatchHeuristic::longest_sim, 4).T_i == 14.0);
}

TEST_CASE("plan_iteration, proportional steps heuristic") {
  const Hierarchy h = make_hierarchy({{1.0, 2.0}, {10.0, 7.0}});
  BudgetState s{90.0, 33.0, 4, 2};
  const auto p = plan_iteration(s, h, 1, BatchHeuristic::proportional_steps, 3);
  CHECK(p.T_i == 30.0);
  CHECK(p.B_i == 11.0);
  CHECK(p.counts == std::vector<int>{3, 2});
  // Exact multiples do not round up.
  s.B_remaining = 60.0;
  CHECK(plan_iteration(s, h, 1, BatchHeuristic::proportional_steps, 9).counts == std::vector<int>{9, 2});
}

TEST_CASE("plan_iteration terminates past the cap or on empty budgets") {
  const Hierarchy h = make_hierarchy({{1.0, 1.0}});
  CHECK(plan_iteration({10.0, 10.0, 3, 4}, h, 1, BatchHeuristic::proportional_steps, 2).terminated);
  CHECK(plan_iteration({0.0, 10.0, 3, 1}, h, 1, BatchHeuristic::proportional_steps, 2).terminated);
  CHECK(plan_iteration({10.0, 0.0, 3, 1}, h, 1, BatchHeuristic::proportional_steps, 2).terminated);
  BudgetState done{10.0, 10.0, 3, 1};
  done.terminated = true;
  CHECK(plan_iteration(done, h, 1, BatchHeuristic::longest_sim, 2).terminated);
}

TEST_CASE("update_budgets subtracts and flags negative remainders") {
  const BudgetState s{10.0, 5.0, 3, 1};
  const auto a = update_budgets(s, 4.0, 5.0);
  CHECK(a.T_remaining == 6.0);
  CHECK(a.B_remaining == 0.0);
  CHECK(a.i == 2);
  CHECK_FALSE(a.terminated);
  const auto b = update_budgets(a, 7.0, 0.0);
  CHECK(b.T_remaining == -1.0);
  CHECK(b.terminated);
  CHECK_THROWS_AS(update_budgets(s, -1.0, 0.0), InvalidArgument);
}
