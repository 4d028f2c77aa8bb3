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

#include "mfac/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "mfac/error.hpp"
#include "mfac/kernels.hpp"

namespace mfac {

double expected_improvement(double mean, double variance, double best) {
  const double gap = mean - best;
  const double sigma = std::sqrt(std::max(variance, 0.0));
  if (sigma <= 1e-12) return std::max(gap, 0.0);
  const double z = gap / sigma;
  const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
  if (z > 0.0) {
    // gap + sigma * (pdf - z * upper_tail): the bracket is the (non-negative)
    // loss term, so the result never drops below gap through cancellation.
    const double upper_tail = 0.5 * std::erfc(z / std::numbers::sqrt2);
    return gap + sigma * std::max(pdf - z * upper_tail, 0.0);
  }
  const double cdf = 0.5 * std::erfc(-z / std::numbers::sqrt2);
  return std::max(sigma * (z * cdf + pdf), 0.0);
}

double variance_reduction_benefit(const MfSurrogate& s, const DesignPoint& x, int level) {
  if (level < 0 || static_cast<std::size_t>(level) >= s.levels()) {
    throw InvalidArgument("fidelity level " + std::to_string(level) + " out of range");
  }
  const double here = mf_predict(s, x, level).variance;
  if (level == 0) return here;
  return here - mf_predict(s, x, level - 1).variance;
}

double acquisition_value(const MfSurrogate& s, std::span<const double> u, int level, const ProposalContext& ctx) {
  if (ctx.goal == CampaignGoal::optimize) {
    const auto p = s.predict_unit(u, level);
    return expected_improvement(p.mean, p.variance, ctx.best);
  }
  const double here = s.predict_unit(u, level).variance;
  if (level == 0) return here;
  return here - s.predict_unit(u, level - 1).variance;
}

namespace {

bool admissible(std::span<const double> u, const FidelityLevel& lv, const ProposalContext& ctx,
                const std::vector<std::vector<double>>& taken) {
  if (!lv.feasibility.admits(u)) return false;
  const double r2 = ctx.repulsion_radius * ctx.repulsion_radius;
  for (const auto& p : ctx.repulsion) {
    if (squared_distance(u, p) <= r2) return false;
  }
  const double d2 = ctx.duplicate_radius * ctx.duplicate_radius;
  for (const auto& p : taken) {
    if (squared_distance(u, p) <= d2) return false;
  }
  return true;
}

}  // namespace

std::vector<CandidateTask> propose_batch(const MfSurrogate& s, const std::vector<int>& counts,
                                         const ProposalContext& ctx, std::uint64_t seed) {
  if (ctx.hierarchy == nullptr) throw InvalidArgument("propose_batch needs the fidelity hierarchy");
  const Hierarchy& h = *ctx.hierarchy;
  if (counts.size() > s.levels() || h.size() != s.levels()) {
    throw InvalidArgument("candidate counts and hierarchy must match the surrogate's level count");
  }
  const std::size_t d = s.domain().dim();
  const std::vector<double> lower(d, 0.0), upper(d, 1.0);
  PatternSearchOptions ps;
  ps.initial_step = 0.1;
  ps.min_step = 1e-6;
  ps.max_evals = ctx.max_evals_per_start;

  MfSurrogate scratch = s;
  std::vector<CandidateTask> out;
  for (std::size_t l = 0; l < counts.size(); ++l) {
    if (counts[l] < 0) throw InvalidArgument("candidate counts must be non-negative");
    const FidelityLevel& lv = h[l];
    const int level = static_cast<int>(l);
    std::vector<std::vector<double>> taken;
    for (int m = 0; m < counts[l]; ++m) {
      const Objective f = [&](std::span<const double> u) {
        if (!admissible(u, lv, ctx, taken)) return -std::numeric_limits<double>::infinity();
        return std::max(acquisition_value(scratch, u, level, ctx), 0.0);
      };
      const std::uint64_t stream = mix_seed(seed, l, static_cast<std::uint64_t>(m));
      const auto pool = halton_points(static_cast<std::size_t>(ctx.n_starts) * 64, d, stream);
      std::vector<std::vector<double>> starts;
      for (const auto& p : pool) {
        if (admissible(p, lv, ctx, taken)) starts.push_back(p);
        if (starts.size() == static_cast<std::size_t>(ctx.n_starts)) break;
      }
      if (starts.empty()) throw NoCandidates(level);
      const auto results = kernels::multistart_maximize(f, starts, lower, upper, ps, ctx.policy);
      const std::size_t best = kernels::best_index(results);
      if (best == results.size()) throw NoCandidates(level);
      const auto& u = results[best].x;

      CandidateTask c;
      c.m = m;
      c.level = level;
      c.point = s.domain().denormalize(DesignPoint{u});
      c.acq_value = results[best].value;
      c.cost = lv.cost.cost(u);
      c.walltime = lv.cost.walltime_at(u);
      c.benefit = c.acq_value / c.cost;
      out.push_back(std::move(c));

      taken.push_back(u);
      scratch.add_placeholder(u, level);
    }
  }
  return out;
}

}  // namespace mfac
