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

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mfac/acquisition.hpp"
#include "mfac/allocator.hpp"
#include "mfac/bench.hpp"
#include "mfac/orchestrator.hpp"
#include "mfac/serialize.hpp"

namespace mfac {

enum class HyperPolicy { refit, freeze };
enum class ClockMode { virtual_clock, threaded };

std::string to_string(CampaignGoal g);
std::string to_string(BatchHeuristic h);
std::string to_string(HyperPolicy p);
std::string to_string(ClockMode c);

struct CampaignConfig {
  BenchmarkProblem problem;
  CampaignGoal goal = CampaignGoal::optimize;
  int n_init = 3;
  int n_anchor = 2;  // top-level anchors, reduced when the budget cannot cover them
  int I = 10;
  double T = 100.0;  // wall-clock budget
  double B = 100.0;  // resource budget
  BatchHeuristic heuristic = BatchHeuristic::longest_sim;
  int max_candidates_per_level = 4;
  std::vector<int> level_caps;  // optional per-level cap on M_l, applied after the global one
  std::uint64_t seed = 0;
  double noise_floor = 1e-8;
  HyperPolicy hyper_policy = HyperPolicy::refit;
  std::vector<QueueConfig> queues;     // empty: one queue per level
  std::vector<WorkerProfile> workers;  // empty: one worker per queue
  ClockMode clock = ClockMode::virtual_clock;
  double seconds_per_time_unit = 1e-3;
  double visibility_factor = 3.0;
  int max_attempts = 5;
  double collect_timeout = 1e9;  // per batch, clock units
  int acq_starts = 32;
  int acq_evals = 200;
  int surface_points_per_dim = 21;

  /// Throws ConfigError naming the first bad field.
  void validate() const;
  WorkerCounts worker_counts() const;
};

/// Queues and workers implied by an empty orchestrator section.
void fill_default_resources(CampaignConfig& config);

struct ObservationEntry {
  Observation observation;  // problem units and direction
  std::string origin;       // lhs | anchor | acquired
  int iteration = 0;        // 0 for initialization
  int attempt = 1;
  std::string worker_id;
};

struct IterationEntry {
  int i = 0;
  double T_i = 0.0;
  double B_i = 0.0;
  std::vector<int> counts;
  int n_candidates = 0;
  std::vector<CandidateTask> selected;
  std::vector<TaskId> task_ids;
  double benefit = 0.0;
  double planned_cost = 0.0;
  double planned_makespan = 0.0;
  double actual_makespan = 0.0;
  bool optimal = true;
  // Mean top-level predictive variance of this iteration's surrogate over
  // the fixed 100-point monitoring grid.
  double grid_mean_variance = 0.0;
  double best_value = 0.0;  // best feasible top-level value after the batch (NaN if none)
  std::vector<TaskId> unresolved;
};

struct LedgerEntry {
  int step = 0;
  std::string kind;  // init | iteration
  double T_before = 0.0;
  double B_before = 0.0;
  double T_charge = 0.0;
  double B_charge = 0.0;
  double T_after = 0.0;
  double B_after = 0.0;
  bool terminated = false;
};

// One surrogate sample of the plot-ready surface (d <= 2), problem units.
struct SurfaceRow {
  int level = 0;
  std::vector<double> x;
  double mean = 0.0;
  double variance = 0.0;  // includes trust_variance
  double trust_variance = 0.0;
};

struct CampaignReport {
  std::string problem;
  Direction direction = Direction::maximize;
  CampaignGoal goal = CampaignGoal::optimize;
  std::uint64_t seed = 0;
  std::string status = "completed";  // completed | failed
  std::string diagnostic;
  std::string termination;
  std::vector<ObservationEntry> observations;
  std::vector<IterationEntry> iterations;
  std::vector<LedgerEntry> ledger;
  std::vector<std::optional<Observation>> best_per_level;
  std::optional<Observation> best;  // top level
  double best_mean = 0.0;
  double best_variance = 0.0;
  double final_grid_mean_variance = 0.0;
  std::optional<SurrogateHyper> surrogate;
  std::vector<SurfaceRow> surface;
  double clock = 0.0;
};

void to_json(json& j, const ObservationEntry& e);
void from_json(const json& j, ObservationEntry& e);
void to_json(json& j, const IterationEntry& e);
void from_json(const json& j, IterationEntry& e);
void to_json(json& j, const LedgerEntry& e);
void from_json(const json& j, LedgerEntry& e);
json report_json(const CampaignReport& r);
json summary_json(const CampaignReport& r);

/// Fixed monitoring grid in unit coordinates: 100 midpoints in 1D, a 10x10
/// midpoint grid in 2D, Halton points otherwise.
std::vector<std::vector<double>> monitoring_grid(std::size_t dim);

struct CollectResult {
  std::vector<ResultRecord> records;  // in task-id order
  std::vector<TaskId> unresolved;
  double end_time = 0.0;
  ExecutionTrace trace;
};

/// Executes queued work until every id resolves or the timeout passes, then
/// reads the matching records from the result store. Failed tasks surface
/// as infeasible observations.
CollectResult collect_batch(Broker& broker, const std::vector<TaskId>& dispatched, const CampaignConfig& config,
                            double now, double timeout);

/// Test hook: stop the run after writing checkpoint `after_checkpoint`;
/// with `mid_batch`, also dispatch the next batch before stopping, as a
/// crash between checkpoints would.
struct HaltPoint {
  int after_checkpoint = 0;
  bool mid_batch = false;
};

struct RunOptions {
  std::optional<std::filesystem::path> out_dir;  // unset: in-memory run, no files
  std::optional<HaltPoint> halt;
  // Canonical config echoed into the checkpoint so `resume` needs no input.
  json config_source;
};

/// Runs the outer loop. Returns nullopt only when halted by the test hook.
std::optional<CampaignReport> run_campaign(const CampaignConfig& config, const RunOptions& options = {});

/// Continues a checkpointed campaign in `dir` from its latest checkpoint,
/// or from checkpoints/checkpoint_NNNN.json when `checkpoint` is given.
std::optional<CampaignReport> resume_campaign(const std::filesystem::path& dir,
                                              std::optional<int> checkpoint = std::nullopt,
                                              std::optional<HaltPoint> halt = std::nullopt);

/// Rebuilds the report of a campaign directory from its latest checkpoint
/// and rewrites the report files.
CampaignReport report_campaign(const std::filesystem::path& dir);

/// Writes report.json, summary.json and the CSV tables into dir.
void write_report_files(const CampaignReport& report, const CampaignConfig& config, const std::filesystem::path& dir);

}  // namespace mfac
