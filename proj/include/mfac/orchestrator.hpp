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
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mfac/domain.hpp"
#include "mfac/serialize.hpp"

namespace mfac {

enum class TaskState { queued, claimed, done, failed };

std::string to_string(TaskState s);
TaskState task_state_from(const std::string& s);

struct TaskSpec {
  std::string queue_name;
  DesignPoint point;
  int level = 0;
  double walltime_estimate = 1.0;
  json payload = json::object();
};

struct Task {
  TaskId id = 0;
  std::string queue_name;
  DesignPoint point;
  int level = 0;
  double walltime_estimate = 1.0;
  json payload = json::object();
  TaskState state = TaskState::queued;
  int attempt = 0;  // number of claims so far
  std::string claimed_by;
  double enqueue_time = 0.0;
  double claim_time = 0.0;
  double done_time = 0.0;
  double deadline = 0.0;  // claim_time + visibility timeout
};

struct WorkerProfile {
  std::string id;
  std::vector<std::string> serviced_queues;  // priority order
  double speed_factor = 1.0;
  double failure_rate = 0.0;
};

struct ResultRecord {
  TaskId task_id = 0;
  Observation observation;
  std::string worker_id;
  int attempt = 1;
};

void to_json(json& j, const ResultRecord& r);
void from_json(const json& j, ResultRecord& r);

struct QueueConfig {
  std::string name;
  double latency = 0.0;  // added to every service time on this queue
};

struct BrokerOptions {
  std::filesystem::path journal_path;  // empty: no journal
  std::filesystem::path results_path;  // empty: results kept in memory only
  double visibility_factor = 3.0;      // timeout = factor * walltime estimate
  int max_attempts = 5;
  bool fsync = false;
};

struct CompletionAck {
  bool duplicate = false;
};

/// Serialized broker state: named FIFO queues, task table, append-only
/// result store. Every mutation is journaled before the call returns.
class Broker {
 public:
  Broker(std::vector<QueueConfig> queues, BrokerOptions options = {});
  ~Broker();
  Broker(Broker&&) noexcept;
  Broker& operator=(Broker&&) noexcept;

  /// Rebuilds state from options.journal_path and keeps appending to it.
  /// A torn final line is discarded; any other damage raises IntegrityError.
  static Broker replay(std::vector<QueueConfig> queues, BrokerOptions options);

  TaskId enqueue(const TaskSpec& spec, double now);
  /// Claims the oldest task of the highest-priority non-empty queue the
  /// worker services. Expired claims are re-queued first.
  std::optional<Task> poll(const WorkerProfile& worker, double now);
  /// Records a result. Repeat completions are acknowledged as duplicates.
  CompletionAck complete(TaskId id, const Observation& obs, const std::string& worker_id, int attempt, double now);
  /// Re-queues claims whose visibility timeout passed; tasks out of attempts
  /// fail with an infeasible observation. Returns the affected task ids.
  std::vector<TaskId> requeue_expired(double now);

  std::vector<ResultRecord> results_since(std::size_t cursor) const;
  std::size_t result_count() const;
  std::optional<Task> task(TaskId id) const;
  bool resolved(TaskId id) const;
  std::optional<double> next_deadline() const;
  const std::vector<QueueConfig>& queues() const;
  double queue_latency(const std::string& name) const;
  TaskId next_id() const;

  /// Canonical JSON dump of the full state, used for replay checks.
  std::string snapshot() const;

 private:
  struct Impl;
  explicit Broker(std::unique_ptr<Impl> impl);
  std::unique_ptr<Impl> impl_;
};

using Evaluator = std::function<Observation(const Task&)>;

struct TraceEvent {
  double time = 0.0;
  std::string kind;  // claim | done | death | requeue
  TaskId task_id = 0;
  std::string worker_id;
  int attempt = 0;
  double service_start = 0.0;  // claim events: start of service
  double service_end = 0.0;    // claim events: scheduled end (finish or death)
};

struct ExecutionTrace {
  std::vector<TraceEvent> events;
  double start_time = 0.0;
  double end_time = 0.0;
  double makespan = 0.0;
  std::vector<TaskId> unresolved;
};

struct SimOptions {
  double start_time = 0.0;
  std::uint64_t seed = 0;
  double restart_delay = 0.0;
  double timeout = 1e300;  // virtual duration
};

/// Discrete-event execution on a virtual clock. Service time is
/// walltime / speed_factor plus queue latency; worker deaths are drawn from
/// a stream keyed by (seed, task id, attempt). Runs until every task in
/// wait_for resolves or the timeout passes.
ExecutionTrace run_simulated(Broker& broker, const std::vector<WorkerProfile>& workers, const Evaluator& evaluate,
                             const std::vector<TaskId>& wait_for, const SimOptions& options);

struct ThreadedOptions {
  double start_time = 0.0;
  double seconds_per_time_unit = 1e-3;
  std::uint64_t seed = 0;
  // Probability that a dead worker's attempt completes late anyway.
  double zombie_rate = 0.0;
  double timeout_seconds = 60.0;
};

/// Real threads, one per worker, sleeping scaled service times. Broker time
/// is elapsed wall time divided by seconds_per_time_unit.
ExecutionTrace run_threaded(Broker& broker, const std::vector<WorkerProfile>& workers, const Evaluator& evaluate,
                            const std::vector<TaskId>& wait_for, const ThreadedOptions& options);

/// Whether the attempt dies, from the keyed failure stream.
bool draw_failure(std::uint64_t seed, TaskId id, int attempt, double failure_rate);

}  // namespace mfac
