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

#include <algorithm>
#include <atomic>
#include <chrono>
#include <mutex>
#include <queue>
#include <random>
#include <set>
#include <thread>

#include "mfac/error.hpp"
#include "mfac/optim.hpp"
#include "mfac/orchestrator.hpp"

namespace mfac {

bool draw_failure(std::uint64_t seed, TaskId id, int attempt, double failure_rate) {
  if (failure_rate <= 0.0) return false;
  std::mt19937_64 rng(mix_seed(seed ^ 0x5eedfa11ULL, id, static_cast<std::uint64_t>(attempt)));
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < failure_rate;
}

namespace {

enum class EventKind { ready, finish, death, deadline };

struct SimEvent {
  double time = 0.0;
  std::uint64_t seq = 0;
  EventKind kind = EventKind::ready;
  std::size_t worker = 0;
  Task task;
  double service_start = 0.0;

  bool operator>(const SimEvent& o) const { return time != o.time ? time > o.time : seq > o.seq; }
};

bool all_resolved(const Broker& broker, const std::vector<TaskId>& ids) {
  return std::all_of(ids.begin(), ids.end(), [&](TaskId id) { return broker.resolved(id); });
}

void validate_workers(const std::vector<WorkerProfile>& workers) {
  for (const auto& w : workers) {
    if (w.serviced_queues.empty()) throw ConfigError("worker '" + w.id + "' services no queues");
    if (!(w.speed_factor > 0.0)) throw ConfigError("worker '" + w.id + "' needs a positive speed factor");
    if (!(w.failure_rate >= 0.0 && w.failure_rate < 1.0)) {
      throw ConfigError("worker '" + w.id + "' failure rate must be in [0, 1)");
    }
  }
}

}  // namespace

ExecutionTrace run_simulated(Broker& broker, const std::vector<WorkerProfile>& workers, const Evaluator& evaluate,
                             const std::vector<TaskId>& wait_for, const SimOptions& options) {
  validate_workers(workers);
  ExecutionTrace trace;
  trace.start_time = options.start_time;
  trace.end_time = options.start_time;

  std::priority_queue<SimEvent, std::vector<SimEvent>, std::greater<>> events;
  std::uint64_t seq = 0;
  auto push = [&](SimEvent e) {
    e.seq = seq++;
    events.push(std::move(e));
  };
  std::set<std::size_t> idle;
  for (std::size_t w = 0; w < workers.size(); ++w) push({options.start_time, 0, EventKind::ready, w, {}, 0.0});

  const double horizon = options.start_time + options.timeout;
  while (!events.empty() && !all_resolved(broker, wait_for)) {
    SimEvent ev = events.top();
    events.pop();
    if (ev.time > horizon) break;
    const double now = ev.time;
    switch (ev.kind) {
      case EventKind::ready: {
        const WorkerProfile& wp = workers[ev.worker];
        auto task = broker.poll(wp, now);
        if (!task) {
          idle.insert(ev.worker);
          break;
        }
        const double service = task->walltime_estimate / wp.speed_factor + broker.queue_latency(task->queue_name);
        const bool dies = draw_failure(options.seed, task->id, task->attempt, wp.failure_rate);
        const double end = dies ? now + 0.5 * service : now + service;
        trace.events.push_back({now, "claim", task->id, wp.id, task->attempt, now, end});
        push({task->deadline, 0, EventKind::deadline, ev.worker, *task, now});
        push({end, 0, dies ? EventKind::death : EventKind::finish, ev.worker, std::move(*task), now});
        break;
      }
      case EventKind::finish: {
        Observation obs = evaluate(ev.task);
        obs.walltime_actual = now - ev.service_start;
        broker.complete(ev.task.id, obs, workers[ev.worker].id, ev.task.attempt, now);
        trace.events.push_back({now, "done", ev.task.id, workers[ev.worker].id, ev.task.attempt, 0.0, 0.0});
        trace.end_time = now;
        push({now, 0, EventKind::ready, ev.worker, {}, 0.0});
        break;
      }
      case EventKind::death: {
        trace.events.push_back({now, "death", ev.task.id, workers[ev.worker].id, ev.task.attempt, 0.0, 0.0});
        trace.end_time = now;
        push({now + options.restart_delay, 0, EventKind::ready, ev.worker, {}, 0.0});
        break;
      }
      case EventKind::deadline: {
        const auto affected = broker.requeue_expired(now);
        for (TaskId id : affected) {
          const auto t = broker.task(id);
          trace.events.push_back({now, t && t->state == TaskState::failed ? "fail" : "requeue", id, "broker",
                                  t ? t->attempt : 0, 0.0, 0.0});
        }
        if (!affected.empty()) {
          trace.end_time = now;
          for (std::size_t w : idle) push({now, 0, EventKind::ready, w, {}, 0.0});
          idle.clear();
        }
        break;
      }
    }
  }
  for (TaskId id : wait_for) {
    if (!broker.resolved(id)) trace.unresolved.push_back(id);
  }
  trace.makespan = trace.end_time - trace.start_time;
  return trace;
}

ExecutionTrace run_threaded(Broker& broker, const std::vector<WorkerProfile>& workers, const Evaluator& evaluate,
                            const std::vector<TaskId>& wait_for, const ThreadedOptions& options) {
  validate_workers(workers);
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  const double scale = options.seconds_per_time_unit;
  auto now = [&] { return options.start_time + std::chrono::duration<double>(clock::now() - t0).count() / scale; };
  auto sleep_units = [&](double units) {
    std::this_thread::sleep_for(std::chrono::duration<double>(std::max(units, 0.0) * scale));
  };

  ExecutionTrace trace;
  trace.start_time = options.start_time;
  std::mutex trace_mu;
  auto note = [&](TraceEvent e) {
    std::lock_guard lock(trace_mu);
    trace.events.push_back(std::move(e));
  };
  std::atomic<bool> stop{false};
  std::vector<std::thread> zombies;
  std::mutex zombie_mu;

  auto worker_loop = [&](const WorkerProfile& wp) {
    while (!stop.load()) {
      auto task = broker.poll(wp, now());
      if (!task) {
        sleep_units(0.05);
        continue;
      }
      const double start = now();
      const double service = task->walltime_estimate / wp.speed_factor + broker.queue_latency(task->queue_name);
      const bool dies = draw_failure(options.seed, task->id, task->attempt, wp.failure_rate);
      note({start, "claim", task->id, wp.id, task->attempt, start, start + (dies ? 0.5 : 1.0) * service});
      if (dies) {
        sleep_units(0.5 * service);
        note({now(), "death", task->id, wp.id, task->attempt, 0.0, 0.0});
        // A zombie finishes after its claim expired; the broker must dedupe.
        std::mt19937_64 rng(mix_seed(options.seed ^ 0x2011b1eULL, task->id, static_cast<std::uint64_t>(task->attempt)));
        if (std::uniform_real_distribution<double>(0.0, 1.0)(rng) < options.zombie_rate) {
          std::lock_guard lock(zombie_mu);
          zombies.emplace_back([&, t = *task, id = wp.id] {
            sleep_units(t.deadline - now() + 0.1 * t.walltime_estimate);
            Observation obs = evaluate(t);
            obs.walltime_actual = now() - t.claim_time;
            const auto ack = broker.complete(t.id, obs, id, t.attempt, now());
            note({now(), ack.duplicate ? "duplicate" : "done", t.id, id, t.attempt, 0.0, 0.0});
          });
        }
        continue;
      }
      sleep_units(service);
      Observation obs = evaluate(*task);
      obs.walltime_actual = now() - start;
      const auto ack = broker.complete(task->id, obs, wp.id, task->attempt, now());
      note({now(), ack.duplicate ? "duplicate" : "done", task->id, wp.id, task->attempt, 0.0, 0.0});
    }
  };

  std::vector<std::thread> threads;
  threads.reserve(workers.size());
  for (const auto& w : workers) threads.emplace_back(worker_loop, std::cref(w));
  const auto give_up = t0 + std::chrono::duration_cast<clock::duration>(std::chrono::duration<double>(options.timeout_seconds));
  while (!all_resolved(broker, wait_for) && clock::now() < give_up) {
    broker.requeue_expired(now());
    std::this_thread::sleep_for(std::chrono::duration<double>(0.05 * scale));
  }
  stop.store(true);
  for (auto& t : threads) t.join();
  {
    std::lock_guard lock(zombie_mu);
    for (auto& z : zombies) z.join();
  }
  trace.end_time = now();
  std::sort(trace.events.begin(), trace.events.end(),
            [](const TraceEvent& a, const TraceEvent& b) { return a.time < b.time; });
  for (TaskId id : wait_for) {
    if (!broker.resolved(id)) trace.unresolved.push_back(id);
  }
  trace.makespan = trace.end_time - trace.start_time;
  return trace;
}

}  // namespace mfac
