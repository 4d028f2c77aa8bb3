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

#include <cmath>
#include <fstream>

#include "mfac/error.hpp"
#include "mfac/orchestrator.hpp"
#include "support.hpp"

using namespace mfac;

namespace {

std::vector<QueueConfig> two_queues() { return {{"low", 0.0}, {"high", 0.5}}; }

TaskSpec spec(const std::string& q, double x, double wall = 1.0) {
  TaskSpec s;
  s.queue_name = q;
  s.point = {{x}};
  s.level = q == "high" ? 1 : 0;
  s.walltime_estimate = wall;
  return s;
}

Observation obs(double x, double v) {
  Observation o;
  o.point = {{x}};
  o.value = v;
  return o;
}

WorkerProfile worker(const std::string& id, std::vector<std::string> queues) {
  WorkerProfile w;
  w.id = id;
  w.serviced_queues = std::move(queues);
  return w;
}

}  // namespace

TEST_CASE("tasks move queued, claimed, done in FIFO order") {
  Broker b(two_queues());
  const TaskId a = b.enqueue(spec("low", 0.1), 0.0);
  const TaskId c = b.enqueue(spec("low", 0.2), 1.0);
  CHECK(a == 1);
  CHECK(c == 2);
  CHECK(b.task(a)->state == TaskState::queued);
  const auto t = b.poll(worker("w", {"low"}), 2.0);
  REQUIRE(t);
  CHECK(t->id == a);
  CHECK(t->attempt == 1);
  CHECK(t->claimed_by == "w");
  CHECK(t->deadline == 2.0 + 3.0 * 1.0);
  CHECK(b.task(a)->state == TaskState::claimed);
  CHECK_FALSE(b.complete(a, obs(0.1, 4.0), "w", 1, 2.5).duplicate);
  CHECK(b.task(a)->state == TaskState::done);
  CHECK(b.resolved(a));
  CHECK_FALSE(b.resolved(c));
  REQUIRE(b.result_count() == 1);
  CHECK(b.results_since(0)[0].observation.task_id == a);
  CHECK(b.results_since(1).empty());
}

TEST_CASE("workers poll queues in their priority order") {
  Broker b(two_queues());
  b.enqueue(spec("low", 0.1), 0.0);
  const TaskId h = b.enqueue(spec("high", 0.2), 0.0);
  const auto t = b.poll(worker("w", {"high", "low"}), 0.0);
  REQUIRE(t);
  CHECK(t->id == h);
  CHECK_FALSE(b.poll(worker("x", {"high"}), 0.0));
  CHECK(b.queue_latency("high") == 0.5);
  CHECK_THROWS_AS(b.queue_latency("nope"), ConfigError);
}

TEST_CASE("invalid transitions and inputs are rejected") {
  Broker b(two_queues());
  const TaskId a = b.enqueue(spec("low", 0.1), 0.0);
  CHECK_THROWS_AS(b.complete(a, obs(0.1, 1.0), "w", 1, 0.0), StateViolation);
  CHECK_THROWS_AS(b.complete(99, obs(0.1, 1.0), "w", 1, 0.0), StateViolation);
  CHECK_THROWS_AS(b.enqueue(spec("missing", 0.1), 0.0), ConfigError);
  CHECK_THROWS_AS(b.enqueue(spec("low", 0.1, 0.0), 0.0), InvalidArgument);
  CHECK_THROWS_AS(Broker({{"q", 0.0}, {"q", 0.0}}), ConfigError);
}

TEST_CASE("duplicate completions are acknowledged once") {
  Broker b(two_queues());
  const TaskId a = b.enqueue(spec("low", 0.1), 0.0);
  b.poll(worker("w1", {"low"}), 0.0);
  CHECK_FALSE(b.complete(a, obs(0.1, 1.0), "w1", 1, 1.0).duplicate);
  CHECK(b.complete(a, obs(0.1, 2.0), "w2", 1, 1.5).duplicate);
  CHECK(b.result_count() == 1);
  CHECK(b.results_since(0)[0].observation.value == 1.0);
}

TEST_CASE("expired claims are re-queued and finally failed") {
  BrokerOptions o;
  o.max_attempts = 2;
  o.visibility_factor = 2.0;
  Broker b(two_queues(), o);
  const TaskId a = b.enqueue(spec("low", 0.3, 1.0), 0.0);
  b.poll(worker("w", {"low"}), 0.0);
  CHECK(b.next_deadline() == 2.0);
  CHECK(b.requeue_expired(1.9).empty());
  CHECK(b.requeue_expired(2.0) == std::vector<TaskId>{a});
  CHECK(b.task(a)->state == TaskState::queued);
  const auto again = b.poll(worker("v", {"low"}), 3.0);
  REQUIRE(again);
  CHECK(again->attempt == 2);
  b.requeue_expired(5.0);
  CHECK(b.task(a)->state == TaskState::failed);
  REQUIRE(b.result_count() == 1);
  const auto r = b.results_since(0)[0];
  CHECK_FALSE(r.observation.feasible);
  CHECK(std::isnan(r.observation.value));
  CHECK(r.worker_id == "broker");
  // A late completion after failure is a duplicate.
  CHECK(b.complete(a, obs(0.3, 1.0), "v", 2, 6.0).duplicate);
}

TEST_CASE("replay reproduces state and keeps journaling") {
  testing::TempDir dir("broker_replay");
  BrokerOptions o;
  o.journal_path = dir.path() / "journal.jsonl";
  o.results_path = dir.path() / "results.jsonl";
  std::string snap;
  {
    Broker b(two_queues(), o);
    for (int k = 0; k < 6; ++k) b.enqueue(spec(k % 2 ? "high" : "low", 0.1 * k), k);
    b.poll(worker("w", {"low"}), 6.0);
    b.complete(1, obs(0.0, 3.0), "w", 1, 7.0);
    b.poll(worker("w", {"high"}), 7.0);
    b.requeue_expired(100.0);
    b.poll(worker("w", {"low"}), 101.0);
    snap = b.snapshot();
  }
  Broker r = Broker::replay(two_queues(), o);
  CHECK(r.snapshot() == snap);
  CHECK(r.next_id() == 7);
  const TaskId n = r.enqueue(spec("low", 0.9), 200.0);
  CHECK(n == 7);
  const std::string after = r.snapshot();
  CHECK(Broker::replay(two_queues(), o).snapshot() == after);
}

TEST_CASE("replay drops a torn final line and rejects other damage") {
  testing::TempDir dir("broker_torn");
  BrokerOptions o;
  o.journal_path = dir.path() / "journal.jsonl";
  std::string snap;
  {
    Broker b(two_queues(), o);
    b.enqueue(spec("low", 0.1), 0.0);
    b.enqueue(spec("low", 0.2), 0.0);
    snap = b.snapshot();
  }
  const std::string good = testing::slurp(o.journal_path);
  {
    std::ofstream out(o.journal_path, std::ios::app | std::ios::binary);
    out << R"({"event_type":"claim","task_id":1,"que)";
  }
  CHECK(Broker::replay(two_queues(), o).snapshot() == snap);
  CHECK(testing::slurp(o.journal_path) == good);

  // A corrupted middle line is not a torn write.
  std::string bad = good;
  bad.replace(bad.find("enqueue"), 7, "enqueuX");
  {
    std::ofstream out(o.journal_path, std::ios::trunc | std::ios::binary);
    out << bad;
  }
  CHECK_THROWS_AS(Broker::replay(two_queues(), o), IntegrityError);

  // A payload that no longer matches its digest.
  std::string tampered = good;
  tampered.replace(tampered.find("0.2"), 3, "0.7");
  {
    std::ofstream out(o.journal_path, std::ios::trunc | std::ios::binary);
    out << tampered;
  }
  CHECK_THROWS_AS(Broker::replay(two_queues(), o), IntegrityError);

  {
    std::ofstream out(o.journal_path, std::ios::trunc | std::ios::binary);
    out << good;
  }
  CHECK_THROWS_AS(Broker::replay({{"other", 0.0}}, o), IntegrityError);
  BrokerOptions missing = o;
  missing.journal_path = dir.path() / "nope.jsonl";
  CHECK_THROWS_AS(Broker::replay(two_queues(), missing), IntegrityError);
}

TEST_CASE("replay restores results the result store lost") {
  testing::TempDir dir("broker_results");
  BrokerOptions o;
  o.journal_path = dir.path() / "journal.jsonl";
  o.results_path = dir.path() / "results.jsonl";
  {
    Broker b(two_queues(), o);
    b.enqueue(spec("low", 0.1), 0.0);
    b.enqueue(spec("low", 0.2), 0.0);
    b.poll(worker("w", {"low"}), 0.0);
    b.complete(1, obs(0.1, 1.0), "w", 1, 1.0);
    b.poll(worker("w", {"low"}), 1.0);
    b.complete(2, obs(0.2, 2.0), "w", 1, 2.0);
  }
  const std::string full = testing::slurp(o.results_path);
  // Cut the last record as if the crash hit between the two writes.
  std::filesystem::resize_file(o.results_path, full.rfind('\n', full.size() - 2) + 1);
  Broker r = Broker::replay(two_queues(), o);
  CHECK(r.result_count() == 2);
  CHECK(testing::slurp(o.results_path) == full);
}
