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
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <set>
#include <unistd.h>

#include "mfac/error.hpp"
#include "mfac/orchestrator.hpp"

namespace mfac {

TaskState task_state_from(const std::string& s) {
  if (s == "queued") return TaskState::queued;
  if (s == "claimed") return TaskState::claimed;
  if (s == "done") return TaskState::done;
  if (s == "failed") return TaskState::failed;
  throw IntegrityError("unknown task state '" + s + "'");
}

namespace {

constexpr int kJournalVersion = 1;
constexpr int kResultsVersion = 1;

json spec_json(const TaskSpec& s) {
  return json{{"queue", s.queue_name},
              {"point", s.point},
              {"level", s.level},
              {"walltime_estimate", s.walltime_estimate},
              {"payload", s.payload}};
}

TaskSpec spec_from(const json& j) {
  TaskSpec s;
  s.queue_name = j.at("queue").get<std::string>();
  s.point = j.at("point").get<DesignPoint>();
  s.level = j.at("level").get<int>();
  s.walltime_estimate = j.at("walltime_estimate").get<double>();
  s.payload = j.at("payload");
  return s;
}

json task_json(const Task& t) {
  return json{{"id", t.id},
              {"queue", t.queue_name},
              {"point", t.point},
              {"level", t.level},
              {"walltime_estimate", t.walltime_estimate},
              {"payload", t.payload},
              {"state", to_string(t.state)},
              {"attempt", t.attempt},
              {"claimed_by", t.claimed_by},
              {"enqueue_time", t.enqueue_time},
              {"claim_time", t.claim_time},
              {"done_time", t.done_time},
              {"deadline", t.deadline}};
}

// Appends whole lines; flushes (and optionally fsyncs) before returning.
class LineWriter {
 public:
  LineWriter() = default;
  LineWriter(const std::filesystem::path& path, bool fsync) : fsync_(fsync) {
    file_ = std::fopen(path.c_str(), "ab");
    if (file_ == nullptr) throw IntegrityError("cannot open '" + path.string() + "' for appending");
  }
  LineWriter(const LineWriter&) = delete;
  LineWriter& operator=(const LineWriter&) = delete;
  ~LineWriter() {
    if (file_ != nullptr) std::fclose(file_);
  }

  bool open() const { return file_ != nullptr; }

  void write(const std::string& line) {
    if (file_ == nullptr) return;
    std::fwrite(line.data(), 1, line.size(), file_);
    std::fputc('\n', file_);
    std::fflush(file_);
    if (fsync_) ::fsync(::fileno(file_));
  }

 private:
  std::FILE* file_ = nullptr;
  bool fsync_ = false;
};

// Reads newline-terminated lines; returns the byte length of the valid
// prefix. A final line without newline counts as torn.
std::vector<std::string> read_lines(const std::filesystem::path& path, std::uintmax_t& complete_bytes) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IntegrityError("cannot read '" + path.string() + "'");
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::vector<std::string> lines;
  std::size_t pos = 0;
  complete_bytes = 0;
  while (pos < content.size()) {
    const auto nl = content.find('\n', pos);
    if (nl == std::string::npos) break;
    lines.push_back(content.substr(pos, nl - pos));
    pos = nl + 1;
    complete_bytes = pos;
  }
  return lines;
}

}  // namespace

std::string to_string(TaskState s) {
  switch (s) {
    case TaskState::queued:
      return "queued";
    case TaskState::claimed:
      return "claimed";
    case TaskState::done:
      return "done";
    case TaskState::failed:
      return "failed";
  }
  return "queued";
}

void to_json(json& j, const ResultRecord& r) {
  j = json{{"task_id", r.task_id}, {"observation", r.observation}, {"worker_id", r.worker_id}, {"attempt", r.attempt}};
}

void from_json(const json& j, ResultRecord& r) {
  r.task_id = j.at("task_id").get<TaskId>();
  r.observation = j.at("observation").get<Observation>();
  r.worker_id = j.at("worker_id").get<std::string>();
  r.attempt = j.at("attempt").get<int>();
}

struct Broker::Impl {
  std::vector<QueueConfig> queue_configs;
  BrokerOptions options;
  mutable std::mutex mu;
  std::map<std::string, std::set<TaskId>> queues;  // ids ascend in enqueue order
  std::map<TaskId, Task> tasks;
  std::vector<ResultRecord> results;
  TaskId next_id = 1;
  double last_time = 0.0;
  std::unique_ptr<LineWriter> journal;
  std::unique_ptr<LineWriter> result_log;

  Impl(std::vector<QueueConfig> qs, BrokerOptions opts) : queue_configs(std::move(qs)), options(std::move(opts)) {
    for (const auto& q : queue_configs) {
      if (q.name.empty()) throw ConfigError("queue names must be non-empty");
      if (!queues.emplace(q.name, std::set<TaskId>{}).second) throw ConfigError("duplicate queue '" + q.name + "'");
    }
  }

  json header() const {
    json qs = json::array();
    for (const auto& q : queue_configs) qs.push_back(json{{"name", q.name}, {"latency", q.latency}});
    return json{{"format", "mfac-journal"}, {"version", kJournalVersion}, {"queues", qs}};
  }

  void open_logs(bool fresh) {
    if (!options.journal_path.empty()) {
      const bool existed = std::filesystem::exists(options.journal_path) &&
                           std::filesystem::file_size(options.journal_path) > 0;
      if (fresh && existed) std::filesystem::resize_file(options.journal_path, 0);
      journal = std::make_unique<LineWriter>(options.journal_path, options.fsync);
      if (fresh || !existed) journal->write(header().dump());
    }
    if (!options.results_path.empty()) {
      const bool existed = std::filesystem::exists(options.results_path) &&
                           std::filesystem::file_size(options.results_path) > 0;
      if (fresh && existed) std::filesystem::resize_file(options.results_path, 0);
      result_log = std::make_unique<LineWriter>(options.results_path, options.fsync);
      if (fresh || !existed) {
        result_log->write(json{{"format", "mfac-results"}, {"version", kResultsVersion}}.dump());
      }
    }
  }

  void log(const char* type, TaskId id, const std::string& queue, double time, const json& payload) {
    if (!journal) return;
    const std::string body = payload.dump();
    json line{{"event_type", type},         {"task_id", id}, {"queue", queue},
              {"timestamp", time},          {"payload_digest", digest_hex(body)},
              {"payload", payload}};
    journal->write(line.dump());
  }

  double stamp(double now) {
    last_time = std::max(last_time, now);
    return last_time;
  }

  // Mutations below assume the mutex is held. `record` controls journaling
  // so replay can reuse them.
  TaskId apply_enqueue(const TaskSpec& spec, double now, bool record) {
    const auto q = queues.find(spec.queue_name);
    if (q == queues.end()) throw ConfigError("unknown queue '" + spec.queue_name + "'");
    if (!(spec.walltime_estimate > 0.0)) throw InvalidArgument("task walltime estimate must be positive");
    const double t = stamp(now);
    const TaskId id = next_id;
    if (record) log("enqueue", id, spec.queue_name, t, spec_json(spec));
    ++next_id;
    Task task;
    task.id = id;
    task.queue_name = spec.queue_name;
    task.point = spec.point;
    task.level = spec.level;
    task.walltime_estimate = spec.walltime_estimate;
    task.payload = spec.payload;
    task.enqueue_time = t;
    tasks.emplace(id, std::move(task));
    q->second.insert(id);
    return id;
  }

  Task apply_claim(TaskId id, const std::string& worker, double now, bool record) {
    Task& t = tasks.at(id);
    const double time = stamp(now);
    const int attempt = t.attempt + 1;
    if (record) log("claim", id, t.queue_name, time, json{{"worker", worker}, {"attempt", attempt}});
    queues.at(t.queue_name).erase(id);
    t.state = TaskState::claimed;
    t.attempt = attempt;
    t.claimed_by = worker;
    t.claim_time = time;
    t.deadline = time + options.visibility_factor * t.walltime_estimate;
    return t;
  }

  void apply_requeue(TaskId id, double now, bool record) {
    Task& t = tasks.at(id);
    const double time = stamp(now);
    if (record) log("requeue", id, t.queue_name, time, json{{"attempt", t.attempt}});
    t.state = TaskState::queued;
    t.claimed_by.clear();
    queues.at(t.queue_name).insert(id);
  }

  void apply_result(const ResultRecord& rec, double now, bool record) {
    Task& t = tasks.at(rec.task_id);
    const double time = stamp(now);
    if (record) log(rec.observation.feasible ? "complete" : "fail", rec.task_id, t.queue_name, time, json(rec));
    queues.at(t.queue_name).erase(rec.task_id);
    t.state = rec.observation.feasible ? TaskState::done : TaskState::failed;
    t.done_time = time;
    results.push_back(rec);
    if (record && result_log) result_log->write(json(rec).dump());
  }

  std::vector<TaskId> expire(double now, bool record) {
    std::vector<TaskId> affected;
    for (auto& [id, t] : tasks) {
      if (t.state != TaskState::claimed || t.deadline > now) continue;
      affected.push_back(id);
      if (t.attempt >= options.max_attempts) {
        ResultRecord rec;
        rec.task_id = id;
        rec.observation.point = t.point;
        rec.observation.level = t.level;
        rec.observation.value = std::numeric_limits<double>::quiet_NaN();
        rec.observation.feasible = false;
        rec.observation.task_id = id;
        rec.worker_id = "broker";
        rec.attempt = t.attempt;
        apply_result(rec, now, record);
      } else {
        apply_requeue(id, now, record);
      }
    }
    return affected;
  }

  void apply_event(const json& line) {
    const std::string type = line.at("event_type").get<std::string>();
    const TaskId id = line.at("task_id").get<TaskId>();
    const double time = line.at("timestamp").get<double>();
    const json& payload = line.at("payload");
    if (digest_hex(payload.dump()) != line.at("payload_digest").get<std::string>()) {
      throw IntegrityError("journal payload digest mismatch for task " + std::to_string(id));
    }
    if (type == "enqueue") {
      if (apply_enqueue(spec_from(payload), time, false) != id) {
        throw IntegrityError("journal task ids are not sequential at task " + std::to_string(id));
      }
    } else if (type == "claim") {
      apply_claim(id, payload.at("worker").get<std::string>(), time, false);
    } else if (type == "requeue") {
      apply_requeue(id, time, false);
    } else if (type == "complete" || type == "fail") {
      apply_result(payload.get<ResultRecord>(), time, false);
    } else {
      throw IntegrityError("unknown journal event '" + type + "'");
    }
  }
};

Broker::Broker(std::vector<QueueConfig> queues, BrokerOptions options)
    : impl_(std::make_unique<Impl>(std::move(queues), std::move(options))) {
  impl_->open_logs(true);
}

Broker::Broker(std::unique_ptr<Impl> impl) : impl_(std::move(impl)) {}
Broker::~Broker() = default;
Broker::Broker(Broker&&) noexcept = default;
Broker& Broker::operator=(Broker&&) noexcept = default;

Broker Broker::replay(std::vector<QueueConfig> queues, BrokerOptions options) {
  if (options.journal_path.empty()) throw InvalidArgument("replay needs a journal path");
  if (!std::filesystem::exists(options.journal_path)) {
    throw IntegrityError("journal '" + options.journal_path.string() + "' does not exist");
  }
  auto impl = std::make_unique<Impl>(std::move(queues), options);
  std::uintmax_t valid = 0;
  const auto lines = read_lines(options.journal_path, valid);
  if (lines.empty()) throw IntegrityError("journal '" + options.journal_path.string() + "' has no header");
  try {
    const json head = json::parse(lines.front());
    if (head.at("format") != "mfac-journal" || head.at("version") != kJournalVersion) {
      throw IntegrityError("unsupported journal header in '" + options.journal_path.string() + "'");
    }
    if (head.at("queues") != impl->header().at("queues")) {
      throw IntegrityError("journal queue configuration differs from the broker's");
    }
  } catch (const json::exception& e) {
    throw IntegrityError("corrupt journal header: " + std::string(e.what()));
  }
  for (std::size_t k = 1; k < lines.size(); ++k) {
    json line;
    try {
      line = json::parse(lines[k]);
    } catch (const json::exception&) {
      throw IntegrityError("corrupt journal line " + std::to_string(k + 1));
    }
    try {
      impl->apply_event(line);
    } catch (const json::exception& e) {
      throw IntegrityError("malformed journal event on line " + std::to_string(k + 1) + ": " + e.what());
    }
  }
  std::filesystem::resize_file(options.journal_path, valid);

  // Bring the result store in line with the journal: keep its valid prefix,
  // append anything the crash cut off.
  std::size_t present = 0;
  if (!options.results_path.empty() && std::filesystem::exists(options.results_path)) {
    std::uintmax_t rvalid = 0;
    const auto rlines = read_lines(options.results_path, rvalid);
    for (std::size_t k = 1; k < rlines.size(); ++k) {
      ResultRecord r;
      try {
        r = json::parse(rlines[k]).get<ResultRecord>();
      } catch (const json::exception&) {
        throw IntegrityError("corrupt result store line " + std::to_string(k + 1));
      }
      if (present >= impl->results.size() || json(r) != json(impl->results[present])) {
        throw IntegrityError("result store disagrees with the journal at record " + std::to_string(present + 1));
      }
      ++present;
    }
    std::filesystem::resize_file(options.results_path, rvalid);
  }
  impl->open_logs(false);
  if (impl->result_log) {
    for (std::size_t k = present; k < impl->results.size(); ++k) impl->result_log->write(json(impl->results[k]).dump());
  }
  return Broker(std::move(impl));
}

TaskId Broker::enqueue(const TaskSpec& spec, double now) {
  std::lock_guard lock(impl_->mu);
  return impl_->apply_enqueue(spec, now, true);
}

std::optional<Task> Broker::poll(const WorkerProfile& worker, double now) {
  std::lock_guard lock(impl_->mu);
  impl_->expire(now, true);
  for (const auto& name : worker.serviced_queues) {
    const auto q = impl_->queues.find(name);
    if (q == impl_->queues.end() || q->second.empty()) continue;
    return impl_->apply_claim(*q->second.begin(), worker.id, now, true);
  }
  return std::nullopt;
}

CompletionAck Broker::complete(TaskId id, const Observation& obs, const std::string& worker_id, int attempt,
                               double now) {
  std::lock_guard lock(impl_->mu);
  const auto it = impl_->tasks.find(id);
  if (it == impl_->tasks.end()) throw StateViolation("completion for unknown task " + std::to_string(id));
  const Task& t = it->second;
  if (t.state == TaskState::done || t.state == TaskState::failed) return {true};
  if (t.attempt == 0) throw StateViolation("task " + std::to_string(id) + " completed before any claim");
  ResultRecord rec{id, obs, worker_id, attempt};
  rec.observation.task_id = id;
  impl_->apply_result(rec, now, true);
  return {false};
}

std::vector<TaskId> Broker::requeue_expired(double now) {
  std::lock_guard lock(impl_->mu);
  return impl_->expire(now, true);
}

std::vector<ResultRecord> Broker::results_since(std::size_t cursor) const {
  std::lock_guard lock(impl_->mu);
  if (cursor >= impl_->results.size()) return {};
  return {impl_->results.begin() + static_cast<std::ptrdiff_t>(cursor), impl_->results.end()};
}

std::size_t Broker::result_count() const {
  std::lock_guard lock(impl_->mu);
  return impl_->results.size();
}

std::optional<Task> Broker::task(TaskId id) const {
  std::lock_guard lock(impl_->mu);
  const auto it = impl_->tasks.find(id);
  if (it == impl_->tasks.end()) return std::nullopt;
  return it->second;
}

bool Broker::resolved(TaskId id) const {
  std::lock_guard lock(impl_->mu);
  const auto it = impl_->tasks.find(id);
  return it != impl_->tasks.end() && (it->second.state == TaskState::done || it->second.state == TaskState::failed);
}

std::optional<double> Broker::next_deadline() const {
  std::lock_guard lock(impl_->mu);
  std::optional<double> best;
  for (const auto& [id, t] : impl_->tasks) {
    if (t.state == TaskState::claimed && (!best || t.deadline < *best)) best = t.deadline;
  }
  return best;
}

const std::vector<QueueConfig>& Broker::queues() const { return impl_->queue_configs; }

double Broker::queue_latency(const std::string& name) const {
  for (const auto& q : impl_->queue_configs) {
    if (q.name == name) return q.latency;
  }
  throw ConfigError("unknown queue '" + name + "'");
}

TaskId Broker::next_id() const {
  std::lock_guard lock(impl_->mu);
  return impl_->next_id;
}

std::string Broker::snapshot() const {
  std::lock_guard lock(impl_->mu);
  json tasks = json::array();
  for (const auto& [id, t] : impl_->tasks) tasks.push_back(task_json(t));
  json queues = json::object();
  for (const auto& [name, ids] : impl_->queues) queues[name] = std::vector<TaskId>(ids.begin(), ids.end());
  return json{{"next_id", impl_->next_id}, {"tasks", tasks}, {"queues", queues}, {"results", impl_->results}}.dump();
}

}  // namespace mfac
