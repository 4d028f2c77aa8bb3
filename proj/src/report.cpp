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

#include <charconv>
#include <cmath>
#include <fstream>

#include "mfac/driver.hpp"
#include "mfac/error.hpp"

namespace mfac {

namespace fs = std::filesystem;

namespace {

constexpr int kReportVersion = 1;

std::string direction_name(Direction d) { return d == Direction::maximize ? "maximize" : "minimize"; }

json optional_observation(const std::optional<Observation>& o) { return o ? json(*o) : json(nullptr); }

// Shortest round-trip decimal; empty for NaN so CSV readers see a missing value.
std::string num(double v) {
  if (std::isnan(v)) return "";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

// RFC 4180 field quoting.
std::string field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

class Csv {
 public:
  explicit Csv(const fs::path& path) : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) throw IntegrityError("cannot write '" + path.string() + "'");
  }
  ~Csv() = default;

  void row(const std::vector<std::string>& fields) {
    for (std::size_t k = 0; k < fields.size(); ++k) {
      if (k) out_ << ',';
      out_ << field(fields[k]);
    }
    out_ << "\r\n";
  }

  void close() {
    out_.flush();
    if (!out_) throw IntegrityError("short write to '" + path_.string() + "'");
  }

 private:
  fs::path path_;
  std::ofstream out_;
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IntegrityError("cannot write '" + path.string() + "'");
  out << text;
  out.flush();
  if (!out) throw IntegrityError("short write to '" + path.string() + "'");
}

}  // namespace

void to_json(json& j, const ObservationEntry& e) {
  j = json{{"observation", e.observation},
           {"origin", e.origin},
           {"iteration", e.iteration},
           {"attempt", e.attempt},
           {"worker_id", e.worker_id}};
}

void from_json(const json& j, ObservationEntry& e) {
  e.observation = j.at("observation").get<Observation>();
  e.origin = j.at("origin").get<std::string>();
  e.iteration = j.at("iteration").get<int>();
  e.attempt = j.at("attempt").get<int>();
  e.worker_id = j.at("worker_id").get<std::string>();
}

void to_json(json& j, const IterationEntry& e) {
  j = json{{"i", e.i},
           {"T_i", e.T_i},
           {"B_i", e.B_i},
           {"counts", e.counts},
           {"n_candidates", e.n_candidates},
           {"selected", e.selected},
           {"task_ids", e.task_ids},
           {"benefit", e.benefit},
           {"planned_cost", e.planned_cost},
           {"planned_makespan", e.planned_makespan},
           {"actual_makespan", e.actual_makespan},
           {"optimal", e.optimal},
           {"grid_mean_variance", e.grid_mean_variance},
           {"best_value", number_or_null(e.best_value)},
           {"unresolved", e.unresolved}};
}

void from_json(const json& j, IterationEntry& e) {
  e.i = j.at("i").get<int>();
  e.T_i = j.at("T_i").get<double>();
  e.B_i = j.at("B_i").get<double>();
  e.counts = j.at("counts").get<std::vector<int>>();
  e.n_candidates = j.at("n_candidates").get<int>();
  e.selected = j.at("selected").get<std::vector<CandidateTask>>();
  e.task_ids = j.at("task_ids").get<std::vector<TaskId>>();
  e.benefit = j.at("benefit").get<double>();
  e.planned_cost = j.at("planned_cost").get<double>();
  e.planned_makespan = j.at("planned_makespan").get<double>();
  e.actual_makespan = j.at("actual_makespan").get<double>();
  e.optimal = j.at("optimal").get<bool>();
  e.grid_mean_variance = j.at("grid_mean_variance").get<double>();
  e.best_value = number_from(j.at("best_value"));
  e.unresolved = j.at("unresolved").get<std::vector<TaskId>>();
}

void to_json(json& j, const LedgerEntry& e) {
  j = json{{"step", e.step},
           {"kind", e.kind},
           {"T_before", e.T_before},
           {"B_before", e.B_before},
           {"T_charge", e.T_charge},
           {"B_charge", e.B_charge},
           {"T_after", e.T_after},
           {"B_after", e.B_after},
           {"terminated", e.terminated}};
}

void from_json(const json& j, LedgerEntry& e) {
  e.step = j.at("step").get<int>();
  e.kind = j.at("kind").get<std::string>();
  e.T_before = j.at("T_before").get<double>();
  e.B_before = j.at("B_before").get<double>();
  e.T_charge = j.at("T_charge").get<double>();
  e.B_charge = j.at("B_charge").get<double>();
  e.T_after = j.at("T_after").get<double>();
  e.B_after = j.at("B_after").get<double>();
  e.terminated = j.at("terminated").get<bool>();
}

json report_json(const CampaignReport& r) {
  json best_per_level = json::array();
  for (const auto& b : r.best_per_level) best_per_level.push_back(optional_observation(b));
  json best = nullptr;
  if (r.best) {
    best = json{{"observation", *r.best},
                {"predicted_mean", r.best_mean},
                {"predicted_variance", r.best_variance},
                {"predicted_std", std::sqrt(r.best_variance)}};
  }
  return json{{"format", "mfac-report"},
              {"version", kReportVersion},
              {"problem", r.problem},
              {"direction", direction_name(r.direction)},
              {"goal", to_string(r.goal)},
              {"seed", r.seed},
              {"status", r.status},
              {"diagnostic", r.diagnostic},
              {"termination", r.termination},
              {"clock", r.clock},
              {"best", best},
              {"best_per_level", best_per_level},
              {"final_grid_mean_variance", r.final_grid_mean_variance},
              {"surrogate", r.surrogate ? json(*r.surrogate) : json(nullptr)},
              {"observations", r.observations},
              {"iterations", r.iterations},
              {"ledger", r.ledger}};
}

json summary_json(const CampaignReport& r) {
  json best = nullptr;
  if (r.best) {
    best = json{{"point", r.best->point},
                {"value", r.best->value},
                {"level", r.best->level},
                {"task_id", r.best->task_id},
                {"predicted_mean", r.best_mean},
                {"predicted_variance", r.best_variance},
                {"predicted_std", std::sqrt(r.best_variance)}};
  }
  json budget = nullptr;
  if (!r.ledger.empty()) {
    budget = json{{"walltime_total", r.ledger.front().T_before},
                  {"resource_total", r.ledger.front().B_before},
                  {"walltime_remaining", r.ledger.back().T_after},
                  {"resource_remaining", r.ledger.back().B_after},
                  {"ledger", r.ledger}};
  }
  std::size_t feasible = 0;
  for (const auto& e : r.observations) feasible += e.observation.feasible ? 1 : 0;
  return json{{"format", "mfac-summary"},
              {"version", kReportVersion},
              {"problem", r.problem},
              {"direction", direction_name(r.direction)},
              {"goal", to_string(r.goal)},
              {"status", r.status},
              {"diagnostic", r.diagnostic},
              {"termination", r.termination},
              {"evaluations", r.observations.size()},
              {"feasible_evaluations", feasible},
              {"iterations", r.iterations.size()},
              {"best", best},
              {"budget", budget}};
}

void write_report_files(const CampaignReport& report, const CampaignConfig& config, const fs::path& dir) {
  fs::create_directories(dir);
  write_text(dir / "report.json", report_json(report).dump(1) + "\n");
  write_text(dir / "summary.json", summary_json(report).dump(1) + "\n");
  const std::size_t d = config.problem.domain.dim();

  {
    Csv csv(dir / "observations.csv");
    std::vector<std::string> head{"task_id", "origin", "iteration", "level"};
    for (std::size_t k = 0; k < d; ++k) head.push_back("x" + std::to_string(k));
    for (const char* h : {"value", "noise_var", "feasible", "walltime", "attempt", "worker"}) head.emplace_back(h);
    csv.row(head);
    for (const auto& e : report.observations) {
      const auto& o = e.observation;
      std::vector<std::string> row{std::to_string(o.task_id), e.origin, std::to_string(e.iteration),
                                   std::to_string(o.level)};
      for (double x : o.point.coords) row.push_back(num(x));
      row.push_back(num(o.value));
      row.push_back(num(o.noise_var));
      row.emplace_back(o.feasible ? "true" : "false");
      row.push_back(num(o.walltime_actual));
      row.push_back(std::to_string(e.attempt));
      row.push_back(e.worker_id);
      csv.row(row);
    }
    csv.close();
  }
  {
    Csv csv(dir / "iterations.csv");
    csv.row({"i", "T_i", "B_i", "candidates", "selected", "benefit", "spend", "planned_makespan", "actual_makespan",
             "optimal", "grid_mean_variance", "best_value"});
    for (const auto& it : report.iterations) {
      csv.row({std::to_string(it.i), num(it.T_i), num(it.B_i), std::to_string(it.n_candidates),
               std::to_string(it.selected.size()), num(it.benefit), num(it.planned_cost), num(it.planned_makespan),
               num(it.actual_makespan), it.optimal ? "true" : "false", num(it.grid_mean_variance), num(it.best_value)});
    }
    csv.close();
  }
  {
    Csv csv(dir / "ledger.csv");
    csv.row({"step", "kind", "T_before", "B_before", "T_charge", "B_charge", "T_after", "B_after", "terminated"});
    for (const auto& e : report.ledger) {
      csv.row({std::to_string(e.step), e.kind, num(e.T_before), num(e.B_before), num(e.T_charge), num(e.B_charge),
               num(e.T_after), num(e.B_after), e.terminated ? "true" : "false"});
    }
    csv.close();
  }
  if (d <= 2) {
    Csv csv(dir / "surface_grid.csv");
    std::vector<std::string> head{"level"};
    for (std::size_t k = 0; k < d; ++k) head.push_back("x" + std::to_string(k));
    for (const char* h : {"mean", "variance", "trust_variance"}) head.emplace_back(h);
    csv.row(head);
    for (const auto& s : report.surface) {
      std::vector<std::string> row{std::to_string(s.level)};
      for (double x : s.x) row.push_back(num(x));
      row.push_back(num(s.mean));
      row.push_back(num(s.variance));
      row.push_back(num(s.trust_variance));
      csv.row(row);
    }
    csv.close();
  }
}

}  // namespace mfac
