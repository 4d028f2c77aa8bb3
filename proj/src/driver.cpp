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

#include "mfac/driver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "mfac/config.hpp"
#include "mfac/error.hpp"
#include "mfac/optim.hpp"

namespace mfac {

namespace fs = std::filesystem;

std::string to_string(CampaignGoal g) { return g == CampaignGoal::optimize ? "optimize" : "reduce_variance"; }
std::string to_string(BatchHeuristic h) {
  return h == BatchHeuristic::longest_sim ? "longest_sim" : "proportional_steps";
}
std::string to_string(HyperPolicy p) { return p == HyperPolicy::refit ? "refit" : "freeze"; }
std::string to_string(ClockMode c) { return c == ClockMode::virtual_clock ? "virtual" : "threaded"; }

void fill_default_resources(CampaignConfig& config) {
  if (config.queues.empty()) {
    std::set<std::string> seen;
    for (const auto& lv : config.problem.levels) {
      if (seen.insert(lv.queue).second) config.queues.push_back({lv.queue, 0.0});
    }
  }
  if (config.workers.empty()) {
    for (const auto& q : config.queues) config.workers.push_back({"worker-" + q.name, {q.name}, 1.0, 0.0});
  }
}

void CampaignConfig::validate() const {
  auto fail = [](const std::string& key, const std::string& msg) { throw ConfigError(key + ": " + msg); };
  if (problem.levels.empty()) fail("problem", "has no fidelity levels");
  if (n_init < 1) fail("campaign.n_init", "must be >= 1");
  if (n_anchor < 0) fail("campaign.n_anchor", "must be >= 0");
  if (I < 1) fail("campaign.iterations", "must be >= 1");
  if (!(T > 0.0)) fail("campaign.budget.walltime", "must be > 0");
  if (!(B > 0.0)) fail("campaign.budget.resource", "must be > 0");
  if (max_candidates_per_level < 1) fail("campaign.max_candidates_per_level", "must be >= 1");
  if (!level_caps.empty() && level_caps.size() != problem.levels.size()) {
    fail("campaign.level_caps", "needs one entry per fidelity level");
  }
  for (int c : level_caps) {
    if (c < 0) fail("campaign.level_caps", "entries must be >= 0");
  }
  if (!(noise_floor >= 0.0)) fail("campaign.noise_floor", "must be >= 0");
  if (acq_starts < 1) fail("acquisition.starts", "must be >= 1");
  if (acq_evals < 1) fail("acquisition.evals_per_start", "must be >= 1");
  if (surface_points_per_dim < 2) fail("report.surface_points_per_dim", "must be >= 2");
  if (!(visibility_factor > 1.0)) fail("orchestrator.visibility_factor", "must be > 1");
  if (max_attempts < 1) fail("orchestrator.max_attempts", "must be >= 1");
  if (!(seconds_per_time_unit > 0.0)) fail("orchestrator.seconds_per_time_unit", "must be > 0");
  if (!(collect_timeout > 0.0)) fail("orchestrator.collect_timeout", "must be > 0");
  if (problem.bridge_degrees.size() + 1 != problem.levels.size()) fail("problem.bridges", "needs one entry per level above 0");
  try {
    problem.hierarchy().validate(problem.domain);
  } catch (const Error& e) {
    fail("problem", e.what());
  }
  std::set<std::string> names;
  for (const auto& q : queues) names.insert(q.name);
  const auto counts = worker_counts();
  for (const auto& lv : problem.levels) {
    if (!names.count(lv.queue)) fail("orchestrator.queues", "no queue named '" + lv.queue + "'");
    if (!counts.count(lv.queue)) fail("orchestrator.workers", "no worker services queue '" + lv.queue + "'");
  }
  for (const auto& w : workers) {
    for (const auto& q : w.serviced_queues) {
      if (!names.count(q)) fail("orchestrator.workers", "worker '" + w.id + "' services unknown queue '" + q + "'");
    }
  }
}

WorkerCounts CampaignConfig::worker_counts() const {
  // A worker serving several queues counts toward each of them, so the
  // makespan check is optimistic for shared workers.
  WorkerCounts out;
  for (const auto& w : workers) {
    for (const auto& q : w.serviced_queues) ++out[q];
  }
  return out;
}

std::vector<std::vector<double>> monitoring_grid(std::size_t dim) {
  std::vector<std::vector<double>> g;
  if (dim == 1) {
    for (int k = 0; k < 100; ++k) g.push_back({(k + 0.5) / 100.0});
  } else if (dim == 2) {
    for (int a = 0; a < 10; ++a) {
      for (int b = 0; b < 10; ++b) g.push_back({(a + 0.5) / 10.0, (b + 0.5) / 10.0});
    }
  } else {
    g = halton_points(100, dim, 0, 1);
  }
  return g;
}

CollectResult collect_batch(Broker& broker, const std::vector<TaskId>& dispatched, const CampaignConfig& config,
                            double now, double timeout) {
  CollectResult out;
  out.end_time = now;
  out.trace.start_time = now;
  out.trace.end_time = now;
  if (dispatched.empty()) return out;
  const BenchmarkProblem& problem = config.problem;
  const std::uint64_t seed = config.seed;
  const Evaluator evaluate = [&problem, seed](const Task& t) { return problem.evaluate(t.level, t.point, seed, t.id); };
  if (config.clock == ClockMode::virtual_clock) {
    SimOptions so;
    so.start_time = now;
    so.seed = seed;
    so.timeout = timeout;
    out.trace = run_simulated(broker, config.workers, evaluate, dispatched, so);
  } else {
    ThreadedOptions to;
    to.start_time = now;
    to.seed = seed;
    to.seconds_per_time_unit = config.seconds_per_time_unit;
    to.timeout_seconds = std::min(timeout * config.seconds_per_time_unit, 3600.0);
    out.trace = run_threaded(broker, config.workers, evaluate, dispatched, to);
  }
  out.end_time = std::max(now, out.trace.end_time);
  out.unresolved = out.trace.unresolved;
  const std::set<TaskId> wanted(dispatched.begin(), dispatched.end());
  for (auto& r : broker.results_since(0)) {
    if (wanted.count(r.task_id)) out.records.push_back(std::move(r));
  }
  std::sort(out.records.begin(), out.records.end(),
            [](const ResultRecord& a, const ResultRecord& b) { return a.task_id < b.task_id; });
  return out;
}

namespace {

constexpr int kCheckpointVersion = 1;

struct Pending {
  std::string origin;
  int iteration = 0;
};

struct State {
  BudgetState budget;
  double clock = 0.0;
  std::vector<ObservationEntry> observations;
  std::vector<IterationEntry> iterations;
  std::vector<LedgerEntry> ledger;
  std::optional<SurrogateHyper> frozen;
  std::map<TaskId, Pending> pending;
  std::size_t results_cursor = 0;
  std::uintmax_t journal_bytes = 0;
  std::uintmax_t results_bytes = 0;
  int checkpoint = -1;
  std::string phase = "init";  // init | running | done | failed
  std::string termination;
  std::string diagnostic;
};

json state_json(const State& s) {
  json pending = json::array();
  for (const auto& [id, p] : s.pending) pending.push_back({{"task_id", id}, {"origin", p.origin}, {"iteration", p.iteration}});
  return json{{"budget", s.budget},
              {"clock", s.clock},
              {"observations", s.observations},
              {"iterations", s.iterations},
              {"ledger", s.ledger},
              {"frozen", s.frozen ? json(*s.frozen) : json(nullptr)},
              {"pending", pending},
              {"results_cursor", s.results_cursor},
              {"journal_bytes", s.journal_bytes},
              {"results_bytes", s.results_bytes},
              {"phase", s.phase},
              {"termination", s.termination},
              {"diagnostic", s.diagnostic}};
}

State state_from(const json& j) {
  State s;
  s.budget = j.at("budget").get<BudgetState>();
  s.clock = j.at("clock").get<double>();
  s.observations = j.at("observations").get<std::vector<ObservationEntry>>();
  s.iterations = j.at("iterations").get<std::vector<IterationEntry>>();
  s.ledger = j.at("ledger").get<std::vector<LedgerEntry>>();
  if (!j.at("frozen").is_null()) s.frozen = j.at("frozen").get<SurrogateHyper>();
  for (const auto& p : j.at("pending")) {
    s.pending[p.at("task_id").get<TaskId>()] = {p.at("origin").get<std::string>(), p.at("iteration").get<int>()};
  }
  s.results_cursor = j.at("results_cursor").get<std::size_t>();
  s.journal_bytes = j.at("journal_bytes").get<std::uintmax_t>();
  s.results_bytes = j.at("results_bytes").get<std::uintmax_t>();
  s.phase = j.at("phase").get<std::string>();
  s.termination = j.at("termination").get<std::string>();
  s.diagnostic = j.at("diagnostic").get<std::string>();
  return s;
}

void write_atomic(const fs::path& path, const std::string& text) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IntegrityError("cannot write '" + tmp.string() + "'");
    out << text;
    out.flush();
    if (!out) throw IntegrityError("short write to '" + tmp.string() + "'");
  }
  fs::rename(tmp, path);
}

std::string checkpoint_name(int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "checkpoint_%04d.json", index);
  return buf;
}

json read_checkpoint(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IntegrityError("checkpoint '" + path.string() + "' is missing");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    json j = json::parse(ss.str());
    if (j.at("format") != "mfac-checkpoint" || j.at("version") != kCheckpointVersion) {
      throw IntegrityError("checkpoint '" + path.string() + "' has an unsupported format or version");
    }
    return j;
  } catch (const json::exception& e) {
    throw IntegrityError("checkpoint '" + path.string() + "' is corrupt: " + e.what());
  }
}

BrokerOptions broker_options(const CampaignConfig& cfg, const std::optional<fs::path>& dir) {
  BrokerOptions o;
  o.visibility_factor = cfg.visibility_factor;
  o.max_attempts = cfg.max_attempts;
  if (dir) {
    o.journal_path = *dir / "journal.jsonl";
    o.results_path = *dir / "results.jsonl";
  }
  return o;
}

struct Halted {};

class Campaign {
 public:
  Campaign(CampaignConfig cfg, std::optional<fs::path> dir, json source, Broker broker, State st,
           std::optional<HaltPoint> halt)
      : cfg_(std::move(cfg)),
        dir_(std::move(dir)),
        source_(std::move(source)),
        broker_(std::move(broker)),
        st_(std::move(st)),
        halt_(halt),
        hierarchy_(cfg_.problem.hierarchy()),
        workers_(cfg_.worker_counts()) {
    for (const auto& lv : cfg_.problem.levels) trust_.push_back(lv.trust);
  }

  std::optional<CampaignReport> run() {
    try {
      if (st_.phase == "init") {
        initialize();
        maybe_halt();
      }
      while (st_.phase == "running") {
        const bool mid = halt_ && halt_->mid_batch && st_.checkpoint == halt_->after_checkpoint;
        step(mid);
        if (st_.phase == "running" || st_.phase == "done") maybe_halt();
      }
    } catch (const Halted&) {
      return std::nullopt;
    }
    if (dir_) write_checkpoint(false);
    CampaignReport report = finalize();
    if (dir_) write_report_files(report, cfg_, *dir_);
    return report;
  }

  CampaignReport finalize() const {
    CampaignReport r;
    r.problem = cfg_.problem.name;
    r.direction = cfg_.problem.direction;
    r.goal = cfg_.goal;
    r.seed = cfg_.seed;
    r.status = st_.phase == "failed" ? "failed" : "completed";
    r.diagnostic = st_.diagnostic;
    r.termination = st_.termination;
    r.observations = st_.observations;
    r.iterations = st_.iterations;
    r.ledger = st_.ledger;
    r.clock = st_.clock;
    const int L = static_cast<int>(levels());
    for (int l = 0; l < L; ++l) r.best_per_level.push_back(best_on(l));
    if (r.status == "failed") return r;

    std::optional<SurrogateHyper> unused;
    const MfSurrogate s = fit(mix_seed(cfg_.seed, 4), unused);
    r.surrogate = s.hyper();
    r.final_grid_mean_variance = grid_variance(s);
    r.best = r.best_per_level.back();
    if (r.best) {
      const Prediction p = mf_predict(s, r.best->point, L - 1);
      r.best_mean = sign() * p.mean;
      r.best_variance = p.variance;
    }
    const std::size_t d = cfg_.problem.domain.dim();
    if (d <= 2) {
      const int n = cfg_.surface_points_per_dim;
      std::vector<std::vector<double>> grid;
      if (d == 1) {
        for (int a = 0; a < n; ++a) grid.push_back({a / double(n - 1)});
      } else {
        for (int a = 0; a < n; ++a) {
          for (int b = 0; b < n; ++b) grid.push_back({a / double(n - 1), b / double(n - 1)});
        }
      }
      for (int l = 0; l < L; ++l) {
        for (const auto& u : grid) {
          const DesignPoint raw = cfg_.problem.domain.denormalize(DesignPoint{u});
          const Prediction p = s.predict_unit(u, l);
          SurfaceRow row;
          row.level = l;
          row.x = raw.coords;
          row.mean = sign() * p.mean;
          row.variance = p.variance;
          row.trust_variance = trust_variance(trust_[static_cast<std::size_t>(l)], raw, cfg_.problem.domain);
          r.surface.push_back(std::move(row));
        }
      }
    }
    return r;
  }

 private:
  std::size_t levels() const { return cfg_.problem.levels.size(); }
  double sign() const { return cfg_.problem.direction == Direction::maximize ? 1.0 : -1.0; }
  int top() const { return static_cast<int>(levels()) - 1; }

  std::optional<Observation> best_on(int level) const {
    std::optional<Observation> best;
    for (const auto& e : st_.observations) {
      const auto& o = e.observation;
      if (o.level != level || !o.feasible) continue;
      if (!best || sign() * o.value > sign() * best->value) best = o;
    }
    return best;
  }

  std::vector<std::vector<TrainingPoint>> training_data() const {
    std::vector<std::vector<TrainingPoint>> out(levels());
    for (const auto& e : st_.observations) {
      const auto& o = e.observation;
      if (!o.feasible) continue;
      out[static_cast<std::size_t>(o.level)].push_back(
          {cfg_.problem.domain.normalize(o.point).coords, sign() * o.value, o.noise_var});
    }
    return out;
  }

  // Fits the surrogate. In freeze mode the first fit with data on every
  // level fixes the hyperparameters; `captured` receives them.
  MfSurrogate fit(std::uint64_t seed, std::optional<SurrogateHyper>& captured) const {
    const auto data = training_data();
    SurrogateFitOptions o;
    o.noise_floor = cfg_.noise_floor;
    o.seed = seed;
    o.bridge_degrees = cfg_.problem.bridge_degrees;
    double mean = 0.0, var = 0.0;
    for (const auto& p : data[0]) mean += p.y;
    mean /= static_cast<double>(std::max<std::size_t>(1, data[0].size()));
    for (const auto& p : data[0]) var += (p.y - mean) * (p.y - mean);
    var /= static_cast<double>(std::max<std::size_t>(1, data[0].size()));
    o.empty_level_variance = var > 1e-12 ? var : 1.0;
    const bool complete = std::all_of(data.begin(), data.end(), [](const auto& v) { return !v.empty(); });
    const bool freeze = cfg_.hyper_policy == HyperPolicy::freeze && complete;
    if (freeze && st_.frozen) o.frozen = &*st_.frozen;
    MfSurrogate s = fit_mf_surrogate(cfg_.problem.domain, data, trust_, o);
    if (freeze && !st_.frozen) captured = s.hyper();
    return s;
  }

  double grid_variance(const MfSurrogate& s) const {
    const auto grid = monitoring_grid(cfg_.problem.domain.dim());
    double sum = 0.0;
    for (const auto& u : grid) sum += s.predict_unit(u, top()).variance;
    return sum / static_cast<double>(grid.size());
  }

  CandidateTask make_task(int m, int level, const DesignPoint& point) const {
    const auto u = cfg_.problem.domain.normalize(point).coords;
    const auto& cost = hierarchy_[static_cast<std::size_t>(level)].cost;
    CandidateTask c;
    c.m = m;
    c.level = level;
    c.point = point;
    c.cost = cost.cost(u);
    c.walltime = cost.walltime_at(u);
    return c;
  }

  static double total_cost(const std::vector<CandidateTask>& tasks) {
    double sum = 0.0;
    for (const auto& t : tasks) sum += t.cost;
    return sum;
  }

  double makespan(const std::vector<CandidateTask>& tasks) const {
    std::vector<std::size_t> all(tasks.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    return subset_makespan(tasks, all, hierarchy_, workers_);
  }

  // Enqueues longest walltime first so FIFO claiming approximates LPT.
  std::vector<TaskId> dispatch(const std::vector<CandidateTask>& tasks, const std::string& origin, int iteration) {
    std::vector<std::size_t> order(tasks.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return tasks[a].walltime > tasks[b].walltime; });
    std::vector<TaskId> ids;
    for (std::size_t k : order) {
      const auto& t = tasks[k];
      TaskSpec spec;
      spec.queue_name = hierarchy_[static_cast<std::size_t>(t.level)].queue_name;
      spec.point = t.point;
      spec.level = t.level;
      spec.walltime_estimate = t.walltime;
      spec.payload = {{"origin", origin}, {"iteration", iteration}, {"m", t.m}};
      const TaskId id = broker_.enqueue(spec, st_.clock);
      st_.pending[id] = {origin, iteration};
      ids.push_back(id);
    }
    return ids;
  }

  CollectResult collect(const std::vector<TaskId>& ids) {
    CollectResult r = collect_batch(broker_, ids, cfg_, st_.clock, cfg_.collect_timeout);
    for (auto& rec : broker_.results_since(st_.results_cursor)) {
      ++st_.results_cursor;
      const auto it = st_.pending.find(rec.task_id);
      if (it == st_.pending.end()) continue;
      st_.observations.push_back({rec.observation, it->second.origin, it->second.iteration, rec.attempt, rec.worker_id});
      st_.pending.erase(it);
    }
    st_.clock = std::max(st_.clock, r.end_time);
    return r;
  }

  void initialize() {
    const Domain& domain = cfg_.problem.domain;
    std::vector<CandidateTask> lhs;
    int m = 0;
    for (const auto& p : lhs_design(static_cast<std::size_t>(cfg_.n_init), domain, mix_seed(cfg_.seed, 1))) {
      if (!hierarchy_[0].feasibility.admits(domain.normalize(p).coords)) continue;
      lhs.push_back(make_task(m++, 0, p));
    }
    if (lhs.empty()) throw ConfigError("campaign.n_init: no initial design point satisfies level 0's feasibility");
    const double lhs_cost = total_cost(lhs);
    const double lhs_span = makespan(lhs);
    if (lhs_cost > cfg_.B || lhs_span > cfg_.T) {
      std::ostringstream msg;
      msg << "campaign.budget: the initial design needs resource " << lhs_cost << " and walltime " << lhs_span
          << " but the budget is resource " << cfg_.B << ", walltime " << cfg_.T;
      throw ConfigError(msg.str());
    }
    collect(dispatch(lhs, "lhs", 0));

    // Anchors: top-level evaluations at the design points with the highest
    // and lowest level-0 values (then farthest-first), as the budget allows.
    std::vector<CandidateTask> anchors;
    double anchor_span = 0.0;
    std::vector<Observation> base;
    for (const auto& e : st_.observations) {
      if (e.observation.feasible && e.observation.level == 0) base.push_back(e.observation);
    }
    if (base.empty()) {
      st_.phase = "failed";
      st_.diagnostic = "all " + std::to_string(lhs.size()) + " initial evaluations were infeasible";
      st_.termination = "campaign failed";
    } else if (levels() > 1 && cfg_.n_anchor > 0) {
      std::vector<std::size_t> order;
      std::vector<std::size_t> rest(base.size());
      std::iota(rest.begin(), rest.end(), std::size_t{0});
      auto take = [&](std::size_t k) {
        order.push_back(rest[k]);
        rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(k));
      };
      auto extreme = [&](bool highest) {
        std::size_t pick = 0;
        for (std::size_t k = 1; k < rest.size(); ++k) {
          const double a = sign() * base[rest[k]].value, b = sign() * base[rest[pick]].value;
          if (highest ? a > b : a < b) pick = k;
        }
        take(pick);
      };
      extreme(true);
      if (!rest.empty()) extreme(false);
      while (!rest.empty()) {
        std::size_t pick = 0;
        double far = -1.0;
        for (std::size_t k = 0; k < rest.size(); ++k) {
          double nearest = std::numeric_limits<double>::infinity();
          const auto uk = domain.normalize(base[rest[k]].point).coords;
          for (std::size_t o : order) nearest = std::min(nearest, squared_distance(uk, domain.normalize(base[o].point).coords));
          if (nearest > far) {
            far = nearest;
            pick = k;
          }
        }
        take(pick);
      }
      for (std::size_t k : order) {
        if (static_cast<int>(anchors.size()) >= cfg_.n_anchor) break;
        if (!hierarchy_[static_cast<std::size_t>(top())].feasibility.admits(domain.normalize(base[k].point).coords)) continue;
        auto trial = anchors;
        trial.push_back(make_task(static_cast<int>(anchors.size()), top(), base[k].point));
        const double span = makespan(trial);
        if (lhs_cost + total_cost(trial) > cfg_.B || lhs_span + span > cfg_.T) break;
        anchors = std::move(trial);
        anchor_span = span;
      }
      collect(dispatch(anchors, "anchor", 0));
    }

    LedgerEntry e;
    e.step = 0;
    e.kind = "init";
    e.T_before = cfg_.T;
    e.B_before = cfg_.B;
    e.T_charge = lhs_span + anchor_span;
    e.B_charge = lhs_cost + total_cost(anchors);
    e.T_after = e.T_before - e.T_charge;
    e.B_after = e.B_before - e.B_charge;
    e.terminated = e.T_after < 0.0 || e.B_after < 0.0;
    st_.ledger.push_back(e);
    st_.budget = BudgetState{e.T_after, e.B_after, cfg_.I, 1, 0.0, 0.0, e.terminated};
    if (st_.phase != "failed") st_.phase = "running";
    write_checkpoint(true, 0);
  }

  void step(bool halt_after_dispatch) {
    const std::size_t dim = cfg_.problem.domain.dim();
    const IterationPlan plan =
        plan_iteration(st_.budget, hierarchy_, dim, cfg_.heuristic, cfg_.max_candidates_per_level);
    if (plan.terminated) {
      if (st_.budget.i > st_.budget.I) {
        st_.termination = "iteration cap reached";
      } else if (st_.budget.terminated || !(st_.budget.T_remaining > 0.0) || !(st_.budget.B_remaining > 0.0)) {
        st_.termination = "budget exhausted";
      } else {
        st_.termination = "wall-clock allowance exceeds the remaining budget";
      }
      st_.phase = "done";
      if (halt_after_dispatch) throw Halted{};
      return;
    }
    const int i = st_.budget.i;
    IterationEntry it;
    it.i = i;
    it.T_i = plan.T_i;
    it.B_i = plan.B_i;
    it.counts = plan.counts;
    for (std::size_t l = 0; l < cfg_.level_caps.size(); ++l) it.counts[l] = std::min(it.counts[l], cfg_.level_caps[l]);

    std::optional<SurrogateHyper> captured;
    const MfSurrogate s = fit(mix_seed(cfg_.seed, 2, static_cast<std::uint64_t>(i)), captured);
    if (captured) st_.frozen = std::move(captured);
    it.grid_mean_variance = grid_variance(s);

    ProposalContext ctx;
    ctx.hierarchy = &hierarchy_;
    ctx.goal = cfg_.goal;
    ctx.n_starts = cfg_.acq_starts;
    ctx.max_evals_per_start = cfg_.acq_evals;
    if (const auto best = best_on(top())) {
      ctx.best = sign() * best->value;
    } else {
      // No top-level data yet: the incumbent is the best predicted top-level
      // value at the evaluated design points.
      ctx.best = -std::numeric_limits<double>::infinity();
      for (const auto& e : st_.observations) {
        if (!e.observation.feasible) continue;
        ctx.best = std::max(ctx.best, mf_predict(s, e.observation.point, top()).mean);
      }
    }
    for (const auto& e : st_.observations) {
      if (!e.observation.feasible) ctx.repulsion.push_back(cfg_.problem.domain.normalize(e.observation.point).coords);
    }
    std::vector<int> counts = plan.counts;
    for (std::size_t l = 0; l < cfg_.level_caps.size(); ++l) counts[l] = std::min(counts[l], cfg_.level_caps[l]);
    std::vector<CandidateTask> candidates;
    const std::uint64_t acq_seed = mix_seed(cfg_.seed, 3, static_cast<std::uint64_t>(i));
    while (std::any_of(counts.begin(), counts.end(), [](int c) { return c > 0; })) {
      try {
        candidates = propose_batch(s, counts, ctx, acq_seed);
        break;
      } catch (const NoCandidates& e) {
        counts.at(static_cast<std::size_t>(e.level())) = 0;
      }
    }
    it.n_candidates = static_cast<int>(candidates.size());

    const SelectionDecision dec = select_tasks(candidates, plan.T_i, plan.B_i, hierarchy_, workers_);
    for (std::size_t k : dec.selected) it.selected.push_back(candidates[k]);
    it.benefit = dec.total_benefit;
    it.planned_cost = dec.total_cost;
    it.planned_makespan = dec.total_walltime;
    it.optimal = dec.optimal;
    const auto ids = dispatch(it.selected, "acquired", i);
    if (halt_after_dispatch) throw Halted{};
    const CollectResult r = collect(ids);
    it.task_ids = ids;
    it.actual_makespan = r.trace.makespan;
    it.unresolved = r.unresolved;
    const auto best = best_on(top());
    it.best_value = best ? best->value : std::numeric_limits<double>::quiet_NaN();

    LedgerEntry e;
    e.step = i;
    e.kind = "iteration";
    e.T_before = st_.budget.T_remaining;
    e.B_before = st_.budget.B_remaining;
    e.T_charge = plan.T_i;
    e.B_charge = plan.B_i;
    BudgetState next = update_budgets(st_.budget, plan.T_i, plan.B_i);
    next.T_i = plan.T_i;
    next.B_i = plan.B_i;
    e.T_after = next.T_remaining;
    e.B_after = next.B_remaining;
    e.terminated = next.terminated;
    st_.budget = next;
    st_.ledger.push_back(e);
    st_.iterations.push_back(std::move(it));
    if (next.terminated) {
      st_.termination = "budget exhausted";
      st_.phase = "done";
    }
    write_checkpoint(true, i);
  }

  void write_checkpoint(bool numbered, int index = -1) {
    if (numbered) st_.checkpoint = index;
    if (!dir_) return;
    st_.journal_bytes = fs::file_size(*dir_ / "journal.jsonl");
    st_.results_bytes = fs::file_size(*dir_ / "results.jsonl");
    const json j{{"format", "mfac-checkpoint"},
                 {"version", kCheckpointVersion},
                 {"index", st_.checkpoint},
                 {"config", source_},
                 {"state", state_json(st_)}};
    const std::string text = j.dump(1) + "\n";
    if (numbered) {
      fs::create_directories(*dir_ / "checkpoints");
      write_atomic(*dir_ / "checkpoints" / checkpoint_name(index), text);
    }
    write_atomic(*dir_ / "checkpoint.json", text);
  }

  void maybe_halt() {
    if (halt_ && !halt_->mid_batch && st_.checkpoint == halt_->after_checkpoint) throw Halted{};
  }

  CampaignConfig cfg_;
  std::optional<fs::path> dir_;
  json source_;
  Broker broker_;
  State st_;
  std::optional<HaltPoint> halt_;
  Hierarchy hierarchy_;
  WorkerCounts workers_;
  std::vector<TrustPrior> trust_;
};

struct Restored {
  CampaignConfig config;
  json source;
  State state;
};

Restored restore(const fs::path& path) {
  const json ck = read_checkpoint(path);
  Restored r;
  r.source = ck.at("config");
  try {
    r.config = campaign_from_json(r.source);
    r.state = state_from(ck.at("state"));
  } catch (const json::exception& e) {
    throw IntegrityError("checkpoint '" + path.string() + "' is corrupt: " + e.what());
  }
  r.state.checkpoint = ck.at("index").get<int>();
  return r;
}

}  // namespace

std::optional<CampaignReport> run_campaign(const CampaignConfig& config, const RunOptions& options) {
  CampaignConfig cfg = config;
  fill_default_resources(cfg);
  cfg.validate();
  if (options.out_dir) {
    if (!options.config_source.is_object()) {
      throw InvalidArgument("a campaign with an output directory needs its config_source to be resumable");
    }
    fs::create_directories(*options.out_dir);
    if (fs::exists(*options.out_dir / "checkpoint.json")) {
      throw ConfigError("output directory '" + options.out_dir->string() +
                        "' already holds a campaign; use resume or choose another directory");
    }
  }
  Broker broker(cfg.queues, broker_options(cfg, options.out_dir));
  Campaign c(cfg, options.out_dir, options.config_source, std::move(broker), State{}, options.halt);
  return c.run();
}

std::optional<CampaignReport> resume_campaign(const fs::path& dir, std::optional<int> checkpoint,
                                              std::optional<HaltPoint> halt) {
  const fs::path path = checkpoint ? dir / "checkpoints" / checkpoint_name(*checkpoint) : dir / "checkpoint.json";
  Restored r = restore(path);
  const fs::path journal = dir / "journal.jsonl";
  const fs::path results = dir / "results.jsonl";
  for (const auto& f : {journal, results}) {
    if (!fs::exists(f)) throw IntegrityError("campaign file '" + f.string() + "' is missing");
  }
  if (fs::file_size(journal) < r.state.journal_bytes || fs::file_size(results) < r.state.results_bytes) {
    throw IntegrityError("journal or result store in '" + dir.string() + "' is shorter than its checkpoint");
  }
  // Anything written after the checkpoint is replayed by re-running.
  fs::resize_file(journal, r.state.journal_bytes);
  fs::resize_file(results, r.state.results_bytes);
  if (fs::exists(dir / "checkpoints")) {
    for (const auto& entry : fs::directory_iterator(dir / "checkpoints")) {
      const auto name = entry.path().filename().string();
      int k = -1;
      if (std::sscanf(name.c_str(), "checkpoint_%d.json", &k) == 1 && k > r.state.checkpoint) fs::remove(entry.path());
    }
  }
  if (checkpoint) write_atomic(dir / "checkpoint.json", [&] {
      std::ifstream in(path, std::ios::binary);
      std::stringstream ss;
      ss << in.rdbuf();
      return ss.str();
    }());
  Broker broker = Broker::replay(r.config.queues, broker_options(r.config, dir));
  Campaign c(r.config, dir, r.source, std::move(broker), std::move(r.state), halt);
  return c.run();
}

CampaignReport report_campaign(const fs::path& dir) {
  if (!fs::exists(dir / "checkpoint.json")) {
    throw IntegrityError("no campaign checkpoint in '" + dir.string() + "' (expected checkpoint.json)");
  }
  Restored r = restore(dir / "checkpoint.json");
  Campaign c(r.config, std::nullopt, r.source, Broker(r.config.queues), std::move(r.state), std::nullopt);
  CampaignReport report = c.finalize();
  write_report_files(report, r.config, dir);
  return report;
}

}  // namespace mfac
