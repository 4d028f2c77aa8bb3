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

#include "mfac/config.hpp"

#include <algorithm>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

#include "mfac/error.hpp"

namespace mfac {

namespace {

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }
std::string index(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

// Collects diagnostics while walking a JSON document. Accessors return
// nullopt (and record why) when a value is missing or malformed.
class Checker {
 public:
  explicit Checker(std::vector<Diagnostic>& out) : out_(out) {}

  void error(const std::string& key, const std::string& msg) { out_.push_back({key, msg}); }

  bool object(const json& j, const std::string& path) {
    if (j.is_object()) return true;
    error(path, "must be an object");
    return false;
  }

  void known_keys(const json& j, const std::string& path, std::initializer_list<const char*> keys) {
    const std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& [k, v] : j.items()) {
      if (!allowed.count(k)) error(join(path, k), "unknown key");
    }
  }

  const json* child(const json& j, const std::string& path, const std::string& key, bool required) {
    if (!j.contains(key)) {
      if (required) error(join(path, key), "required key is missing");
      return nullptr;
    }
    return &j.at(key);
  }

  std::optional<double> number(const json& j, const std::string& path, const std::string& key, bool required,
                               std::optional<double> min_exclusive = std::nullopt,
                               std::optional<double> min_inclusive = std::nullopt) {
    const json* v = child(j, path, key, required);
    if (!v) return std::nullopt;
    const std::string k = join(path, key);
    if (!v->is_number()) {
      error(k, "must be a number");
      return std::nullopt;
    }
    const double x = v->get<double>();
    if (min_exclusive && !(x > *min_exclusive)) {
      error(k, "must be > " + json(*min_exclusive).dump() + ", got " + v->dump());
      return std::nullopt;
    }
    if (min_inclusive && !(x >= *min_inclusive)) {
      error(k, "must be >= " + json(*min_inclusive).dump() + ", got " + v->dump());
      return std::nullopt;
    }
    return x;
  }

  std::optional<long long> integer(const json& j, const std::string& path, const std::string& key, bool required,
                                   long long min_value) {
    const json* v = child(j, path, key, required);
    if (!v) return std::nullopt;
    const std::string k = join(path, key);
    if (!v->is_number_integer()) {
      error(k, "must be an integer");
      return std::nullopt;
    }
    const auto x = v->get<long long>();
    if (x < min_value) {
      error(k, "must be >= " + std::to_string(min_value) + ", got " + std::to_string(x));
      return std::nullopt;
    }
    return x;
  }

  std::optional<std::string> choice(const json& j, const std::string& path, const std::string& key, bool required,
                                    std::initializer_list<const char*> options) {
    const json* v = child(j, path, key, required);
    if (!v) return std::nullopt;
    const std::string k = join(path, key);
    if (!v->is_string()) {
      error(k, "must be a string");
      return std::nullopt;
    }
    const auto s = v->get<std::string>();
    std::string allowed;
    for (const char* o : options) {
      if (s == o) return s;
      allowed += std::string(allowed.empty() ? "" : ", ") + o;
    }
    error(k, "must be one of: " + allowed + "; got '" + s + "'");
    return std::nullopt;
  }

  std::optional<std::string> string(const json& j, const std::string& path, const std::string& key, bool required) {
    const json* v = child(j, path, key, required);
    if (!v) return std::nullopt;
    if (!v->is_string() || v->get<std::string>().empty()) {
      error(join(path, key), "must be a non-empty string");
      return std::nullopt;
    }
    return v->get<std::string>();
  }

  std::optional<std::vector<double>> numbers(const json& j, const std::string& path, const std::string& key,
                                             bool required, std::optional<std::size_t> size = std::nullopt) {
    const json* v = child(j, path, key, required);
    if (!v) return std::nullopt;
    const std::string k = join(path, key);
    if (!v->is_array() || !std::all_of(v->begin(), v->end(), [](const json& e) { return e.is_number(); })) {
      error(k, "must be an array of numbers");
      return std::nullopt;
    }
    if (size && v->size() != *size) {
      error(k, "must have " + std::to_string(*size) + " entries, got " + std::to_string(v->size()));
      return std::nullopt;
    }
    return v->get<std::vector<double>>();
  }

 private:
  std::vector<Diagnostic>& out_;
};

void check_polynomial(Checker& c, const json& j, const std::string& path, std::size_t dim) {
  if (!c.object(j, path)) return;
  c.known_keys(j, path, {"degree", "coeffs", "kind"});
  const auto deg = c.integer(j, path, "degree", true, 0);
  const auto coeffs = c.numbers(j, path, "coeffs", true);
  if (!deg || !coeffs) return;
  if (*deg > 2) {
    c.error(join(path, "degree"), "must be 0, 1 or 2");
    return;
  }
  const std::size_t need = Polynomial::term_count(dim, static_cast<int>(*deg));
  if (coeffs->size() != need) {
    c.error(join(path, "coeffs"), "degree " + std::to_string(*deg) + " in " + std::to_string(dim) + " dimensions needs " +
                                      std::to_string(need) + " coefficients, got " + std::to_string(coeffs->size()));
  }
}

void check_custom_problem(Checker& c, const json& p, const std::string& path) {
  if (!c.object(p, path)) return;
  c.known_keys(p, path, {"name", "domain", "direction", "levels", "bridges", "optimum"});
  c.choice(p, path, "direction", false, {"maximize", "minimize"});
  std::size_t dim = 0;
  std::optional<Domain> domain;
  if (const json* d = c.child(p, path, "domain", true); d && c.object(*d, join(path, "domain"))) {
    const std::string dp = join(path, "domain");
    c.known_keys(*d, dp, {"lower", "upper"});
    const auto lo = c.numbers(*d, dp, "lower", true);
    const auto hi = c.numbers(*d, dp, "upper", true);
    if (lo && hi) {
      try {
        domain = Domain(*lo, *hi);
        dim = lo->size();
      } catch (const Error& e) {
        c.error(dp, e.what());
      }
    }
  }
  std::size_t n_levels = 0;
  if (const json* lv = c.child(p, path, "levels", true)) {
    const std::string lp = join(path, "levels");
    if (!lv->is_array() || lv->empty()) {
      c.error(lp, "must be a non-empty array");
    } else {
      n_levels = lv->size();
      double previous_cost = 0.0;
      for (std::size_t l = 0; l < lv->size(); ++l) {
        const json& level = (*lv)[l];
        const std::string at = index(lp, l);
        if (!c.object(level, at)) continue;
        c.known_keys(level, at,
                     {"name", "queue", "objective", "cost", "trust", "noise", "feasibility", "hidden_infeasible"});
        c.string(level, at, "name", true);
        if (level.contains("queue")) c.string(level, at, "queue", false);
        if (const json* obj = c.child(level, at, "objective", true); obj && c.object(*obj, join(at, "objective"))) {
          const std::string op = join(at, "objective");
          const auto kind = c.choice(*obj, op, "kind", true, {"polynomial", "gaussian_sum"});
          if (kind == "polynomial" && dim > 0) check_polynomial(c, *obj, op, dim);
          if (kind == "gaussian_sum") {
            c.known_keys(*obj, op, {"kind", "components", "offset"});
            c.number(*obj, op, "offset", false);
            const json* comps = c.child(*obj, op, "components", true);
            if (comps && (!comps->is_array() || comps->empty())) c.error(join(op, "components"), "must be a non-empty array");
            if (comps && comps->is_array()) {
              for (std::size_t k = 0; k < comps->size(); ++k) {
                const std::string cp = index(join(op, "components"), k);
                if (!c.object((*comps)[k], cp)) continue;
                c.known_keys((*comps)[k], cp, {"amplitude", "center", "width"});
                c.number((*comps)[k], cp, "amplitude", true);
                c.numbers((*comps)[k], cp, "center", true, dim > 0 ? std::optional<std::size_t>(dim) : std::nullopt);
                c.number((*comps)[k], cp, "width", true, 0.0);
              }
            }
          }
        }
        if (const json* cost = c.child(level, at, "cost", true); cost && c.object(*cost, join(at, "cost"))) {
          const std::string cp = join(at, "cost");
          c.known_keys(*cost, cp, {"base_cost", "walltime", "multiplier"});
          const auto base = c.number(*cost, cp, "base_cost", true, 0.0);
          c.number(*cost, cp, "walltime", true, 0.0);
          if (cost->contains("multiplier") && dim > 0) check_polynomial(c, cost->at("multiplier"), join(cp, "multiplier"), dim);
          if (base) {
            if (*base < previous_cost) {
              c.error(join(cp, "base_cost"), "levels must be ordered from cheapest to most expensive; level " +
                                                 std::to_string(l) + " is cheaper than level " + std::to_string(l - 1));
            }
            previous_cost = *base;
          }
        }
        if (const json* tr = c.child(level, at, "trust", false); tr && c.object(*tr, join(at, "trust"))) {
          const std::string tp = join(at, "trust");
          c.known_keys(*tr, tp, {"coeffs", "feature"});
          const auto coeffs = c.numbers(*tr, tp, "coeffs", true, 3);
          TrustPrior prior;
          bool ok = coeffs.has_value();
          if (coeffs) prior.coeffs = {(*coeffs)[0], (*coeffs)[1], (*coeffs)[2]};
          if (const json* f = c.child(*tr, tp, "feature", false); f && c.object(*f, join(tp, "feature"))) {
            const std::string fp = join(tp, "feature");
            c.known_keys(*f, fp, {"kind", "index"});
            const auto kind = c.choice(*f, fp, "kind", true, {"none", "coordinate", "normalized_coordinate"});
            const auto idx = c.integer(*f, fp, "index", false, 0);
            if (!kind) ok = false;
            if (kind == "coordinate") prior.feature.kind = TrustFeature::Kind::coordinate;
            if (kind == "normalized_coordinate") prior.feature.kind = TrustFeature::Kind::normalized_coordinate;
            if (idx) {
              if (dim > 0 && static_cast<std::size_t>(*idx) >= dim) {
                c.error(join(fp, "index"), "exceeds the problem dimension");
                ok = false;
              }
              prior.feature.index = static_cast<std::size_t>(*idx);
            }
          }
          if (ok && domain) {
            try {
              prior.validate(*domain);
            } catch (const Error& e) {
              c.error(join(tp, "coeffs"), e.what());
            }
          }
        }
        if (level.contains("noise") && dim > 0) check_polynomial(c, level.at("noise"), join(at, "noise"), dim);
        if (const json* fe = c.child(level, at, "feasibility", false)) {
          const std::string fp = join(at, "feasibility");
          if (!fe->is_array()) {
            c.error(fp, "must be an array");
          } else {
            for (std::size_t k = 0; k < fe->size(); ++k) {
              const std::string kp = index(fp, k);
              if (!c.object((*fe)[k], kp)) continue;
              c.known_keys((*fe)[k], kp, {"coeffs", "bound"});
              c.numbers((*fe)[k], kp, "coeffs", true, dim > 0 ? std::optional<std::size_t>(dim) : std::nullopt);
              c.number((*fe)[k], kp, "bound", true);
            }
          }
        }
        if (const json* hi = c.child(level, at, "hidden_infeasible", false)) {
          const std::string hp = join(at, "hidden_infeasible");
          if (!hi->is_array()) {
            c.error(hp, "must be an array");
          } else {
            for (std::size_t k = 0; k < hi->size(); ++k) {
              const std::string kp = index(hp, k);
              if (!c.object((*hi)[k], kp)) continue;
              c.known_keys((*hi)[k], kp, {"center", "radius"});
              c.numbers((*hi)[k], kp, "center", true, dim > 0 ? std::optional<std::size_t>(dim) : std::nullopt);
              c.number((*hi)[k], kp, "radius", true, 0.0);
            }
          }
        }
      }
    }
  }
  if (const json* br = c.child(p, path, "bridges", false)) {
    const std::string bp = join(path, "bridges");
    if (!br->is_array()) {
      c.error(bp, "must be an array");
    } else {
      if (n_levels > 0 && br->size() != n_levels - 1) {
        c.error(bp, "a " + std::to_string(n_levels) + "-level hierarchy needs " + std::to_string(n_levels - 1) +
                        " bridges, got " + std::to_string(br->size()));
      }
      for (std::size_t k = 0; k < br->size(); ++k) {
        const std::string kp = index(bp, k);
        if (!c.object((*br)[k], kp)) continue;
        c.known_keys((*br)[k], kp, {"degree"});
        const json* deg = c.child((*br)[k], kp, "degree", true);
        if (deg && !(deg->is_string() && deg->get<std::string>() == "auto") &&
            !(deg->is_number_integer() && deg->get<int>() >= 0 && deg->get<int>() <= 2)) {
          c.error(join(kp, "degree"), "must be 0, 1, 2 or \"auto\"");
        }
      }
    }
  }
  if (const json* opt = c.child(p, path, "optimum", false); opt && c.object(*opt, join(path, "optimum"))) {
    const std::string op = join(path, "optimum");
    c.known_keys(*opt, op, {"point", "value"});
    c.numbers(*opt, op, "point", true, dim > 0 ? std::optional<std::size_t>(dim) : std::nullopt);
    c.number(*opt, op, "value", true);
  }
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path.string());
}

const json& problem_body(const json& problem) {
  static const json empty = json::object();
  if (problem.contains("inline")) return problem.at("inline");
  return empty;
}

}  // namespace

json parse_config_text(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    // e.byte is 1-based and points just past the offending character.
    const std::size_t upto = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    std::size_t line = 1, column = 1;
    for (std::size_t k = 0; k < upto; ++k) {
      if (text[k] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    std::string what = e.what();
    if (const auto pos = what.find(": "); pos != std::string::npos) what = what.substr(pos + 2);
    throw ConfigError(origin + ":" + std::to_string(line) + ":" + std::to_string(column) + ": " + what);
  }
}

std::vector<Diagnostic> validate_config(const json& config, const std::filesystem::path& base_dir) {
  std::vector<Diagnostic> out;
  Checker c(out);
  if (!c.object(config, "(root)")) return out;
  c.known_keys(config, "", {"schema_version", "problem", "campaign", "orchestrator", "acquisition", "report"});
  if (const auto v = c.integer(config, "", "schema_version", true, 1); v && *v != kConfigSchemaVersion) {
    c.error("schema_version", "unsupported version " + std::to_string(*v) + " (expected " +
                                  std::to_string(kConfigSchemaVersion) + ")");
  }

  std::optional<BenchmarkProblem> problem;
  if (const json* p = c.child(config, "", "problem", true); p && c.object(*p, "problem")) {
    c.known_keys(*p, "problem", {"benchmark", "file", "inline", "levels"});
    const int sources = static_cast<int>(p->contains("benchmark")) + static_cast<int>(p->contains("file")) +
                        static_cast<int>(p->contains("inline"));
    if (sources != 1) c.error("problem", "exactly one of benchmark, file or inline is required");
    std::optional<json> custom;
    std::string custom_path;
    if (const auto name = c.string(*p, "problem", "benchmark", false)) {
      try {
        problem = benchmark_by_name(*name);
      } catch (const Error& e) {
        c.error("problem.benchmark", e.what());
      }
    }
    if (const auto file = c.string(*p, "problem", "file", false)) {
      custom_path = "problem.file";
      try {
        custom = read_json_file(base_dir / *file);
      } catch (const Error& e) {
        c.error("problem.file", e.what());
      }
    }
    if (p->contains("inline")) {
      custom = p->at("inline");
      custom_path = "problem.inline";
    }
    if (custom) {
      const std::size_t before = out.size();
      check_custom_problem(c, *custom, custom_path);
      if (out.size() == before) {
        try {
          problem = problem_from_json(*custom);
        } catch (const Error& e) {
          c.error(custom_path, e.what());
        } catch (const json::exception& e) {
          c.error(custom_path, e.what());
        }
      }
    }
    if (const json* keep = c.child(*p, "problem", "levels", false)) {
      const bool ints = keep->is_array() && !keep->empty() &&
                        std::all_of(keep->begin(), keep->end(), [](const json& e) { return e.is_number_integer(); });
      if (!ints) {
        c.error("problem.levels", "must be a non-empty array of level indices");
      } else if (problem) {
        const auto idx = keep->get<std::vector<int>>();
        bool ok = std::is_sorted(idx.begin(), idx.end()) && std::adjacent_find(idx.begin(), idx.end()) == idx.end();
        for (int l : idx) ok = ok && l >= 0 && static_cast<std::size_t>(l) < problem->levels.size();
        if (!ok) {
          c.error("problem.levels", "must list distinct existing levels in increasing order");
        } else {
          problem = restrict_levels(*problem, idx);
        }
      }
    }
  }

  std::optional<double> T, B;
  std::optional<std::size_t> level_caps;
  if (const json* cp = c.child(config, "", "campaign", true); cp && c.object(*cp, "campaign")) {
    c.known_keys(*cp, "campaign",
                 {"goal", "n_init", "n_anchor", "iterations", "budget", "heuristic", "max_candidates_per_level",
                  "level_caps", "seed", "noise_floor", "hyperparameters"});
    c.choice(*cp, "campaign", "goal", false, {"optimize", "reduce_variance"});
    c.integer(*cp, "campaign", "n_init", true, 1);
    c.integer(*cp, "campaign", "n_anchor", false, 0);
    c.integer(*cp, "campaign", "iterations", true, 1);
    if (const json* b = c.child(*cp, "campaign", "budget", true); b && c.object(*b, "campaign.budget")) {
      c.known_keys(*b, "campaign.budget", {"walltime", "resource"});
      T = c.number(*b, "campaign.budget", "walltime", true, 0.0);
      B = c.number(*b, "campaign.budget", "resource", true, 0.0);
    }
    c.choice(*cp, "campaign", "heuristic", false, {"longest_sim", "proportional_steps"});
    c.integer(*cp, "campaign", "max_candidates_per_level", false, 1);
    if (const json* lc = c.child(*cp, "campaign", "level_caps", false)) {
      bool ok = lc->is_array();
      if (ok) {
        for (const auto& v : *lc) ok = ok && v.is_number_integer() && v.get<long long>() >= 0;
      }
      if (!ok) {
        c.error("campaign.level_caps", "must be an array of non-negative integers");
      } else {
        level_caps = lc->size();
      }
    }
    c.integer(*cp, "campaign", "seed", false, 0);
    c.number(*cp, "campaign", "noise_floor", false, std::nullopt, 0.0);
    c.choice(*cp, "campaign", "hyperparameters", false, {"refit", "freeze"});
  }

  std::set<std::string> queue_names, serviced;
  if (const json* op = c.child(config, "", "orchestrator", false); op && c.object(*op, "orchestrator")) {
    c.known_keys(*op, "orchestrator",
                 {"clock", "seconds_per_time_unit", "visibility_factor", "max_attempts", "collect_timeout", "queues",
                  "workers"});
    c.choice(*op, "orchestrator", "clock", false, {"virtual", "threaded"});
    c.number(*op, "orchestrator", "seconds_per_time_unit", false, 0.0);
    c.number(*op, "orchestrator", "visibility_factor", false, 1.0);
    c.integer(*op, "orchestrator", "max_attempts", false, 1);
    c.number(*op, "orchestrator", "collect_timeout", false, 0.0);
    if (const json* qs = c.child(*op, "orchestrator", "queues", false)) {
      if (!qs->is_array()) {
        c.error("orchestrator.queues", "must be an array");
      } else {
        for (std::size_t k = 0; k < qs->size(); ++k) {
          const std::string qp = index("orchestrator.queues", k);
          if (!c.object((*qs)[k], qp)) continue;
          c.known_keys((*qs)[k], qp, {"name", "latency"});
          if (const auto n = c.string((*qs)[k], qp, "name", true)) {
            if (!queue_names.insert(*n).second) c.error(join(qp, "name"), "duplicate queue '" + *n + "'");
          }
          c.number((*qs)[k], qp, "latency", false, std::nullopt, 0.0);
        }
      }
    }
    if (const json* ws = c.child(*op, "orchestrator", "workers", false)) {
      if (!ws->is_array()) {
        c.error("orchestrator.workers", "must be an array");
      } else {
        std::set<std::string> ids;
        for (std::size_t k = 0; k < ws->size(); ++k) {
          const std::string wp = index("orchestrator.workers", k);
          if (!c.object((*ws)[k], wp)) continue;
          c.known_keys((*ws)[k], wp, {"id", "queues", "speed", "failure_rate", "count"});
          if (const auto id = c.string((*ws)[k], wp, "id", true); id && !ids.insert(*id).second) {
            c.error(join(wp, "id"), "duplicate worker id '" + *id + "'");
          }
          c.number((*ws)[k], wp, "speed", false, 0.0);
          c.integer((*ws)[k], wp, "count", false, 1);
          if (const auto fr = c.number((*ws)[k], wp, "failure_rate", false, std::nullopt, 0.0); fr && *fr >= 1.0) {
            c.error(join(wp, "failure_rate"), "must be < 1");
          }
          const json* wq = c.child((*ws)[k], wp, "queues", true);
          if (wq && (!wq->is_array() || wq->empty() ||
                     !std::all_of(wq->begin(), wq->end(), [](const json& e) { return e.is_string(); }))) {
            c.error(join(wp, "queues"), "must be a non-empty array of queue names");
          } else if (wq) {
            for (const auto& q : *wq) {
              serviced.insert(q.get<std::string>());
              if (!queue_names.count(q.get<std::string>())) {
                c.error(join(wp, "queues"), "unknown queue '" + q.get<std::string>() + "'");
              }
            }
          }
        }
      }
    }
    if (op->contains("queues") != op->contains("workers")) {
      c.error("orchestrator", "queues and workers must be given together");
    }
  }

  if (const json* ap = c.child(config, "", "acquisition", false); ap && c.object(*ap, "acquisition")) {
    c.known_keys(*ap, "acquisition", {"starts", "evals_per_start"});
    c.integer(*ap, "acquisition", "starts", false, 1);
    c.integer(*ap, "acquisition", "evals_per_start", false, 1);
  }
  if (const json* rp = c.child(config, "", "report", false); rp && c.object(*rp, "report")) {
    c.known_keys(*rp, "report", {"surface_points_per_dim"});
    c.integer(*rp, "report", "surface_points_per_dim", false, 2);
  }

  // Cross-field: every level's queue must exist and be serviced.
  if (problem && !queue_names.empty()) {
    for (const auto& lv : problem->levels) {
      if (!queue_names.count(lv.queue)) {
        c.error("orchestrator.queues", "no queue named '" + lv.queue + "' for level '" + lv.name + "'");
      } else if (!serviced.count(lv.queue)) {
        c.error("orchestrator.workers", "no worker services queue '" + lv.queue + "'");
      }
    }
  }
  if (problem && level_caps && *level_caps != problem->levels.size()) {
    c.error("campaign.level_caps", "has " + std::to_string(*level_caps) + " entries; the problem has " +
                                       std::to_string(problem->levels.size()) + " levels");
  }
  return out;
}

json resolve_config(const json& config, const std::filesystem::path& base_dir) {
  json out = config;
  if (out.contains("problem") && out["problem"].contains("file")) {
    const auto file = out["problem"]["file"].get<std::string>();
    out["problem"]["inline"] = read_json_file(base_dir / file);
    out["problem"].erase("file");
  }
  return out;
}

CampaignConfig campaign_from_json(const json& j) {
  CampaignConfig cfg;
  try {
    const json& p = j.at("problem");
    if (p.contains("benchmark")) {
      cfg.problem = benchmark_by_name(p.at("benchmark").get<std::string>());
    } else if (p.contains("inline")) {
      cfg.problem = problem_from_json(problem_body(p));
    } else {
      throw ConfigError("problem must be resolved before use");
    }
    if (p.contains("levels")) cfg.problem = restrict_levels(cfg.problem, p.at("levels").get<std::vector<int>>());

    const json& c = j.at("campaign");
    const std::string goal = c.value("goal", std::string("optimize"));
    cfg.goal = goal == "reduce_variance" ? CampaignGoal::reduce_variance : CampaignGoal::optimize;
    cfg.n_init = c.at("n_init").get<int>();
    cfg.n_anchor = c.value("n_anchor", 2);
    cfg.I = c.at("iterations").get<int>();
    cfg.T = c.at("budget").at("walltime").get<double>();
    cfg.B = c.at("budget").at("resource").get<double>();
    cfg.heuristic = c.value("heuristic", std::string("longest_sim")) == "proportional_steps"
                        ? BatchHeuristic::proportional_steps
                        : BatchHeuristic::longest_sim;
    cfg.max_candidates_per_level = c.value("max_candidates_per_level", 4);
    if (c.contains("level_caps")) cfg.level_caps = c.at("level_caps").get<std::vector<int>>();
    cfg.seed = c.value("seed", std::uint64_t{0});
    cfg.noise_floor = c.value("noise_floor", 1e-8);
    const std::string fallback = cfg.goal == CampaignGoal::reduce_variance ? "freeze" : "refit";
    cfg.hyper_policy = c.value("hyperparameters", fallback) == "freeze" ? HyperPolicy::freeze : HyperPolicy::refit;

    if (j.contains("orchestrator")) {
      const json& o = j.at("orchestrator");
      cfg.clock = o.value("clock", std::string("virtual")) == "threaded" ? ClockMode::threaded : ClockMode::virtual_clock;
      cfg.seconds_per_time_unit = o.value("seconds_per_time_unit", cfg.seconds_per_time_unit);
      cfg.visibility_factor = o.value("visibility_factor", cfg.visibility_factor);
      cfg.max_attempts = o.value("max_attempts", cfg.max_attempts);
      cfg.collect_timeout = o.value("collect_timeout", cfg.collect_timeout);
      if (o.contains("queues")) {
        for (const auto& q : o.at("queues")) cfg.queues.push_back({q.at("name").get<std::string>(), q.value("latency", 0.0)});
      }
      if (o.contains("workers")) {
        for (const auto& w : o.at("workers")) {
          WorkerProfile wp;
          wp.serviced_queues = w.at("queues").get<std::vector<std::string>>();
          wp.speed_factor = w.value("speed", 1.0);
          wp.failure_rate = w.value("failure_rate", 0.0);
          const std::string id = w.at("id").get<std::string>();
          const int count = w.value("count", 1);
          for (int k = 0; k < count; ++k) {
            wp.id = count == 1 ? id : id + "-" + std::to_string(k);
            cfg.workers.push_back(wp);
          }
        }
      }
    }
    if (j.contains("acquisition")) {
      cfg.acq_starts = j.at("acquisition").value("starts", cfg.acq_starts);
      cfg.acq_evals = j.at("acquisition").value("evals_per_start", cfg.acq_evals);
    }
    if (j.contains("report")) {
      cfg.surface_points_per_dim = j.at("report").value("surface_points_per_dim", cfg.surface_points_per_dim);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  fill_default_resources(cfg);
  cfg.validate();
  return cfg;
}

std::string format_diagnostics(const std::vector<Diagnostic>& diagnostics) {
  std::string out;
  for (const auto& d : diagnostics) out += d.key + ": " + d.message + "\n";
  return out;
}

LoadedConfig load_config(const std::filesystem::path& path) {
  const json raw = read_json_file(path);
  const auto base = path.parent_path();
  const auto diagnostics = validate_config(raw, base);
  if (!diagnostics.empty()) throw ConfigError(format_diagnostics(diagnostics));
  LoadedConfig out;
  out.resolved = resolve_config(raw, base);
  out.campaign = campaign_from_json(out.resolved);
  return out;
}

}  // namespace mfac
