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

#include "mfac/bench.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "mfac/error.hpp"
#include "mfac/optim.hpp"

namespace mfac {

Hierarchy BenchmarkProblem::hierarchy() const {
  Hierarchy h;
  for (std::size_t l = 0; l < levels.size(); ++l) {
    const auto& lm = levels[l];
    h.levels.push_back({static_cast<int>(l), lm.name, lm.cost, lm.trust, lm.feasibility, lm.queue});
  }
  return h;
}

double BenchmarkProblem::noiseless(int level, const DesignPoint& x) const {
  return levels.at(static_cast<std::size_t>(level)).objective(x);
}

Observation BenchmarkProblem::evaluate(int level, const DesignPoint& x, std::uint64_t seed, TaskId task_id) const {
  const auto& lm = levels.at(static_cast<std::size_t>(level));
  domain.check(x);
  Observation o;
  o.point = x;
  o.level = level;
  o.task_id = task_id;
  if (lm.hidden_ok && !lm.hidden_ok(x)) {
    o.feasible = false;
    o.value = std::numeric_limits<double>::quiet_NaN();
    return o;
  }
  o.value = lm.objective(x);
  if (lm.noise_var) {
    o.noise_var = lm.noise_var(x);
    std::mt19937_64 rng(mix_seed(seed, task_id, 0x6e6f697365ULL));
    std::normal_distribution<double> normal(0.0, std::sqrt(o.noise_var));
    o.value += normal(rng);
  }
  return o;
}

double forrester_high(double x) {
  const double a = 6.0 * x - 2.0;
  return a * a * std::sin(12.0 * x - 4.0);
}

double forrester_low(double x) { return 0.5 * forrester_high(x) + 10.0 * (x - 0.5) - 5.0; }

BenchmarkProblem forrester_pair() {
  BenchmarkProblem p;
  p.name = "forrester";
  p.domain = Domain({0.0}, {1.0});
  p.direction = Direction::minimize;
  LevelModel low;
  low.name = "low";
  low.queue = "low";
  low.objective = [](const DesignPoint& x) { return forrester_low(x.coords[0]); };
  low.cost = CostModel{1.0, 1.0, std::nullopt};
  LevelModel high;
  high.name = "high";
  high.queue = "high";
  high.objective = [](const DesignPoint& x) { return forrester_high(x.coords[0]); };
  high.cost = CostModel{10.0, 10.0, std::nullopt};
  p.levels = {low, high};
  p.optimum = TrueOptimum{DesignPoint{{0.7572487585232999}}, -6.0207400557670825};
  p.bridge_degrees = {-1};
  return p;
}

namespace {

double gaussian_bump(const DesignPoint& x, double cx, double cy, double width) {
  const double dx = x.coords[0] - cx;
  const double dy = x.coords[1] - cy;
  return std::exp(-(dx * dx + dy * dy) / (2.0 * width * width));
}

}  // namespace

BenchmarkProblem eh_analogue() {
  BenchmarkProblem p;
  p.name = "eh_analogue";
  p.domain = Domain::unit(2);
  p.direction = Direction::maximize;
  LevelModel lv;
  lv.name = "sim";
  lv.queue = "sim";
  // Both centers lie on x0 + x1 = 1, so f is symmetric under reflection
  // across that line.
  lv.objective = [](const DesignPoint& x) {
    return 20.0 + 30.0 * gaussian_bump(x, 0.62, 0.38, 0.16) + 12.0 * gaussian_bump(x, 0.45, 0.55, 0.22);
  };
  lv.cost = CostModel{1.0, 1.0, Polynomial(2, 1, {1.0, 0.5, 0.0})};
  p.levels = {lv};
  p.optimum = TrueOptimum{DesignPoint{{0.5997436946020124, 0.4002563053979876}}, 57.073522950118644};
  return p;
}

double stochastic_micro_noise(const DesignPoint& x) {
  const double a = x.coords[0] - 0.3;
  const double b = x.coords[1];
  return 0.01 + 0.04 * a * a + 0.02 * b * b;
}

DesignPoint stochastic_micro_noise_argmin() { return DesignPoint{{0.3, 0.0}}; }

BenchmarkProblem stochastic_micro() {
  BenchmarkProblem p;
  p.name = "stochastic_micro";
  p.domain = Domain::unit(2);
  p.direction = Direction::maximize;
  auto surface = [](const DesignPoint& x) {
    const double u = x.coords[0];
    const double v = x.coords[1];
    return std::sin(3.0 * u) + 0.5 * std::cos(4.0 * v) + u * v;
  };
  LevelModel coarse;
  coarse.name = "continuum";
  coarse.queue = "continuum";
  coarse.objective = [surface](const DesignPoint& x) { return 0.8 * surface(x) + 0.3 * (x.coords[0] - 0.5) - 0.1; };
  coarse.cost = CostModel{1.0, 1.0, std::nullopt};
  LevelModel fine;
  fine.name = "particle";
  fine.queue = "particle";
  fine.objective = surface;
  fine.noise_var = stochastic_micro_noise;
  fine.cost = CostModel{5.0, 5.0, std::nullopt};
  p.levels = {coarse, fine};
  p.bridge_degrees = {-1};
  return p;
}

BenchmarkProblem restrict_levels(const BenchmarkProblem& p, const std::vector<int>& keep) {
  if (keep.empty()) throw InvalidArgument("restrict_levels needs at least one level");
  BenchmarkProblem out = p;
  out.levels.clear();
  for (int l : keep) out.levels.push_back(p.levels.at(static_cast<std::size_t>(l)));
  out.bridge_degrees.assign(keep.size() - 1, -1);
  out.name = p.name + (keep.size() == 1 ? "_level" + std::to_string(keep.front()) : "_subset");
  return out;
}

std::vector<std::string> benchmark_names() { return {"forrester", "eh_analogue", "stochastic_micro"}; }

BenchmarkProblem benchmark_by_name(const std::string& name) {
  if (name == "forrester") return forrester_pair();
  if (name == "eh_analogue") return eh_analogue();
  if (name == "stochastic_micro") return stochastic_micro();
  throw ConfigError("unknown benchmark '" + name + "'");
}

namespace {

Polynomial polynomial_from(const json& j, std::size_t dim) {
  const int degree = j.at("degree").get<int>();
  return Polynomial(dim, degree, j.at("coeffs").get<std::vector<double>>());
}

PointFunction objective_from(const json& j, const Domain& domain) {
  const std::string kind = j.at("kind").get<std::string>();
  const std::size_t d = domain.dim();
  if (kind == "polynomial") {
    Polynomial poly = polynomial_from(j, d);
    return [poly, domain](const DesignPoint& x) { return poly(domain.normalize(x).coords); };
  }
  if (kind == "gaussian_sum") {
    struct Bump {
      double amplitude;
      std::vector<double> center;
      double width;
    };
    std::vector<Bump> bumps;
    for (const auto& c : j.at("components")) {
      Bump b{c.at("amplitude").get<double>(), c.at("center").get<std::vector<double>>(), c.at("width").get<double>()};
      if (b.center.size() != d) throw ConfigError("gaussian component center has the wrong dimension");
      if (!(b.width > 0.0)) throw ConfigError("gaussian component width must be positive");
      bumps.push_back(std::move(b));
    }
    const double offset = j.value("offset", 0.0);
    return [bumps, offset, domain](const DesignPoint& x) {
      const auto u = domain.normalize(x).coords;
      double v = offset;
      for (const auto& b : bumps) v += b.amplitude * std::exp(-squared_distance(u, b.center) / (2.0 * b.width * b.width));
      return v;
    };
  }
  throw ConfigError("unknown objective kind '" + kind + "'");
}

}  // namespace

BenchmarkProblem problem_from_json(const json& j) {
  BenchmarkProblem p;
  p.name = j.value("name", std::string("custom"));
  const auto& dom = j.at("domain");
  p.domain = Domain(dom.at("lower").get<std::vector<double>>(), dom.at("upper").get<std::vector<double>>());
  const std::string dir = j.value("direction", std::string("maximize"));
  if (dir == "maximize") {
    p.direction = Direction::maximize;
  } else if (dir == "minimize") {
    p.direction = Direction::minimize;
  } else {
    throw ConfigError("direction must be 'maximize' or 'minimize'");
  }
  const std::size_t d = p.domain.dim();
  for (const auto& lj : j.at("levels")) {
    LevelModel lm;
    lm.name = lj.at("name").get<std::string>();
    lm.queue = lj.value("queue", lm.name);
    lm.objective = objective_from(lj.at("objective"), p.domain);
    const auto& cj = lj.at("cost");
    lm.cost.base_cost = cj.at("base_cost").get<double>();
    lm.cost.walltime = cj.at("walltime").get<double>();
    if (cj.contains("multiplier")) lm.cost.multiplier = polynomial_from(cj.at("multiplier"), d);
    if (lj.contains("trust")) {
      const auto& tj = lj.at("trust");
      const auto c = tj.at("coeffs").get<std::vector<double>>();
      if (c.size() != 3) throw ConfigError("trust coeffs need exactly three entries");
      lm.trust.coeffs = {c[0], c[1], c[2]};
      if (tj.contains("feature")) {
        const auto& fj = tj.at("feature");
        const std::string kind = fj.at("kind").get<std::string>();
        if (kind == "none") {
          lm.trust.feature.kind = TrustFeature::Kind::none;
        } else if (kind == "coordinate") {
          lm.trust.feature.kind = TrustFeature::Kind::coordinate;
        } else if (kind == "normalized_coordinate") {
          lm.trust.feature.kind = TrustFeature::Kind::normalized_coordinate;
        } else {
          throw ConfigError("unknown trust feature kind '" + kind + "'");
        }
        lm.trust.feature.index = fj.value("index", std::size_t{0});
      }
    }
    if (lj.contains("noise")) {
      Polynomial noise = polynomial_from(lj.at("noise"), d);
      const Domain domain = p.domain;
      lm.noise_var = [noise, domain](const DesignPoint& x) { return std::max(noise(domain.normalize(x).coords), 0.0); };
    }
    if (lj.contains("feasibility")) {
      for (const auto& fj : lj.at("feasibility")) {
        lm.feasibility.constraints.push_back(
            {fj.at("coeffs").get<std::vector<double>>(), fj.at("bound").get<double>()});
      }
    }
    if (lj.contains("hidden_infeasible")) {
      std::vector<std::pair<std::vector<double>, double>> balls;
      for (const auto& bj : lj.at("hidden_infeasible")) {
        balls.emplace_back(bj.at("center").get<std::vector<double>>(), bj.at("radius").get<double>());
      }
      const Domain domain = p.domain;
      lm.hidden_ok = [balls, domain](const DesignPoint& x) {
        const auto u = domain.normalize(x).coords;
        for (const auto& [c, r] : balls) {
          if (squared_distance(u, c) <= r * r) return false;
        }
        return true;
      };
    }
    p.levels.push_back(std::move(lm));
  }
  if (p.levels.empty()) throw ConfigError("problem needs at least one level");
  if (j.contains("bridges")) {
    for (const auto& bj : j.at("bridges")) {
      const auto& deg = bj.at("degree");
      p.bridge_degrees.push_back(deg.is_string() && deg.get<std::string>() == "auto" ? -1 : deg.get<int>());
    }
    if (p.bridge_degrees.size() != p.levels.size() - 1) {
      throw ConfigError("bridges has " + std::to_string(p.bridge_degrees.size()) + " entries; a " +
                        std::to_string(p.levels.size()) + "-level hierarchy needs " +
                        std::to_string(p.levels.size() - 1));
    }
  } else {
    p.bridge_degrees.assign(p.levels.size() - 1, -1);
  }
  if (j.contains("optimum")) {
    p.optimum = TrueOptimum{j.at("optimum").at("point").get<DesignPoint>(), j.at("optimum").at("value").get<double>()};
  }
  p.hierarchy().validate(p.domain);
  return p;
}

}  // namespace mfac
