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

#include "mfac/config.hpp"
#include "mfac/error.hpp"
#include "support.hpp"

using namespace mfac;
namespace fs = std::filesystem;

namespace {

const char* kReportFiles[] = {"report.json", "summary.json", "observations.csv", "iterations.csv", "ledger.csv",
                              "surface_grid.csv"};

json forrester_source(std::uint64_t seed = 1) {
  json j = json::parse(R"({
    "schema_version": 1,
    "problem": {"benchmark": "forrester"},
    "campaign": {"n_init": 6, "n_anchor": 2, "iterations": 3, "budget": {"walltime": 1000, "resource": 60},
                 "heuristic": "proportional_steps", "max_candidates_per_level": 2},
    "orchestrator": {"queues": [{"name": "low"}, {"name": "high"}],
                     "workers": [{"id": "lf", "queues": ["low"], "count": 2}, {"id": "hf", "queues": ["high"]}]},
    "acquisition": {"starts": 8, "evals_per_start": 60},
    "report": {"surface_points_per_dim": 11}
  })");
  j["campaign"]["seed"] = seed;
  return j;
}

RunOptions to_dir(const fs::path& dir, const json& source) {
  RunOptions o;
  o.out_dir = dir;
  o.config_source = source;
  return o;
}

std::map<std::string, std::string> report_files(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const char* f : kReportFiles) out[f] = testing::slurp(dir / f);
  return out;
}

}  // namespace

TEST_CASE("monitoring grid shapes") {
  const auto g1 = monitoring_grid(1);
  REQUIRE(g1.size() == 100);
  CHECK(g1.front()[0] == 0.005);
  CHECK(g1.back()[0] == doctest::Approx(0.995));
  const auto g2 = monitoring_grid(2);
  REQUIRE(g2.size() == 100);
  CHECK(g2[0] == std::vector<double>{0.05, 0.05});
  CHECK(monitoring_grid(3).size() == 100);
  CHECK(monitoring_grid(3)[0].size() == 3);
}

TEST_CASE("campaigns are deterministic given the seed") {
  const auto cfg = campaign_from_json(forrester_source());
  const auto a = run_campaign(cfg);
  const auto b = run_campaign(cfg);
  REQUIRE(a);
  REQUIRE(b);
  CHECK(report_json(*a).dump() == report_json(*b).dump());
  CHECK(a->status == "completed");
  const auto c = run_campaign(campaign_from_json(forrester_source(2)));
  CHECK(report_json(*c).dump() != report_json(*a).dump());
}

TEST_CASE("the budget ledger is a consistent running account") {
  const auto cfg = campaign_from_json(forrester_source());
  const auto r = run_campaign(cfg);
  REQUIRE(r);
  REQUIRE(r->ledger.size() == r->iterations.size() + 1);
  CHECK(r->ledger[0].kind == "init");
  CHECK(r->ledger[0].T_before == cfg.T);
  CHECK(r->ledger[0].B_before == cfg.B);
  double spent = 0.0;
  for (std::size_t k = 0; k < r->ledger.size(); ++k) {
    const auto& e = r->ledger[k];
    CHECK(e.step == static_cast<int>(k));
    CHECK(e.T_after == e.T_before - e.T_charge);
    CHECK(e.B_after == e.B_before - e.B_charge);
    if (k > 0) {
      CHECK(e.T_before == r->ledger[k - 1].T_after);
      CHECK(e.B_before == r->ledger[k - 1].B_after);
      const auto& it = r->iterations[k - 1];
      CHECK(it.T_i == e.T_charge);
      CHECK(it.B_i == e.B_charge);
      // The selected batch fits the iteration's allowance.
      CHECK(it.planned_cost <= it.B_i + 1e-12);
      CHECK(it.planned_makespan <= it.T_i + 1e-12);
    }
    spent += e.B_charge;
  }
  CHECK(r->ledger.back().B_after == doctest::Approx(cfg.B - spent));
  // Actual spend never exceeds the budget.
  double actual = 0.0;
  for (const auto& e : r->observations) actual += cfg.problem.levels[static_cast<std::size_t>(e.observation.level)].cost.base_cost;
  CHECK(actual <= cfg.B);
}

TEST_CASE("observations carry origins and the best top-level value") {
  const auto r = run_campaign(campaign_from_json(forrester_source()));
  REQUIRE(r);
  int lhs = 0, anchors = 0;
  for (const auto& e : r->observations) {
    lhs += e.origin == "lhs";
    anchors += e.origin == "anchor";
    if (e.origin != "acquired") CHECK(e.iteration == 0);
  }
  CHECK(lhs == 6);
  CHECK(anchors == 2);
  REQUIRE(r->best);
  CHECK(r->best->level == 1);
  for (const auto& e : r->observations) {
    if (e.observation.level == 1 && e.observation.feasible) CHECK(e.observation.value >= r->best->value);
  }
  CHECK(r->best->value == forrester_high(r->best->point.coords[0]));
  CHECK(r->surface.size() == 2 * 11);
}

TEST_CASE("report files are written and rebuilt identically") {
  testing::TempDir dir("driver_report");
  const json src = forrester_source();
  const auto r = run_campaign(campaign_from_json(src), to_dir(dir.path(), src));
  REQUIRE(r);
  const auto files = report_files(dir.path());
  for (const auto& [name, text] : files) {
    CAPTURE(name);
    CHECK_FALSE(text.empty());
  }
  CHECK(json::parse(files.at("report.json")) == report_json(*r));
  const std::string& ledger = files.at("ledger.csv");
  CHECK(ledger.rfind("step,kind,T_before,B_before,T_charge,B_charge,T_after,B_after,terminated\r\n", 0) == 0);
  CHECK(std::count(ledger.begin(), ledger.end(), '\n') == static_cast<long>(r->ledger.size() + 1));
  CHECK(ledger.find("\n") == ledger.find("\r\n") + 1);
  for (const char* f : kReportFiles) fs::remove(dir.path() / f);
  report_campaign(dir.path());
  CHECK(report_files(dir.path()) == files);
  CHECK(fs::exists(dir.path() / "checkpoints/checkpoint_0000.json"));
  // A second run into the same directory is refused.
  CHECK_THROWS_AS(run_campaign(campaign_from_json(src), to_dir(dir.path(), src)), ConfigError);
}

TEST_CASE("halting and resuming reproduces the uninterrupted run") {
  const json src = forrester_source(4);
  const auto cfg = campaign_from_json(src);
  testing::TempDir ref("driver_ref");
  REQUIRE(run_campaign(cfg, to_dir(ref.path(), src)));
  const auto expected = report_files(ref.path());
  for (bool mid : {false, true}) {
    for (int k : {0, 2}) {
      CAPTURE(mid);
      CAPTURE(k);
      testing::TempDir dir("driver_halt");
      RunOptions o = to_dir(dir.path(), src);
      o.halt = HaltPoint{k, mid};
      CHECK_FALSE(run_campaign(cfg, o));
      CHECK_FALSE(fs::exists(dir.path() / "report.json"));
      REQUIRE(resume_campaign(dir.path()));
      CHECK(report_files(dir.path()) == expected);
      CHECK(testing::slurp(dir.path() / "journal.jsonl") == testing::slurp(ref.path() / "journal.jsonl"));
    }
  }
  // Resuming from an earlier numbered checkpoint also converges.
  testing::TempDir dir("driver_rewind");
  REQUIRE(run_campaign(cfg, to_dir(dir.path(), src)));
  REQUIRE(resume_campaign(dir.path(), 1));
  CHECK(report_files(dir.path()) == expected);
}

TEST_CASE("damaged campaign directories raise IntegrityError") {
  testing::TempDir empty("driver_empty");
  CHECK_THROWS_AS(resume_campaign(empty.path()), IntegrityError);
  CHECK_THROWS_AS(report_campaign(empty.path()), IntegrityError);

  testing::TempDir dir("driver_damage");
  const json src = forrester_source();
  RunOptions o = to_dir(dir.path(), src);
  o.halt = HaltPoint{1, false};
  run_campaign(campaign_from_json(src), o);
  const std::string journal = testing::slurp(dir.path() / "journal.jsonl");
  fs::resize_file(dir.path() / "journal.jsonl", journal.size() / 2);
  CHECK_THROWS_AS(resume_campaign(dir.path()), IntegrityError);
  {
    std::ofstream out(dir.path() / "checkpoint.json", std::ios::trunc);
    out << "{\"format\": \"mfac-checkpoint\", ";
  }
  CHECK_THROWS_AS(resume_campaign(dir.path()), IntegrityError);
  CHECK_THROWS_AS(resume_campaign(dir.path(), 7), IntegrityError);
}

TEST_CASE("runs with an output directory need their config source") {
  testing::TempDir dir("driver_nosource");
  RunOptions o;
  o.out_dir = dir.path();
  CHECK_THROWS_AS(run_campaign(campaign_from_json(forrester_source()), o), InvalidArgument);
}

TEST_CASE("an initial design that is entirely infeasible fails the campaign") {
  json src = forrester_source();
  src["problem"] = json::parse(R"({"inline": {
    "domain": {"lower": [0.0], "upper": [1.0]},
    "levels": [{"name": "low", "objective": {"kind": "polynomial", "degree": 1, "coeffs": [0.0, 1.0]},
                "cost": {"base_cost": 1, "walltime": 1},
                "hidden_infeasible": [{"center": [0.5], "radius": 2.0}]},
               {"name": "high", "objective": {"kind": "polynomial", "degree": 1, "coeffs": [0.0, 2.0]},
                "cost": {"base_cost": 10, "walltime": 10}}]}})");
  const auto r = run_campaign(campaign_from_json(src));
  REQUIRE(r);
  CHECK(r->status == "failed");
  CHECK(r->diagnostic.find("infeasible") != std::string::npos);
  CHECK(r->iterations.empty());
  CHECK_FALSE(r->best);
}

TEST_CASE("an initial design beyond the budget is a config error") {
  json src = forrester_source();
  src["campaign"]["budget"]["resource"] = 3;
  CHECK_THROWS_AS(run_campaign(campaign_from_json(src)), ConfigError);
}

TEST_CASE("single-level EH campaign spends one evaluation per iteration") {
  const json src = json::parse(testing::slurp(fs::path(MFAC_SOURCE_DIR) / "configs/eh_analogue.json"));
  auto cfg = campaign_from_json(src);
  cfg.acq_starts = 8;
  cfg.acq_evals = 80;
  cfg.surface_points_per_dim = 5;
  const auto r = run_campaign(cfg);
  REQUIRE(r);
  CHECK(r->observations.size() == 10);
  CHECK(r->iterations.size() == 7);
  CHECK(r->ledger.size() == 8);
  for (const auto& it : r->iterations) CHECK(it.selected.size() == 1);
  CHECK(r->termination == "iteration cap reached");
  CHECK(r->surface.size() == 25);
}

TEST_CASE("threaded clock runs the same loop") {
  json src = forrester_source();
  src["orchestrator"]["clock"] = "threaded";
  src["orchestrator"]["seconds_per_time_unit"] = 1e-4;
  src["campaign"]["iterations"] = 1;
  const auto r = run_campaign(campaign_from_json(src));
  REQUIRE(r);
  CHECK(r->status == "completed");
  CHECK(r->iterations.size() == 1);
  for (const auto& it : r->iterations) CHECK(it.unresolved.empty());
}
