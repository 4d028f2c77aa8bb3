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

// mfac: validate configurations, run and resume campaigns, emit reports.
//
// Exit codes: 0 success, 2 validation failure, 3 campaign failure,
// 4 integrity error, 1 anything else.

#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "mfac/config.hpp"
#include "mfac/driver.hpp"
#include "mfac/error.hpp"

namespace {

namespace fs = std::filesystem;
using namespace mfac;

constexpr int kExitValidation = 2;
constexpr int kExitCampaign = 3;
constexpr int kExitIntegrity = 4;

fs::path default_out() {
  if (const char* env = std::getenv("MFAC_OUTPUT_DIR"); env && *env) return env;
  return "mfac_out";
}

json read_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path.string());
}

void print_summary(const CampaignReport& r, const fs::path& dir, int verbosity) {
  std::cout << "campaign " << r.status << " (" << r.termination << "): " << r.observations.size() << " evaluations, "
            << r.iterations.size() << " iterations\n";
  if (!r.diagnostic.empty()) std::cout << "diagnostic: " << r.diagnostic << "\n";
  if (r.best) {
    std::cout << "best " << json(r.best->point.coords).dump() << " value " << r.best->value << " (predicted "
              << r.best_mean << " +/- " << std::sqrt(r.best_variance) << ")\n";
  }
  if (verbosity > 0) {
    for (const auto& it : r.iterations) {
      std::cout << "  iteration " << it.i << ": T_i=" << it.T_i << " B_i=" << it.B_i << " selected "
                << it.selected.size() << "/" << it.n_candidates << " benefit " << it.benefit << "\n";
    }
  }
  if (!dir.empty()) std::cout << "reports in " << dir.string() << "\n";
}

int finish(const std::optional<CampaignReport>& r, const fs::path& dir, int verbosity) {
  if (!r) return 0;
  print_summary(*r, dir, verbosity);
  return r->status == "failed" ? kExitCampaign : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-fidelity adaptive computing campaigns"};
  app.require_subcommand(1);
  app.fallthrough();
  int verbosity = 0;
  app.add_flag("-v,--verbose", verbosity, "More output (repeatable)");

  fs::path config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::string clock;
  std::optional<int> checkpoint;

  auto* run = app.add_subcommand("run", "Run a campaign from a configuration file");
  run->add_option("-c,--config", config_path, "Configuration file")->required()->check(CLI::ExistingFile);
  run->add_option("-o,--out", out_dir, "Output directory (default: $MFAC_OUTPUT_DIR or ./mfac_out)");
  run->add_option("--seed", seed, "Override campaign.seed");
  run->add_option("--clock", clock, "Override the clock mode")->check(CLI::IsMember({"virtual", "threaded"}));

  auto* resume = app.add_subcommand("resume", "Continue a checkpointed campaign");
  resume->add_option("-o,--out,dir", out_dir, "Campaign directory");
  resume->add_option("--checkpoint", checkpoint, "Resume from checkpoints/checkpoint_NNNN.json");

  auto* report = app.add_subcommand("report", "Rewrite report files from a campaign directory");
  report->add_option("-o,--out,dir", out_dir, "Campaign directory");

  auto* validate = app.add_subcommand("validate", "Check a configuration file");
  validate->add_option("-c,--config,config_file", config_path, "Configuration file")->required();

  auto* list = app.add_subcommand("bench-list", "List built-in benchmark problems");

  CLI11_PARSE(app, argc, argv);
  const fs::path dir = out_dir.empty() ? default_out() : fs::path(out_dir);

  try {
    if (*validate) {
      const json raw = read_config(config_path);
      const auto diagnostics = validate_config(raw, config_path.parent_path());
      if (!diagnostics.empty()) {
        std::cerr << format_diagnostics(diagnostics);
        std::cerr << diagnostics.size() << " problem(s) in " << config_path.string() << "\n";
        return kExitValidation;
      }
      std::cout << config_path.string() << ": ok\n";
      return 0;
    }
    if (*list) {
      for (const auto& name : benchmark_names()) {
        const auto p = benchmark_by_name(name);
        std::cout << name << ": dim " << p.domain.dim() << ", " << p.levels.size() << " level(s), "
                  << (p.direction == Direction::maximize ? "maximize" : "minimize");
        if (p.optimum) std::cout << ", optimum " << p.optimum->value << " at " << json(p.optimum->point.coords).dump();
        std::cout << "\n";
      }
      return 0;
    }
    if (*run) {
      json raw = read_config(config_path);
      const auto diagnostics = validate_config(raw, config_path.parent_path());
      if (!diagnostics.empty()) {
        std::cerr << format_diagnostics(diagnostics);
        return kExitValidation;
      }
      json resolved = resolve_config(raw, config_path.parent_path());
      if (seed) resolved["campaign"]["seed"] = *seed;
      if (!clock.empty()) resolved["orchestrator"]["clock"] = clock;
      RunOptions opts;
      opts.out_dir = dir;
      opts.config_source = resolved;
      const CampaignConfig cfg = campaign_from_json(resolved);
      fs::create_directories(dir);
      // An occupied directory is refused by the driver; leave its files alone.
      if (!fs::exists(dir / "checkpoint.json")) {
        std::ofstream out(dir / "config.json", std::ios::binary | std::ios::trunc);
        out << resolved.dump(2) << "\n";
      }
      return finish(run_campaign(cfg, opts), dir, verbosity);
    }
    if (*resume) return finish(resume_campaign(dir, checkpoint), dir, verbosity);
    if (*report) {
      const auto r = report_campaign(dir);
      print_summary(r, dir, verbosity);
      return r.status == "failed" ? kExitCampaign : 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const CampaignFailed& e) {
    std::cerr << "campaign failed: " << e.what() << "\n";
    return kExitCampaign;
  } catch (const IntegrityError& e) {
    std::cerr << "integrity error: " << e.what() << "\n";
    return kExitIntegrity;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
