// Copyright 2026 The muon-lab Authors.
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

// muon_lab: command-line entry point.
//
//   muon_lab escape-sweep --dim 64,128 --lambda 1e-6 --trials 30 --out runs/esc
//   muon_lab matfac --config matfac.cfg --seed 3
//   muon_lab verify-poly
//   muon_lab plot runs/esc

#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "muonlab/config.hpp"
#include "muonlab/errors.hpp"
#include "muonlab/plot.hpp"
#include "muonlab/runner.hpp"

namespace {

using muonlab::ExperimentKind;

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<int> jobs;
  std::vector<std::string> sets;
  std::string dim;
  std::string lambda;
  std::string kappa;
  std::string optimizers;
  std::optional<std::size_t> trials;
  std::optional<std::size_t> steps;
};

void add_common(CLI::App* sub, CommonFlags& f, ExperimentKind kind) {
  sub->add_option("--config", f.config, "Config file (key = value text, JSON, or manifest.json)");
  sub->add_option("--seed", f.seed, "Master seed (overrides file and MUON_LAB_SEED)");
  sub->add_option("--out", f.out, "Output directory");
  sub->add_option("--jobs", f.jobs, "Worker threads (0 = all cores)");
  sub->add_option("--set", f.sets, "Override any config key: --set key=value")->take_all();
  if (kind == ExperimentKind::escape_sweep || kind == ExperimentKind::matfac ||
      kind == ExperimentKind::probe) {
    sub->add_option("--dim", f.dim, "Matrix dimension(s), comma separated for sweeps");
    sub->add_option("--optimizers", f.optimizers, "Comma list of muon, adamw");
  }
  if (kind == ExperimentKind::escape_sweep) {
    sub->add_option("--lambda", f.lambda, "Negative curvature value(s), comma separated");
    sub->add_option("--kappa", f.kappa, "Spike variance ratio(s), comma separated");
    sub->add_option("--trials", f.trials, "Trials per cell");
  }
  if (kind == ExperimentKind::matfac || kind == ExperimentKind::probe) {
    sub->add_option("--kappa", f.kappa, "Target condition number");
    sub->add_option("--steps", f.steps, "Training steps");
  }
}

muonlab::KeyValues overrides(const CommonFlags& f, ExperimentKind kind) {
  muonlab::KeyValues kv;
  const bool sweep = kind == ExperimentKind::escape_sweep;
  if (f.seed) kv.emplace_back("seed", std::to_string(*f.seed));
  if (!f.out.empty()) kv.emplace_back("out", f.out);
  if (f.jobs) kv.emplace_back("jobs", std::to_string(*f.jobs));
  if (!f.dim.empty()) kv.emplace_back(sweep ? "sweep.dims" : "matfac.dim", f.dim);
  if (!f.lambda.empty()) kv.emplace_back("sweep.lambdas", f.lambda);
  if (!f.kappa.empty()) kv.emplace_back(sweep ? "sweep.kappas" : "matfac.kappa", f.kappa);
  if (!f.optimizers.empty()) kv.emplace_back("optimizers", f.optimizers);
  if (f.trials) kv.emplace_back("sweep.trials", std::to_string(*f.trials));
  if (f.steps) kv.emplace_back("matfac.steps", std::to_string(*f.steps));
  for (const auto& s : f.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw muonlab::ConfigError(s, "--set expects key=value");
    kv.emplace_back(s.substr(0, eq), s.substr(eq + 1));
  }
  return kv;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"muon_lab: Muon and AdamW saddle-escape and spectral verification laboratory"};
  app.require_subcommand(0, 1);
  app.set_version_flag("--version", muonlab::kVersion);

  const std::vector<std::pair<std::string, ExperimentKind>> kinds = {
      {"escape-sweep", ExperimentKind::escape_sweep},
      {"matfac", ExperimentKind::matfac},
      {"probe", ExperimentKind::probe},
      {"verify-poly", ExperimentKind::verify_poly},
      {"verify-rmt", ExperimentKind::verify_rmt},
  };
  const std::vector<std::string> descriptions = {
      "Sweep saddle-escape trials over (d, lambda, kappa, optimizer, noise mode)",
      "Run the streaming matrix-factorization task",
      "Scan loss cross-sections of the factorization model at checkpoints",
      "Verify the odd-quintic amplification, floor, invariance and robustness checks",
      "Run the random-matrix Monte-Carlo checks",
  };
  std::vector<CommonFlags> flags(kinds.size());
  std::vector<CLI::App*> subs;
  for (std::size_t i = 0; i < kinds.size(); ++i) {
    CLI::App* sub = app.add_subcommand(kinds[i].first, descriptions[i]);
    add_common(sub, flags[i], kinds[i].second);
    subs.push_back(sub);
  }
  std::string plot_dir;
  CLI::App* plot = app.add_subcommand("plot", "Render SVG plots from a results directory");
  plot->add_option("dir", plot_dir, "Results directory")->required();
  bool list_keys = false;
  app.add_flag("--list-keys", list_keys, "Print every accepted config key and exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return muonlab::kExitError;
  }
  if (list_keys) {
    for (const auto& k : muonlab::config_keys()) std::cout << k << "\n";
    return muonlab::kExitOk;
  }
  if (app.get_subcommands().empty()) {
    std::cerr << app.help();
    return muonlab::kExitError;
  }

  try {
    if (plot->parsed()) {
      const auto files = muonlab::render_plots(plot_dir, std::cerr);
      for (const auto& f : files) std::cout << f << "\n";
      return muonlab::kExitOk;
    }
    for (std::size_t i = 0; i < kinds.size(); ++i) {
      if (!subs[i]->parsed()) continue;
      muonlab::ConfigSources src;
      src.kind = kinds[i].second;
      if (!flags[i].config.empty()) src.file = flags[i].config;
      src.overrides = overrides(flags[i], src.kind);
      if (const char* env = std::getenv("MUON_LAB_SEED")) src.env_seed = env;
      const muonlab::ExperimentConfig cfg = muonlab::parse_config(src);
      const int code = muonlab::run(cfg, std::cout);
      if (code == muonlab::kExitOk) std::cout << "artifacts in " << cfg.output_dir << "\n";
      return code;
    }
  } catch (const muonlab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return muonlab::kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return muonlab::kExitError;
  }
  return muonlab::kExitError;
}
