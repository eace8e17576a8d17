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

#include "muonlab/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <nlohmann/json.hpp>
#include <ostream>
#include <sstream>

#include "muonlab/errors.hpp"
#include "muonlab/factorization.hpp"
#include "muonlab/kernels.hpp"
#include "muonlab/probe.hpp"
#include "muonlab/report.hpp"

namespace muonlab {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Reference values of the default quintic at its critical points.
constexpr double kRhoAtMinimum = 0.6818;  // rho(1.050)
constexpr double kRhoAtMaximum = 1.2024;  // rho(0.554)
constexpr double kCriticalTolerance = 0.001;

std::string fixed(double v, int digits = 6) {
  std::ostringstream s;
  s << std::setprecision(digits) << v;
  return s.str();
}

bool all_passed(const std::vector<CheckResult>& checks) {
  return std::all_of(checks.begin(), checks.end(),
                     [](const CheckResult& c) { return c.passed || c.skipped; });
}

void print_checks(std::ostream& log, const std::string& title,
                  const std::vector<CheckResult>& checks) {
  log << title << "\n";
  for (const auto& c : checks) {
    log << "  " << std::left << std::setw(14) << c.name << std::setw(6)
        << (c.skipped ? "SKIP" : c.passed ? "PASS" : "FAIL") << c.detail << "\n";
  }
}

json checks_json(const std::vector<CheckResult>& checks) {
  json arr = json::array();
  for (const auto& c : checks) {
    arr.push_back({{"name", c.name}, {"passed", c.passed}, {"skipped", c.skipped},
                   {"detail", c.detail}});
  }
  return arr;
}

std::string write_csv(const fs::path& path, const std::string& content) {
  write_file(path.string(), content);
  return path.filename().string();
}

struct Artifacts {
  std::vector<std::string> files;
  json summary = json::object();
};

Artifacts run_escape(const ExperimentConfig& cfg, std::ostream& log) {
  const SweepGrid grid = cfg.sweep_grid();
  log << "escape-sweep: " << grid.dims.size() * grid.lambdas.size() * grid.kappas.size() *
                                 grid.optimizers.size() * grid.noise_modes.size()
      << " cells x " << grid.trials_per_cell << " trials\n";
  const SweepResult res = run_sweep(grid);
  const fs::path out(cfg.output_dir);
  Artifacts a;
  std::ostringstream trials, summary;
  write_trials_csv(trials, res.trials);
  write_reports_csv(summary, res.reports);
  a.files.push_back(write_csv(out / "trials.csv", trials.str()));
  a.files.push_back(write_csv(out / "summary.csv", summary.str()));
  for (const auto& r : res.reports) {
    log << "  " << std::left << std::setw(6) << to_string(r.optimizer) << " d=" << std::setw(5)
        << r.dim << " lambda=" << std::setw(8) << fixed(r.lambda) << " kappa=" << std::setw(8)
        << fixed(r.kappa) << " " << std::setw(11) << to_string(r.noise_mode)
        << " mean=" << std::setw(10) << fixed(r.mean_steps) << " std=" << std::setw(10)
        << fixed(r.std_steps) << " escaped=" << fixed(r.escape_fraction) << "\n";
  }
  std::size_t failed = 0;
  for (const auto& t : res.trials) failed += t.error.empty() ? 0 : 1;
  a.summary["failed_trials"] = failed;
  return a;
}

Artifacts run_matfac(const ExperimentConfig& cfg, std::ostream& log) {
  const FactorizationConfig fc = cfg.factorization();
  const fs::path out(cfg.output_dir);
  Artifacts a;
  for (OptimizerKind k : cfg.optimizers) {
    log << "matfac: " << to_string(k) << " d=" << fc.dim << " R=" << fc.rank
        << " steps=" << fc.steps << "\n";
    const RunTrace trace = run_factorization(fc, cfg.optimizer_spec(k), cfg.record_every);
    std::ostringstream csv;
    write_trace_csv(csv, trace);
    a.files.push_back(write_csv(out / ("trace_" + to_string(k) + ".csv"), csv.str()));
    const TracePoint& last = trace.points.back();
    log << "  final step " << last.step << " loss " << fixed(last.loss) << " effective rank "
        << fixed(last.effective_rank) << (trace.diverged ? " (diverged)" : "") << "\n";
    a.summary[to_string(k)] = {{"final_step", last.step},
                               {"final_loss", last.loss},
                               {"final_effective_rank", last.effective_rank},
                               {"diverged", trace.diverged}};
  }
  return a;
}

Artifacts run_probe(const ExperimentConfig& cfg, std::ostream& log) {
  FactorizationRun run(cfg.factorization(), cfg.optimizer_spec(cfg.probe_optimizer));
  const fs::path out(cfg.output_dir);
  Artifacts a;
  std::ostringstream spikes;
  CsvWriter sw(spikes, {"step", "spike_range", "center_loss", "effective_rank"});
  const auto results = probe_at_checkpoints(run, cfg.checkpoints, cfg.probe);
  json list = json::array();
  for (const auto& r : results) {
    const std::string stem = "surface_step" + std::to_string(r.step);
    std::ostringstream csv;
    write_surface_csv(csv, r.surface);
    a.files.push_back(write_csv(out / (stem + ".csv"), csv.str()));
    const json side = {{"step", r.step},
                       {"spike_range", r.surface.spike_range},
                       {"center_loss", r.surface.center_loss},
                       {"effective_rank", r.effective_rank},
                       {"normalized_entropy", r.normalized_entropy},
                       {"missing_points", r.surface.missing}};
    write_file((out / (stem + ".json")).string(), side.dump(2) + "\n");
    a.files.push_back(stem + ".json");
    sw.row({std::to_string(r.step), format_real(r.surface.spike_range),
            format_real(r.surface.center_loss), format_real(r.effective_rank)});
    log << "probe: step " << r.step << " spike_range " << fixed(r.surface.spike_range)
        << " center_loss " << fixed(r.surface.center_loss) << " effective_rank "
        << fixed(r.effective_rank) << "\n";
    list.push_back(side);
  }
  a.files.push_back(write_csv(out / "spike_ranges.csv", spikes.str()));
  a.summary["checkpoints"] = list;
  return a;
}

json poly_json(const PolyVerification& v) {
  json j;
  j["amplification"] = {{"delta0", v.amplification.delta0},
                        {"worst_ratio", v.amplification.worst_ratio},
                        {"worst_x", v.amplification.worst_x},
                        {"required", v.amplification.required}};
  j["floor"] = {{"min_value", v.floor.min_value},
                {"argmin", v.floor.argmin},
                {"threshold", v.floor.threshold},
                {"rho5_at_0.03", v.floor_at_003}};
  j["invariance"] = {{"lo", v.invariance.interval_lo},
                     {"hi", v.invariance.interval_hi},
                     {"image_lo", v.invariance.image_lo},
                     {"image_hi", v.invariance.image_hi},
                     {"invariant", v.invariance.invariant}};
  j["critical_points"] = v.critical_points;
  j["critical_values"] = v.critical_values;
  if (v.has_robustness) {
    j["robustness"] = {{"radius", v.robustness.radius},
                       {"margin", v.robustness.margin},
                       {"lipschitz", v.robustness.lipschitz},
                       {"certified", v.robustness.certification.certified},
                       {"samples", v.robustness.certification.samples}};
  }
  j["perturbation"] = {{"radius", v.perturbation.radius},
                       {"samples", v.perturbation.samples},
                       {"certified", v.perturbation.certified},
                       {"nominal_invariant", v.perturbation.nominal_invariant},
                       {"worst_image_lo", v.perturbation.worst_image_lo}};
  j["checks"] = checks_json(v.checks);
  return j;
}

Artifacts run_verify_poly(const ExperimentConfig& cfg, std::ostream& log, bool& ok) {
  const PolyVerification v = verify_poly(cfg.poly);
  print_checks(log, "verify-poly", v.checks);
  ok = v.passed();
  Artifacts a;
  write_file((fs::path(cfg.output_dir) / "poly.json").string(), poly_json(v).dump(2) + "\n");
  a.files.push_back("poly.json");
  a.summary["passed"] = ok;
  return a;
}

json concentration_json(const ConcentrationReport& r) {
  return {{"dim", r.dim},         {"n_samples", r.n_samples}, {"mean_ct", r.mean_ct},
          {"std_ct", r.std_ct},   {"min_ct", r.min_ct},       {"max_ct", r.max_ct}};
}

json angle_json(const AngleReport& r) {
  return {{"lambda_s", r.lambda_s},
          {"noise_scale", r.noise_scale},
          {"dim", r.dim},
          {"trials", r.trials},
          {"mean_sin_angle", r.mean_sin_angle},
          {"std_sin_angle", r.std_sin_angle}};
}

Artifacts run_verify_rmt(const ExperimentConfig& cfg, std::ostream& log, bool& ok) {
  const RmtVerification v = verify_rmt(cfg.rmt, cfg.master_seed);
  print_checks(log, "verify-rmt", v.checks);
  ok = v.passed();
  json j;
  j["concentration"] = concentration_json(v.concentration);
  json disp = json::array();
  for (const auto& rep : v.dispersion) {
    json row = json::array();
    for (const auto& r : rep) row.push_back(concentration_json(r));
    disp.push_back(row);
  }
  j["dispersion"] = disp;
  j["angles_by_lambda"] = json::array();
  for (const auto& r : v.angles_by_lambda) j["angles_by_lambda"].push_back(angle_json(r));
  j["angles_by_dim"] = json::array();
  for (const auto& r : v.angles_by_dim) j["angles_by_dim"].push_back(angle_json(r));
  json energy = json::array();
  for (const auto& r : v.energy.rows) {
    energy.push_back({{"dim", r.dim},
                      {"D", r.total_dim},
                      {"mean_energy", r.mean_energy},
                      {"mean_projected", r.mean_projected}});
  }
  j["energy"] = {{"rows", energy}, {"slope", v.energy.slope}};
  j["checks"] = checks_json(v.checks);
  Artifacts a;
  write_file((fs::path(cfg.output_dir) / "rmt.json").string(), j.dump(2) + "\n");
  a.files.push_back("rmt.json");
  a.summary["passed"] = ok;
  return a;
}

}  // namespace

bool PolyVerification::passed() const { return all_passed(checks); }
bool RmtVerification::passed() const { return all_passed(checks); }

PolyVerification verify_poly(const PolyOptions& o) {
  PolyVerification v;
  const PolyCoeffs& p = o.coeffs;
  v.amplification = verify_amplification(p, o.amplification_grid);
  v.checks.push_back({"amplification", v.amplification.passed, false,
                      "min rho5(x)/x = " + fixed(v.amplification.worst_ratio) + " on (1e-12, " +
                          fixed(v.amplification.delta0) + "], required >= 483"});
  v.floor = verify_floor(p, o.floor_grid);
  try {
    v.floor_at_003 = rho_iter(0.03, 5, p);
  } catch (const OverflowError&) {
    v.floor_at_003 = std::nan("");
  }
  v.checks.push_back({"floor", v.floor.passed, false,
                      "min rho5 on [1e-4, 0.6] = " + fixed(v.floor.min_value) + " at x = " +
                          fixed(v.floor.argmin) + ", required > 0.03"});
  v.invariance = verify_invariance(p, o.lo, o.hi);
  v.checks.push_back({"invariance", v.invariance.invariant, false,
                      "rho([" + fixed(o.lo) + ", " + fixed(o.hi) + "]) = [" +
                          fixed(v.invariance.image_lo) + ", " + fixed(v.invariance.image_hi) +
                          "]"});
  v.critical_points = critical_points(p);
  for (double x : v.critical_points) v.critical_values.push_back(rho(x, p));
  if (p == PolyCoeffs{} && v.critical_points.size() == 2) {
    const double at_min = rho(1.050, p);
    const double at_max = rho(0.554, p);
    const bool ok = std::abs(at_min - kRhoAtMinimum) <= kCriticalTolerance &&
                    std::abs(at_max - kRhoAtMaximum) <= kCriticalTolerance;
    v.checks.push_back({"critical", ok, false,
                        "rho(1.050) = " + fixed(at_min) + ", rho(0.554) = " + fixed(at_max) +
                            "; critical points " + fixed(v.critical_points[0]) + ", " +
                            fixed(v.critical_points[1])});
  } else {
    v.checks.push_back({"critical", false, true, "reference values apply to default coefficients"});
  }
  if (v.invariance.invariant) {
    v.robustness = robustness_radius(p, o.lo, o.hi, o.samples);
    v.has_robustness = true;
  }
  v.perturbation = certify_perturbations(p, o.lo, o.hi, o.perturbation_radius, o.samples);
  std::string detail = "radius " + fixed(o.perturbation_radius) + ": " +
                       std::to_string(v.perturbation.certified) + "/" +
                       std::to_string(v.perturbation.samples) + " certified (" +
                       std::to_string(v.perturbation.nominal_invariant) +
                       " keep the nominal interval)";
  if (v.has_robustness) {
    detail += "; gamma/M = " + fixed(v.robustness.margin) + "/" + fixed(v.robustness.lipschitz) +
              " = " + fixed(v.robustness.radius);
  }
  v.checks.push_back(
      {"robustness", v.invariance.invariant && v.perturbation.all_certified(), false, detail});
  return v;
}

RmtVerification verify_rmt(const RmtOptions& o, std::uint64_t seed) {
  RmtVerification v;
  v.concentration =
      concentration_experiment(o.concentration_dim, o.concentration_samples, RmtNoise::gaussian,
                               derive_seed({seed, 1}));
  v.checks.push_back({"concentration", std::abs(v.concentration.mean_ct - 1.0) <= 0.02, false,
                      "mean C = " + fixed(v.concentration.mean_ct) + " at d = " +
                          std::to_string(o.concentration_dim) + ", required 1 +- 0.02"});

  constexpr int kRepeats = 5;
  int tighter = 0;
  for (int r = 0; r < kRepeats; ++r) {
    std::vector<ConcentrationReport> row;
    for (std::size_t d : o.dispersion_dims) {
      row.push_back(concentration_experiment(
          d, 200, RmtNoise::gaussian, derive_seed({seed, 2, static_cast<std::uint64_t>(r), d})));
    }
    bool dec = true;
    for (std::size_t i = 1; i < row.size(); ++i) dec = dec && row[i].std_ct < row[i - 1].std_ct;
    tighter += dec ? 1 : 0;
    v.dispersion.push_back(std::move(row));
  }
  v.checks.push_back({"dispersion", 2 * tighter > kRepeats, false,
                      std::to_string(tighter) + "/" + std::to_string(kRepeats) +
                          " repeats with std C decreasing in d"});

  std::vector<double> lambdas = o.angle_lambdas;
  std::sort(lambdas.begin(), lambdas.end());
  const std::size_t mid_dim = o.angle_dims[o.angle_dims.size() / 2];
  bool monotone = true;
  std::string mono_detail;
  for (double l : lambdas) {
    v.angles_by_lambda.push_back(
        subspace_angle_experiment(l, mid_dim, o.angle_trials, derive_seed({seed, 3, mid_dim})));
    const auto& cur = v.angles_by_lambda.back();
    if (v.angles_by_lambda.size() > 1) {
      monotone = monotone &&
                 cur.mean_sin_angle < v.angles_by_lambda[v.angles_by_lambda.size() - 2].mean_sin_angle;
    }
    mono_detail += (mono_detail.empty() ? "" : ", ") + fixed(l) + ":" + fixed(cur.mean_sin_angle, 4);
  }
  v.checks.push_back({"angle_lambda", monotone, false,
                      "mean sin at d = " + std::to_string(mid_dim) + " (lambda:sin) " + mono_detail});

  const double top = lambdas.back();
  double lo = 1.0, hi = 0.0;
  std::string dim_detail;
  for (std::size_t d : o.angle_dims) {
    v.angles_by_dim.push_back(
        subspace_angle_experiment(top, d, o.angle_trials, derive_seed({seed, 4, d})));
    const double s = v.angles_by_dim.back().mean_sin_angle;
    lo = std::min(lo, s);
    hi = std::max(hi, s);
    dim_detail += (dim_detail.empty() ? "" : ", ") + std::to_string(d) + ":" + fixed(s, 4);
  }
  v.checks.push_back({"angle_dim", lo > 0.0 && hi / lo < 2.0, false,
                      "mean sin at lambda = " + fixed(top) + " (d:sin) " + dim_detail +
                          ", max/min = " + fixed(lo > 0.0 ? hi / lo : INFINITY, 4)});

  v.energy = energy_scaling_experiment(o.energy_dims, o.energy_samples, derive_seed({seed, 5}));
  v.checks.push_back({"energy_slope", v.energy.slope >= 0.98 && v.energy.slope <= 1.02, false,
                      "log-log slope " + fixed(v.energy.slope) + ", required [0.98, 1.02]"});
  return v;
}

int run(const ExperimentConfig& cfg, std::ostream& log) {
  cfg.validate();
  if (cfg.jobs > 0) set_num_threads(cfg.jobs);
  const fs::path out(cfg.output_dir);
  fs::create_directories(out);
  write_file((out / "config.txt").string(), serialize_config(cfg));

  const auto start = std::chrono::steady_clock::now();
  Artifacts a;
  bool verified = true;
  std::string error;
  try {
    switch (cfg.kind) {
      case ExperimentKind::escape_sweep:
        a = run_escape(cfg, log);
        break;
      case ExperimentKind::matfac:
        a = run_matfac(cfg, log);
        break;
      case ExperimentKind::probe:
        a = run_probe(cfg, log);
        break;
      case ExperimentKind::verify_poly:
        a = run_verify_poly(cfg, log, verified);
        break;
      case ExperimentKind::verify_rmt:
        a = run_verify_rmt(cfg, log, verified);
        break;
    }
  } catch (const std::exception& e) {
    error = e.what();
  }
  const double wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();

  json flat = json::object();
  for (const auto& k : config_keys()) flat[k] = get_config_value(cfg, k);
  json manifest = {{"tool", "muon-lab"},
                   {"version", kVersion},
                   {"compiler", __VERSION__},
                   {"kind", to_string(cfg.kind)},
                   {"seed", cfg.master_seed},
                   {"threads", num_threads()},
                   {"wall_time_ms", wall_ms},
                   {"config", flat},
                   {"outputs", a.files},
                   {"summary", a.summary}};
  if (!error.empty()) manifest["error"] = error;
  write_file((out / "manifest.json").string(), manifest.dump(2) + "\n");

  if (!error.empty()) {
    log << "error: " << error << "\n";
    return kExitError;
  }
  return verified ? kExitOk : kExitVerificationFailed;
}

}  // namespace muonlab
