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

#include "muonlab/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <limits>
#include <nlohmann/json.hpp>
#include <sstream>

#include "muonlab/errors.hpp"
#include "muonlab/report.hpp"

namespace muonlab {
namespace {

using nlohmann::json;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, ',')) {
    cur = trim(cur);
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

double to_real(const std::string& key, const std::string& v) {
  try {
    const double x = parse_real(trim(v));
    if (!std::isfinite(x)) throw ConfigError(key, "must be finite");
    return x;
  } catch (const InvalidInputError&) {
    throw ConfigError(key, "expected a number, got '" + v + "'");
  }
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  std::uint64_t x = 0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), x);
  if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size()) {
    throw ConfigError(key, "expected a non-negative integer, got '" + v + "'");
  }
  return x;
}

long to_long(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  long x = 0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), x);
  if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size()) {
    throw ConfigError(key, "expected an integer, got '" + v + "'");
  }
  return x;
}

std::size_t to_size(const std::string& key, const std::string& v) {
  return static_cast<std::size_t>(to_u64(key, v));
}

bool to_bool(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  throw ConfigError(key, "expected a boolean, got '" + v + "'");
}

template <class T, class F>
std::vector<T> to_list(const std::string& key, const std::string& v, F&& conv) {
  std::vector<T> out;
  for (const auto& item : split_list(v)) out.push_back(conv(key, item));
  if (out.empty()) throw ConfigError(key, "list must not be empty");
  return out;
}

template <class T, class F>
std::string join(const std::vector<T>& v, F&& fmt) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ",";
    s += fmt(v[i]);
  }
  return s;
}

template <class F>
auto wrap(const std::string& key, F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(key, e.what());
  }
}

struct Key {
  std::function<std::string(const ExperimentConfig&)> get;
  std::function<void(ExperimentConfig&, const std::string&, const std::string&)> set;
};

std::string fmt_size(std::size_t v) { return std::to_string(v); }
std::string fmt_bool(bool v) { return v ? "true" : "false"; }

#define MUONLAB_REAL(member) \
  Key { \
    [](const ExperimentConfig& c) { return format_real(c.member); }, \
        [](ExperimentConfig& c, const std::string& k, const std::string& v) { \
          c.member = to_real(k, v); \
        } \
  }
#define MUONLAB_SIZE(member) \
  Key { \
    [](const ExperimentConfig& c) { return fmt_size(c.member); }, \
        [](ExperimentConfig& c, const std::string& k, const std::string& v) { \
          c.member = to_size(k, v); \
        } \
  }

const std::map<std::string, Key>& key_table() {
  static const std::map<std::string, Key> table = {
      {"kind",
       {[](const ExperimentConfig& c) { return to_string(c.kind); },
        [](ExperimentConfig& c, const std::string& k, const std::string& v) {
          c.kind = wrap(k, [&] { return experiment_kind_from_string(trim(v)); });
        }}},
      {"seed",
       {[](const ExperimentConfig& c) { return std::to_string(c.master_seed); },
        [](ExperimentConfig& c, const std::string& k, const std::string& v) {
          c.master_seed = to_u64(k, v);
        }}},
      {"out",
       {[](const ExperimentConfig& c) { return c.output_dir; },
        [](ExperimentConfig& c, const std::string& k, const std::string& v) {
          if (trim(v).empty()) throw ConfigError(k, "must not be empty");
          c.output_dir = trim(v);
        }}},
      {"jobs",
       {[](const ExperimentConfig& c) { return std::to_string(c.jobs); },
        [](ExperimentConfig& c, const std::string& k, const std::string& v) {
          c.jobs = static_cast<int>(to_long(k, v));
        }}},
      {"optimizers",
       {[](const ExperimentConfig& c) {
          return join(c.optimizers, [](OptimizerKind o) { return to_string(o); });
        },
        [](ExperimentConfig& c, const std::string& k, const std::string& v) {
          c.optimizers = to_list<OptimizerKind>(k, v, [](const std::string& kk, const std::string& s) {
            return wrap(kk, [&] { return optimizer_kind_from_string(s); });
          });
        }}},
      {"muon.eta", MUONLAB_REAL(muon.eta)},
      {"muon.mu", MUONLAB_REAL(muon.mu)},
      {"muon.a", MUONLAB_REAL(muon.coeffs.a)},
      {"muon.b", MUONLAB_REAL(muon.coeffs.b)},
      {"muon.c", MUONLAB_REAL(muon.coeffs.c)},
      {"muon.ns_steps",
       {[](const ExperimentConfig& c) { return std::to_string(c.muon.ns_steps); },
        [](ExperimentConfig& c, const std::string& k, const std::string& v) {
          c.muon.ns_steps = static_cast<int>(to_long(k, v));
        }}},
      {"muon.norm_guard", MUONLAB_REAL(muon.norm_guard)},
      {"muon.weight_decay", MUONLAB_REAL(muon.weight_decay)},
      {"muon.update_scale", MUONLAB_REAL(muon.update_scale)},
      {"adamw.eta", MUONLAB_REAL(adamw.eta)},
      {"adamw.beta1", MUONLAB_REAL(adamw.beta1)},
      {"adamw.beta2", MUONLAB_REAL(adamw.beta2)},
      {"adamw.epsilon", MUONLAB_REAL(adamw.epsilon)},
      {"adamw.weight_decay", MUONLAB_REAL(adamw.weight_decay)},
      {"sweep.dims",
       {[](const ExperimentConfig& c) { return join(c.sweep.dims, fmt_size); },
        [](ExperimentConfig& c, const std::string& k, const std::string& v) {
          c.sweep.dims = to_list<std::size_t>(k, v, to_size);
        }}},
      {"sweep.lambdas",
       {[](const ExperimentConfig& c) { return join(c.sweep.lambdas, format_real); },
        [](ExperimentConfig& c, const std::string& k, const std::string& v) {
          c.sweep.lambdas = to_list<double>(k, v, to_real);
        }}},
      {"sweep.kappas",
       {[](const ExperimentConfig& c) { return join(c.sweep.kappas, format_real); },
        [](ExperimentConfig& c, const std::string& k, const std::string& v) {
          c.sweep.kappas = to_list<double>(k, v, to_real);
        }}},
      {"sweep.noise_modes",
       {[](const ExperimentConfig& c) {
          return join(c.sweep.noise_modes, [](NoiseMode m) { return to_string(m); });
        },
        [](ExperimentConfig& c, const std::string& k, const std::string& v) {
          c.sweep.noise_modes =
              to_list<NoiseMode>(k, v, [](const std::string& kk, const std::string& s) {
                return wrap(kk, [&] { return noise_mode_from_string(s); });
              });
        }}},
      {"sweep.trials", MUONLAB_SIZE(sweep.trials_per_cell)},
      {"sweep.max_steps", MUONLAB_SIZE(sweep.options.max_steps)},
      {"sweep.track_lock",
       {[](const ExperimentConfig& c) { return fmt_bool(c.sweep.options.track_lock); },
        [](ExperimentConfig& c, const std::string& k, const std::string& v) {
          c.sweep.options.track_lock = to_bool(k, v);
        }}},
      {"sweep.lock_threshold", MUONLAB_REAL(sweep.options.lock_threshold)},
      {"saddle.sigma_ortho", MUONLAB_REAL(sweep.base.sigma_ortho)},
      {"saddle.r0", MUONLAB_REAL(sweep.base.r0)},
      {"saddle.heavy_tail_alpha", MUONLAB_REAL(sweep.base.heavy_tail_alpha)},
      {"saddle.heavy_tail_df", MUONLAB_REAL(sweep.base.heavy_tail_df)},
      {"matfac.dim", MUONLAB_SIZE(matfac.dim)},
      {"matfac.rank", MUONLAB_SIZE(matfac.rank)},
      {"matfac.kappa", MUONLAB_REAL(matfac.kappa)},
      {"matfac.sigma_max", MUONLAB_REAL(matfac.sigma_max)},
      {"matfac.active_rank", MUONLAB_SIZE(matfac.active_rank)},
      {"matfac.active_var", MUONLAB_REAL(matfac.active_var)},
      {"matfac.dormant_var", MUONLAB_REAL(matfac.dormant_var)},
      {"matfac.batch", MUONLAB_SIZE(matfac.batch)},
      {"matfac.mask_decay", MUONLAB_REAL(matfac.mask_decay)},
      {"matfac.steps", MUONLAB_SIZE(matfac.steps)},
      {"matfac.record_every", MUONLAB_SIZE(record_every)},
      {"schedule.kind",
       {[](const ExperimentConfig& c) { return to_string(c.matfac.schedule.kind); },
        [](ExperimentConfig& c, const std::string& k, const std::string& v) {
          c.matfac.schedule.kind = wrap(k, [&] { return schedule_kind_from_string(trim(v)); });
        }}},
      {"schedule.hold_fraction", MUONLAB_REAL(matfac.schedule.hold_fraction)},
      {"schedule.floor_fraction", MUONLAB_REAL(matfac.schedule.floor_fraction)},
      {"probe.grid_points", MUONLAB_SIZE(probe.grid_points)},
      {"probe.scale_range", MUONLAB_REAL(probe.scale_range)},
      {"probe.bulk_index",
       {[](const ExperimentConfig& c) { return std::to_string(c.probe.bulk_index); },
        [](ExperimentConfig& c, const std::string& k, const std::string& v) {
          c.probe.bulk_index = to_long(k, v);
        }}},
      {"probe.svd_batches", MUONLAB_SIZE(probe.svd_batches)},
      {"probe.eval_batches", MUONLAB_SIZE(probe.eval_batches)},
      {"probe.optimizer",
       {[](const ExperimentConfig& c) { return to_string(c.probe_optimizer); },
        [](ExperimentConfig& c, const std::string& k, const std::string& v) {
          c.probe_optimizer = wrap(k, [&] { return optimizer_kind_from_string(trim(v)); });
        }}},
      {"probe.checkpoints",
       {[](const ExperimentConfig& c) { return join(c.checkpoints, fmt_size); },
        [](ExperimentConfig& c, const std::string& k, const std::string& v) {
          c.checkpoints = to_list<std::size_t>(k, v, to_size);
        }}},
      {"poly.a", MUONLAB_REAL(poly.coeffs.a)},
      {"poly.b", MUONLAB_REAL(poly.coeffs.b)},
      {"poly.c", MUONLAB_REAL(poly.coeffs.c)},
      {"poly.lo", MUONLAB_REAL(poly.lo)},
      {"poly.hi", MUONLAB_REAL(poly.hi)},
      {"poly.amplification_grid", MUONLAB_SIZE(poly.amplification_grid)},
      {"poly.floor_grid", MUONLAB_SIZE(poly.floor_grid)},
      {"poly.samples", MUONLAB_SIZE(poly.samples)},
      {"poly.perturbation_radius", MUONLAB_REAL(poly.perturbation_radius)},
      {"rmt.concentration_dim", MUONLAB_SIZE(rmt.concentration_dim)},
      {"rmt.concentration_samples", MUONLAB_SIZE(rmt.concentration_samples)},
      {"rmt.dispersion_dims",
       {[](const ExperimentConfig& c) { return join(c.rmt.dispersion_dims, fmt_size); },
        [](ExperimentConfig& c, const std::string& k, const std::string& v) {
          c.rmt.dispersion_dims = to_list<std::size_t>(k, v, to_size);
        }}},
      {"rmt.angle_lambdas",
       {[](const ExperimentConfig& c) { return join(c.rmt.angle_lambdas, format_real); },
        [](ExperimentConfig& c, const std::string& k, const std::string& v) {
          c.rmt.angle_lambdas = to_list<double>(k, v, to_real);
        }}},
      {"rmt.angle_dims",
       {[](const ExperimentConfig& c) { return join(c.rmt.angle_dims, fmt_size); },
        [](ExperimentConfig& c, const std::string& k, const std::string& v) {
          c.rmt.angle_dims = to_list<std::size_t>(k, v, to_size);
        }}},
      {"rmt.angle_trials", MUONLAB_SIZE(rmt.angle_trials)},
      {"rmt.energy_dims",
       {[](const ExperimentConfig& c) { return join(c.rmt.energy_dims, fmt_size); },
        [](ExperimentConfig& c, const std::string& k, const std::string& v) {
          c.rmt.energy_dims = to_list<std::size_t>(k, v, to_size);
        }}},
      {"rmt.energy_samples", MUONLAB_SIZE(rmt.energy_samples)},
  };
  return table;
}

#undef MUONLAB_REAL
#undef MUONLAB_SIZE

void flatten_json(const json& j, const std::string& prefix, KeyValues& out) {
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) {
      flatten_json(v, prefix.empty() ? k : prefix + "." + k, out);
    }
    return;
  }
  auto scalar = [&](const json& v) -> std::string {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number_unsigned()) return std::to_string(v.get<std::uint64_t>());
    if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
    if (v.is_number_float()) return format_real(v.get<double>());
    throw ConfigError(prefix, "unsupported JSON value");
  };
  if (j.is_array()) {
    std::string s;
    for (std::size_t i = 0; i < j.size(); ++i) {
      if (i) s += ",";
      s += scalar(j[i]);
    }
    out.emplace_back(prefix, s);
    return;
  }
  out.emplace_back(prefix, scalar(j));
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::escape_sweep:
      return "escape-sweep";
    case ExperimentKind::matfac:
      return "matfac";
    case ExperimentKind::probe:
      return "probe";
    case ExperimentKind::verify_poly:
      return "verify-poly";
    case ExperimentKind::verify_rmt:
      return "verify-rmt";
  }
  return "escape-sweep";
}

ExperimentKind experiment_kind_from_string(const std::string& name) {
  if (name == "escape-sweep") return ExperimentKind::escape_sweep;
  if (name == "matfac") return ExperimentKind::matfac;
  if (name == "probe") return ExperimentKind::probe;
  if (name == "verify-poly") return ExperimentKind::verify_poly;
  if (name == "verify-rmt") return ExperimentKind::verify_rmt;
  throw DomainError("unknown experiment kind '" + name + "'");
}

SweepGrid ExperimentConfig::sweep_grid() const {
  SweepGrid g = sweep;
  g.master_seed = master_seed;
  g.optimizers.clear();
  for (OptimizerKind k : optimizers) g.optimizers.push_back(optimizer_spec(k));
  return g;
}

OptimizerSpec ExperimentConfig::optimizer_spec(OptimizerKind k) const {
  OptimizerSpec s;
  s.kind = k;
  s.muon = muon;
  s.adamw = adamw;
  return s;
}

FactorizationConfig ExperimentConfig::factorization() const {
  FactorizationConfig f = matfac;
  f.seed = master_seed;
  f.schedule.total_steps = f.steps == 0 ? 1 : f.steps;
  return f;
}

ExperimentConfig default_config(ExperimentKind kind) {
  ExperimentConfig c;
  c.kind = kind;
  c.optimizers = {OptimizerKind::muon, OptimizerKind::adamw};
  if (kind == ExperimentKind::matfac || kind == ExperimentKind::probe) {
    const OptimizerSpec m = default_factorization_optimizer(OptimizerKind::muon);
    c.muon = m.muon;
    c.adamw = m.adamw;
  }
  return c;
}

void ExperimentConfig::validate() const {
  auto check = [](const std::string& key, auto&& f) {
    try {
      f();
    } catch (const ConfigError& e) {
      throw ConfigError(key.empty() ? e.key() : key + "." + e.key(),
                        std::string(e.what()).substr(e.key().size() + 2));
    } catch (const Error& e) {
      throw ConfigError(key, e.what());
    }
  };
  if (jobs < 0) throw ConfigError("jobs", "must be >= 0");
  if (optimizers.empty()) throw ConfigError("optimizers", "must not be empty");
  check("muon", [&] { muon.validate(); });
  check("adamw", [&] { adamw.validate(); });
  switch (kind) {
    case ExperimentKind::escape_sweep: {
      if (sweep.trials_per_cell == 0) throw ConfigError("sweep.trials", "must be >= 1");
      if (sweep.options.max_steps == 0) throw ConfigError("sweep.max_steps", "must be >= 1");
      for (std::size_t d : sweep.dims) {
        for (double l : sweep.lambdas) {
          for (double k : sweep.kappas) {
            SaddleConfig s = sweep.base;
            s.dim = d;
            s.lambda = l;
            s.kappa = k;
            try {
              s.validate();
            } catch (const ConfigError& e) {
              const std::string field = e.key();
              const std::string prefix =
                  field == "dim" ? "sweep.dims"
                  : field == "lambda" ? "sweep.lambdas"
                  : field == "kappa" ? "sweep.kappas"
                                     : "saddle." + field;
              throw ConfigError(prefix, std::string(e.what()).substr(field.size() + 2));
            }
          }
        }
      }
      break;
    }
    case ExperimentKind::matfac:
    case ExperimentKind::probe: {
      check("matfac", [&] { factorization().validate(); });
      if (record_every == 0) throw ConfigError("matfac.record_every", "must be >= 1");
      if (kind == ExperimentKind::probe) {
        check("probe", [&] { probe.validate(); });
        std::size_t prev = 0;
        for (std::size_t c : checkpoints) {
          if (c < prev) throw ConfigError("probe.checkpoints", "must be ascending");
          if (c > matfac.steps) throw ConfigError("probe.checkpoints", "beyond matfac.steps");
          prev = c;
        }
        const std::size_t kmax = std::min(matfac.dim, matfac.rank);
        if (probe.bulk_index >= 0 && static_cast<std::size_t>(probe.bulk_index) >= kmax) {
          throw ConfigError("probe.bulk_index", "must be < min(dim, rank)");
        }
      }
      break;
    }
    case ExperimentKind::verify_poly:
      if (!(poly.lo < poly.hi)) throw ConfigError("poly.lo", "must be < poly.hi");
      if (poly.amplification_grid < 100) {
        throw ConfigError("poly.amplification_grid", "must be >= 100");
      }
      if (poly.floor_grid < 1000) throw ConfigError("poly.floor_grid", "must be >= 1000");
      if (poly.samples == 0) throw ConfigError("poly.samples", "must be >= 1");
      break;
    case ExperimentKind::verify_rmt:
      if (rmt.concentration_samples < 100) {
        throw ConfigError("rmt.concentration_samples", "must be >= 100");
      }
      if (rmt.energy_dims.size() < 2) throw ConfigError("rmt.energy_dims", "need >= 2 entries");
      if (rmt.angle_trials == 0) throw ConfigError("rmt.angle_trials", "must be >= 1");
      break;
  }
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& [k, _] : key_table()) keys.push_back(k);
  return keys;
}

void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  const auto& table = key_table();
  const auto it = table.find(key);
  if (it == table.end()) throw ConfigError(key, "unknown key");
  it->second.set(cfg, key, value);
}

std::string get_config_value(const ExperimentConfig& cfg, const std::string& key) {
  const auto& table = key_table();
  const auto it = table.find(key);
  if (it == table.end()) throw ConfigError(key, "unknown key");
  return it->second.get(cfg);
}

std::string serialize_config(const ExperimentConfig& cfg) {
  std::string out;
  for (const auto& [k, key] : key_table()) out += k + " = " + key.get(cfg) + "\n";
  return out;
}

KeyValues parse_key_values(const std::string& text) {
  KeyValues out;
  std::istringstream in(text);
  std::string line;
  std::string section;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[' && line.back() == ']') {
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("", "line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError("", "line " + std::to_string(lineno) + ": empty key");
    if (!section.empty()) key = section + "." + key;
    out.emplace_back(key, trim(line.substr(eq + 1)));
  }
  return out;
}

KeyValues parse_json_key_values(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError("", std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("", "JSON config must be an object");
  if (j.contains("config") && j["config"].is_object()) j = j["config"];
  KeyValues out;
  flatten_json(j, "", out);
  return out;
}

KeyValues load_config_file(const std::string& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const Error& e) {
    throw ConfigError("config", e.what());
  }
  const std::string t = trim(text);
  if (!t.empty() && t.front() == '{') return parse_json_key_values(text);
  return parse_key_values(text);
}

ExperimentConfig parse_config(const ConfigSources& sources) {
  KeyValues from_file;
  if (sources.file) from_file = load_config_file(*sources.file);
  for (const KeyValues* kv : {static_cast<const KeyValues*>(&from_file), &sources.overrides}) {
    for (const auto& [k, v] : *kv) {
      if (k == "kind" && trim(v) != to_string(sources.kind)) {
        throw ConfigError("kind", "'" + v + "' does not match subcommand " +
                                      to_string(sources.kind));
      }
    }
  }
  ExperimentConfig cfg = default_config(sources.kind);
  if (sources.env_seed && !trim(*sources.env_seed).empty()) {
    try {
      set_config_value(cfg, "seed", *sources.env_seed);
    } catch (const ConfigError& e) {
      throw ConfigError("MUON_LAB_SEED", e.what());
    }
  }
  for (const auto& [k, v] : from_file) set_config_value(cfg, k, v);
  for (const auto& [k, v] : sources.overrides) set_config_value(cfg, k, v);
  cfg.validate();
  return cfg;
}

}  // namespace muonlab
