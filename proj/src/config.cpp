#include "spinwalk/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace spinwalk {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

[[noreturn]] void bad_value(int line, const std::string& key) {
  throw ParseError("line " + std::to_string(line) + ": invalid value for '" + key + "'");
}

double parse_double(const std::string& v, int line, const std::string& key) {
  double out = 0.0;
  const char* first = v.data();
  const char* last = v.data() + v.size();
  const auto r = std::from_chars(first, last, out);
  if (r.ec != std::errc() || r.ptr != last || !std::isfinite(out)) bad_value(line, key);
  return out;
}

long long parse_int(const std::string& v, int line, const std::string& key) {
  long long out = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size()) bad_value(line, key);
  return out;
}

std::uint64_t parse_u64(const std::string& v, int line, const std::string& key) {
  std::uint64_t out = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size()) bad_value(line, key);
  return out;
}

bool parse_bool(const std::string& v, int line, const std::string& key) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  bad_value(line, key);
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> parts;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) parts.push_back(trim(item));
  return parts;
}

Engine parse_engine(const std::string& v, int line) {
  try {
    return engine_from_string(v);
  } catch (const ValidationError&) {
    bad_value(line, "engine");
  }
}

Experiment parse_experiment(const std::string& v, int line) {
  try {
    return experiment_from_string(v);
  } catch (const ValidationError&) {
    bad_value(line, "experiment");
  }
}

bool compatible(Engine e, Experiment x) {
  switch (x) {
    case Experiment::distribution:
    case Experiment::variance_series:
      return true;
    case Experiment::ipr_scan:
    case Experiment::spectrum:
      return e == Engine::sector;
    case Experiment::entropy_series:
    case Experiment::spin_textures:
    case Experiment::field_perturbation:
    case Experiment::entropy_profile:
      return e != Engine::sector;
    case Experiment::volume_law:
      return e == Engine::exact;
  }
  return false;
}

std::vector<int> default_snapshots(Experiment x, int steps) {
  switch (x) {
    case Experiment::variance_series:
    case Experiment::entropy_series:
    case Experiment::field_perturbation: {
      std::vector<int> all(static_cast<std::size_t>(steps) + 1);
      for (int t = 0; t <= steps; ++t) all[static_cast<std::size_t>(t)] = t;
      return all;
    }
    case Experiment::volume_law: {
      // ~50 log-spaced times; saturation plateaus need no denser sampling
      std::set<int> ts{1, steps};
      for (int k = 0; k < 50; ++k)
        ts.insert(std::max(1, static_cast<int>(std::llround(
                                 std::pow(static_cast<double>(steps), k / 49.0)))));
      return {ts.begin(), ts.end()};
    }
    default:
      return {steps};
  }
}

}  // namespace

Engine engine_from_string(const std::string& s) {
  if (s == "sector") return Engine::sector;
  if (s == "mps") return Engine::mps;
  if (s == "exact") return Engine::exact;
  throw ValidationError("unknown engine '" + s + "'");
}

Experiment experiment_from_string(const std::string& s) {
  if (s == "distribution") return Experiment::distribution;
  if (s == "variance_series") return Experiment::variance_series;
  if (s == "ipr_scan") return Experiment::ipr_scan;
  if (s == "spectrum") return Experiment::spectrum;
  if (s == "entropy_series") return Experiment::entropy_series;
  if (s == "spin_textures") return Experiment::spin_textures;
  if (s == "field_perturbation") return Experiment::field_perturbation;
  if (s == "entropy_profile") return Experiment::entropy_profile;
  if (s == "volume_law") return Experiment::volume_law;
  throw ValidationError("unknown experiment '" + s + "'");
}

const char* to_string(Engine e) {
  switch (e) {
    case Engine::sector: return "sector";
    case Engine::mps: return "mps";
    case Engine::exact: return "exact";
  }
  return "?";
}

const char* to_string(Experiment x) {
  switch (x) {
    case Experiment::distribution: return "distribution";
    case Experiment::variance_series: return "variance_series";
    case Experiment::ipr_scan: return "ipr_scan";
    case Experiment::spectrum: return "spectrum";
    case Experiment::entropy_series: return "entropy_series";
    case Experiment::spin_textures: return "spin_textures";
    case Experiment::field_perturbation: return "field_perturbation";
    case Experiment::entropy_profile: return "entropy_profile";
    case Experiment::volume_law: return "volume_law";
  }
  return "?";
}

ExperimentConfig parse_config(const std::string& text, const ConfigOverrides& over) {
  ExperimentConfig cfg;
  cfg.walk.steps = 400;
  bool n_sites_given = false;
  std::set<std::string> seen;

  std::stringstream ss(text);
  std::string raw;
  int line = 0;
  while (std::getline(ss, raw)) {
    ++line;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string l = trim(raw);
    if (l.empty()) continue;
    const auto eq = l.find('=');
    if (eq == std::string::npos)
      throw ParseError("line " + std::to_string(line) + ": expected key = value");
    const std::string key = trim(l.substr(0, eq));
    const std::string val = trim(l.substr(eq + 1));
    if (key.empty() || val.empty())
      throw ParseError("line " + std::to_string(line) + ": expected key = value");
    if (!seen.insert(key).second)
      throw ParseError("line " + std::to_string(line) + ": duplicate key '" + key + "'");

    if (key == "engine") {
      cfg.engine = parse_engine(val, line);
    } else if (key == "experiment") {
      cfg.experiment = parse_experiment(val, line);
    } else if (key == "n_sites") {
      cfg.walk.n_sites = static_cast<int>(parse_int(val, line, key));
      n_sites_given = true;
    } else if (key == "steps") {
      cfg.walk.steps = static_cast<int>(parse_int(val, line, key));
    } else if (key == "theta") {
      cfg.walk.theta = parse_double(val, line, key);
    } else if (key == "phi") {
      cfg.walk.phi = parse_double(val, line, key);
    } else if (key == "boundary") {
      if (val == "open")
        cfg.walk.boundary = Boundary::open;
      else if (val == "periodic")
        cfg.walk.boundary = Boundary::periodic;
      else
        bad_value(line, key);
    } else if (key == "samples") {
      cfg.ensemble.n_samples = parse_u64(val, line, key);
    } else if (key == "seed") {
      cfg.ensemble.seed = parse_u64(val, line, key);
    } else if (key == "workers") {
      cfg.ensemble.workers = static_cast<int>(parse_int(val, line, key));
    } else if (key == "exhaustive") {
      cfg.ensemble.exhaustive = parse_bool(val, line, key);
    } else if (key == "phi_grid") {
      for (const auto& p : split_list(val)) cfg.phi_grid.push_back(parse_double(p, line, key));
    } else if (key == "phi_prime") {
      for (const auto& p : split_list(val)) cfg.phi_prime.push_back(parse_double(p, line, key));
    } else if (key == "snapshot_times") {
      for (const auto& p : split_list(val))
        cfg.snapshot_times.push_back(static_cast<int>(parse_int(p, line, key)));
    } else if (key == "fit_window") {
      const auto parts = split_list(val);
      if (parts.size() != 2) bad_value(line, key);
      cfg.fit_window.abs_min = static_cast<int>(parse_int(parts[0], line, key));
      cfg.fit_window.abs_max = static_cast<int>(parse_int(parts[1], line, key));
    } else if (key == "trunc_tol") {
      cfg.mps.trunc_tol = parse_double(val, line, key);
    } else if (key == "trunc_rule") {
      if (val == "weight")
        cfg.mps.rule = TruncRule::weight;
      else if (val == "value")
        cfg.mps.rule = TruncRule::value;
      else
        bad_value(line, key);
    } else if (key == "max_bond") {
      cfg.mps.max_bond = static_cast<int>(parse_int(val, line, key));
    } else if (key == "output_dir") {
      cfg.output_dir = val;
    } else {
      throw ParseError("line " + std::to_string(line) + ": unknown key '" + key + "'");
    }
  }

  if (over.engine) cfg.engine = *over.engine;
  if (over.experiment) cfg.experiment = *over.experiment;
  if (over.steps) cfg.walk.steps = *over.steps;
  if (over.phi) {
    cfg.walk.phi = *over.phi;
    cfg.phi_grid = {*over.phi};
  }
  if (over.samples) cfg.ensemble.n_samples = *over.samples;
  if (over.seed) cfg.ensemble.seed = *over.seed;
  if (over.output_dir) cfg.output_dir = *over.output_dir;

  if (cfg.walk.steps < 1) throw ValidationError("steps must be at least 1");
  if (!n_sites_given) {
    if (cfg.walk.boundary == Boundary::periodic)
      throw ValidationError("periodic boundary requires an explicit n_sites");
    cfg.walk.n_sites = 2 * cfg.walk.steps + 1;
  }
  if (cfg.walk.n_sites < 2) throw ValidationError("n_sites must be at least 2");
  if (!compatible(cfg.engine, cfg.experiment))
    throw ValidationError(std::string("experiment '") + to_string(cfg.experiment) +
                          "' is not available on engine '" + to_string(cfg.engine) + "'");
  if ((cfg.experiment == Experiment::spectrum || cfg.experiment == Experiment::volume_law) &&
      cfg.walk.boundary != Boundary::periodic)
    throw ValidationError(std::string(to_string(cfg.experiment)) +
                          " requires boundary = periodic");
  if (cfg.ensemble.n_samples < 1) throw ValidationError("samples must be at least 1");
  if (cfg.ensemble.workers < 1) throw ValidationError("workers must be at least 1");
  if (!(cfg.mps.trunc_tol > 0.0) || cfg.mps.trunc_tol >= 1.0)
    throw ValidationError("trunc_tol must lie in (0, 1)");
  if (cfg.mps.max_bond < 1) throw ValidationError("max_bond must be at least 1");
  if (cfg.fit_window.abs_min < 0 || cfg.fit_window.abs_max <= cfg.fit_window.abs_min)
    throw ValidationError("fit_window bounds must be ascending and non-negative");

  if (cfg.phi_grid.empty()) cfg.phi_grid = {cfg.walk.phi};
  if (cfg.phi_prime.empty()) cfg.phi_prime = {0.0};
  if (cfg.snapshot_times.empty())
    cfg.snapshot_times = default_snapshots(cfg.experiment, cfg.walk.steps);
  for (std::size_t i = 0; i < cfg.snapshot_times.size(); ++i) {
    if (cfg.snapshot_times[i] < 0 || cfg.snapshot_times[i] > cfg.walk.steps)
      throw ValidationError("snapshot_times must lie within [0, steps]");
    if (i > 0 && cfg.snapshot_times[i] <= cfg.snapshot_times[i - 1])
      throw ValidationError("snapshot_times must be strictly ascending");
  }
  if (cfg.output_dir.empty()) {
    const char* env = std::getenv("SPINWALK_OUT_DIR");
    cfg.output_dir = env && *env ? env : ".";
  }
  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path, const ConfigOverrides& over) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), over);
}

}  // namespace spinwalk
