#include "spinwalk/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <functional>

#include "spinwalk/csv.hpp"
#include "spinwalk/ensemble.hpp"
#include "spinwalk/exact.hpp"
#include "spinwalk/mps.hpp"
#include "spinwalk/spectrum.hpp"

namespace spinwalk {

namespace {

struct MpsStats {
  double discarded = 0.0;  // worst trajectory of the run
  int max_bond = 0;
  bool used = false;
};

WalkParams params_at(const ExperimentConfig& cfg, double phi) {
  WalkParams p = cfg.walk;
  p.phi = phi;
  return p;
}

int central_bond(int n_sites) { return (n_sites - 1) / 2; }

std::string suffixed(const char* stem, std::size_t i, std::size_t total) {
  std::string s = stem;
  if (total > 1) s += "_" + std::to_string(i);
  return s;
}

// Snapshot observables behind one interface for both state engines.
struct EngineView {
  std::function<ProbabilityDistribution()> distribution;
  std::function<double(int)> entropy_at;
  std::function<Eigen::VectorXd()> entropy_profile;
  std::function<double(int, SpinAxis)> spin;
  std::function<int(int)> site_of;
};

// One trajectory: step, optional spin-field kick, observe at the requested
// times.  snaps is strictly ascending (config resolution guarantees it).
void run_state_engine(Engine eng, const WalkParams& p, const MpsOptions& opt,
                      const std::vector<int>& snaps, double field_kick, MpsStats* stats,
                      const std::function<void(int, const EngineView&)>& on_snap) {
  const int tmax = snaps.empty() ? 0 : snaps.back();
  if (eng == Engine::mps) {
    MpsState m = mps_init(p, opt);
    EngineView v;
    v.distribution = [&m] { return walker_distribution_mps(m); };
    v.entropy_at = [&m](int b) { return bond_entropy(m, b); };
    v.entropy_profile = [&m] { return bond_entropy_profile(m); };
    v.spin = [&m](int col, SpinAxis ax) { return local_expectation(m, col, ax); };
    v.site_of = [&m](int col) { return m.site_of(col); };
    std::size_t next = 0;
    if (next < snaps.size() && snaps[next] == 0) on_snap(snaps[next++], v);
    for (int t = 1; t <= tmax; ++t) {
      mps_step(m, p);
      if (field_kick != 0.0) apply_field(m, field_kick);
      if (stats) stats->max_bond = std::max(stats->max_bond, m.max_bond_dim());
      if (next < snaps.size() && snaps[next] == t) on_snap(snaps[next++], v);
    }
    if (stats) {
      stats->used = true;
      stats->discarded = std::max(stats->discarded, m.discarded_weight);
    }
  } else {
    ExactState st = initial_exact_state(p);
    EngineView v;
    v.distribution = [&st] { return exact_walker_distribution(st); };
    v.entropy_at = [&st](int b) { return exact_bond_entropy(st, b); };
    v.entropy_profile = [&st] {
      Eigen::VectorXd prof(st.n_sites - 1);
      for (int b = 0; b < prof.size(); ++b) prof(b) = exact_bond_entropy(st, b);
      return prof;
    };
    v.spin = [&st](int col, SpinAxis ax) { return exact_spin_expectation(st, col, ax); };
    v.site_of = [&st](int col) { return st.site_of(col); };
    std::size_t next = 0;
    if (next < snaps.size() && snaps[next] == 0) on_snap(snaps[next++], v);
    for (int t = 1; t <= tmax; ++t) {
      exact_step(st, p);
      if (field_kick != 0.0) exact_apply_field(st, field_kick);
      if (next < snaps.size() && snaps[next] == t) on_snap(snaps[next++], v);
    }
  }
}

ProbabilityDistribution final_distribution(const ExperimentConfig& cfg, double phi,
                                           MpsStats* stats) {
  const WalkParams p = params_at(cfg, phi);
  if (cfg.engine == Engine::sector)
    return ensemble_distribution(p, cfg.walk.steps, cfg.ensemble);
  ProbabilityDistribution out;
  run_state_engine(cfg.engine, p, cfg.mps, {cfg.walk.steps}, 0.0, stats,
                   [&out](int, const EngineView& v) { out = v.distribution(); });
  return out;
}

CsvTable build_distribution(const ExperimentConfig& cfg, MpsStats* stats) {
  CsvTable t;
  t.header = {"n"};
  for (std::size_t i = 0; i < cfg.phi_grid.size(); ++i)
    t.header.push_back(suffixed("P", i, cfg.phi_grid.size()));
  std::vector<ProbabilityDistribution> dists;
  for (double phi : cfg.phi_grid) dists.push_back(final_distribution(cfg, phi, stats));
  for (int i = 0; i < static_cast<int>(dists[0].p.size()); ++i) {
    std::vector<double> row{static_cast<double>(dists[0].site_of(i))};
    for (const auto& d : dists) row.push_back(d.p(i));
    t.rows.push_back(std::move(row));
  }
  return t;
}

CsvTable build_variance_series(const ExperimentConfig& cfg, MpsStats* stats) {
  CsvTable t;
  t.header = {"t"};
  for (std::size_t i = 0; i < cfg.phi_grid.size(); ++i)
    t.header.push_back(suffixed("sigma2", i, cfg.phi_grid.size()));
  std::vector<std::vector<double>> cols;
  for (double phi : cfg.phi_grid) {
    std::vector<double> col;
    const WalkParams p = params_at(cfg, phi);
    if (cfg.engine == Engine::sector) {
      const EnsembleResult res = run_ensemble(p, cfg.snapshot_times, cfg.ensemble);
      for (const auto& d : res.mean_p) col.push_back(variance(d));
    } else {
      run_state_engine(cfg.engine, p, cfg.mps, cfg.snapshot_times, 0.0, stats,
                       [&col](int, const EngineView& v) { col.push_back(variance(v.distribution())); });
    }
    cols.push_back(std::move(col));
  }
  for (std::size_t k = 0; k < cfg.snapshot_times.size(); ++k) {
    std::vector<double> row{static_cast<double>(cfg.snapshot_times[k])};
    for (const auto& col : cols) row.push_back(col[k]);
    t.rows.push_back(std::move(row));
  }
  return t;
}

CsvTable build_ipr_scan(const ExperimentConfig& cfg) {
  CsvTable t;
  t.header = {"phi", "ipr"};
  for (double phi : cfg.phi_grid) {
    const ProbabilityDistribution d =
        ensemble_distribution(params_at(cfg, phi), cfg.walk.steps, cfg.ensemble);
    t.rows.push_back({phi, normalized_ipr(d, cfg.walk.n_sites)});
  }
  return t;
}

CsvTable build_spectrum(const ExperimentConfig& cfg) {
  SectorSource src;
  src.exhaustive = cfg.ensemble.exhaustive;
  src.count = cfg.ensemble.n_samples;
  src.seed = cfg.ensemble.seed;
  CsvTable t;
  t.header = {"phi", "sector_id", "E", "ipr"};
  for (const SpectrumRecord& r : spectrum_sweep(cfg.phi_grid, src, cfg.walk))
    t.rows.push_back({r.phi, static_cast<double>(r.sector_id), r.quasi_energy, r.ipr});
  return t;
}

CsvTable build_entropy_series(const ExperimentConfig& cfg, MpsStats* stats) {
  CsvTable t;
  t.header = {"t"};
  for (std::size_t i = 0; i < cfg.phi_grid.size(); ++i)
    t.header.push_back(suffixed("S", i, cfg.phi_grid.size()));
  const int bond = central_bond(cfg.walk.n_sites);
  std::vector<std::vector<double>> cols;
  for (double phi : cfg.phi_grid) {
    std::vector<double> col;
    run_state_engine(cfg.engine, params_at(cfg, phi), cfg.mps, cfg.snapshot_times, 0.0, stats,
                     [&col, bond](int, const EngineView& v) { col.push_back(v.entropy_at(bond)); });
    cols.push_back(std::move(col));
  }
  for (std::size_t k = 0; k < cfg.snapshot_times.size(); ++k) {
    std::vector<double> row{static_cast<double>(cfg.snapshot_times[k])};
    for (const auto& col : cols) row.push_back(col[k]);
    t.rows.push_back(std::move(row));
  }
  return t;
}

CsvTable build_spin_textures(const ExperimentConfig& cfg, MpsStats* stats) {
  CsvTable t;
  t.header = {"phi", "n", "X", "Y", "Z"};
  for (double phi : cfg.phi_grid) {
    const WalkParams p = params_at(cfg, phi);
    run_state_engine(cfg.engine, p, cfg.mps, {cfg.walk.steps}, 0.0, stats,
                     [&t, &p, phi](int, const EngineView& v) {
                       for (int col = 0; col < p.n_sites; ++col)
                         t.rows.push_back({phi, static_cast<double>(v.site_of(col)),
                                           v.spin(col, SpinAxis::x), v.spin(col, SpinAxis::y),
                                           v.spin(col, SpinAxis::z)});
                     });
  }
  return t;
}

CsvTable build_field_perturbation(const ExperimentConfig& cfg, MpsStats* stats) {
  CsvTable t;
  t.header = {"t"};
  for (std::size_t j = 0; j < cfg.phi_prime.size(); ++j) {
    t.header.push_back("sigma2_" + std::to_string(j));
    t.header.push_back("S_" + std::to_string(j));
  }
  const int bond = central_bond(cfg.walk.n_sites);
  const WalkParams p = cfg.walk;
  std::vector<std::vector<double>> svar, sent;
  for (double kick : cfg.phi_prime) {
    std::vector<double> cv, ce;
    run_state_engine(cfg.engine, p, cfg.mps, cfg.snapshot_times, kick, stats,
                     [&cv, &ce, bond](int, const EngineView& v) {
                       cv.push_back(variance(v.distribution()));
                       ce.push_back(v.entropy_at(bond));
                     });
    svar.push_back(std::move(cv));
    sent.push_back(std::move(ce));
  }
  for (std::size_t k = 0; k < cfg.snapshot_times.size(); ++k) {
    std::vector<double> row{static_cast<double>(cfg.snapshot_times[k])};
    for (std::size_t j = 0; j < cfg.phi_prime.size(); ++j) {
      row.push_back(svar[j][k]);
      row.push_back(sent[j][k]);
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

CsvTable build_entropy_profile(const ExperimentConfig& cfg, MpsStats* stats) {
  CsvTable t;
  t.header = {"phi", "t", "bond", "S"};
  for (double phi : cfg.phi_grid) {
    run_state_engine(cfg.engine, params_at(cfg, phi), cfg.mps, cfg.snapshot_times, 0.0, stats,
                     [&t, phi](int time, const EngineView& v) {
                       const Eigen::VectorXd prof = v.entropy_profile();
                       for (int b = 0; b < prof.size(); ++b)
                         t.rows.push_back({phi, static_cast<double>(time),
                                           static_cast<double>(b), prof(b)});
                     });
  }
  return t;
}

CsvTable build_volume_law(const ExperimentConfig& cfg) {
  CsvTable t;
  t.header = {"N", "t", "S"};
  std::vector<int> sizes;
  for (int n = cfg.walk.n_sites; n >= 4; n -= 2) sizes.push_back(n);
  std::reverse(sizes.begin(), sizes.end());
  for (int n : sizes) {
    WalkParams p = cfg.walk;
    p.n_sites = n;
    const int bond = central_bond(n);
    run_state_engine(Engine::exact, p, cfg.mps, cfg.snapshot_times, 0.0, nullptr,
                     [&t, n, bond](int time, const EngineView& v) {
                       t.rows.push_back({static_cast<double>(n), static_cast<double>(time),
                                         v.entropy_at(bond)});
                     });
  }
  return t;
}

std::string join_doubles(const std::vector<double>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) s += ',';
    s += format_value(xs[i]);
  }
  return s;
}

std::string join_ints(const std::vector<int>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(xs[i]);
  }
  return s;
}

std::string manifest_text(const ExperimentConfig& cfg, const RunResult& r, const MpsStats& stats) {
  std::string s;
  auto kv = [&s](const char* key, const std::string& val) {
    s += key;
    s += " = ";
    s += val;
    s += '\n';
  };
  kv("version", kVersion);
  kv("engine", to_string(cfg.engine));
  kv("experiment", to_string(cfg.experiment));
  kv("n_sites", std::to_string(cfg.walk.n_sites));
  kv("steps", std::to_string(cfg.walk.steps));
  kv("theta", format_value(cfg.walk.theta));
  kv("phi", format_value(cfg.walk.phi));
  kv("boundary", cfg.walk.boundary == Boundary::open ? "open" : "periodic");
  kv("samples", std::to_string(cfg.ensemble.n_samples));
  kv("seed", std::to_string(cfg.ensemble.seed));
  kv("workers", std::to_string(cfg.ensemble.workers));
  kv("exhaustive", cfg.ensemble.exhaustive ? "true" : "false");
  kv("phi_grid", join_doubles(cfg.phi_grid));
  kv("phi_prime", join_doubles(cfg.phi_prime));
  kv("snapshot_times", join_ints(cfg.snapshot_times));
  kv("fit_window", std::to_string(cfg.fit_window.abs_min) + "," +
                       std::to_string(cfg.fit_window.abs_max));
  kv("trunc_tol", format_value(cfg.mps.trunc_tol));
  kv("trunc_rule", cfg.mps.rule == TruncRule::weight ? "weight" : "value");
  kv("max_bond", std::to_string(cfg.mps.max_bond));
  kv("output_dir", cfg.output_dir);
  std::string outs;
  for (std::size_t i = 0; i < r.csv_paths.size(); ++i) {
    if (i) outs += ',';
    outs += std::filesystem::path(r.csv_paths[i]).filename().string();
  }
  kv("outputs", outs);
  kv("wall_time_s", format_value(r.wall_time_s));
  if (stats.used) {
    kv("discarded_weight", format_value(stats.discarded));
    kv("max_bond_dim", std::to_string(stats.max_bond));
  }
  return s;
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  std::error_code ec;
  std::filesystem::create_directories(cfg.output_dir, ec);
  if (ec) throw IoError("cannot create output directory: " + cfg.output_dir);

  const std::string base = cfg.output_dir + "/" + to_string(cfg.experiment);
  RunResult r;
  r.csv_paths = {base + ".csv"};
  r.manifest_path = base + "_manifest.txt";

  MpsStats stats;
  try {
    CsvTable table;
    switch (cfg.experiment) {
      case Experiment::distribution: table = build_distribution(cfg, &stats); break;
      case Experiment::variance_series: table = build_variance_series(cfg, &stats); break;
      case Experiment::ipr_scan: table = build_ipr_scan(cfg); break;
      case Experiment::spectrum: table = build_spectrum(cfg); break;
      case Experiment::entropy_series: table = build_entropy_series(cfg, &stats); break;
      case Experiment::spin_textures: table = build_spin_textures(cfg, &stats); break;
      case Experiment::field_perturbation: table = build_field_perturbation(cfg, &stats); break;
      case Experiment::entropy_profile: table = build_entropy_profile(cfg, &stats); break;
      case Experiment::volume_law: table = build_volume_law(cfg); break;
    }
    write_csv(r.csv_paths[0], table);
    r.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_text_file(r.manifest_path, manifest_text(cfg, r, stats));
  } catch (...) {
    for (const auto& p : r.csv_paths) std::filesystem::remove(p, ec);
    std::filesystem::remove(r.manifest_path, ec);
    throw;
  }
  return r;
}

}  // namespace spinwalk
