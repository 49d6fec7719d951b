#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <clocale>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "spinwalk/config.hpp"
#include "spinwalk/csv.hpp"
#include "spinwalk/experiments.hpp"

using namespace spinwalk;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args) {
  return std::system((std::string(SPINWALK_BIN) + " " + args + " > /dev/null 2>&1").c_str());
}

fs::path fresh_dir(const char* name) {
  const fs::path d = fs::temp_directory_path() / name;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

}  // namespace

// ===== Config parsing =====

TEST_CASE("empty config resolves to ensemble defaults") {
  const ExperimentConfig c = parse_config("");
  CHECK(c.engine == Engine::sector);
  CHECK(c.experiment == Experiment::distribution);
  CHECK(c.walk.steps == 400);
  CHECK(c.walk.n_sites == 801);
  CHECK(c.walk.theta == doctest::Approx(kPi / 4));
  CHECK(c.walk.phi == 0.0);
  CHECK(c.ensemble.n_samples == 4000);
  CHECK(c.ensemble.workers == 1);
  CHECK(c.mps.trunc_tol == 1e-8);
  REQUIRE(c.phi_grid.size() == 1);
  CHECK(c.phi_grid[0] == 0.0);
  REQUIRE(c.phi_prime.size() == 1);
  CHECK(c.phi_prime[0] == 0.0);
  REQUIRE(c.snapshot_times.size() == 1);
  CHECK(c.snapshot_times[0] == 400);
}

TEST_CASE("all keys parse and land") {
  const ExperimentConfig c = parse_config(
      "engine = mps\n"
      "experiment = entropy_series\n"
      "n_sites = 41   # comment\n"
      "steps = 20\n"
      "theta = 0.5\n"
      "phi = 1.25\n"
      "boundary = open\n"
      "samples = 16\n"
      "seed = 9\n"
      "workers = 2\n"
      "exhaustive = true\n"
      "phi_grid = 0, 0.5, 1.0\n"
      "phi_prime = 0.01, 0.02\n"
      "snapshot_times = 1, 5, 20\n"
      "fit_window = 3, 15\n"
      "trunc_tol = 1e-10\n"
      "trunc_rule = value\n"
      "max_bond = 64\n"
      "output_dir = /tmp/somewhere\n");
  CHECK(c.engine == Engine::mps);
  CHECK(c.experiment == Experiment::entropy_series);
  CHECK(c.walk.n_sites == 41);
  CHECK(c.walk.steps == 20);
  CHECK(c.walk.theta == 0.5);
  CHECK(c.walk.phi == 1.25);
  CHECK(c.ensemble.n_samples == 16);
  CHECK(c.ensemble.seed == 9);
  CHECK(c.ensemble.workers == 2);
  CHECK(c.ensemble.exhaustive);
  CHECK(c.phi_grid == std::vector<double>{0.0, 0.5, 1.0});
  CHECK(c.phi_prime == std::vector<double>{0.01, 0.02});
  CHECK(c.snapshot_times == std::vector<int>{1, 5, 20});
  CHECK(c.fit_window.abs_min == 3);
  CHECK(c.fit_window.abs_max == 15);
  CHECK(c.mps.trunc_tol == 1e-10);
  CHECK(c.mps.rule == TruncRule::value);
  CHECK(c.mps.max_bond == 64);
  CHECK(c.output_dir == "/tmp/somewhere");
}

TEST_CASE("parse errors carry the offending line") {
  CHECK_THROWS_WITH_AS(parse_config("steps = 10\nbogus_key = 1\n"),
                       "line 2: unknown key 'bogus_key'", ParseError);
  CHECK_THROWS_WITH_AS(parse_config("phi = 1\nphi = 2\n"), "line 2: duplicate key 'phi'",
                       ParseError);
  CHECK_THROWS_WITH_AS(parse_config("just words\n"), "line 1: expected key = value", ParseError);
  CHECK_THROWS_WITH_AS(parse_config("steps = soon\n"), "line 1: invalid value for 'steps'",
                       ParseError);
  CHECK_THROWS_AS(parse_config("engine = quantum\n"), ParseError);
  CHECK_THROWS_AS(parse_config("phi = 1.5extra\n"), ParseError);
}

TEST_CASE("engine and experiment compatibility is enforced") {
  CHECK_THROWS_AS(parse_config("engine = sector\nexperiment = entropy_series\n"),
                  ValidationError);
  CHECK_THROWS_AS(parse_config("engine = mps\nexperiment = spectrum\n"), ValidationError);
  CHECK_THROWS_AS(parse_config("engine = mps\nexperiment = volume_law\n"), ValidationError);
  CHECK_THROWS_AS(parse_config("engine = exact\nexperiment = ipr_scan\n"), ValidationError);
  // spectrum and volume_law live on the ring
  CHECK_THROWS_AS(
      parse_config("experiment = spectrum\nn_sites = 8\nsteps = 1\nexhaustive = true\n"),
      ValidationError);
  CHECK_NOTHROW(parse_config(
      "experiment = spectrum\nboundary = periodic\nn_sites = 8\nsteps = 1\nexhaustive = true\n"));
}

TEST_CASE("lattice resolution and bounds checks") {
  CHECK_THROWS_AS(parse_config("boundary = periodic\nsteps = 5\n"), ValidationError);
  CHECK_NOTHROW(parse_config("boundary = periodic\nsteps = 5\nn_sites = 8\n"));
  CHECK_THROWS_AS(parse_config("steps = 0\n"), ValidationError);
  CHECK_THROWS_AS(parse_config("samples = 0\n"), ValidationError);
  CHECK_THROWS_AS(parse_config("trunc_tol = 0\n"), ValidationError);
  CHECK_THROWS_AS(parse_config("steps = 10\nsnapshot_times = 4, 2\n"), ValidationError);
  CHECK_THROWS_AS(parse_config("steps = 10\nsnapshot_times = 5, 11\n"), ValidationError);
  CHECK_THROWS_AS(parse_config("fit_window = 7, 3\n"), ValidationError);
}

TEST_CASE("overrides beat the config file") {
  ConfigOverrides over;
  over.phi = 0.75;
  over.steps = 30;
  over.samples = 12;
  over.seed = 5;
  over.output_dir = "/tmp/elsewhere";
  const ExperimentConfig c = parse_config("phi = 0.1\nphi_grid = 0.1, 0.2\nsteps = 400\n", over);
  CHECK(c.walk.phi == 0.75);
  // an explicit phi narrows the sweep to that single value
  CHECK(c.phi_grid == std::vector<double>{0.75});
  CHECK(c.walk.steps == 30);
  CHECK(c.walk.n_sites == 61);
  CHECK(c.ensemble.n_samples == 12);
  CHECK(c.ensemble.seed == 5);
  CHECK(c.output_dir == "/tmp/elsewhere");
}

TEST_CASE("output directory falls back to the environment") {
  ::setenv("SPINWALK_OUT_DIR", "/tmp/envdir", 1);
  CHECK(parse_config("").output_dir == "/tmp/envdir");
  ::unsetenv("SPINWALK_OUT_DIR");
  CHECK(parse_config("").output_dir == ".");
}

TEST_CASE("enum names round-trip") {
  for (Engine e : {Engine::sector, Engine::mps, Engine::exact})
    CHECK(engine_from_string(to_string(e)) == e);
  for (Experiment x :
       {Experiment::distribution, Experiment::variance_series, Experiment::ipr_scan,
        Experiment::spectrum, Experiment::entropy_series, Experiment::spin_textures,
        Experiment::field_perturbation, Experiment::entropy_profile, Experiment::volume_law})
    CHECK(experiment_from_string(to_string(x)) == x);
  CHECK_THROWS_AS(engine_from_string("dense"), ValidationError);
}

// ===== CSV formatting =====

TEST_CASE("cells print 12 significant digits, integers clean") {
  CHECK(format_value(400.0) == "400");
  CHECK(format_value(0.0) == "0");
  CHECK(format_value(-3.0) == "-3");
  CHECK(format_value(0.1) == "0.1");
  CHECK(format_value(1.0 / 3.0) == "0.333333333333");
  CHECK(format_value(1e-8) == "1e-08");
  CHECK(format_value(1.2345678901234567) == "1.23456789012");
}

TEST_CASE("cell format ignores the global locale") {
  const char* old = std::setlocale(LC_NUMERIC, "de_DE.UTF-8");
  const std::string got = format_value(0.5);
  std::setlocale(LC_NUMERIC, "C");
  if (old != nullptr) CHECK(got == "0.5");
}

TEST_CASE("csv writing: header-only, ragged rejection, content") {
  const fs::path dir = fresh_dir("spinwalk_csv_test");
  CsvTable t;
  t.header = {"a", "b"};
  const fs::path f = dir / "empty.csv";
  write_csv(f.string(), t);
  CHECK(slurp(f) == "a,b\n");

  t.rows.push_back({1.0, 2.5});
  t.rows.push_back({-3.0, 1e-3});
  const fs::path g = dir / "two.csv";
  write_csv(g.string(), t);
  CHECK(slurp(g) == "a,b\n1,2.5\n-3,0.001\n");

  t.rows.push_back({7.0});
  CHECK_THROWS_AS(write_csv((dir / "bad.csv").string(), t), LengthMismatch);
  CHECK(!fs::exists(dir / "bad.csv"));
}

// ===== Experiment driver =====

TEST_CASE("failed runs leave no partial outputs") {
  const fs::path dir = fresh_dir("spinwalk_fail_test");
  ConfigOverrides over;
  over.output_dir = dir.string();
  // dense engine refuses this lattice size, after output paths are chosen
  const ExperimentConfig c =
      parse_config("engine = exact\nsteps = 3\nn_sites = 17\n", over);
  CHECK_THROWS_AS(run_experiment(c), ValidationError);
  CHECK(fs::is_empty(dir));
}

TEST_CASE("distribution run writes csv plus manifest that lists it") {
  const fs::path dir = fresh_dir("spinwalk_run_test");
  ConfigOverrides over;
  over.output_dir = dir.string();
  over.steps = 6;
  over.samples = 8;
  const ExperimentConfig c = parse_config("", over);
  const RunResult r = run_experiment(c);
  REQUIRE(r.csv_paths.size() == 1);
  const std::string csv = slurp(r.csv_paths[0]);
  CHECK(csv.substr(0, 4) == "n,P\n");
  CHECK(csv.back() == '\n');

  double total = 0.0;
  std::stringstream ss(csv);
  std::string line;
  std::getline(ss, line);
  int rows = 0;
  while (std::getline(ss, line)) {
    const auto comma = line.find(',');
    REQUIRE(comma != std::string::npos);
    total += std::stod(line.substr(comma + 1));
    ++rows;
  }
  CHECK(rows == 13);
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));

  const std::string man = slurp(r.manifest_path);
  CHECK(man.find("version = 1.0.0\n") != std::string::npos);
  CHECK(man.find("engine = sector\n") != std::string::npos);
  CHECK(man.find("outputs = distribution.csv\n") != std::string::npos);
  CHECK(man.find("wall_time_s = ") != std::string::npos);
}

TEST_CASE("mps manifest reports truncation diagnostics") {
  const fs::path dir = fresh_dir("spinwalk_mps_run_test");
  ConfigOverrides over;
  over.output_dir = dir.string();
  const ExperimentConfig c =
      parse_config("engine = mps\nexperiment = entropy_series\nsteps = 4\nphi = 1.1\n", over);
  const RunResult r = run_experiment(c);
  const std::string man = slurp(r.manifest_path);
  CHECK(man.find("discarded_weight = ") != std::string::npos);
  CHECK(man.find("max_bond_dim = ") != std::string::npos);
  const std::string csv = slurp(r.csv_paths[0]);
  CHECK(csv.substr(0, 4) == "t,S\n");
  // five snapshot rows, t = 0..4
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);
}

// ===== Binary end to end =====

TEST_CASE("cli runs, honors flags, and reports unknown options") {
  const fs::path dir = fresh_dir("spinwalk_bin_test");
  CHECK(run_cli("walk --steps 5 --samples 4 --seed 3 --out " + dir.string()) == 0);
  CHECK(fs::exists(dir / "distribution.csv"));
  CHECK(fs::exists(dir / "distribution_manifest.txt"));
  const std::string man = slurp(dir / "distribution_manifest.txt");
  CHECK(man.find("steps = 5\n") != std::string::npos);
  CHECK(man.find("samples = 4\n") != std::string::npos);

  CHECK(run_cli("") != 0);
  CHECK(run_cli("walk --bogus 1") != 0);
  CHECK(run_cli("walk --config /nonexistent/file.cfg") != 0);
  // config errors surface as a nonzero exit
  std::ofstream(dir / "bad.cfg") << "engine = sector\nexperiment = entropy_series\n";
  CHECK(run_cli("walk --config " + (dir / "bad.cfg").string()) != 0);
}

TEST_CASE("same seed gives byte-identical csv at any worker count") {
  const fs::path d1 = fresh_dir("spinwalk_det1");
  const fs::path d2 = fresh_dir("spinwalk_det2");
  const fs::path d3 = fresh_dir("spinwalk_det3");
  std::ofstream(d1 / "w.cfg") << "phi = 1.1\nsteps = 12\nsamples = 40\nseed = 11\nworkers = 1\n";
  std::ofstream(d2 / "w.cfg") << "phi = 1.1\nsteps = 12\nsamples = 40\nseed = 11\nworkers = 3\n";
  std::ofstream(d3 / "w.cfg") << "phi = 1.1\nsteps = 12\nsamples = 40\nseed = 12\nworkers = 2\n";
  REQUIRE(run_cli("walk --config " + (d1 / "w.cfg").string() + " --out " + d1.string()) == 0);
  REQUIRE(run_cli("walk --config " + (d2 / "w.cfg").string() + " --out " + d2.string()) == 0);
  REQUIRE(run_cli("walk --config " + (d3 / "w.cfg").string() + " --out " + d3.string()) == 0);
  CHECK(slurp(d1 / "distribution.csv") == slurp(d2 / "distribution.csv"));
  CHECK(slurp(d1 / "distribution.csv") != slurp(d3 / "distribution.csv"));
}

TEST_CASE("field subcommand writes one sigma2 and entropy column per kick") {
  const fs::path dir = fresh_dir("spinwalk_field_test");
  std::ofstream(dir / "f.cfg") << "n_sites = 9\nsteps = 3\nphi = 1.178\n"
                               << "phi_prime = 0, 0.0314\nsnapshot_times = 1, 3\n";
  REQUIRE(run_cli("field --engine exact --config " + (dir / "f.cfg").string() + " --out " +
                  dir.string()) == 0);
  const std::string csv = slurp(dir / "field_perturbation.csv");
  CHECK(csv.substr(0, csv.find('\n')) == "t,sigma2_0,S_0,sigma2_1,S_1");
}

