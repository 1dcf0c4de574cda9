#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "omsim/sweep.hpp"

using namespace omsim;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  REQUIRE(f.good());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

bool has_error_containing(const ParseResult& r, const std::string& needle) {
  return std::any_of(r.errors.begin(), r.errors.end(), [&](const std::string& e) {
    return e.find(needle) != std::string::npos;
  });
}

int count_fields(const std::string& line) {
  return 1 + static_cast<int>(std::count(line.begin(), line.end(), ','));
}

}  // namespace

TEST_CASE("minimal config picks up the reference defaults") {
  const ParseResult r = parse_config(
      "storage_time = 16.3, 40.8, 81.7\n"
      "n_bath = 0, 0.5, 1, 2\n");
  REQUIRE(r.errors.empty());
  REQUIRE(r.config.has_value());
  const SweepConfig& c = *r.config;
  CHECK(c.squeezing == std::vector<double>{1.0});
  CHECK(c.steps == 3000);
  CHECK(c.trajectories == 100000);
  CHECK(c.seed == 1);
  CHECK(c.mode == RunMode::both);
  CHECK(c.out == "results");
  CHECK(c.storage_time.size() == 3);
  CHECK(c.n_bath.size() == 4);
  // the default write-pulse peak flows from the schedule factory
  CHECK(default_schedule(c.storage_time[0], c.steps).tau1 == 8.17);
}

TEST_CASE("comments, spacing and full keys parse") {
  const ParseResult r = parse_config(
      "# storage sweep\n"
      "storage_time = 16.3\n"
      "n_bath=0 1 2   # mixed separators\n"
      "squeezing = 0.5, 1\n"
      "trajectories = 2000\n"
      "steps = 600\n"
      "seed = 98765\n"
      "mode = oracle\n"
      "out = run1\n");
  REQUIRE(r.errors.empty());
  CHECK(r.config->n_bath == std::vector<double>{0.0, 1.0, 2.0});
  CHECK(r.config->squeezing == std::vector<double>{0.5, 1.0});
  CHECK(r.config->seed == 98765);
  CHECK(r.config->mode == RunMode::oracle);
  CHECK(r.config->out == "run1");
}

TEST_CASE("temperature lists convert through the thermal occupation") {
  const ParseResult r = parse_config(
      "storage_time = 16.3\n"
      "temperature_mk = 200\n");
  REQUIRE(r.errors.empty());
  CHECK(r.config->n_bath.size() == 1);
  CHECK(r.config->n_bath[0] == doctest::Approx(0.6993949198791515).epsilon(1e-10));
}

TEST_CASE("violations are collected, not just the first") {
  const ParseResult r = parse_config(
      "storage_time =\n"
      "bogus_key = 3\n"
      "mode = sometimes\n");
  CHECK(!r.config.has_value());
  CHECK(has_error_containing(r, "storage_time"));
  CHECK(has_error_containing(r, "unknown key 'bogus_key'"));
  CHECK(has_error_containing(r, "mode"));
  CHECK(has_error_containing(r, "n_bath"));  // missing required
  CHECK(r.errors.size() >= 4);
}

TEST_CASE("specific violations") {
  CHECK(has_error_containing(parse_config("n_bath = 1\n"), "storage_time"));
  CHECK(has_error_containing(
      parse_config("storage_time = 1\nn_bath = 1\ntemperature_mk = 200\n"),
      "only one"));
  CHECK(has_error_containing(
      parse_config("storage_time = 16.3\nn_bath = -1\n"), ">= 0"));
  CHECK(has_error_containing(
      parse_config("storage_time = 16.3\nn_bath = 0\ntrajectories = 500\n"),
      "1000"));
  CHECK(has_error_containing(
      parse_config("storage_time = 16.3\nn_bath = 0\nsteps = 50\n"), "steps"));
  CHECK(has_error_containing(
      parse_config("storage_time = 16.3\nn_bath = 0\nn_bath = 1\n"),
      "more than once"));
  CHECK(has_error_containing(
      parse_config("storage_time = 16.3 and more\nn_bath = 0\n"), "list"));
  // oracle mode does not need the trajectory floor
  CHECK(parse_config("storage_time = 16.3\nn_bath = 0\nmode = oracle\n"
                     "trajectories = 10\n")
            .errors.empty());
}

TEST_CASE("oracle-only sweep fills analytic and oracle columns quickly") {
  SweepConfig cfg;
  cfg.storage_time = {16.3};
  cfg.n_bath = {0.0, 2.0};
  cfg.steps = 600;
  cfg.mode = RunMode::oracle;
  const auto rows = run_sweep(cfg, 1);
  REQUIRE(rows.size() == 2);
  for (const ResultRow& r : rows) {
    CHECK(std::isnan(r.delta_ent_mc));  // MC fields stay empty
    CHECK(std::isnan(r.epr12));
    CHECK(std::isnan(r.fidelity_mc));
    CHECK(std::isfinite(r.delta_ent_oracle));
    CHECK(std::isfinite(r.delta_ent_analytic));
    CHECK(std::isfinite(r.fidelity_oracle));
    CHECK(r.n_traj == 0);
    CHECK(r.wall_time_s < 1.0);
  }
  CHECK(rows[0].delta_ent_oracle < rows[1].delta_ent_oracle);  // hotter is worse
}

TEST_CASE("mc sweep rows are reproducible and criterion errors populated") {
  SweepConfig cfg;
  cfg.storage_time = {16.3};
  cfg.n_bath = {0.5};
  cfg.steps = 300;
  cfg.trajectories = 2000;
  cfg.seed = 77;
  cfg.mode = RunMode::mc;
  const auto a = run_sweep(cfg, 1);
  const auto b = run_sweep(cfg, 3);  // different worker count
  REQUIRE(a.size() == 1);
  REQUIRE(b.size() == 1);
  CHECK(csv_line(a[0]) == csv_line(b[0]));  // byte-identical row
  CHECK(a[0].delta_ent_err > 0.0);
  CHECK(std::isnan(a[0].delta_ent_oracle));       // no oracle in mc mode
  CHECK(std::isnan(a[0].fidelity_mc));            // below the 1e4 sample floor
  CHECK(a[0].rejected_traj == 0);
}

TEST_CASE("csv layout is fixed and nan cells are explicit") {
  SweepConfig cfg;
  cfg.storage_time = {5.0};
  cfg.n_bath = {0.0};
  cfg.steps = 300;
  cfg.mode = RunMode::oracle;
  cfg.out = "unit_csv";
  const auto rows = run_sweep(cfg, 1);

  const std::string dir = "sweep_unit_out";
  std::filesystem::remove_all(dir);
  write_outputs(rows, cfg, dir);

  const std::string csv = slurp(std::filesystem::path(dir) / "unit_csv.csv");
  std::istringstream lines(csv);
  std::string header, line1, rest;
  REQUIRE(std::getline(lines, header));
  REQUIRE(std::getline(lines, line1));
  CHECK(!std::getline(lines, rest));  // one row -> header + one data line
  CHECK(header == csv_header());
  CHECK(count_fields(header) == 20);
  CHECK(count_fields(line1) == 20);
  CHECK(line1.find("nan") != std::string::npos);  // MC fields written as nan
  CHECK(csv.find("\r") == std::string::npos);     // LF endings

  // timing sidecar and the three plot files exist
  CHECK(std::filesystem::exists(std::filesystem::path(dir) / "unit_csv_timing.csv"));
  for (const char* suffix :
       {"unit_csv_entanglement.dat", "unit_csv_fidelity.dat", "unit_csv_steering.dat"})
    CHECK(std::filesystem::exists(std::filesystem::path(dir) / suffix));
  std::filesystem::remove_all(dir);
}

TEST_CASE("plot files carry one series block per (r, tau_s)") {
  SweepConfig cfg;
  cfg.storage_time = {5.0, 7.0, 9.0};
  cfg.n_bath = {0.0, 1.0};
  cfg.steps = 300;
  cfg.mode = RunMode::oracle;
  cfg.out = "unit_plot";
  const auto rows = run_sweep(cfg, 1);
  REQUIRE(rows.size() == 6);

  const std::string dir = "sweep_unit_plot";
  std::filesystem::remove_all(dir);
  write_outputs(rows, cfg, dir);
  const std::string ent =
      slurp(std::filesystem::path(dir) / "unit_plot_entanglement.dat");
  std::size_t series = 0, pos = 0;
  while ((pos = ent.find("# series", pos)) != std::string::npos) {
    ++series;
    pos += 8;
  }
  CHECK(series == 3);  // one per tau_s at the single squeezing value
  std::filesystem::remove_all(dir);

  CHECK_THROWS(write_outputs({}, cfg, dir));  // empty row set is an error
}
