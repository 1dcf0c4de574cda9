#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>

#include "omsim/sweep.hpp"

namespace {

void print_row(const omsim::ResultRow& r) {
  std::printf(
      "r=%-4g tau_s=%-5g n_bath=%-5g  delta_ent=%.4f(%.4f) an=%.4f or=%.4f  "
      "epr=%.4f/%.4f  F=%.4f%s  [%.1f s]\n",
      r.r, r.tau_s, r.n_bath, r.delta_ent_mc, r.delta_ent_err,
      r.delta_ent_analytic, r.delta_ent_oracle, r.epr12, r.epr21,
      r.fidelity_mc, r.fidelity_high_variance ? " (high variance)" : "",
      r.wall_time_s);
  if (r.fidelity_high_variance)
    std::fprintf(stderr,
                 "warning: fidelity at r=%g tau_s=%g n_bath=%g has relative "
                 "error %.0f%% (> 10%%); increase trajectories\n",
                 r.r, r.tau_s, r.n_bath,
                 100.0 * r.fidelity_err / r.fidelity_mc);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "omsim: pulsed optomechanical entanglement storage sweeps.\n"
      "Runs Wigner Monte Carlo trajectories and/or the covariance oracle\n"
      "over a (squeezing, storage time, bath occupation) grid and writes\n"
      "CSV results plus plot-series files."};

  std::string config_path;
  std::string out_dir = ".";
  std::string mode;
  std::uint64_t seed = 0;
  bool seed_given = false;
  int workers = 0;
  long long trajectories = 0;
  int steps = 0;

  app.add_option("config", config_path, "sweep configuration file")->required();
  app.add_option("--seed", seed, "override the config seed")
      ->each([&](const std::string&) { seed_given = true; });
  app.add_option("--mode", mode, "override mode: mc, oracle or both");
  app.add_option("--workers", workers,
                 "worker threads (default: hardware concurrency)");
  app.add_option("--out-dir", out_dir, "output directory (default .)");
  app.add_option("--steps", steps, "override steps per trajectory");
  app.add_option("--trajectories", trajectories,
                 "override trajectories per grid point");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  std::ifstream file(config_path);
  if (!file) {
    std::cerr << "config error: cannot read '" << config_path << "'\n";
    return 1;
  }
  std::ostringstream text;
  text << file.rdbuf();

  omsim::ParseResult parsed = omsim::parse_config(text.str());

  // flag overrides participate in validation
  if (parsed.config) {
    omsim::SweepConfig& cfg = *parsed.config;
    if (seed_given) cfg.seed = seed;
    if (!mode.empty()) {
      if (mode == "mc")
        cfg.mode = omsim::RunMode::mc;
      else if (mode == "oracle")
        cfg.mode = omsim::RunMode::oracle;
      else if (mode == "both")
        cfg.mode = omsim::RunMode::both;
      else
        parsed.errors.push_back("--mode: expected mc, oracle or both");
    }
    if (steps != 0) {
      if (steps < 100)
        parsed.errors.push_back("--steps: must be >= 100");
      else
        cfg.steps = steps;
    }
    if (trajectories != 0) {
      if (trajectories < 1000 && cfg.mode != omsim::RunMode::oracle)
        parsed.errors.push_back("--trajectories: must be >= 1000 in mc/both mode");
      else
        cfg.trajectories = trajectories;
    }
  }
  if (!parsed.errors.empty()) {
    for (const std::string& e : parsed.errors)
      std::cerr << "config error: " << e << '\n';
    return 1;
  }

  const omsim::SweepConfig& cfg = *parsed.config;
  if (workers <= 0)
    workers = std::max(1u, std::thread::hardware_concurrency());

  std::vector<omsim::ResultRow> rows;
  try {
    omsim::run_sweep(cfg, workers, [&](const omsim::ResultRow& row) {
      rows.push_back(row);
      print_row(row);
      omsim::write_outputs(rows, cfg, out_dir);  // flush after every point
    });
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << '\n';
    if (!rows.empty())
      std::cerr << "partial results for " << rows.size()
                << " completed points were flushed\n";
    return 2;
  }
  return 0;
}
