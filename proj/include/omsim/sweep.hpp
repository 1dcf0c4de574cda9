#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "omsim/model.hpp"

namespace omsim {

enum class RunMode { mc, oracle, both };

/// One sweep specification. Parsed from flat key = value text; see
/// parse_config for the grammar and defaults.
struct SweepConfig {
  std::vector<double> squeezing{1.0};
  std::vector<double> n_bath;       // from n_bath or temperature_mk
  std::vector<double> storage_time;
  long long trajectories = 100000;
  int steps = 3000;
  std::uint64_t seed = 1;
  RunMode mode = RunMode::both;
  std::string out = "results";
};

/// Either a validated config or the full list of violations.
struct ParseResult {
  std::optional<SweepConfig> config;
  std::vector<std::string> errors;
};

/// Grammar: one `key = value` per line, `#` comments, blank lines ignored.
/// Lists are comma or whitespace separated. Keys:
///   storage_time    (required, list)        dimensionless storage times
///   n_bath          (list)  mechanical bath occupations; exactly one of
///   temperature_mk  (list)  n_bath / temperature_mk must be present;
///                           temperatures convert via the reference device
///   squeezing       (list, default 1)
///   trajectories    (default 100000; >= 1000 in mc/both mode)
///   steps           (default 3000; >= 100)
///   seed            (default 1)
///   mode            mc | oracle | both (default both)
///   out             output file prefix (default "results")
/// All violations are collected and reported together.
ParseResult parse_config(std::string_view text);

/// One sweep grid point. wall_time_s goes to the timing sidecar, never the
/// results CSV, which must be byte-identical across runs and worker counts.
struct ResultRow {
  double n_bath, tau_s, r;
  double delta_ent_mc, delta_ent_err, delta_ent_analytic, delta_ent_oracle;
  double epr12, epr12_err, epr21, epr21_err, epr_analytic;
  double fidelity_mc, fidelity_err, fidelity_oracle;
  bool fidelity_high_variance;
  double g_opt, theta_opt;
  long long n_traj, rejected_traj;
  std::uint64_t seed;
  double wall_time_s;
};

/// Computes one grid point. point_index fixes the trajectory stream block
/// and the bootstrap seed, so the full grid is reproducible point by point.
ResultRow run_sweep_point(const SweepConfig& cfg, double r, double tau_s,
                          double n_bath, long long point_index, int n_workers);

/// Runs the grid in fixed order (squeezing, then storage time, then bath
/// occupation), invoking on_row after each completed point so partial
/// results can be flushed if a later point fails.
std::vector<ResultRow> run_sweep(
    const SweepConfig& cfg, int n_workers,
    const std::function<void(const ResultRow&)>& on_row = {});

std::string csv_header();
std::string csv_line(const ResultRow& row);

/// Writes <out>.csv, <out>_timing.csv and the three plot-series files
/// (<out>_entanglement.dat, <out>_fidelity.dat, <out>_steering.dat; one
/// gnuplot-style block per (r, tau_s) series, points ordered by n_bath).
/// Throws std::runtime_error if a file cannot be written.
void write_outputs(const std::vector<ResultRow>& rows, const SweepConfig& cfg,
                   const std::string& out_dir);

}  // namespace omsim
