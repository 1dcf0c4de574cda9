#include "omsim/sweep.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "omsim/estimators.hpp"
#include "omsim/integrator.hpp"
#include "omsim/oracle.hpp"

namespace omsim {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  const auto e = s.find_last_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  return std::string(s.substr(b, e - b + 1));
}

bool parse_double(const std::string& tok, double& out) {
  try {
    std::size_t used = 0;
    out = std::stod(tok, &used);
    return used == tok.size() && std::isfinite(out);
  } catch (const std::exception&) {
    return false;
  }
}

bool parse_list(const std::string& value, std::vector<double>& out) {
  out.clear();
  std::string item;
  std::istringstream ss(value);
  std::string normalized = value;
  for (char& c : normalized)
    if (c == ',') c = ' ';
  std::istringstream ns(normalized);
  while (ns >> item) {
    double v;
    if (!parse_double(item, v)) return false;
    out.push_back(v);
  }
  return !out.empty();
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

// stream-id blocks: trajectories of point i live at (i << 40) + trajectory
constexpr std::uint64_t kPointStreamStride = 1ull << 40;

std::uint64_t bootstrap_seed_for(std::uint64_t seed, long long point) {
  return seed ^ (0x9E3779B97F4A7C15ull * static_cast<std::uint64_t>(point + 1));
}

}  // namespace

ParseResult parse_config(std::string_view text) {
  ParseResult result;
  std::vector<std::string>& errors = result.errors;
  SweepConfig cfg;

  std::map<std::string, std::string> kv;
  std::set<std::string> seen;
  std::size_t lineno = 0;
  std::istringstream stream{std::string(text)};
  std::string raw;
  while (std::getline(stream, raw)) {
    ++lineno;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      errors.push_back("line " + std::to_string(lineno) +
                       ": expected 'key = value'");
      continue;
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      errors.push_back("line " + std::to_string(lineno) + ": missing key");
      continue;
    }
    if (value.empty()) {
      errors.push_back("key '" + key + "': missing value");
      continue;
    }
    if (!seen.insert(key).second) {
      errors.push_back("key '" + key + "': given more than once");
      continue;
    }
    kv[key] = value;
  }

  static const std::set<std::string> known = {
      "squeezing", "n_bath",       "temperature_mk", "storage_time",
      "trajectories", "steps",     "seed",           "mode",
      "out"};
  for (const auto& [key, value] : kv)
    if (!known.count(key)) errors.push_back("unknown key '" + key + "'");

  auto list_field = [&](const char* key, std::vector<double>& dst) {
    const auto it = kv.find(key);
    if (it == kv.end()) return false;
    if (!parse_list(it->second, dst))
      errors.push_back(std::string("key '") + key + "': expected a list of numbers");
    return true;
  };

  list_field("squeezing", cfg.squeezing);
  for (double r : cfg.squeezing)
    if (r < 0.0) errors.push_back("squeezing values must be >= 0");

  if (!list_field("storage_time", cfg.storage_time))
    errors.push_back("missing required key 'storage_time'");
  for (double t : cfg.storage_time)
    if (t < 0.0) errors.push_back("storage_time values must be >= 0");

  const bool has_nbath = kv.count("n_bath") > 0;
  const bool has_temp = kv.count("temperature_mk") > 0;
  if (has_nbath && has_temp) {
    errors.push_back("give only one of 'n_bath' and 'temperature_mk'");
  } else if (!has_nbath && !has_temp) {
    errors.push_back("missing required key 'n_bath' (or 'temperature_mk')");
  } else if (has_nbath) {
    list_field("n_bath", cfg.n_bath);
    for (double n : cfg.n_bath)
      if (n < 0.0) errors.push_back("n_bath values must be >= 0");
  } else {
    std::vector<double> temps;
    list_field("temperature_mk", temps);
    cfg.n_bath.clear();
    for (double t : temps) {
      if (t < 0.0) {
        errors.push_back("temperature_mk values must be >= 0");
        continue;
      }
      PhysicalParams p = reference::physical();
      p.bath_temperature_k = t * 1e-3;
      cfg.n_bath.push_back(thermal_occupation(p));
    }
  }

  if (auto it = kv.find("trajectories"); it != kv.end()) {
    double v;
    if (!parse_double(it->second, v) || v != std::floor(v) || v < 1)
      errors.push_back("key 'trajectories': expected a positive integer");
    else
      cfg.trajectories = static_cast<long long>(v);
  }
  if (auto it = kv.find("steps"); it != kv.end()) {
    double v;
    if (!parse_double(it->second, v) || v != std::floor(v) || v < 100)
      errors.push_back("key 'steps': expected an integer >= 100");
    else
      cfg.steps = static_cast<int>(v);
  }
  if (auto it = kv.find("seed"); it != kv.end()) {
    try {
      cfg.seed = std::stoull(it->second);
    } catch (const std::exception&) {
      errors.push_back("key 'seed': expected an unsigned integer");
    }
  }
  if (auto it = kv.find("mode"); it != kv.end()) {
    if (it->second == "mc")
      cfg.mode = RunMode::mc;
    else if (it->second == "oracle")
      cfg.mode = RunMode::oracle;
    else if (it->second == "both")
      cfg.mode = RunMode::both;
    else
      errors.push_back("key 'mode': expected mc, oracle or both");
  }
  if (auto it = kv.find("out"); it != kv.end()) cfg.out = it->second;

  if (cfg.mode != RunMode::oracle && cfg.trajectories < 1000)
    errors.push_back("trajectories must be >= 1000 in mc/both mode");

  if (errors.empty()) result.config = cfg;
  return result;
}

ResultRow run_sweep_point(const SweepConfig& cfg, double r, double tau_s,
                          double n_bath, long long point_index, int n_workers) {
  const auto t0 = std::chrono::steady_clock::now();

  ResultRow row{};
  row.n_bath = n_bath;
  row.tau_s = tau_s;
  row.r = r;
  row.seed = cfg.seed;
  row.delta_ent_mc = row.delta_ent_err = kNan;
  row.delta_ent_oracle = kNan;
  row.epr12 = row.epr12_err = row.epr21 = row.epr21_err = kNan;
  row.fidelity_mc = row.fidelity_err = row.fidelity_oracle = kNan;
  row.g_opt = row.theta_opt = kNan;
  row.fidelity_high_variance = false;

  ProtocolParams p = reference::protocol(r);
  p.n_bath = n_bath;
  p.n_mech_init = n_bath;
  const PulseSchedule schedule = default_schedule(tau_s, cfg.steps);

  row.delta_ent_analytic =
      oracle::analytic_delta_ent(r, p.gamma_m, tau_s, n_bath);
  row.epr_analytic = oracle::analytic_epr(r, p.gamma_m, tau_s, n_bath);

  if (cfg.mode != RunMode::mc) {
    const auto v = oracle::propagate_covariance(p, schedule);
    const auto crit = oracle::criterion_from_covariance(v);
    row.delta_ent_oracle = crit.delta_ent.value;
    row.fidelity_oracle = oracle::gaussian_fidelity(oracle::output_block(v), r);
    row.g_opt = crit.delta_ent.gain;
    row.theta_opt = crit.delta_ent.phase;
  }

  if (cfg.mode != RunMode::oracle) {
    const StageTable table(schedule);
    const std::uint64_t stream_base =
        static_cast<std::uint64_t>(point_index) * kPointStreamStride;
    const BatchResult batch = run_batch(p, table, cfg.seed, stream_base,
                                        cfg.trajectories, n_workers);
    row.n_traj = cfg.trajectories;
    row.rejected_traj = batch.rejected;

    const MomentAccumulator acc = accumulate(batch.samples);
    const std::uint64_t bseed = bootstrap_seed_for(cfg.seed, point_index);
    const CriterionResult dent = delta_ent(acc, bseed);
    const CriterionResult e12 =
        epr_steering(acc, SteeringDirection::one_by_two, bseed);
    const CriterionResult e21 =
        epr_steering(acc, SteeringDirection::two_by_one, bseed);
    row.delta_ent_mc = dent.value;
    row.delta_ent_err = dent.std_error;
    row.epr12 = e12.value;
    row.epr12_err = e12.std_error;
    row.epr21 = e21.value;
    row.epr21_err = e21.std_error;
    row.g_opt = dent.gain;
    row.theta_opt = dent.phase;

    if (acc.count() >= 10000) {
      const FidelityEstimate f = fidelity_mc(batch.samples, r, 100, bseed);
      row.fidelity_mc = f.value;
      row.fidelity_err = f.std_error;
      row.fidelity_high_variance = f.high_variance;
    }
  }

  row.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return row;
}

std::vector<ResultRow> run_sweep(
    const SweepConfig& cfg, int n_workers,
    const std::function<void(const ResultRow&)>& on_row) {
  std::vector<ResultRow> rows;
  long long point = 0;
  for (double r : cfg.squeezing)
    for (double ts : cfg.storage_time)
      for (double nb : cfg.n_bath) {
        rows.push_back(run_sweep_point(cfg, r, ts, nb, point, n_workers));
        ++point;
        if (on_row) on_row(rows.back());
      }
  return rows;
}

std::string csv_header() {
  return "n_bath,tau_s,r,delta_ent_mc,delta_ent_err,delta_ent_analytic,"
         "delta_ent_oracle,epr12,epr12_err,epr21,epr21_err,epr_analytic,"
         "fidelity_mc,fidelity_err,fidelity_oracle,g_opt,theta_opt,n_traj,"
         "rejected_traj,seed";
}

std::string csv_line(const ResultRow& w) {
  std::ostringstream os;
  os << fmt(w.n_bath) << ',' << fmt(w.tau_s) << ',' << fmt(w.r) << ','
     << fmt(w.delta_ent_mc) << ',' << fmt(w.delta_ent_err) << ','
     << fmt(w.delta_ent_analytic) << ',' << fmt(w.delta_ent_oracle) << ','
     << fmt(w.epr12) << ',' << fmt(w.epr12_err) << ',' << fmt(w.epr21) << ','
     << fmt(w.epr21_err) << ',' << fmt(w.epr_analytic) << ','
     << fmt(w.fidelity_mc) << ',' << fmt(w.fidelity_err) << ','
     << fmt(w.fidelity_oracle) << ',' << fmt(w.g_opt) << ','
     << fmt(w.theta_opt) << ',' << w.n_traj << ',' << w.rejected_traj << ','
     << w.seed;
  return os.str();
}

void write_outputs(const std::vector<ResultRow>& rows, const SweepConfig& cfg,
                   const std::string& out_dir) {
  if (rows.empty()) throw std::invalid_argument("write_outputs: no rows");
  namespace fs = std::filesystem;
  const fs::path dir(out_dir.empty() ? "." : out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);

  auto open = [&](const std::string& name) {
    std::ofstream f(dir / name, std::ios::binary);  // LF endings everywhere
    if (!f) throw std::runtime_error("cannot write " + (dir / name).string());
    return f;
  };

  {
    std::ofstream csv = open(cfg.out + ".csv");
    csv << csv_header() << '\n';
    for (const ResultRow& r : rows) csv << csv_line(r) << '\n';
  }
  {
    std::ofstream timing = open(cfg.out + "_timing.csv");
    timing << "n_bath,tau_s,r,wall_time_s\n";
    for (const ResultRow& r : rows)
      timing << fmt(r.n_bath) << ',' << fmt(r.tau_s) << ',' << fmt(r.r) << ','
             << fmt(r.wall_time_s) << '\n';
  }

  // one plot file per figure; one block per (r, tau_s) series
  struct Fig {
    const char* name;
    const char* columns;
    std::function<std::string(const ResultRow&)> line;
  };
  const Fig figs[] = {
      {"_entanglement.dat", "n_bath delta_ent_mc err analytic oracle",
       [](const ResultRow& w) {
         return fmt(w.n_bath) + ' ' + fmt(w.delta_ent_mc) + ' ' +
                fmt(w.delta_ent_err) + ' ' + fmt(w.delta_ent_analytic) + ' ' +
                fmt(w.delta_ent_oracle);
       }},
      {"_fidelity.dat", "n_bath fidelity_mc err oracle",
       [](const ResultRow& w) {
         return fmt(w.n_bath) + ' ' + fmt(w.fidelity_mc) + ' ' +
                fmt(w.fidelity_err) + ' ' + fmt(w.fidelity_oracle);
       }},
      {"_steering.dat", "n_bath epr12 err epr21 err analytic",
       [](const ResultRow& w) {
         return fmt(w.n_bath) + ' ' + fmt(w.epr12) + ' ' + fmt(w.epr12_err) +
                ' ' + fmt(w.epr21) + ' ' + fmt(w.epr21_err) + ' ' +
                fmt(w.epr_analytic);
       }},
  };
  for (const Fig& fig : figs) {
    std::ofstream f = open(cfg.out + fig.name);
    f << "# " << fig.columns << '\n';
    bool first = true;
    for (double r : cfg.squeezing)
      for (double ts : cfg.storage_time) {
        if (!first) f << '\n';
        first = false;
        f << "# series r=" << fmt(r) << " tau_s=" << fmt(ts) << '\n';
        for (const ResultRow& row : rows)
          if (row.r == r && row.tau_s == ts) f << fig.line(row) << '\n';
      }
  }
}

}  // namespace omsim
