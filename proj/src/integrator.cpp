#include "omsim/integrator.hpp"

#include <cmath>
#include <cstring>
#include <exception>
#include <numbers>
#include <stdexcept>
#include <thread>

namespace omsim {

namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;

// Flat state layout, type-major with mode stride 2:
//   [0..3]  Re/Im alpha_1, Re/Im alpha_2
//   [4..7]  Re/Im delta_1, Re/Im delta_2
//   [8..11] Re/Im beta_1,  Re/Im beta_2
//   [12..15] Re/Im a_out_1, Re/Im a_out_2
using Flat = std::array<double, 16>;

inline Flat flatten(const TrajectoryState& st) {
  Flat y;
  for (int m = 0; m < 2; ++m) {
    y[2 * m] = st.alpha[m].real();
    y[2 * m + 1] = st.alpha[m].imag();
    y[4 + 2 * m] = st.delta[m].real();
    y[5 + 2 * m] = st.delta[m].imag();
    y[8 + 2 * m] = st.beta[m].real();
    y[9 + 2 * m] = st.beta[m].imag();
    y[12 + 2 * m] = st.a_out[m].real();
    y[13 + 2 * m] = st.a_out[m].imag();
  }
  return y;
}

inline TrajectoryState unflatten(const Flat& y) {
  TrajectoryState st;
  for (int m = 0; m < 2; ++m) {
    st.alpha[m] = {y[2 * m], y[2 * m + 1]};
    st.delta[m] = {y[4 + 2 * m], y[5 + 2 * m]};
    st.beta[m] = {y[8 + 2 * m], y[9 + 2 * m]};
    st.a_out[m] = {y[12 + 2 * m], y[13 + 2 * m]};
  }
  return st;
}

// Full derivative including the output accumulators, with the (constant per
// step) effective noise drive eta = xi/dt. eta layout: optical x/y for modes
// 1,2 then mechanical x/y for modes 1,2; eta_out is the drive seen by the
// output record (identical to the optical eta unless decorrelated).
inline void stage_drift(const Flat& y, const StageTable::Coeffs& c,
                        double gate, double gamma_m, double mech_amp,
                        const double* eta, const double* eta_out, Flat& dy) {
  const double wu = gate * c.wu;
  for (int m = 0; m < 2; ++m) {
    const double ax = y[2 * m], ay = y[2 * m + 1];
    const double dx = y[4 + 2 * m], dyv = y[5 + 2 * m];
    const double bx = y[8 + 2 * m], by = y[9 + 2 * m];
    const double ex = eta[2 * m], ey = eta[2 * m + 1];
    const double mx = eta[4 + 2 * m], my = eta[5 + 2 * m];
    const double ox = eta_out[2 * m], oy = eta_out[2 * m + 1];

    dy[2 * m] = -c.kappa * ax + c.sqrt_2kappa * ex;
    dy[2 * m + 1] = -c.kappa * ay + c.sqrt_2kappa * ey;
    dy[4 + 2 * m] = -dx + c.g * by + c.two_sqrt_kappa * ax - kSqrt2 * ex;
    dy[5 + 2 * m] = -dyv - c.g * bx + c.two_sqrt_kappa * ay - kSqrt2 * ey;
    dy[8 + 2 * m] = -gamma_m * bx + c.g * dyv + mech_amp * mx;
    dy[9 + 2 * m] = -gamma_m * by - c.g * dx + mech_amp * my;
    dy[12 + 2 * m] = wu * (kSqrt2 * dx - c.sqrt_2kappa * ax + ox);
    dy[13 + 2 * m] = wu * (kSqrt2 * dyv - c.sqrt_2kappa * ay + oy);
  }
}

// One RK4 step over [tau_i, tau_i + dt] with stage coefficients at indices
// 2i, 2i+1, 2i+2 of the table.
inline void rk4_step(Flat& y, const StageTable& t, int i, double gamma_m,
                     double mech_amp, const double* eta, const double* eta_out) {
  const double h = t.dt;
  const double gate = (i >= t.first_read_step) ? 1.0 : 0.0;
  const auto& c0 = t.stage[2 * i];
  const auto& cm = t.stage[2 * i + 1];
  const auto& c1 = t.stage[2 * i + 2];
  Flat k1, k2, k3, k4, tmp;
  stage_drift(y, c0, gate, gamma_m, mech_amp, eta, eta_out, k1);
  for (int j = 0; j < 16; ++j) tmp[j] = y[j] + 0.5 * h * k1[j];
  stage_drift(tmp, cm, gate, gamma_m, mech_amp, eta, eta_out, k2);
  for (int j = 0; j < 16; ++j) tmp[j] = y[j] + 0.5 * h * k2[j];
  stage_drift(tmp, cm, gate, gamma_m, mech_amp, eta, eta_out, k3);
  for (int j = 0; j < 16; ++j) tmp[j] = y[j] + h * k3[j];
  stage_drift(tmp, c1, gate, gamma_m, mech_amp, eta, eta_out, k4);
  const double w = h / 6.0;
  for (int j = 0; j < 16; ++j)
    y[j] += w * (k1[j] + 2.0 * (k2[j] + k3[j]) + k4[j]);
}

inline double mech_noise_amp(const ProtocolParams& p) {
  return std::sqrt(2.0 * p.gamma_m * (2.0 * p.n_bath + 1.0));
}

}  // namespace

StageTable::StageTable(const PulseSchedule& s, bool zero_coupling)
    : schedule(s), dt(s.dt()), first_read_step((s.n_steps + 1) / 2) {
  const double norm = norm_restricted(readout_window(s));
  const int n2 = 2 * s.n_steps;
  stage.resize(n2 + 1);
  for (int j = 0; j <= n2; ++j) {
    const double tau = 0.5 * j * dt;
    Coeffs c;
    c.kappa = kappa(tau, s);
    c.sqrt_2kappa = std::sqrt(2.0 * c.kappa);
    c.two_sqrt_kappa = 2.0 * std::sqrt(c.kappa);
    // the write/read switchover falls exactly on stage index n_steps
    const double center = (j <= s.n_steps) ? s.tau1 : s.tau2;
    c.g = zero_coupling ? 0.0 : -sech(tau - center);
    c.wu = envelope_u(tau, s.tau2, norm);
    stage[j] = c;
  }
}

DriftEvaluation drift(const TrajectoryState& st, double tau,
                      const ProtocolParams& p, const PulseSchedule& s) {
  const double k = kappa(tau, s);
  const double g = coupling_g(tau, s);
  const cplx ig{0.0, g};
  DriftEvaluation d;
  for (int m = 0; m < 2; ++m) {
    d.alpha[m] = -k * st.alpha[m];
    d.delta[m] = -st.delta[m] - ig * st.beta[m] + 2.0 * std::sqrt(k) * st.alpha[m];
    d.beta[m] = -p.gamma_m * st.beta[m] - ig * st.delta[m];
  }
  return d;
}

void apply_noise(TrajectoryState& st, double tau, const NoiseIncrements& xi,
                 const ProtocolParams& p, const PulseSchedule& s) {
  const double s2k = std::sqrt(2.0 * kappa(tau, s));
  const double mech = mech_noise_amp(p);
  for (int m = 0; m < 2; ++m) {
    st.alpha[m] += s2k * xi.xi[m];
    st.delta[m] -= kSqrt2 * xi.xi[m];
    st.beta[m] += mech * xi.xi[2 + m];
  }
}

void accumulate_output(TrajectoryState& st, double tau, double dt,
                       const NoiseIncrements& xi, const PulseSchedule& s,
                       double norm) {
  if (tau < s.switchover()) return;
  const double u = envelope_u(tau, s.tau2, norm);
  const double s2k = std::sqrt(2.0 * kappa(tau, s));
  for (int m = 0; m < 2; ++m) {
    st.a_out[m] +=
        u * ((kSqrt2 * st.delta[m] - s2k * st.alpha[m]) * dt + xi.xi[m]);
  }
}

TrajectoryOutput run_trajectory(const ProtocolParams& p, const StageTable& table,
                                RngStream& rng, const RunOptions& opts) {
  const int n = table.schedule.n_steps;
  const double h = table.dt;
  const double gamma_m = p.gamma_m;
  const double mech = mech_noise_amp(p);
  // per-component Wiener std sqrt(h/4), as an effective constant drive /h
  const double drive = opts.with_noise ? std::sqrt(0.25 * h) / h : 0.0;

  Flat y = flatten(initial_state(p, rng));
  double eta[8] = {};
  double eta_sep[8] = {};
  const double* eta_out = eta;
  if (opts.decorrelated_output_noise) eta_out = eta_sep;

  // noise prefetched in chunks through the bulk Box-Muller path; 2 blocks
  // (optical then mechanical draws) per step, 3 with the self-test wiring
  constexpr int kChunkSteps = 128;
  const int blocks_per_step = opts.decorrelated_output_noise ? 3 : 2;
  double noise[kChunkSteps * 12];

  for (int base = 0; base < n; base += kChunkSteps) {
    const int steps = std::min(kChunkSteps, n - base);
    if (opts.with_noise) rng.fill_normals(noise, steps * blocks_per_step);
    for (int k = 0; k < steps; ++k) {
      if (opts.with_noise) {
        const double* z = noise + 4 * blocks_per_step * k;
        for (int j = 0; j < 8; ++j) eta[j] = drive * z[j];
        if (opts.decorrelated_output_noise)
          for (int j = 0; j < 4; ++j) eta_sep[j] = drive * z[8 + j];
      }
      rk4_step(y, table, base + k, gamma_m, mech, eta, eta_out);
    }
  }

  bool finite = true;
  for (double v : y) finite = finite && std::isfinite(v);
  return TrajectoryOutput{{y[12], y[13]}, {y[14], y[15]}, finite};
}

DeterministicTrace run_deterministic(const ProtocolParams& p,
                                     const PulseSchedule& s,
                                     cplx source_amplitude) {
  const StageTable table(s);
  DeterministicTrace tr;
  tr.dt = table.dt;
  tr.state.reserve(s.n_steps + 1);

  Flat y{};
  TrajectoryState st{};
  st.alpha[0] = source_amplitude;
  st.alpha[1] = source_amplitude;
  y = flatten(st);
  tr.state.push_back(st);

  const double eta[8] = {};
  for (int i = 0; i < s.n_steps; ++i) {
    rk4_step(y, table, i, p.gamma_m, 0.0, eta, eta);
    tr.state.push_back(unflatten(y));
  }
  return tr;
}

BatchResult run_batch(const ProtocolParams& p, const StageTable& table,
                      std::uint64_t seed, std::uint64_t stream_base,
                      long long n_traj, int n_workers, const RunOptions& opts) {
  p.validate();
  if (n_traj < 1) throw std::invalid_argument("n_traj must be >= 1");
  if (n_workers < 1) n_workers = 1;

  BatchResult out;
  out.samples.assign(static_cast<std::size_t>(n_traj),
                     {cplx{0.0, 0.0}, cplx{0.0, 0.0}});

  std::vector<long long> rejected(n_workers, 0);
  std::vector<std::exception_ptr> errors(n_workers);

  auto work = [&](int w) {
    const long long lo = n_traj * w / n_workers;
    const long long hi = n_traj * (w + 1) / n_workers;
    try {
      for (long long i = lo; i < hi; ++i) {
        RngStream rng(seed, stream_base + static_cast<std::uint64_t>(i));
        const TrajectoryOutput r = run_trajectory(p, table, rng, opts);
        if (r.finite) {
          out.samples[static_cast<std::size_t>(i)] = {r.a1, r.a2};
        } else {
          const double nan = std::nan("");
          out.samples[static_cast<std::size_t>(i)] = {cplx{nan, nan},
                                                      cplx{nan, nan}};
          ++rejected[w];
        }
      }
    } catch (...) {
      errors[w] = std::current_exception();
    }
  };

  if (n_workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }

  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  for (long long r : rejected) out.rejected += r;
  return out;
}

}  // namespace omsim
