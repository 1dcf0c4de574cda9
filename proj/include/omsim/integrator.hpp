#pragma once

#include <cstdint>
#include <vector>

#include "omsim/model.hpp"
#include "omsim/pulses.hpp"
#include "omsim/sampling.hpp"

namespace omsim {

/// Pulse-shape coefficients precomputed on the half-step stage grid
/// tau_j = j dt/2, j = 0..2 n_steps, shared read-only by all trajectories.
///
/// The readout window opens exactly at the step boundary tau_max / 2
/// (stage index n_steps; first_read_step for the step grid). Gating is
/// per step, not per stage, so every integration step sees a smooth
/// integrand; the envelope wu is stored ungated.
struct StageTable {
  struct Coeffs {
    double kappa;           // source transmissivity
    double sqrt_2kappa;     // noise coupling into the source / output record
    double two_sqrt_kappa;  // source drive onto the cavity
    double g;               // optomechanical coupling pulse
    double wu;              // readout envelope, restricted-window norm
  };

  explicit StageTable(const PulseSchedule& s, bool zero_coupling = false);

  PulseSchedule schedule;
  double dt;
  int first_read_step;        // (n_steps + 1) / 2
  std::vector<Coeffs> stage;  // 2 n_steps + 1 entries
};

/// Deterministic time derivatives of the six dynamical amplitudes; the
/// output accumulators are handled by accumulate_output. Linear in the
/// state for fixed tau.
struct DriftEvaluation {
  cplx alpha[2];
  cplx delta[2];
  cplx beta[2];
};

/// Drift of the coupled source / cavity / mechanics system:
///   alpha_k' = -kappa alpha_k
///   delta_k' = -delta_k - i g beta_k + 2 sqrt(kappa) alpha_k
///   beta_k'  = -gamma_m beta_k - i g delta_k
DriftEvaluation drift(const TrajectoryState& st, double tau,
                      const ProtocolParams& p, const PulseSchedule& s);

/// Elementary (Euler-Maruyama) noise application for one step. The same
/// optical draw xi_k feeds the source and the cavity of mode k; the output
/// record receives it in accumulate_output, which must be handed the same
/// NoiseIncrements to preserve the cascaded correlation.
void apply_noise(TrajectoryState& st, double tau, const NoiseIncrements& xi,
                 const ProtocolParams& p, const PulseSchedule& s);

/// Adds one step of the projected output integral, gated to the readout
/// window tau >= tau1 + tau_s/2, using the pre-step state:
///   a_out_k += u(tau - tau2) [ (sqrt2 delta_k - sqrt(2 kappa) alpha_k) dt + xi_k ].
void accumulate_output(TrajectoryState& st, double tau, double dt,
                       const NoiseIncrements& xi, const PulseSchedule& s,
                       double norm);

struct RunOptions {
  bool with_noise = true;
  /// Self-test wiring: the output record draws its own noise instead of the
  /// shared cascaded draw. Breaks the vacuum calibration on purpose.
  bool decorrelated_output_noise = false;
};

struct TrajectoryOutput {
  cplx a1;
  cplx a2;
  bool finite;  // false if the state overflowed; sample must be discarded
};

/// Integrates one trajectory from tau = 0 to tau_max with the stochastic
/// 4th-order Runge-Kutta scheme: Wiener increments are drawn once per step
/// and held as a constant effective drive xi/dt across the four stages
/// (valid for additive noise). Pulse factors are evaluated per stage time.
TrajectoryOutput run_trajectory(const ProtocolParams& p, const StageTable& table,
                                RngStream& rng, const RunOptions& opts = {});

/// Noise-free run with a prescribed source amplitude in both modes,
/// recording the full state at every grid point for validation against the
/// closed-form pulse solutions.
struct DeterministicTrace {
  double dt;
  std::vector<TrajectoryState> state;  // n_steps + 1 snapshots
};
DeterministicTrace run_deterministic(const ProtocolParams& p,
                                     const PulseSchedule& s,
                                     cplx source_amplitude);

/// Runs trajectories [0, n_traj) with per-trajectory streams
/// (seed, stream_base + i) distributed over n_workers threads. samples[i]
/// is filled by trajectory i regardless of scheduling, so results do not
/// depend on the worker count. Non-finite trajectories are counted and
/// left as NaN samples.
struct BatchResult {
  std::vector<std::array<cplx, 2>> samples;
  long long rejected = 0;
};
BatchResult run_batch(const ProtocolParams& p, const StageTable& table,
                      std::uint64_t seed, std::uint64_t stream_base,
                      long long n_traj, int n_workers,
                      const RunOptions& opts = {});

}  // namespace omsim
