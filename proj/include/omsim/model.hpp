#pragma once

namespace omsim {

// Exact SI defining constants (2019 redefinition).
inline constexpr double k_planck = 6.62607015e-34;   // J s
inline constexpr double k_boltzmann = 1.380649e-23;  // J / K
inline constexpr double k_two_pi = 6.283185307179586;

/// Laboratory-frame parameters. All rates are ordinary frequencies in Hz
/// (the nu = omega/2pi values); temperature in kelvin.
struct PhysicalParams {
  double cavity_decay_hz;     // optomechanical cavity linewidth Gamma_c/2pi
  double mech_frequency_hz;   // mechanical resonance nu_m
  double mech_damping_hz;
  double coupling_hz;         // bare optomechanical coupling scale
  double bath_temperature_k;

  /// Throws std::domain_error unless all fields are strictly positive and
  /// the oscillator is underdamped (mech_frequency_hz > mech_damping_hz).
  void validate() const;
};

/// Dimensionless protocol parameters on the cavity time base tau = Gamma_c t.
///
/// Convention: gamma_m and chi0 are angular rates over Gamma_c, so a stored
/// mechanical state decays in variance as exp(-2 gamma_m tau_s).  omega_m is
/// the plain resonance-frequency ratio nu_m / (Gamma_c/2pi); it enters the
/// thermal occupation (through the physical-unit originals) and is otherwise
/// bookkeeping, since the rotating frame already absorbs the oscillation.
struct ProtocolParams {
  double gamma_m;      // mechanical amplitude damping rate
  double omega_m;      // mechanical resonance frequency ratio
  double squeezing_r;  // source two-mode squeezing parameter
  double n_bath;       // mean phonon number of the mechanical reservoir
  double n_mech_init;  // initial mechanical occupation (thermalized start: n_bath)
  double chi0;         // coupling scale; g(tau) is prescribed, so not dynamical

  void validate() const;  // throws std::domain_error on violated invariants
};

/// Pulse timing on the dimensionless axis. tau1 is the write-pulse peak,
/// tau2 = tau1 + tau_s the read-pulse peak, tau_max = 2 tau1 + tau_s the end
/// of the run. The write/read switchover sits at tau1 + tau_s/2 = tau_max/2.
struct PulseSchedule {
  double tau1;
  double tau_s;
  double tau2;
  double tau_max;
  int n_steps;

  double dt() const { return tau_max / n_steps; }
  double switchover() const { return tau1 + 0.5 * tau_s; }
};

/// Builds a schedule with the derived fields exact by construction.
/// Requires tau1 > 3 (edge truncation below 1e-2 in tanh), tau_s >= 0
/// (zero is a degenerate back-to-back pulse pair, allowed for limit tests)
/// and n_steps >= 100.
PulseSchedule make_schedule(double tau1, double tau_s, int n_steps);

/// Schedule with the reference write-pulse peak tau1 = 8.17.
PulseSchedule default_schedule(double tau_s, int n_steps = 3000);

/// Bose occupation of the mechanical bath,
///   n = 1 / (exp(h nu_m / kB T) - 1),
/// evaluated with the physical resonance frequency. Returns 0 at T = 0;
/// throws std::domain_error for T < 0.
double thermal_occupation(const PhysicalParams& p);

/// Converts physical rates to the dimensionless time base by plain ratio
/// against cavity_decay_hz (identical for angular rates) and fills n_bath
/// via thermal_occupation. n_mech_init defaults to n_bath.
ProtocolParams to_dimensionless(const PhysicalParams& p, double squeezing_r);

namespace reference {

inline constexpr double tau1 = 8.17;
inline constexpr int n_steps = 3000;

/// Reference device: Gamma_c/2pi = 0.26 GHz, resonance ratio 14.23,
/// dimensionless angular damping 2pi * 1.59e-5 and coupling 2pi * 3.5e-3,
/// 200 mK bath (occupation ~0.70).
PhysicalParams physical();

/// to_dimensionless(physical(), r).
ProtocolParams protocol(double squeezing_r = 1.0);

}  // namespace reference

}  // namespace omsim
