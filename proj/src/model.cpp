#include "omsim/model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace omsim {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::domain_error(what);
}

}  // namespace

void PhysicalParams::validate() const {
  require(cavity_decay_hz > 0.0, "cavity_decay_hz must be > 0");
  require(mech_frequency_hz > 0.0, "mech_frequency_hz must be > 0");
  require(mech_damping_hz > 0.0, "mech_damping_hz must be > 0");
  require(coupling_hz > 0.0, "coupling_hz must be > 0");
  require(bath_temperature_k > 0.0, "bath_temperature_k must be > 0");
  require(mech_frequency_hz > mech_damping_hz,
          "oscillator must be underdamped (mech_frequency_hz > mech_damping_hz)");
}

void ProtocolParams::validate() const {
  require(gamma_m >= 0.0, "gamma_m must be >= 0");
  require(n_bath >= 0.0, "n_bath must be >= 0");
  require(n_mech_init >= 0.0, "n_mech_init must be >= 0");
  require(squeezing_r >= 0.0, "squeezing_r must be >= 0");
}

PulseSchedule make_schedule(double tau1, double tau_s, int n_steps) {
  require(tau1 > 3.0, "tau1 must be > 3 to keep edge truncation below 1e-2");
  require(tau_s >= 0.0, "tau_s must be >= 0");
  require(n_steps >= 100, "n_steps must be >= 100");
  return PulseSchedule{tau1, tau_s, tau1 + tau_s, 2.0 * tau1 + tau_s, n_steps};
}

PulseSchedule default_schedule(double tau_s, int n_steps) {
  return make_schedule(reference::tau1, tau_s, n_steps);
}

double thermal_occupation(const PhysicalParams& p) {
  require(p.bath_temperature_k >= 0.0, "bath temperature must be >= 0");
  require(p.mech_frequency_hz > 0.0, "mech_frequency_hz must be > 0");
  if (p.bath_temperature_k == 0.0) return 0.0;
  const double x =
      k_planck * p.mech_frequency_hz / (k_boltzmann * p.bath_temperature_k);
  return 1.0 / std::expm1(x);
}

ProtocolParams to_dimensionless(const PhysicalParams& p, double squeezing_r) {
  p.validate();
  require(squeezing_r >= 0.0, "squeezing_r must be >= 0");
  const double n = thermal_occupation(p);
  ProtocolParams out{
      p.mech_damping_hz / p.cavity_decay_hz,
      p.mech_frequency_hz / p.cavity_decay_hz,
      squeezing_r,
      n,
      n,
      p.coupling_hz / p.cavity_decay_hz,
  };
  out.validate();
  return out;
}

namespace reference {

PhysicalParams physical() {
  constexpr double gamma_c = 0.26e9;
  return PhysicalParams{
      gamma_c,
      14.23 * gamma_c,
      k_two_pi * 1.59e-5 * gamma_c,
      k_two_pi * 3.5e-3 * gamma_c,
      0.2,
  };
}

ProtocolParams protocol(double squeezing_r) {
  return to_dimensionless(physical(), squeezing_r);
}

}  // namespace reference

}  // namespace omsim
