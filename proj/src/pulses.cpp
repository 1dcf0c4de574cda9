#include "omsim/pulses.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace omsim {

double sech(double x) noexcept {
  if (std::abs(x) > 350.0) return 0.0;
  return 1.0 / std::cosh(x);
}

double kappa(double tau, const PulseSchedule& s) noexcept {
  return 0.5 * (1.0 + std::tanh(tau - s.tau1));
}

double envelope_u(double tau, double center, double norm) {
  if (!(norm > 0.0)) throw std::domain_error("envelope norm must be > 0");
  return norm * sech(tau - center);
}

double norm_restricted(const Window& w) {
  if (!(w.start < w.end) || !(w.start <= w.center) || !(w.center <= w.end))
    throw std::domain_error("window must satisfy start < end, start <= center <= end");
  const double mass = std::tanh(w.end - w.center) - std::tanh(w.start - w.center);
  if (!(mass > 0.0)) throw std::domain_error("window carries no envelope mass");
  return 1.0 / std::sqrt(mass);
}

double coupling_g(double tau, const PulseSchedule& s) {
  if (tau < 0.0 || tau > s.tau_max)
    throw std::domain_error("coupling_g: tau outside [0, tau_max]");
  const double center = (tau <= s.switchover()) ? s.tau1 : s.tau2;
  return -std::numbers::sqrt2 * envelope_u(tau, center, std::sqrt(0.5));
}

Window readout_window(const PulseSchedule& s) noexcept {
  return Window{s.switchover(), s.tau_max, s.tau2};
}

}  // namespace omsim
