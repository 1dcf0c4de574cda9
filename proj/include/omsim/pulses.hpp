#pragma once

#include "omsim/model.hpp"

namespace omsim {

/// A finite integration window for a temporal mode.
struct Window {
  double start;
  double end;
  double center;
};

/// 1/cosh(x), clamped to 0 for |x| > 350 where cosh would overflow;
/// the pulse is physically zero that far out.
double sech(double x) noexcept;

/// Source-cavity transmissivity kappa(tau) = [1 + tanh(tau - tau1)] / 2.
/// Strictly inside (0, 1) and monotone increasing.
double kappa(double tau, const PulseSchedule& s) noexcept;

/// Temporal-mode envelope norm * sech(tau - center).
double envelope_u(double tau, double center, double norm);

/// Normalization for a sech envelope restricted to the window w:
///   1 / sqrt(tanh(end - center) - tanh(start - center)),
/// i.e. 1/sqrt(integral of sech^2 over w), so the projected mode keeps a
/// unit commutator on the restricted domain. Tends to sqrt(1/2) as the
/// window widens. Throws std::domain_error on a degenerate window.
double norm_restricted(const Window& w);

/// Optomechanical coupling pulse: -sqrt(2) u(tau - tau1) up to the
/// switchover tau1 + tau_s/2, then -sqrt(2) u(tau - tau2), with the
/// infinite-domain norm sqrt(1/2), hence -sech around each peak.
/// Throws std::domain_error outside [0, tau_max].
double coupling_g(double tau, const PulseSchedule& s);

/// Readout window [tau1 + tau_s/2, tau_max] centered on the read peak tau2.
Window readout_window(const PulseSchedule& s) noexcept;

}  // namespace omsim
