#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "omsim/model.hpp"
#include "omsim/pulses.hpp"

using namespace omsim;

namespace {
const PulseSchedule sched = default_schedule(16.3, 3000);
}

TEST_CASE("kappa hits 1/2 at the write peak and its asymptotes") {
  CHECK(kappa(sched.tau1, sched) == doctest::Approx(0.5).epsilon(1e-15));
  // frozen scalar evaluation of [1 + tanh(-8.17)]/2
  CHECK(kappa(0.0, sched) == doctest::Approx(8.009919122420328e-08).epsilon(1e-9));
  CHECK(kappa(1e6, sched) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("kappa is bounded in (0,1) and monotone") {
  // strict ordering holds wherever doubles can still resolve 1 - tanh;
  // beyond tau1 + ~19 the value saturates to 1 at machine precision
  std::mt19937 gen(7);
  std::uniform_real_distribution<double> u(-8.0, sched.tau1 + 18.0);
  for (int i = 0; i < 2000; ++i) {
    double a = u(gen), b = u(gen);
    if (a > b) std::swap(a, b);
    if (b - a < 1e-12) continue;
    const double ka = kappa(a, sched), kb = kappa(b, sched);
    CHECK(ka > 0.0);
    CHECK(kb < 1.0);
    CHECK(ka < kb);
  }
  CHECK(kappa(sched.tau_max + 100.0, sched) <= 1.0);
}

TEST_CASE("envelope peaks at the norm and is even about the center") {
  const double n = std::sqrt(0.5);
  CHECK(envelope_u(24.47, 24.47, n) == doctest::Approx(n).epsilon(1e-15));
  CHECK(envelope_u(24.47 + 1.0, 24.47, n) ==
        doctest::Approx(0.45824357148465605).epsilon(1e-12));
  CHECK(envelope_u(24.47 + 1.0, 24.47, n) == envelope_u(24.47 - 1.0, 24.47, n));
  CHECK(envelope_u(24.47 + 1e5, 24.47, n) == 0.0);
  CHECK_THROWS_AS((void)envelope_u(0.0, 0.0, 0.0), std::domain_error);
}

TEST_CASE("sech guard avoids overflow far out") {
  CHECK(sech(0.0) == 1.0);
  CHECK(sech(351.0) == 0.0);
  CHECK(sech(-1e6) == 0.0);
  CHECK(std::isfinite(sech(349.9)));
}

TEST_CASE("restricted-window normalization") {
  // effectively infinite window -> sqrt(1/2)
  CHECK(norm_restricted(Window{-400.0, 400.0, 0.0}) ==
        doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));

  // readout window for tau_s = 16.3: within 1e-4 of sqrt(1/2)
  const Window w = readout_window(sched);
  CHECK(w.start == doctest::Approx(16.32));
  CHECK(w.center == doctest::Approx(24.47));
  CHECK(w.end == doctest::Approx(32.64));
  CHECK(norm_restricted(w) == doctest::Approx(0.70711).epsilon(2e-4));
  CHECK(std::abs(norm_restricted(w) - std::sqrt(0.5)) < 1e-4);

  // [-1, 1] about 0: 1/sqrt(2 tanh 1)
  CHECK(norm_restricted(Window{-1.0, 1.0, 0.0}) ==
        doctest::Approx(0.8102577631529769).epsilon(1e-12));

  CHECK_THROWS_AS((void)norm_restricted(Window{1.0, 1.0, 1.0}), std::domain_error);
  CHECK_THROWS_AS((void)norm_restricted(Window{0.0, 1.0, 2.0}), std::domain_error);
}

TEST_CASE("restricted envelope has unit L2 mass over its window") {
  // composite Simpson quadrature of u^2 as an independent check
  for (double ts : {16.3, 40.8, 6.0}) {
    const PulseSchedule s = default_schedule(ts, 3000);
    const Window w = readout_window(s);
    const double n = norm_restricted(w);
    const int m = 200000;
    const double h = (w.end - w.start) / m;
    double acc = 0.0;
    for (int i = 0; i <= m; ++i) {
      const double u = envelope_u(w.start + i * h, w.center, n);
      const double f = u * u;
      acc += (i == 0 || i == m) ? f : (i % 2 ? 4.0 * f : 2.0 * f);
    }
    acc *= h / 3.0;
    CHECK(acc == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("coupling pulse peaks at -1 on both pulses") {
  CHECK(coupling_g(sched.tau1, sched) == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(coupling_g(sched.tau2, sched) == doctest::Approx(-1.0).epsilon(1e-15));
  // equals -sech around each peak
  CHECK(coupling_g(sched.tau1 + 0.5, sched) ==
        doctest::Approx(-1.0 / std::cosh(0.5)).epsilon(1e-14));
  CHECK(coupling_g(sched.tau2 - 0.5, sched) ==
        doctest::Approx(-1.0 / std::cosh(0.5)).epsilon(1e-14));
}

TEST_CASE("coupling pulse is continuous at the switchover") {
  const double sw = sched.switchover();
  const double left = coupling_g(std::nextafter(sw, 0.0), sched);
  const double right = coupling_g(std::nextafter(sw, sched.tau_max), sched);
  CHECK(left == doctest::Approx(-0.0005774706711137688).epsilon(1e-6));
  CHECK(std::abs(left - right) < 2.0 * sech(0.5 * sched.tau_s) * 1e-9 + 1e-15);

  // continuity bound holds for a family of schedules
  for (double ts : {6.0, 16.3, 40.8, 81.7}) {
    const PulseSchedule s = default_schedule(ts, 3000);
    const double a = coupling_g(std::nextafter(s.switchover(), 0.0), s);
    const double b = coupling_g(std::nextafter(s.switchover(), s.tau_max), s);
    CHECK(std::abs(a - b) <= 2.0 * sech(0.5 * ts));
  }
}

TEST_CASE("coupling pulse rejects tau outside the run") {
  CHECK_THROWS_AS((void)coupling_g(-0.1, sched), std::domain_error);
  CHECK_THROWS_AS((void)coupling_g(sched.tau_max + 0.1, sched), std::domain_error);
}
