#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "omsim/model.hpp"
#include "omsim/sampling.hpp"

using namespace omsim;

TEST_CASE("philox4x32-10 known-answer vectors") {
  auto r = philox4x32({0, 0, 0, 0}, {0, 0});
  CHECK(r[0] == 0x6627e8d5u);
  CHECK(r[1] == 0xe169c58du);
  CHECK(r[2] == 0xbc57ac4cu);
  CHECK(r[3] == 0x9b00dbd8u);

  r = philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                 {0xffffffffu, 0xffffffffu});
  CHECK(r[0] == 0x408f276du);
  CHECK(r[1] == 0x41c83b0eu);
  CHECK(r[2] == 0xa20bc7c6u);
  CHECK(r[3] == 0x6d5451fdu);

  r = philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                 {0xa4093822u, 0x299f31d0u});
  CHECK(r[0] == 0xd16cfe09u);
  CHECK(r[1] == 0x94fdccebu);
  CHECK(r[2] == 0x5001e420u);
  CHECK(r[3] == 0x24126ea1u);
}

TEST_CASE("streams are reproducible and distinct") {
  RngStream a(42, 7), b(42, 7), c(42, 8), d(43, 7);
  bool differ_c = false, differ_d = false;
  for (int i = 0; i < 1000; ++i) {
    const double va = a.normal();
    CHECK(va == b.normal());  // bit-identical replay
    differ_c |= (va != c.normal());
    differ_d |= (va != d.normal());
  }
  CHECK(differ_c);
  CHECK(differ_d);
}

TEST_CASE("cross-stream independence") {
  const int n = 100000;
  RngStream a(1234, 0), b(1234, 1);
  double sab = 0, saa = 0, sbb = 0;
  for (int i = 0; i < n; ++i) {
    const double x = a.normal(), y = b.normal();
    sab += x * y;
    saa += x * x;
    sbb += y * y;
  }
  const double corr = sab / std::sqrt(saa * sbb);
  CHECK(std::abs(corr) < 4.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("normals have unit variance and zero mean") {
  RngStream rng(5, 0);
  const int n = 1000000;
  double s = 0, s2 = 0, s3 = 0, s4 = 0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal();
    s += x;
    s2 += x * x;
    s3 += x * x * x;
    s4 += x * x * x * x;
  }
  const double se = 1.0 / std::sqrt(static_cast<double>(n));
  CHECK(std::abs(s / n) < 4 * se);
  CHECK(s2 / n == doctest::Approx(1.0).epsilon(4 * std::sqrt(2.0) * se));
  CHECK(std::abs(s3 / n) < 4 * std::sqrt(15.0) * se);
  CHECK(s4 / n == doctest::Approx(3.0).epsilon(5 * std::sqrt(96.0) * se / 3.0));
}

TEST_CASE("uniform_below covers the range without bias") {
  RngStream rng(99, 3);
  std::vector<int> hist(7, 0);
  const int n = 70000;
  for (int i = 0; i < n; ++i) ++hist[rng.uniform_below(7)];
  for (int k = 0; k < 7; ++k)
    CHECK(hist[k] == doctest::Approx(n / 7.0).epsilon(0.05));
  CHECK_THROWS(rng.uniform_below(0));
}

TEST_CASE("source pair deterministic transform") {
  // fixed noise vector (1,0,0,0) at r=0: a_plus = 1/2, alpha1 = alpha2* = 1/(2 sqrt 2)
  auto [a1, a2] = source_pair_from_normals(1.0, 0.0, 0.0, 0.0, 0.0);
  const double v = 1.0 / (2.0 * std::sqrt(2.0));
  CHECK(a1.real() == doctest::Approx(v).epsilon(1e-15));
  CHECK(a1.imag() == 0.0);
  CHECK(a2 == std::conj(a1));
}

TEST_CASE("source pair moments") {
  const int n = 1000000;
  const double se = 1.0 / std::sqrt(static_cast<double>(n));

  SUBCASE("vacuum limit r = 0") {
    RngStream rng(11, 0);
    double m1 = 0, m2 = 0;
    cplx cross = 0;
    for (int i = 0; i < n; ++i) {
      auto [a1, a2] = sample_source_pair(0.0, rng);
      m1 += std::norm(a1);
      m2 += std::norm(a2);
      cross += a1 * a2;
    }
    CHECK(m1 / n == doctest::Approx(0.5).epsilon(6 * se));
    CHECK(m2 / n == doctest::Approx(0.5).epsilon(6 * se));
    CHECK(std::abs(cross) / n < 4 * se);
  }

  SUBCASE("r = 1 second moments") {
    RngStream rng(12, 0);
    double m1 = 0, m2 = 0;
    cplx anom = 0, norm12 = 0;
    for (int i = 0; i < n; ++i) {
      auto [a1, a2] = sample_source_pair(1.0, rng);
      m1 += std::norm(a1);
      m2 += std::norm(a2);
      anom += a1 * a2;
      norm12 += a1 * std::conj(a2);
    }
    // spread of |alpha|^2 grows with cosh(2r); allow ~5 sigma
    const double tol = 5 * std::cosh(2.0) * se;
    CHECK(m1 / n == doctest::Approx(std::cosh(2.0) / 2.0).epsilon(tol));
    CHECK(m2 / n == doctest::Approx(std::cosh(2.0) / 2.0).epsilon(tol));
    CHECK(std::abs(anom / static_cast<double>(n) - std::sinh(2.0) / 2.0) <
          5 * std::cosh(2.0) * se);
    CHECK(std::abs(norm12) / n < 5 * std::cosh(2.0) * se);
  }
}

TEST_CASE("joint quadratures of the source pair are squeezed") {
  // Var(X1 - X2) = Var(P1 + P2) = exp(-2r)/2 in the half-quantum convention
  for (double r : {0.0, 0.7, 1.0}) {
    RngStream rng(13, 0);
    const int n = 400000;
    double sx = 0, sx2 = 0, sp = 0, sp2 = 0;
    for (int i = 0; i < n; ++i) {
      auto [a1, a2] = sample_source_pair(r, rng);
      const double x = a1.real() - a2.real();
      const double p = a1.imag() + a2.imag();
      sx += x;
      sx2 += x * x;
      sp += p;
      sp2 += p * p;
    }
    const double vx = sx2 / n - (sx / n) * (sx / n);
    const double vp = sp2 / n - (sp / n) * (sp / n);
    const double want = std::exp(-2.0 * r) / 2.0;
    const double tol = 5 * std::sqrt(2.0 / n);
    CHECK(vx == doctest::Approx(want).epsilon(tol));
    CHECK(vp == doctest::Approx(want).epsilon(tol));
  }
  RngStream rng(13, 0);
  CHECK_THROWS(sample_source_pair(-0.1, rng));
}

TEST_CASE("vacuum sampling is a symmetric-ordered half quantum") {
  RngStream rng(14, 0);
  const int n = 1000000;
  double vx = 0, vy = 0;
  cplx mean = 0, sq = 0;
  for (int i = 0; i < n; ++i) {
    const cplx z = sample_vacuum(rng);
    vx += z.real() * z.real();
    vy += z.imag() * z.imag();
    mean += z;
    sq += z * z;
  }
  const double se = 0.25 * std::sqrt(2.0 / n);
  CHECK(vx / n == doctest::Approx(0.25).epsilon(3 * se / 0.25));
  CHECK(vy / n == doctest::Approx(0.25).epsilon(3 * se / 0.25));
  CHECK(std::abs(mean) / n < 4 * std::sqrt(0.5 / n));
  CHECK(std::abs(sq) / n < 4 * std::sqrt(0.5 / n));
}

TEST_CASE("thermal sampling carries n0 + 1/2") {
  const int n = 1000000;
  for (double n0 : {0.0, 0.7, 10.0}) {
    RngStream rng(15, static_cast<std::uint64_t>(n0 * 10));
    double m = 0;
    for (int i = 0; i < n; ++i) m += std::norm(sample_thermal(n0, rng));
    const double want = n0 + 0.5;
    // |z|^2 is exponential with mean n0 + 1/2, so sd of the mean is want/sqrt(n)
    CHECK(m / n == doctest::Approx(want).epsilon(4.0 / std::sqrt(n)));
  }
  RngStream rng(15, 0);
  CHECK_THROWS(sample_thermal(-0.5, rng));
}

TEST_CASE("noise increments form a Wiener process") {
  const double dt = 0.01;
  RngStream rng(16, 0);
  const int m = 200000;
  cplx acc = 0;
  double accum2 = 0;       // <|sum xi|^2> over windows of w steps
  const int w = 50;
  cplx win = 0;
  double c12 = 0, sq1 = 0;
  int windows = 0;
  for (int i = 0; i < m; ++i) {
    const NoiseIncrements xi = draw_noise(dt, rng);
    win += xi.xi[0];
    c12 += (xi.xi[0] * std::conj(xi.xi[1])).real();
    sq1 += (xi.xi[0] * xi.xi[0]).real();
    acc += xi.xi[2];
    if ((i + 1) % w == 0) {
      accum2 += std::norm(win);
      win = 0;
      ++windows;
    }
  }
  // additivity: <|sum over w steps|^2> = w dt / 2
  const double want = w * dt / 2.0;
  CHECK(accum2 / windows == doctest::Approx(want).epsilon(5.0 / std::sqrt(windows)));
  // independence across components, circular symmetry
  CHECK(std::abs(c12 / m) < 4 * (dt / 2) / std::sqrt(m));
  CHECK(std::abs(sq1 / m) < 4 * (dt / 2) / std::sqrt(m));
  CHECK_THROWS(draw_noise(0.0, rng));
}

TEST_CASE("initial state layout") {
  ProtocolParams p = reference::protocol(0.5);
  RngStream rng(21, 0);
  const TrajectoryState st = initial_state(p, rng);
  CHECK(st.a_out[0] == cplx{0.0, 0.0});
  CHECK(st.a_out[1] == cplx{0.0, 0.0});
  CHECK(std::isfinite(st.alpha[0].real()));
  CHECK(std::isfinite(st.beta[1].imag()));

  // replay gives the same state
  RngStream rng2(21, 0);
  const TrajectoryState st2 = initial_state(p, rng2);
  CHECK(st.alpha[0] == st2.alpha[0]);
  CHECK(st.beta[1] == st2.beta[1]);
}
