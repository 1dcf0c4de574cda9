#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <utility>

#include "omsim/model.hpp"

namespace omsim {

using cplx = std::complex<double>;

/// One Philox4x32-10 block: 4 output words from a 128-bit counter and a
/// 64-bit key. Exposed for known-answer tests. Inline: this sits on the
/// innermost Monte Carlo path.
inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> c,
                                               std::array<std::uint32_t, 2> key) {
  constexpr std::uint32_t m0 = 0xD2511F53u, m1 = 0xCD9E8D57u;
  constexpr std::uint32_t w0 = 0x9E3779B9u, w1 = 0xBB67AE85u;
  std::uint32_t k0 = key[0], k1 = key[1];
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(m0) * c[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(m1) * c[2];
    c = {static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k0,
         static_cast<std::uint32_t>(p1),
         static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k1,
         static_cast<std::uint32_t>(p0)};
    k0 += w0;
    k1 += w1;
  }
  return c;
}

/// Counter-based random stream. Distinct (seed, stream_id) pairs give
/// statistically independent, reproducible sequences; trajectories own one
/// stream each and never share state, so batches parallelize freely.
///
/// Layout: key = seed, counter words = (draw counter, stream_id). Normals
/// come from Box-Muller over the four 32-bit words of a block, four per
/// block, buffered for odd consumption patterns.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id)
      : seed_(seed), stream_(stream_id) {}

  std::array<std::uint32_t, 4> next_block() {
    const std::array<std::uint32_t, 4> ctr = {
        static_cast<std::uint32_t>(counter_),
        static_cast<std::uint32_t>(counter_ >> 32),
        static_cast<std::uint32_t>(stream_),
        static_cast<std::uint32_t>(stream_ >> 32),
    };
    const std::array<std::uint32_t, 2> key = {
        static_cast<std::uint32_t>(seed_),
        static_cast<std::uint32_t>(seed_ >> 32),
    };
    ++counter_;
    return philox4x32(ctr, key);
  }

  /// Four standard normals from one block.
  std::array<double, 4> normal4() {
    const auto b = next_block();
    // (0,1] for the logarithm, [0,1) for the angle
    const double u0 = (static_cast<double>(b[0]) + 1.0) * 0x1p-32;
    const double t0 = k_two_pi * (static_cast<double>(b[1]) * 0x1p-32);
    const double u1 = (static_cast<double>(b[2]) + 1.0) * 0x1p-32;
    const double t1 = k_two_pi * (static_cast<double>(b[3]) * 0x1p-32);
    const double r0 = std::sqrt(-2.0 * std::log(u0));
    const double r1 = std::sqrt(-2.0 * std::log(u1));
    return {r0 * std::cos(t0), r0 * std::sin(t0), r1 * std::cos(t1),
            r1 * std::sin(t1)};
  }

  /// Standard normal deviate.
  double normal() {
    if (buffered_ == 0) {
      buf_ = normal4();
      buffered_ = 4;
    }
    return buf_[4 - buffered_--];
  }

  /// Uniform integer in [0, n), n >= 1. Rejection sampled, no modulo bias.
  std::uint64_t uniform_below(std::uint64_t n);

  /// Bulk path for the integrator: writes 4 * n_blocks standard normals,
  /// advancing the counter by n_blocks. Same Box-Muller map as normal4 but
  /// compiled with vector math, so the low bits of the values differ from
  /// the scalar path; the run itself stays deterministic.
  void fill_normals(double* dst, int n_blocks);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
  std::array<double, 4> buf_{};
  int buffered_ = 0;
};

/// Mode amplitudes for one trajectory: source pair alpha, optomechanical
/// cavity fluctuations delta, mechanical modes beta, and the accumulated
/// temporal output modes a_out (zero until the readout window).
struct TrajectoryState {
  cplx alpha[2];
  cplx delta[2];
  cplx beta[2];
  cplx a_out[2];
};

/// Per-step Wiener increments. xi[0], xi[1] drive the optical vacuum inputs
/// of modes 1 and 2 (shared by source, cavity and output record within a
/// step); xi[2], xi[3] are the mechanical thermal noises. Each complex
/// component has variance dt/4, so <xi_k xi_l*> = delta_kl dt / 2.
struct NoiseIncrements {
  cplx xi[4];
};

/// Deterministic part of the source-pair sampling map: unit-variance
/// normals (xp, yp, xm, ym) to the squeezed-basis amplitudes
///   a_pm = (x + i y) e^{+-r} / 2,
/// then alpha1 = (a_p + a_m)/sqrt2, alpha2 = conj(a_p - a_m)/sqrt2.
std::pair<cplx, cplx> source_pair_from_normals(double xp, double yp, double xm,
                                               double ym, double r) noexcept;

/// Samples the two-mode squeezed source. Symmetric-ordered moments:
/// <|alpha_k|^2> = cosh(2r)/2, <alpha1 alpha2> = sinh(2r)/2,
/// <alpha1 alpha2*> = 0.
std::pair<cplx, cplx> sample_source_pair(double r, RngStream& rng);

/// Vacuum amplitude: circular complex Gaussian with <|z|^2> = 1/2
/// (variance 1/4 per quadrature).
cplx sample_vacuum(RngStream& rng);

/// Thermal amplitude with mean occupation n0: <|z|^2> = n0 + 1/2.
/// Throws std::domain_error for n0 < 0.
cplx sample_thermal(double n0, RngStream& rng);

/// Wiener increments for one step of width dt > 0.
NoiseIncrements draw_noise(double dt, RngStream& rng);

/// Full initial state at tau = 0: squeezed source pair, vacuum cavities,
/// thermal mechanics at n_mech_init, zero output accumulators. Consumes
/// twelve normals in a fixed, documented order (source, delta1, delta2,
/// beta1, beta2).
TrajectoryState initial_state(const ProtocolParams& p, RngStream& rng);

}  // namespace omsim
