#include "omsim/sampling.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace omsim {

std::uint64_t RngStream::uniform_below(std::uint64_t n) {
  if (n == 0) throw std::domain_error("uniform_below: n must be >= 1");
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n + 1) % n;
  for (;;) {
    const auto b = next_block();
    const std::uint64_t v = (static_cast<std::uint64_t>(b[0]) << 32) | b[1];
    if (v <= limit) return v % n;
  }
}

std::pair<cplx, cplx> source_pair_from_normals(double xp, double yp, double xm,
                                               double ym, double r) noexcept {
  const cplx a_plus = cplx{xp, yp} * (std::exp(r) / 2.0);
  const cplx a_minus = cplx{xm, ym} * (std::exp(-r) / 2.0);
  constexpr double inv_sqrt2 = std::numbers::sqrt2 / 2.0;
  return {(a_plus + a_minus) * inv_sqrt2,
          std::conj(a_plus - a_minus) * inv_sqrt2};
}

std::pair<cplx, cplx> sample_source_pair(double r, RngStream& rng) {
  if (r < 0.0) throw std::domain_error("squeezing r must be >= 0");
  const double xp = rng.normal();
  const double yp = rng.normal();
  const double xm = rng.normal();
  const double ym = rng.normal();
  return source_pair_from_normals(xp, yp, xm, ym, r);
}

cplx sample_vacuum(RngStream& rng) {
  return cplx{rng.normal(), rng.normal()} * 0.5;
}

cplx sample_thermal(double n0, RngStream& rng) {
  if (n0 < 0.0) throw std::domain_error("thermal occupation must be >= 0");
  const double s = std::sqrt(0.5 * (n0 + 0.5));
  return cplx{rng.normal(), rng.normal()} * s;
}

NoiseIncrements draw_noise(double dt, RngStream& rng) {
  if (!(dt > 0.0)) throw std::domain_error("dt must be > 0");
  const double s = std::sqrt(0.25 * dt);
  NoiseIncrements out;
  for (auto& x : out.xi) x = cplx{rng.normal(), rng.normal()} * s;
  return out;
}

TrajectoryState initial_state(const ProtocolParams& p, RngStream& rng) {
  p.validate();
  TrajectoryState st{};
  auto [a1, a2] = sample_source_pair(p.squeezing_r, rng);
  st.alpha[0] = a1;
  st.alpha[1] = a2;
  st.delta[0] = sample_vacuum(rng);
  st.delta[1] = sample_vacuum(rng);
  st.beta[0] = sample_thermal(p.n_mech_init, rng);
  st.beta[1] = sample_thermal(p.n_mech_init, rng);
  st.a_out[0] = 0.0;
  st.a_out[1] = 0.0;
  return st;
}

}  // namespace omsim
