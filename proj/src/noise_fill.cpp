// Bulk Box-Muller filler for the trajectory hot loop. This translation unit
// is compiled with -ffast-math so the log / sincos / sqrt loops lower to the
// glibc vector math routines; nothing here produces or inspects NaNs.

#include <cmath>
#include <cstdint>

#include "omsim/sampling.hpp"

namespace omsim {

void RngStream::fill_normals(double* dst, int n_blocks) {
  constexpr int kChunk = 256;  // blocks per pass; buffers stay L1-resident
  double u[2 * kChunk], t[2 * kChunk], r[2 * kChunk], c[2 * kChunk],
      s[2 * kChunk];

  const std::uint32_t key0 = static_cast<std::uint32_t>(seed_);
  const std::uint32_t key1 = static_cast<std::uint32_t>(seed_ >> 32);
  const std::uint32_t s0 = static_cast<std::uint32_t>(stream_);
  const std::uint32_t s1 = static_cast<std::uint32_t>(stream_ >> 32);

  int done = 0;
  while (done < n_blocks) {
    const int m = std::min(kChunk, n_blocks - done);
    for (int b = 0; b < m; ++b) {
      const std::uint64_t ctr = counter_ + static_cast<std::uint64_t>(b);
      const auto blk = philox4x32({static_cast<std::uint32_t>(ctr),
                                   static_cast<std::uint32_t>(ctr >> 32), s0, s1},
                                  {key0, key1});
      u[2 * b] = (static_cast<double>(blk[0]) + 1.0) * 0x1p-32;
      t[2 * b] = k_two_pi * (static_cast<double>(blk[1]) * 0x1p-32);
      u[2 * b + 1] = (static_cast<double>(blk[2]) + 1.0) * 0x1p-32;
      t[2 * b + 1] = k_two_pi * (static_cast<double>(blk[3]) * 0x1p-32);
    }
    const int n = 2 * m;
    for (int i = 0; i < n; ++i) r[i] = std::sqrt(-2.0 * std::log(u[i]));
    // separate loops so each lowers to the vector cos / sin routines
    for (int i = 0; i < n; ++i) c[i] = std::cos(t[i]);
    for (int i = 0; i < n; ++i) s[i] = std::sin(t[i]);
    double* out = dst + 4 * done;
    for (int i = 0; i < n; ++i) {
      out[2 * i] = r[i] * c[i];
      out[2 * i + 1] = r[i] * s[i];
    }
    counter_ += static_cast<std::uint64_t>(m);
    done += m;
  }
}

}  // namespace omsim
