#include "omsim/estimators.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace omsim {

namespace {

constexpr double kPi = std::numbers::pi;

inline bool finite_pair(cplx a1, cplx a2) {
  return std::isfinite(a1.real()) && std::isfinite(a1.imag()) &&
         std::isfinite(a2.real()) && std::isfinite(a2.imag());
}

inline Eigen::Matrix4d swap_modes_cov(const Eigen::Matrix4d& c) {
  Eigen::Matrix4d p = Eigen::Matrix4d::Zero();
  p(0, 2) = p(1, 3) = p(2, 0) = p(3, 1) = 1.0;
  return p * c * p.transpose();
}

// variance of the chosen joint quadrature from a covariance matrix
inline double combo_variance(const Eigen::Matrix4d& c, double theta,
                             double gain, QuadCombo combo) {
  Eigen::Vector4d v;
  const double ct = std::cos(theta), st = std::sin(theta);
  if (combo == QuadCombo::minus_x)
    v << 1.0, 0.0, -gain * ct, -gain * st;
  else
    v << 0.0, 1.0, -gain * st, gain * ct;
  return v.dot(c * v);
}

inline double product_signature(const Eigen::Matrix4d& c, double theta,
                                double gain, bool gain_normalized) {
  const double vx = std::max(combo_variance(c, theta, gain, QuadCombo::minus_x), 0.0);
  const double vp = std::max(combo_variance(c, theta, gain, QuadCombo::plus_p), 0.0);
  const double v = 4.0 * std::sqrt(vx) * std::sqrt(vp);
  return gain_normalized ? v / (1.0 + gain * gain) : v;
}

constexpr double kGainMax = 10.0;
constexpr int kGoldenIters = 60;
constexpr double kGolden = 0.6180339887498949;

// golden-section minimum of f on [a, b]
template <typename F>
std::pair<double, double> golden_min(F&& f, double a, double b) {
  double c = b - kGolden * (b - a);
  double d = a + kGolden * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < kGoldenIters; ++i) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kGolden * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kGolden * (b - a);
      fd = f(d);
    }
  }
  const double x = 0.5 * (a + b);
  return {x, f(x)};
}

// minimum over one sign branch of the gain; falls back to a dense scan when
// the coarse profile is not unimodal (sampling noise can do that)
template <typename F>
std::pair<double, double> min_over_gain_branch(F&& f) {
  int dips = 0;
  double prev = f(0.0);
  double best_g = 0.0, best_v = prev;
  bool rising = false;
  for (int i = 1; i <= 16; ++i) {
    const double g = kGainMax * i / 16.0;
    const double v = f(g);
    if (v < best_v) {
      best_v = v;
      best_g = g;
    }
    if (v > prev && !rising) rising = true;
    if (v < prev && rising) {
      ++dips;
      rising = false;
    }
    prev = v;
  }
  if (dips == 0) return golden_min(f, 0.0, kGainMax);
  // non-unimodal profile: dense scan then local refinement
  double coarse_g = best_g;
  for (int i = 0; i <= 1000; ++i) {
    const double g = kGainMax * i / 1000.0;
    const double v = f(g);
    if (v < best_v) {
      best_v = v;
      coarse_g = g;
    }
  }
  const double lo = std::max(0.0, coarse_g - kGainMax / 1000.0);
  const double hi = std::min(kGainMax, coarse_g + kGainMax / 1000.0);
  return golden_min(f, lo, hi);
}

// minimum over the signed gain at fixed theta. The gain is a real constant:
// its sign selects the correlation sense, equivalent to shifting theta by pi,
// and each sign branch is unimodal on its own.
std::pair<double, double> min_over_gain(const Eigen::Matrix4d& c, double theta,
                                        bool gain_normalized) {
  auto pos = [&](double g) { return product_signature(c, theta, g, gain_normalized); };
  auto neg = [&](double g) { return product_signature(c, theta, -g, gain_normalized); };
  const auto [gp, vp] = min_over_gain_branch(pos);
  const auto [gn, vn] = min_over_gain_branch(neg);
  return vp <= vn ? std::pair{gp, vp} : std::pair{-gn, vn};
}

CriterionResult optimize_impl(const Eigen::Matrix4d& cov,
                              const CriterionSettings& s) {
  if (!cov.allFinite()) throw std::runtime_error("criterion: degenerate covariance");
  const Eigen::Matrix4d c = s.swap_modes ? swap_modes_cov(cov) : cov;

  constexpr int kThetaGrid = 64;
  double best_theta = 0.0, best_val = 0.0, best_gain = 0.0;
  bool first = true;
  for (int i = 0; i < kThetaGrid; ++i) {
    const double theta = kPi * i / kThetaGrid;
    auto [g, v] = min_over_gain(c, theta, s.gain_normalized);
    if (first || v < best_val) {
      best_val = v;
      best_theta = theta;
      best_gain = g;
      first = false;
    }
  }
  // refine theta around the best grid point
  auto profile = [&](double theta) {
    return min_over_gain(c, theta, s.gain_normalized).second;
  };
  auto [theta, value] =
      golden_min(profile, best_theta - kPi / kThetaGrid, best_theta + kPi / kThetaGrid);
  auto [gain, value2] = min_over_gain(c, theta, s.gain_normalized);
  if (value2 < value) value = value2;

  double phase = std::fmod(theta, kPi);
  if (phase < 0.0) phase += kPi;
  return CriterionResult{value, gain, phase, 0.0};
}

CriterionResult with_bootstrap(const MomentAccumulator& acc,
                               const CriterionSettings& settings,
                               std::uint64_t bootstrap_seed,
                               std::uint64_t bootstrap_stream) {
  if (acc.count() < 100)
    throw std::runtime_error("criterion: need at least 100 samples");
  CriterionResult r = optimize_impl(acc.covariance(), settings);

  const int nb = acc.n_blocks();
  RngStream rng(bootstrap_seed, bootstrap_stream);
  std::vector<int> pick(nb);
  double sum = 0.0, sum2 = 0.0;
  int got = 0;
  for (int rep = 0; rep < k_bootstrap_replicates; ++rep) {
    for (int& b : pick)
      b = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(nb)));
    Eigen::Matrix4d c;
    try {
      c = acc.covariance_of(pick);
    } catch (const std::exception&) {
      continue;  // replicate landed on too few samples
    }
    const double v = optimize_impl(c, settings).value;
    sum += v;
    sum2 += v * v;
    ++got;
  }
  if (got > 1) {
    const double m = sum / got;
    r.std_error = std::sqrt(std::max(sum2 / got - m * m, 0.0) *
                            (static_cast<double>(got) / (got - 1)));
  }
  return r;
}

}  // namespace

MomentAccumulator::MomentAccumulator(int n_blocks) {
  if (n_blocks < 1) throw std::invalid_argument("n_blocks must be >= 1");
  blocks_.resize(static_cast<std::size_t>(n_blocks));
}

bool MomentAccumulator::add(cplx a1, cplx a2) {
  if (!finite_pair(a1, a2)) return false;
  Block& b = blocks_[static_cast<std::size_t>(cursor_ % n_blocks())];
  ++cursor_;
  Eigen::Vector4d z;
  z << a1.real(), a1.imag(), a2.real(), a2.imag();
  b.n += 1;
  b.s += z;
  b.s2 += z * z.transpose();
  ++total_n_;
  return true;
}

void MomentAccumulator::merge(const MomentAccumulator& other) {
  if (other.n_blocks() != n_blocks())
    throw std::invalid_argument("merge: block counts differ");
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    blocks_[i].n += other.blocks_[i].n;
    blocks_[i].s += other.blocks_[i].s;
    blocks_[i].s2 += other.blocks_[i].s2;
  }
  total_n_ += other.total_n_;
  cursor_ += other.cursor_;
}

Eigen::Vector4d MomentAccumulator::mean() const {
  if (total_n_ < 1) throw std::runtime_error("mean: no samples");
  Eigen::Vector4d s = Eigen::Vector4d::Zero();
  for (const Block& b : blocks_) s += b.s;
  return s / static_cast<double>(total_n_);
}

Eigen::Matrix4d MomentAccumulator::covariance() const {
  if (total_n_ < 2) throw std::runtime_error("covariance: need >= 2 samples");
  Eigen::Vector4d s = Eigen::Vector4d::Zero();
  Eigen::Matrix4d s2 = Eigen::Matrix4d::Zero();
  for (const Block& b : blocks_) {
    s += b.s;
    s2 += b.s2;
  }
  const double n = static_cast<double>(total_n_);
  const Eigen::Vector4d m = s / n;
  return (s2 - n * (m * m.transpose())) / (n - 1.0);
}

Eigen::Matrix4d MomentAccumulator::covariance_of(
    std::span<const int> block_ids) const {
  long long n = 0;
  Eigen::Vector4d s = Eigen::Vector4d::Zero();
  Eigen::Matrix4d s2 = Eigen::Matrix4d::Zero();
  for (int id : block_ids) {
    const Block& b = blocks_.at(static_cast<std::size_t>(id));
    n += b.n;
    s += b.s;
    s2 += b.s2;
  }
  if (n < 2) throw std::runtime_error("covariance_of: need >= 2 samples");
  const double dn = static_cast<double>(n);
  const Eigen::Vector4d m = s / dn;
  return (s2 - dn * (m * m.transpose())) / (dn - 1.0);
}

MomentAccumulator accumulate(std::span<const SamplePair> samples, int n_blocks) {
  MomentAccumulator acc(n_blocks);
  for (const SamplePair& s : samples) acc.add(s[0], s[1]);
  return acc;
}

double quad_variance(const MomentAccumulator& acc, double theta, double gain,
                     QuadCombo combo) {
  return combo_variance(acc.covariance(), theta, gain, combo);
}

CriterionResult optimize_criterion(const Eigen::Matrix4d& cov,
                                   const CriterionSettings& settings) {
  return optimize_impl(cov, settings);
}

CriterionResult delta_ent(const MomentAccumulator& acc,
                          std::uint64_t bootstrap_seed) {
  return with_bootstrap(acc, CriterionSettings{true, false}, bootstrap_seed, 0);
}

CriterionResult epr_steering(const MomentAccumulator& acc,
                             SteeringDirection direction,
                             std::uint64_t bootstrap_seed) {
  const bool swap = direction == SteeringDirection::two_by_one;
  return with_bootstrap(acc, CriterionSettings{false, swap}, bootstrap_seed,
                        swap ? 2 : 1);
}

double w_psi(cplx a1, cplx a2, double r) {
  if (r < 0.0) throw std::domain_error("w_psi: r must be >= 0");
  constexpr double inv_sqrt2 = std::numbers::sqrt2 / 2.0;
  const cplx a_plus = (a1 + std::conj(a2)) * inv_sqrt2;
  const cplx a_minus = (a1 - std::conj(a2)) * inv_sqrt2;
  const double quad =
      std::norm(a_plus) * std::exp(-2.0 * r) + std::norm(a_minus) * std::exp(2.0 * r);
  return 4.0 / (kPi * kPi) * std::exp(-2.0 * quad);
}

FidelityEstimate fidelity_mc(std::span<const SamplePair> samples, double r,
                             int n_blocks, std::uint64_t bootstrap_seed) {
  if (n_blocks < 1) throw std::invalid_argument("n_blocks must be >= 1");
  std::vector<double> bsum(static_cast<std::size_t>(n_blocks), 0.0);
  std::vector<long long> bn(static_cast<std::size_t>(n_blocks), 0);
  long long n = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const SamplePair& s = samples[i];
    if (!finite_pair(s[0], s[1])) continue;
    const std::size_t b = i % static_cast<std::size_t>(n_blocks);
    bsum[b] += kPi * kPi * w_psi(s[0], s[1], r);
    bn[b] += 1;
    ++n;
  }
  if (n < 10000)
    throw std::invalid_argument("fidelity_mc: need at least 10^4 samples");

  double total = 0.0;
  for (double v : bsum) total += v;
  const double value = total / static_cast<double>(n);

  RngStream rng(bootstrap_seed, 3);
  double sum = 0.0, sum2 = 0.0;
  for (int rep = 0; rep < k_bootstrap_replicates; ++rep) {
    double rs = 0.0;
    long long rn = 0;
    for (int j = 0; j < n_blocks; ++j) {
      const auto b = rng.uniform_below(static_cast<std::uint64_t>(n_blocks));
      rs += bsum[b];
      rn += bn[b];
    }
    const double v = rn > 0 ? rs / static_cast<double>(rn) : 0.0;
    sum += v;
    sum2 += v * v;
  }
  const double m = sum / k_bootstrap_replicates;
  const double se =
      std::sqrt(std::max(sum2 / k_bootstrap_replicates - m * m, 0.0) *
                (static_cast<double>(k_bootstrap_replicates) /
                 (k_bootstrap_replicates - 1)));
  return FidelityEstimate{value, se, se > 0.1 * std::abs(value)};
}

}  // namespace omsim
