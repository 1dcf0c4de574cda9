#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "omsim/sampling.hpp"

namespace omsim {

using SamplePair = std::array<cplx, 2>;

/// Running second moments of the four output quadratures
/// (Re A1, Im A1, Re A2, Im A2), kept as per-block raw sums so that
/// accumulators merge exactly and block-bootstrap errors are available.
/// Samples are assigned to blocks round-robin; merging combines blocks
/// pairwise, which preserves a valid equal-size block partition.
class MomentAccumulator {
 public:
  explicit MomentAccumulator(int n_blocks = 100);

  /// Adds one output sample. Non-finite samples (rejected trajectories)
  /// are ignored and reported through the return value.
  bool add(cplx a1, cplx a2);

  /// Merges another accumulator with the same block count.
  void merge(const MomentAccumulator& other);

  long long count() const { return total_n_; }
  int n_blocks() const { return static_cast<int>(blocks_.size()); }

  Eigen::Vector4d mean() const;

  /// Unbiased sample covariance; throws std::runtime_error for count < 2.
  Eigen::Matrix4d covariance() const;

  /// Covariance of a bootstrap replicate assembled from the given block
  /// indices (repeats allowed).
  Eigen::Matrix4d covariance_of(std::span<const int> block_ids) const;

 private:
  struct Block {
    long long n = 0;
    Eigen::Vector4d s = Eigen::Vector4d::Zero();
    Eigen::Matrix4d s2 = Eigen::Matrix4d::Zero();
  };
  std::vector<Block> blocks_;
  long long total_n_ = 0;
  long long cursor_ = 0;
};

/// Builds an accumulator from a sample array in index order.
MomentAccumulator accumulate(std::span<const SamplePair> samples,
                             int n_blocks = 100);

enum class QuadCombo { minus_x, plus_p };

/// Sampled variance of X1 - G X2^theta (minus_x) or P1 + G P2^theta
/// (plus_p), where X^theta = Re(e^{-i theta} A) and P^theta = Im(e^{-i
/// theta} A). Wigner samples estimate symmetric-ordered moments directly.
double quad_variance(const MomentAccumulator& acc, double theta, double gain,
                     QuadCombo combo);

struct CriterionResult {
  double value;
  double gain;       // signed; a negative gain flips the correlation sense
  double phase;      // normalized to [0, pi)
  double std_error;  // block bootstrap; 0 for exact-moment inputs
};

struct CriterionSettings {
  bool gain_normalized = true;  // divide by (1 + G^2)
  bool swap_modes = false;      // evaluate with mode roles exchanged
};

/// Minimizes 4 sd(X1 - G X2^theta) sd(P1 + G P2^theta) [/(1+G^2)] over a
/// 64-point theta grid refined by golden section, with a bounded golden
/// section per sign of G on [0, 10] at each theta (guarded by a
/// unimodality scan). The signed gain covers phase offsets beyond pi that
/// theta alone cannot reach.
CriterionResult optimize_criterion(const Eigen::Matrix4d& cov,
                                   const CriterionSettings& settings);

inline constexpr int k_bootstrap_replicates = 200;
inline constexpr std::uint64_t k_default_bootstrap_seed = 0xB005EEDull;

/// Gain/phase-optimized product criterion; < 1 certifies entanglement,
/// reaching exp(-2r) for an ideal two-mode squeezed pair. Requires
/// count >= 100. std_error from block bootstrap over the accumulator's
/// blocks (deterministic given bootstrap_seed).
CriterionResult delta_ent(const MomentAccumulator& acc,
                          std::uint64_t bootstrap_seed = k_default_bootstrap_seed);

enum class SteeringDirection { one_by_two, two_by_one };

/// EPR-steering product (no gain normalization); direction two_by_one
/// exchanges the mode roles.
CriterionResult epr_steering(const MomentAccumulator& acc,
                             SteeringDirection direction,
                             std::uint64_t bootstrap_seed = k_default_bootstrap_seed);

/// Wigner density of the two-mode squeezed target state at the output
/// sample (a1, a2), in the +/- basis a_pm = (a1 +/- a2*)/sqrt2.
double w_psi(cplx a1, cplx a2, double r);

struct FidelityEstimate {
  double value;
  double std_error;
  bool high_variance;  // std_error / value > 0.1: heavy-tailed estimate
};

/// Monte Carlo overlap fidelity pi^2 <W_psi> over the samples with a block
/// bootstrap error. Requires at least 10^4 finite samples.
FidelityEstimate fidelity_mc(std::span<const SamplePair> samples, double r,
                             int n_blocks = 100,
                             std::uint64_t bootstrap_seed = k_default_bootstrap_seed);

}  // namespace omsim
