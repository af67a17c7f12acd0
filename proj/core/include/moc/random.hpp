#pragma once

// Portable, reproducible random numbers. Standard library distributions are
// implementation-defined, so everything here is built on a fixed generator.

#include <cstdint>

#include <Eigen/Dense>

namespace moc {

/// Counter-based SplitMix64: the k-th output is mix64(seed + k * golden),
/// where mix64 is the SplitMix64 finalizer. Streams are split by deriving a
/// new seed from (seed, stream id).
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) noexcept : seed_(seed) {}

  std::uint64_t next_u64() noexcept;

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() noexcept;
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller (one value per call, no cached pair).
  double normal() noexcept;

  std::uint64_t counter() const noexcept { return counter_; }

  /// Independent child generator for a named sub-stream.
  CounterRng split(std::uint64_t stream) const noexcept;

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

std::uint64_t mix64(std::uint64_t z) noexcept;

Eigen::MatrixXd random_normal(CounterRng& rng, Eigen::Index rows, Eigen::Index cols);

/// Haar-ish orthogonal matrix: Q factor of a Gaussian matrix with the signs
/// of R's diagonal folded in.
Eigen::MatrixXd random_orthogonal(CounterRng& rng, Eigen::Index dim);

/// Random SPD matrix Q diag(l) Q^T whose log-eigenvalues are uniform in
/// [0, ln(condition)] shifted by a random overall scale in [-1, 1].
Eigen::MatrixXd random_spd(CounterRng& rng, Eigen::Index dim, double condition);

}  // namespace moc
