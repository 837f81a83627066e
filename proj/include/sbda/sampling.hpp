#pragma once

#include <string>
#include <vector>

#include "sbda/common.hpp"

namespace sbda {

/// Probability mass over n blocks with an inverse-CDF table.
class SamplingDistribution {
 public:
  /// Probabilities below this are raised to it before renormalization.
  static constexpr double kFloor = 1e-6;

  SamplingDistribution() = default;

  /// Normalizes nonnegative weights; entries below kFloor after the first
  /// normalization are floored and the whole vector renormalized.
  static SamplingDistribution FromWeights(const Vector& weights);
  static SamplingDistribution Uniform(Index n);

  Index size() const { return p_.size(); }
  double p(Index i) const { return p_[i]; }
  const Vector& probabilities() const { return p_; }
  const Vector& cumulative() const { return cumulative_; }

  /// True when flooring changed at least one entry.
  bool floored() const { return floored_; }

  /// Inverse-CDF draw; consumes exactly one value from rng.
  Index Sample(Rng& rng) const;

 private:
  Vector p_;
  Vector cumulative_;
  bool floored_ = false;
};

inline Index SampleBlock(const SamplingDistribution& dist, Rng& rng) { return dist.Sample(rng); }

}  // namespace sbda
