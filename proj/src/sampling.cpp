#include "sbda/sampling.hpp"

#include <algorithm>
#include <cmath>

namespace sbda {

SamplingDistribution SamplingDistribution::FromWeights(const Vector& weights) {
  if (weights.size() == 0) throw InvalidDistribution("sampling distribution needs at least one block");
  for (Index i = 0; i < weights.size(); ++i) {
    if (!(weights[i] >= 0.0) || !std::isfinite(weights[i])) {
      throw InvalidDistribution("sampling weights must be finite and nonnegative");
    }
  }
  const double total = weights.sum();
  if (!(total > 0.0)) throw InvalidDistribution("sampling weights sum to zero");

  SamplingDistribution dist;
  dist.p_ = weights / total;
  for (Index i = 0; i < dist.p_.size(); ++i) {
    if (dist.p_[i] < kFloor) {
      dist.p_[i] = kFloor;
      dist.floored_ = true;
    }
  }
  if (dist.floored_) dist.p_ /= dist.p_.sum();

  dist.cumulative_.resize(dist.p_.size());
  double running = 0.0;
  for (Index i = 0; i < dist.p_.size(); ++i) {
    running += dist.p_[i];
    dist.cumulative_[i] = running;
  }
  dist.cumulative_[dist.cumulative_.size() - 1] = 1.0;
  return dist;
}

SamplingDistribution SamplingDistribution::Uniform(Index n) {
  if (n < 1) throw InvalidDistribution("uniform distribution needs n >= 1");
  return FromWeights(Vector::Ones(n));
}

Index SamplingDistribution::Sample(Rng& rng) const {
  const double u = UniformUnit(rng);
  const auto* begin = cumulative_.data();
  const auto* end = begin + cumulative_.size();
  const auto* it = std::upper_bound(begin, end, u);
  if (it == end) --it;
  return static_cast<Index>(it - begin);
}

}  // namespace sbda
