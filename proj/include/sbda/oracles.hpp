#pragma once

#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>

#include "sbda/blocks.hpp"
#include "sbda/geometry.hpp"
#include "sbda/sampling.hpp"

namespace sbda {

/// Problem phi = f + omega with a stochastic block subgradient oracle for f.
///
/// Oracles are immutable after construction. All randomness (the sample xi)
/// comes from the generator passed to each query, so a const oracle can be
/// shared between threads as long as each caller owns its generator.
class StochasticOracle {
 public:
  virtual ~StochasticOracle() = default;

  const BlockPartition& partition() const { return partition_; }
  const Regularizer& regularizer() const { return regularizer_; }
  const std::optional<BlockVector>& planted() const { return planted_; }

  /// Generator name and parameters, kept for serialization and reporting.
  const std::map<std::string, std::string>& meta() const { return meta_; }

  /// f(x).
  virtual double Loss(const BlockVector& x) const = 0;
  /// phi(x) = f(x) + omega(x).
  double Objective(const BlockVector& x) const { return Loss(x) + regularizer_.Value(x.data()); }

  /// G^(i)(x, xi) with xi drawn from rng.
  virtual Vector BlockSubgradient(const BlockVector& x, Index i, Rng& rng) const = 0;
  /// G(x, xi) with xi drawn from rng.
  virtual BlockVector FullSubgradient(const BlockVector& x, Rng& rng) const = 0;
  /// g^(i)(x) = E_xi G^(i)(x, xi), computed exactly.
  virtual Vector ExpectedBlockSubgradient(const BlockVector& x, Index i) const = 0;
  BlockVector ExpectedSubgradient(const BlockVector& x) const;

  /// Number of data points behind f; the denominator of the passes metric.
  virtual Index dataset_size() const = 0;
  /// Data points touched by a single query.
  virtual Index samples_per_query() const { return 1; }
  /// True when queries ignore xi and return g exactly.
  virtual bool deterministic() const { return false; }

  virtual std::unique_ptr<StochasticOracle> Clone() const = 0;
  std::unique_ptr<StochasticOracle> WithRegularizer(const Regularizer& omega) const;

 protected:
  StochasticOracle(BlockPartition partition, Regularizer regularizer)
      : partition_(std::move(partition)), regularizer_(regularizer) {}

  BlockPartition partition_;
  Regularizer regularizer_;
  std::optional<BlockVector> planted_;
  std::map<std::string, std::string> meta_;
};

/// f(x) = (1/m) sum_k loss(b_k - <a_k, x>) over fixed rows; xi picks one row
/// uniformly. Absolute loss gives l1 regression, squared loss least squares.
class FiniteSumOracle : public StochasticOracle {
 public:
  enum class LossKind { kAbsolute, kSquared };

  FiniteSumOracle(BlockPartition partition, Matrix rows, Vector targets, LossKind loss,
                  Regularizer regularizer = Regularizer::Zero());

  /// Same data, but every query returns the exact full-batch subgradient.
  std::unique_ptr<FiniteSumOracle> AsDeterministic() const;

  void set_planted(BlockVector x) { planted_ = std::move(x); }
  void set_meta(std::map<std::string, std::string> meta) { meta_ = std::move(meta); }
  void set_holdout(Matrix rows, Vector targets);

  LossKind loss_kind() const { return loss_; }
  const Matrix& rows() const { return rows_; }
  const Vector& targets() const { return targets_; }
  const Matrix& holdout_rows() const { return holdout_rows_; }
  const Vector& holdout_targets() const { return holdout_targets_; }

  double Loss(const BlockVector& x) const override;
  /// Loss on the held-out rows, or NaN when none were generated.
  double HoldoutLoss(const BlockVector& x) const;

  Vector BlockSubgradient(const BlockVector& x, Index i, Rng& rng) const override;
  BlockVector FullSubgradient(const BlockVector& x, Rng& rng) const override;
  Vector ExpectedBlockSubgradient(const BlockVector& x, Index i) const override;

  Index dataset_size() const override { return rows_.rows(); }
  Index samples_per_query() const override { return deterministic_ ? rows_.rows() : 1; }
  bool deterministic() const override { return deterministic_; }

  std::unique_ptr<StochasticOracle> Clone() const override;

 private:
  /// d loss / d residual, with sign(0) = 0 for the absolute loss.
  double ResidualSlope(double residual) const;
  double RowLoss(double residual) const;
  Index SampleRow(Rng& rng) const;

  Matrix rows_;
  Vector targets_;
  Matrix holdout_rows_;
  Vector holdout_targets_;
  LossKind loss_;
  bool deterministic_ = false;
};

/// f(w) = 1/2 E (y - <w, x>)^2 where each query sees one sample and only two
/// of its features: block i (chosen by the caller) and feature j ~ p. The
/// estimate (1/p_j) x^(i) x_j w_j - y x^(i) is unbiased for the block gradient.
/// The l1 penalty stays in the regularizer and is handled by the solver.
class OnlineLassoOracle : public StochasticOracle {
 public:
  OnlineLassoOracle(BlockPartition partition, Matrix features, Vector responses,
                    SamplingDistribution feature_sampler, double lambda);

  void set_planted(BlockVector w) { planted_ = std::move(w); }
  void set_meta(std::map<std::string, std::string> meta) { meta_ = std::move(meta); }

  const Matrix& features() const { return features_; }
  const Vector& responses() const { return responses_; }
  const SamplingDistribution& feature_sampler() const { return feature_sampler_; }

  double Loss(const BlockVector& w) const override;
  Vector BlockSubgradient(const BlockVector& w, Index i, Rng& rng) const override;
  /// Full-information gradient of one sample; used by the full-feature baselines.
  BlockVector FullSubgradient(const BlockVector& w, Rng& rng) const override;
  Vector ExpectedBlockSubgradient(const BlockVector& w, Index i) const override;

  /// Estimate for a given sample row, drawing only j from rng.
  Vector BlockEstimate(const BlockVector& w, Index row, Index i, Rng& rng) const;

  Index dataset_size() const override { return features_.rows(); }
  std::unique_ptr<StochasticOracle> Clone() const override;

 private:
  Matrix features_;
  Vector responses_;
  SamplingDistribution feature_sampler_;
};

/// f(x) = <c, x>; deterministic, subgradient c everywhere.
class LinearOracle : public StochasticOracle {
 public:
  LinearOracle(BlockPartition partition, Vector slope, Regularizer regularizer = Regularizer::Zero());

  double Loss(const BlockVector& x) const override { return slope_.dot(x.data()); }
  Vector BlockSubgradient(const BlockVector& x, Index i, Rng& rng) const override;
  BlockVector FullSubgradient(const BlockVector& x, Rng& rng) const override;
  Vector ExpectedBlockSubgradient(const BlockVector& x, Index i) const override;
  Index dataset_size() const override { return 1; }
  bool deterministic() const override { return true; }
  std::unique_ptr<StochasticOracle> Clone() const override;

 private:
  Vector slope_;
};

/// Column scaling s for the l1 regression generator.
struct ScalingLaw {
  enum class Kind { kUniform, kPowerLaw };
  Kind kind = Kind::kUniform;
  /// Exponent a of the density a (1 - s)^(a - 1) on [0, 1].
  double exponent = 1.0;

  /// "uniform" or "powerlaw:<a>".
  static ScalingLaw Parse(const std::string& text);
  std::string ToString() const;
};

struct L1RegressionOptions {
  Index samples = 500;     // m
  Index dim = 200;         // N
  Index num_blocks = 10;
  /// Variance of the additive Gaussian noise.
  double noise = 0.01;
  ScalingLaw scaling;
  /// Blocks (chosen at random) whose column scales are reset to 1, giving
  /// k dominant block subgradient bounds on top of the power law.
  Index heavy_blocks = 0;
  Regularizer regularizer = Regularizer::Zero();
  std::uint64_t seed = 0;
};

/// phi(x) = (1/m) sum |b_k - <S a_k, x>|, a_k ~ N(0, I), x* ~ N(0, I),
/// b = (A S) x* + noise.
std::unique_ptr<FiniteSumOracle> GenerateL1Regression(const L1RegressionOptions& options);

/// Draws the diagonal of S for the given law.
Vector DrawColumnScales(const ScalingLaw& law, Index dim, Rng& rng);

struct TransformedLsOptions {
  Index dim = 200;
  Index num_blocks = 10;
  Index train_samples = 3000;
  Index test_samples = 10000;
  /// Factor applied to the rescaled rows of the transform.
  double rescale = 1.0;
  double rescaled_fraction = 0.9;
  /// Standard deviation of epsilon (variance 0.01).
  double noise_stddev = 0.1;
  Regularizer regularizer = Regularizer::Zero();
  std::uint64_t seed = 0;
};

/// phi(x) = E (b - <L a, x>)^2 over the training pairs; x* ~ N(0, I) clipped to
/// [-1, 1]; a fraction of the rows of L ~ N(0, 1) is scaled by `rescale`.
std::unique_ptr<FiniteSumOracle> GenerateTransformedLs(const TransformedLsOptions& options);

struct OnlineLassoOptions {
  Index dim = 54;
  Index num_blocks = 54;
  Index samples = 2000;
  double lambda = 0.1;
  /// Fraction of nonzeros in the planted weight vector.
  double support_fraction = 0.2;
  double noise_stddev = 0.1;
  /// Feature sampler; uniform when empty.
  std::optional<SamplingDistribution> feature_sampler;
  std::uint64_t seed = 0;
};

std::unique_ptr<OnlineLassoOracle> GenerateOnlineLasso(const OnlineLassoOptions& options);

/// Per-block constants: M_i bounds the second moment of G^(i), D_i bounds
/// d_i at a solution.
struct BlockParams {
  static constexpr double kFloor = 1e-8;

  Vector M;
  Vector D;

  Index num_blocks() const { return M.size(); }
  /// Throws unless sizes agree and every entry is finite and positive.
  void Validate() const;
};

/// M_i = sqrt(max over probes of the mean ||G^(i)||^2), D_i = radius^2 / 2,
/// both floored at BlockParams::kFloor.
BlockParams EstimateParams(const StochasticOracle& oracle, std::span<const BlockVector> probes,
                           Index samples_per_point, double radius_guess, Rng& rng);

/// D_i = d_i(x*^(i)) for a known solution, floored at BlockParams::kFloor.
Vector PlantedDistanceBounds(const DistanceFunction& d, const BlockVector& solution);

}  // namespace sbda
