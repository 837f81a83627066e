#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "sbda/geometry.hpp"
#include "sbda/oracles.hpp"
#include "sbda/schedules.hpp"

namespace sbda {

/// How the output point x̄ is formed from the iterates.
enum class Averaging {
  /// sum_{t=1..T} (alpha_{t-1} - (n-1)/n alpha_t) x_t, normalized.
  kBlockWeights,
  /// sum_{t=1..T} t x_t / sum t.
  kLinear,
  /// (1/T) sum_{t=1..T} x_t.
  kUniform,
  /// sum_{t=0..T} alpha_t x_t / sum alpha_t.
  kAlpha,
};

struct TracePoint {
  Index t = 0;
  Index queries = 0;
  double passes = 0.0;
  /// phi at the running output point.
  double objective = 0.0;
  double ms = 0.0;
};

struct RunMetadata {
  std::string algorithm;
  std::uint64_t seed = 0;
  std::string schedule_id;
  std::string sampler_id;
  /// True when the block sampler had probabilities raised to the floor.
  bool sampler_floored = false;
};

struct RunResult {
  BlockVector final_point;
  BlockVector averaged;
  std::vector<TracePoint> trace;
  RunMetadata meta;
  Index queries = 0;
  double passes = 0.0;
};

struct RunOptions {
  Index horizon = 1000;
  std::uint64_t seed = 0;
  /// Objective logging cadence; 0 selects ceil(T / 200).
  Index log_every = 0;
  /// When false only the final point is logged.
  bool record_trace = true;
  /// When false the ms column is written as 0.
  bool timing = true;
  /// Overrides the algorithm's default output averaging.
  std::optional<Averaging> averaging;
  /// Called with (t, x_t) for t = 0..T.
  std::function<void(Index, const BlockVector&)> observer;
};

/// Running weighted mean of block vectors.
class WeightedAverager {
 public:
  explicit WeightedAverager(const BlockPartition& partition) : sum_(partition) {}

  /// Rejects negative weights.
  void Add(const BlockVector& x, double weight);
  double total_weight() const { return total_; }
  /// Throws when the accumulated weight is not positive.
  BlockVector Mean() const;

 private:
  BlockVector sum_;
  double total_ = 0.0;
};

/// Exact weighted mean of explicit iterates.
BlockVector AverageOutput(std::span<const BlockVector> iterates, std::span<const double> weights);

/// Weight of x_t (t >= 1) in the block-weighted output of the uniform method.
double BlockOutputWeight(const Schedule& schedule, Index t);

/// Uniformly sampled stochastic block dual averaging for phi = f + omega.
RunResult SbdaU(const StochasticOracle& oracle, const Schedule& schedule,
                const RunOptions& options);

/// Nonuniformly sampled stochastic block dual averaging for omega = 0 (or a
/// box feasible set).
RunResult SbdaR(const StochasticOracle& oracle, const Schedule& schedule,
                const SamplingDistribution& sampler, const RunOptions& options);

/// beta_t for the full dual-averaging baseline.
struct BetaSchedule {
  enum class Kind { kConstant, kSqrt };
  Kind kind = Kind::kSqrt;
  double scale = 1.0;

  double Beta(Index t) const;
  /// scale = sqrt(sum M_i^2 / sum D_i) with the sqrt(t + 1) law.
  static BetaSchedule FromParams(const BlockParams& params);
};

/// x_{t+1} = argmin { <sum_{s<=t} G_s, x> + (t + 1) omega(x) + beta_t d(x) }.
RunResult BaselineDa(const StochasticOracle& oracle, const BetaSchedule& beta,
                     const RunOptions& options);

/// Scalar stepsize eta_t shared by the mirror-descent baselines.
struct StepRule {
  enum class Kind {
    kConstant,
    /// scale / sqrt(t + 1)  (SM1)
    kInvSqrt,
    /// scale / ||g_t||, falling back to kInvSqrt when g_t = 0  (SM2)
    kInvNorm,
  };
  Kind kind = Kind::kInvSqrt;
  double scale = 1.0;

  double Eta(Index t, double gradient_norm) const;
};

/// x_{t+1} = argmin { <g_t, x> + omega(x) + V(x_t, x) / eta_t } with one full
/// (stochastic) subgradient per step.
RunResult BaselineMd(const StochasticOracle& oracle, const StepRule& rule,
                     const RunOptions& options);

/// Block mirror descent: the sampled block takes a prox step with the scalar
/// stepsize eta_t / (n p_i); other blocks are frozen. Approximates the
/// stochastic block mirror descent comparison method.
RunResult BaselineSbmd(const StochasticOracle& oracle, const StepRule& rule,
                       const SamplingDistribution& sampler, const RunOptions& options);

/// eta = sqrt(2 n sum D_i / (T sum M_i^2)) for block mirror descent; n = 1
/// gives the full-vector constant.
double DefaultMirrorStep(const BlockParams& params, Index horizon, bool block_method);

/// Wraps an oracle and counts queries by type.
class QueryMeter : public StochasticOracle {
 public:
  explicit QueryMeter(const StochasticOracle& inner);
  QueryMeter(const QueryMeter& other);

  double Loss(const BlockVector& x) const override { return inner_.Loss(x); }
  Vector BlockSubgradient(const BlockVector& x, Index i, Rng& rng) const override;
  BlockVector FullSubgradient(const BlockVector& x, Rng& rng) const override;
  Vector ExpectedBlockSubgradient(const BlockVector& x, Index i) const override {
    return inner_.ExpectedBlockSubgradient(x, i);
  }
  Index dataset_size() const override { return inner_.dataset_size(); }
  Index samples_per_query() const override { return inner_.samples_per_query(); }
  bool deterministic() const override { return inner_.deterministic(); }
  std::unique_ptr<StochasticOracle> Clone() const override;

  Index block_queries() const { return block_queries_; }
  Index full_queries() const { return full_queries_; }

 private:
  const StochasticOracle& inner_;
  mutable std::atomic<Index> block_queries_{0};
  mutable std::atomic<Index> full_queries_{0};
};

}  // namespace sbda
