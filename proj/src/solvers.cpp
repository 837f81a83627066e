#include "sbda/solvers.hpp"

#include <chrono>
#include <cmath>

namespace sbda {
namespace {

constexpr std::uint64_t kSamplerStream = 1;
constexpr std::uint64_t kOracleStream = 2;

// Handles logging cadence, timing and the passes metric for one run.
class Recorder {
 public:
  Recorder(const StochasticOracle& oracle, const RunOptions& options)
      : oracle_(oracle),
        options_(options),
        cadence_(options.log_every > 0 ? options.log_every
                                       : std::max<Index>(1, (options.horizon + 199) / 200)),
        start_(std::chrono::steady_clock::now()) {}

  void CountBlockQuery(Index block) {
    ++queries_;
    passes_ += static_cast<double>(oracle_.samples_per_query()) *
               oracle_.partition().fraction(block) / static_cast<double>(oracle_.dataset_size());
  }

  void CountFullQuery() {
    ++queries_;
    passes_ += static_cast<double>(oracle_.samples_per_query()) /
               static_cast<double>(oracle_.dataset_size());
  }

  bool ShouldLog(Index t) const {
    if (t == options_.horizon) return true;
    if (!options_.record_trace) return false;
    return t == 0 || t % cadence_ == 0;
  }

  // `averager` may be empty (zero weight) early on; x is used then.
  void Step(Index t, const BlockVector& x, const WeightedAverager& averager) {
    if (options_.observer) options_.observer(t, x);
    if (!ShouldLog(t)) return;
    const double objective = averager.total_weight() > 0.0 ? oracle_.Objective(averager.Mean())
                                                           : oracle_.Objective(x);
    TracePoint point;
    point.t = t;
    point.queries = queries_;
    point.passes = passes_;
    point.objective = objective;
    point.ms = options_.timing ? std::chrono::duration<double, std::milli>(
                                     std::chrono::steady_clock::now() - start_)
                                     .count()
                               : 0.0;
    trace_.push_back(point);
  }

  RunResult Finish(BlockVector x, const WeightedAverager& averager, RunMetadata meta) {
    RunResult result;
    result.averaged = averager.Mean();
    result.final_point = std::move(x);
    result.trace = std::move(trace_);
    result.meta = std::move(meta);
    result.meta.seed = options_.seed;
    result.queries = queries_;
    result.passes = passes_;
    return result;
  }

 private:
  const StochasticOracle& oracle_;
  const RunOptions& options_;
  Index cadence_;
  std::chrono::steady_clock::time_point start_;
  Index queries_ = 0;
  double passes_ = 0.0;
  std::vector<TracePoint> trace_;
};

void RequireHorizon(const RunOptions& options) {
  if (options.horizon < 1) throw std::invalid_argument("run horizon T must be >= 1");
}

BlockVector InitialPoint(const StochasticOracle& oracle) {
  BlockVector x(oracle.partition());
  const Regularizer& omega = oracle.regularizer();
  // argmin of sum gamma_i d_i over X: the prox center, projected onto a box.
  if (omega.kind() == Regularizer::Kind::kBox) {
    x.data() = x.data().cwiseMax(omega.lo()).cwiseMin(omega.hi());
  }
  return x;
}

double OutputWeight(Averaging mode, const Schedule& schedule, Index t) {
  switch (mode) {
    case Averaging::kBlockWeights:
      return BlockOutputWeight(schedule, t);
    case Averaging::kLinear:
      return static_cast<double>(t);
    case Averaging::kUniform:
      return 1.0;
    case Averaging::kAlpha:
      return schedule.alpha(t);
  }
  return 1.0;
}

void CheckOutputWeights(Averaging mode, const Schedule& schedule, Index horizon) {
  if (mode != Averaging::kBlockWeights) return;
  for (Index t = 1; t <= horizon; ++t) {
    if (BlockOutputWeight(schedule, t) < 0.0) {
      throw UnsupportedConfiguration("schedule '" + schedule.id() +
                                     "' gives a negative output weight at t = " +
                                     std::to_string(t));
    }
  }
}

}  // namespace

void WeightedAverager::Add(const BlockVector& x, double weight) {
  if (!(weight >= 0.0)) throw std::invalid_argument("averaging weights must be nonnegative");
  if (weight == 0.0) return;
  sum_.data() += weight * x.data();
  total_ += weight;
}

BlockVector WeightedAverager::Mean() const {
  if (!(total_ > 0.0)) throw std::invalid_argument("averaging weights are all zero");
  return BlockVector(sum_.partition(), sum_.data() / total_);
}

BlockVector AverageOutput(std::span<const BlockVector> iterates, std::span<const double> weights) {
  if (iterates.empty() || iterates.size() != weights.size()) {
    throw std::invalid_argument("AverageOutput: need one weight per iterate");
  }
  WeightedAverager averager(iterates.front().partition());
  for (std::size_t k = 0; k < iterates.size(); ++k) averager.Add(iterates[k], weights[k]);
  return averager.Mean();
}

double BlockOutputWeight(const Schedule& schedule, Index t) {
  const double n = static_cast<double>(schedule.num_blocks());
  return schedule.alpha(t - 1) - (n - 1.0) / n * schedule.alpha(t);
}

RunResult SbdaU(const StochasticOracle& oracle, const Schedule& schedule,
                const RunOptions& options) {
  RequireHorizon(options);
  const BlockPartition& partition = oracle.partition();
  const Index n = partition.num_blocks();
  if (schedule.num_blocks() != n) {
    throw std::invalid_argument("schedule block count does not match the oracle partition");
  }
  const Regularizer& omega = oracle.regularizer();
  const bool strongly_convex_rule = schedule.kind() == ScheduleKind::kStronglyConvexSimple ||
                                    schedule.kind() == ScheduleKind::kStronglyConvexAggressive;
  if (strongly_convex_rule && !(omega.modulus() > 0.0)) {
    throw UnsupportedConfiguration("strongly convex schedules need a strongly convex regularizer");
  }

  const Averaging mode = options.averaging.value_or(
      schedule.kind() == ScheduleKind::kStronglyConvexAggressive ? Averaging::kLinear
                                                                 : Averaging::kBlockWeights);
  CheckOutputWeights(mode, schedule, options.horizon);

  const SamplingDistribution uniform = SamplingDistribution::Uniform(n);
  Rng sampler_rng = MakeStream(options.seed, kSamplerStream);
  Rng oracle_rng = MakeStream(options.seed, kOracleStream);

  const DistanceFunction d = DistanceFunction::Origin(partition);
  BlockVector x = InitialPoint(oracle);
  BlockVector dual_sum(partition);
  ScheduleState state = schedule.Start();
  WeightedAverager averager(partition);
  Recorder recorder(oracle, options);
  recorder.Step(0, x, averager);

  for (Index t = 0; t < options.horizon; ++t) {
    const Index i = uniform.Sample(sampler_rng);
    schedule.Advance(state, i);
    const Vector g = oracle.BlockSubgradient(x, i, oracle_rng);
    recorder.CountBlockQuery(i);
    dual_sum.block(i) += state.alpha * g;
    x.block(i) = ProxStepU(dual_sum.block(i), state.l[i], omega, state.gamma[i], d, i);
    averager.Add(x, OutputWeight(mode, schedule, t + 1));
    recorder.Step(t + 1, x, averager);
  }

  return recorder.Finish(std::move(x), averager,
                         {"sbda_u", options.seed, schedule.id(), "uniform", false});
}

RunResult SbdaR(const StochasticOracle& oracle, const Schedule& schedule,
                const SamplingDistribution& sampler, const RunOptions& options) {
  RequireHorizon(options);
  const BlockPartition& partition = oracle.partition();
  const Index n = partition.num_blocks();
  if (schedule.num_blocks() != n || sampler.size() != n) {
    throw std::invalid_argument("schedule and sampler must match the oracle partition");
  }
  const Regularizer& feasible = oracle.regularizer();
  if (feasible.kind() != Regularizer::Kind::kZero && feasible.kind() != Regularizer::Kind::kBox) {
    throw UnsupportedConfiguration(
        "nonuniform block dual averaging needs omega = 0 (optionally a box feasible set), got " +
        feasible.ToString());
  }
  const Averaging mode = options.averaging.value_or(Averaging::kAlpha);
  CheckOutputWeights(mode, schedule, options.horizon);

  Rng sampler_rng = MakeStream(options.seed, kSamplerStream);
  Rng oracle_rng = MakeStream(options.seed, kOracleStream);

  const DistanceFunction d = DistanceFunction::Origin(partition);
  BlockVector x = InitialPoint(oracle);
  BlockVector dual_sum(partition);
  ScheduleState state = schedule.Start();
  WeightedAverager averager(partition);
  if (mode == Averaging::kAlpha) averager.Add(x, schedule.alpha(0));
  Recorder recorder(oracle, options);
  recorder.Step(0, x, averager);

  for (Index t = 0; t < options.horizon; ++t) {
    const Index i = sampler.Sample(sampler_rng);
    const double p = sampler.p(i);
    schedule.Advance(state, i);
    const Vector g = oracle.BlockSubgradient(x, i, oracle_rng);
    recorder.CountBlockQuery(i);
    dual_sum.block(i) += (state.alpha / p) * g;
    x.block(i) = ProxStepR(dual_sum.block(i), state.gamma[i], p, d, i, feasible);
    averager.Add(x, OutputWeight(mode, schedule, t + 1));
    recorder.Step(t + 1, x, averager);
  }

  const bool uniform = (sampler.probabilities().array() == 1.0 / static_cast<double>(n)).all();
  return recorder.Finish(std::move(x), averager,
                         {"sbda_r", options.seed, schedule.id(), uniform ? "uniform" : "explicit",
                          sampler.floored()});
}

double BetaSchedule::Beta(Index t) const {
  return kind == Kind::kConstant ? scale : scale * std::sqrt(static_cast<double>(t + 1));
}

BetaSchedule BetaSchedule::FromParams(const BlockParams& params) {
  params.Validate();
  return {Kind::kSqrt, std::sqrt(params.M.squaredNorm() / params.D.sum())};
}

RunResult BaselineDa(const StochasticOracle& oracle, const BetaSchedule& beta,
                     const RunOptions& options) {
  RequireHorizon(options);
  if (!(beta.scale > 0.0)) throw InvalidStepsize("dual averaging needs beta > 0");
  const BlockPartition& partition = oracle.partition();
  const Regularizer& omega = oracle.regularizer();
  Rng oracle_rng = MakeStream(options.seed, kOracleStream);

  BlockVector x = InitialPoint(oracle);
  const Vector center = Vector::Zero(partition.total());
  Vector dual_sum = Vector::Zero(partition.total());
  WeightedAverager averager(partition);
  Recorder recorder(oracle, options);
  recorder.Step(0, x, averager);

  for (Index t = 0; t < options.horizon; ++t) {
    const BlockVector g = oracle.FullSubgradient(x, oracle_rng);
    recorder.CountFullQuery();
    dual_sum += g.data();
    x.data() = ProxStepU(dual_sum, static_cast<double>(t + 1), omega, beta.Beta(t), center);
    averager.Add(x, 1.0);
    recorder.Step(t + 1, x, averager);
  }
  return recorder.Finish(std::move(x), averager,
                         {"da", options.seed, beta.kind == BetaSchedule::Kind::kSqrt ? "beta_sqrt"
                                                                                   : "beta_const",
                          "full", false});
}

double StepRule::Eta(Index t, double gradient_norm) const {
  const double inv_sqrt = scale / std::sqrt(static_cast<double>(t + 1));
  switch (kind) {
    case Kind::kConstant:
      return scale;
    case Kind::kInvSqrt:
      return inv_sqrt;
    case Kind::kInvNorm:
      return gradient_norm > 0.0 ? scale / gradient_norm : inv_sqrt;
  }
  return inv_sqrt;
}

RunResult BaselineMd(const StochasticOracle& oracle, const StepRule& rule,
                     const RunOptions& options) {
  RequireHorizon(options);
  if (!(rule.scale > 0.0)) throw InvalidStepsize("mirror descent needs a positive step scale");
  const BlockPartition& partition = oracle.partition();
  const Regularizer& omega = oracle.regularizer();
  Rng oracle_rng = MakeStream(options.seed, kOracleStream);

  BlockVector x = InitialPoint(oracle);
  WeightedAverager averager(partition);
  Recorder recorder(oracle, options);
  recorder.Step(0, x, averager);

  for (Index t = 0; t < options.horizon; ++t) {
    const BlockVector g = oracle.FullSubgradient(x, oracle_rng);
    recorder.CountFullQuery();
    const double eta = rule.Eta(t, g.norm());
    x.data() = ProxStepU(g.data(), 1.0, omega, 1.0 / eta, x.data());
    averager.Add(x, 1.0);
    recorder.Step(t + 1, x, averager);
  }
  const char* id = rule.kind == StepRule::Kind::kInvNorm  ? "sm2"
                   : rule.kind == StepRule::Kind::kInvSqrt ? "sm1"
                                                           : "const";
  return recorder.Finish(std::move(x), averager, {"md", options.seed, id, "full", false});
}

RunResult BaselineSbmd(const StochasticOracle& oracle, const StepRule& rule,
                       const SamplingDistribution& sampler, const RunOptions& options) {
  RequireHorizon(options);
  if (!(rule.scale > 0.0)) throw InvalidStepsize("block mirror descent needs a positive step scale");
  const BlockPartition& partition = oracle.partition();
  const Index n = partition.num_blocks();
  if (sampler.size() != n) throw std::invalid_argument("sampler must match the oracle partition");
  const Regularizer& omega = oracle.regularizer();
  Rng sampler_rng = MakeStream(options.seed, kSamplerStream);
  Rng oracle_rng = MakeStream(options.seed, kOracleStream);

  BlockVector x = InitialPoint(oracle);
  WeightedAverager averager(partition);
  Recorder recorder(oracle, options);
  recorder.Step(0, x, averager);

  for (Index t = 0; t < options.horizon; ++t) {
    const Index i = sampler.Sample(sampler_rng);
    const Vector g = oracle.BlockSubgradient(x, i, oracle_rng);
    recorder.CountBlockQuery(i);
    const double eta = rule.Eta(t, g.norm()) / (static_cast<double>(n) * sampler.p(i));
    x.block(i) = ProxStepU(g, 1.0, omega, 1.0 / eta, x.block(i));
    averager.Add(x, 1.0);
    recorder.Step(t + 1, x, averager);
  }
  const bool uniform = (sampler.probabilities().array() == 1.0 / static_cast<double>(n)).all();
  return recorder.Finish(std::move(x), averager,
                         {"sbmd", options.seed, "scalar", uniform ? "uniform" : "explicit",
                          sampler.floored()});
}

double DefaultMirrorStep(const BlockParams& params, Index horizon, bool block_method) {
  params.Validate();
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  const double n = block_method ? static_cast<double>(params.num_blocks()) : 1.0;
  return std::sqrt(2.0 * n * params.D.sum() /
                   (static_cast<double>(horizon) * params.M.squaredNorm()));
}

QueryMeter::QueryMeter(const StochasticOracle& inner)
    : StochasticOracle(inner.partition(), inner.regularizer()), inner_(inner) {
  planted_ = inner.planted();
  meta_ = inner.meta();
}

QueryMeter::QueryMeter(const QueryMeter& other) : QueryMeter(other.inner_) {}

Vector QueryMeter::BlockSubgradient(const BlockVector& x, Index i, Rng& rng) const {
  ++block_queries_;
  return inner_.BlockSubgradient(x, i, rng);
}

BlockVector QueryMeter::FullSubgradient(const BlockVector& x, Rng& rng) const {
  ++full_queries_;
  return inner_.FullSubgradient(x, rng);
}

std::unique_ptr<StochasticOracle> QueryMeter::Clone() const {
  return std::make_unique<QueryMeter>(*this);
}

}  // namespace sbda
