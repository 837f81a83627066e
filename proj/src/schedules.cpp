#include "sbda/schedules.hpp"

#include <cmath>

namespace sbda {
namespace {

void RequirePositive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw std::invalid_argument(std::string(what) + " must be finite and positive");
  }
}

void RequireHorizon(Index horizon) {
  if (horizon < 1) {
    throw std::invalid_argument("constant stepsize rules need a known horizon T >= 1");
  }
}

void RequireMatchingDistribution(const BlockParams& params, const SamplingDistribution& dist) {
  if (dist.size() != params.num_blocks()) {
    throw InvalidDistribution("sampling distribution size does not match the number of blocks");
  }
  for (Index i = 0; i < dist.size(); ++i) {
    if (!(dist.p(i) > 0.0)) throw InvalidDistribution("sampling probabilities must be positive");
  }
}

}  // namespace

Schedule Schedule::ConstConvex(const BlockParams& params, Index horizon, double rho) {
  params.Validate();
  RequireHorizon(horizon);
  RequirePositive(rho, "rho");
  const double n = static_cast<double>(params.num_blocks());
  const Vector ratio = params.M.array().square() / params.D.array();
  return Schedule(ScheduleKind::kConstConvex,
                  (5.0 * static_cast<double>(horizon) * ratio / (n * rho)).cwiseSqrt());
}

Schedule Schedule::AdaptiveConvex(const BlockParams& params, double rho) {
  params.Validate();
  RequirePositive(rho, "rho");
  const double n = static_cast<double>(params.num_blocks());
  const Vector ratio = params.M.array().square() / params.D.array();
  return Schedule(ScheduleKind::kAdaptiveConvex, (10.0 * ratio / (n * rho)).cwiseSqrt());
}

Schedule Schedule::StronglyConvexSimple(Index num_blocks, double lambda, double rho) {
  if (num_blocks < 1) throw std::invalid_argument("need at least one block");
  RequirePositive(lambda, "strong convexity modulus lambda");
  RequirePositive(rho, "rho");
  return Schedule(ScheduleKind::kStronglyConvexSimple, Vector::Constant(num_blocks, lambda / rho));
}

Schedule Schedule::StronglyConvexAggressive(Index num_blocks, double lambda, double rho,
                                            Index horizon) {
  if (num_blocks < 1) throw std::invalid_argument("need at least one block");
  RequirePositive(lambda, "strong convexity modulus lambda");
  RequirePositive(rho, "rho");
  RequireHorizon(horizon);
  const double gamma =
      lambda * (2.0 * static_cast<double>(num_blocks) + static_cast<double>(horizon)) / rho;
  return Schedule(ScheduleKind::kStronglyConvexAggressive, Vector::Constant(num_blocks, gamma));
}

Schedule Schedule::ConstNonuniform(const BlockParams& params, Index horizon, double rho,
                                   const SamplingDistribution& dist) {
  params.Validate();
  RequireHorizon(horizon);
  RequirePositive(rho, "rho");
  RequireMatchingDistribution(params, dist);
  const Vector ratio =
      dist.probabilities().array() * params.M.array().square() / params.D.array();
  return Schedule(ScheduleKind::kConstNonuniform,
                  ((1.0 + static_cast<double>(horizon)) * ratio / (2.0 * rho)).cwiseSqrt());
}

Schedule Schedule::AdaptiveNonuniform(const BlockParams& params, double rho,
                                      const SamplingDistribution& dist) {
  params.Validate();
  RequirePositive(rho, "rho");
  RequireMatchingDistribution(params, dist);
  const Vector ratio =
      dist.probabilities().array() * params.M.array().square() / params.D.array();
  return Schedule(ScheduleKind::kAdaptiveNonuniform, (ratio / rho).cwiseSqrt());
}

Schedule Schedule::Scaled(double factor) const {
  RequirePositive(factor, "stepsize scale");
  Schedule copy = *this;
  copy.scale_ *= factor;
  return copy;
}

bool Schedule::adaptive() const {
  return kind_ == ScheduleKind::kAdaptiveConvex || kind_ == ScheduleKind::kAdaptiveNonuniform;
}

std::string Schedule::id() const { return ScheduleKindId(kind_); }

double Schedule::alpha(Index t) const {
  if (kind_ == ScheduleKind::kStronglyConvexAggressive) {
    return t < 0 ? 0.0 : static_cast<double>(num_blocks() + t);
  }
  return 1.0;
}

ScheduleState Schedule::Start() const {
  ScheduleState state;
  state.gamma = InitialGamma();
  state.l = Vector::Zero(num_blocks());
  state.alpha = alpha(-1);
  state.t = -1;
  return state;
}

void Schedule::Advance(ScheduleState& state, Index block) const {
  if (block < 0 || block >= num_blocks()) throw std::out_of_range("sampled block out of range");
  state.t += 1;
  state.alpha = alpha(state.t);
  if (adaptive()) {
    state.gamma[block] = scale_ * base_[block] * std::sqrt(static_cast<double>(state.t + 1));
  }
  state.l[block] += state.alpha;
}

std::string ScheduleKindId(ScheduleKind kind) {
  switch (kind) {
    case ScheduleKind::kConstConvex:
      return "const_convex";
    case ScheduleKind::kAdaptiveConvex:
      return "adaptive_convex";
    case ScheduleKind::kStronglyConvexSimple:
      return "strong_simple";
    case ScheduleKind::kStronglyConvexAggressive:
      return "strong_aggressive";
    case ScheduleKind::kConstNonuniform:
      return "const_nonuniform";
    case ScheduleKind::kAdaptiveNonuniform:
      return "adaptive_nonuniform";
  }
  return "unknown";
}

ScheduleKind ParseScheduleKind(const std::string& id) {
  for (ScheduleKind kind :
       {ScheduleKind::kConstConvex, ScheduleKind::kAdaptiveConvex,
        ScheduleKind::kStronglyConvexSimple, ScheduleKind::kStronglyConvexAggressive,
        ScheduleKind::kConstNonuniform, ScheduleKind::kAdaptiveNonuniform}) {
    if (ScheduleKindId(kind) == id) return kind;
  }
  throw std::invalid_argument("unknown schedule id '" + id + "'");
}

SamplingDistribution OptimalSampling(const BlockParams& params) {
  params.Validate();
  const Vector weights =
      params.M.array().pow(2.0 / 3.0) * params.D.array().pow(1.0 / 3.0);
  return SamplingDistribution::FromWeights(weights);
}

Vector OptimalConstGamma(const BlockParams& params, Index horizon, double rho) {
  params.Validate();
  RequireHorizon(horizon);
  RequirePositive(rho, "rho");
  const double c = (params.M.array().pow(2.0 / 3.0) * params.D.array().pow(1.0 / 3.0)).sum();
  const double factor = std::sqrt((1.0 + static_cast<double>(horizon)) / (2.0 * rho * c));
  return factor * (params.M.array().pow(4.0 / 3.0) * params.D.array().pow(-1.0 / 3.0)).matrix();
}

JointSolution JointOptimum(const Vector& a, const Vector& b) {
  if (a.size() == 0 || a.size() != b.size()) {
    throw std::invalid_argument("JointOptimum: a and b must be nonempty and of equal length");
  }
  for (Index i = 0; i < a.size(); ++i) {
    if (!(a[i] > 0.0) || !(b[i] > 0.0)) {
      throw std::invalid_argument("JointOptimum: inputs must be positive");
    }
  }
  const Vector ratio_cbrt = (a.array() / b.array()).pow(1.0 / 3.0);
  const double w = 1.0 / ratio_cbrt.sum();
  JointSolution solution;
  solution.y = ratio_cbrt * w;
  solution.x = (a.array().pow(2.0 / 3.0) * b.array().pow(1.0 / 3.0)).matrix() * std::sqrt(w);
  return solution;
}

double JointObjective(const Vector& a, const Vector& b, const Vector& x, const Vector& y) {
  return (a.array() / x.array() + x.array() / (b.array() * y.array())).sum();
}

}  // namespace sbda
