#pragma once

#include <string>

#include "sbda/oracles.hpp"
#include "sbda/sampling.hpp"

namespace sbda {

/// Mutable per-run stepsize state.
struct ScheduleState {
  /// gamma_t, one entry per block.
  Vector gamma;
  /// Accumulated alpha over the iterations that sampled each block.
  Vector l;
  /// Current scalar weight alpha_t.
  double alpha = 0.0;
  /// Iteration counter; -1 before the first step.
  Index t = -1;
};

enum class ScheduleKind {
  kConstConvex,
  kAdaptiveConvex,
  kStronglyConvexSimple,
  kStronglyConvexAggressive,
  kConstNonuniform,
  kAdaptiveNonuniform,
};

/// Stepsize rule for the block dual-averaging loops.
///
/// Adaptive rules raise gamma only on the sampled block, as u_i sqrt(t + 1),
/// so per-block stepsizes are nondecreasing and untouched blocks keep theirs.
/// Constant rules need the horizon T up front.
class Schedule {
 public:
  /// gamma^(i) = sqrt(5 T M_i^2 / (n rho D_i)), alpha = 1.
  static Schedule ConstConvex(const BlockParams& params, Index horizon, double rho = 1.0);
  /// gamma^(i) = sqrt(10 M_i^2 (t + 1) / (n rho D_i)) on the sampled block.
  static Schedule AdaptiveConvex(const BlockParams& params, double rho = 1.0);
  /// gamma = lambda / rho, alpha = 1.
  static Schedule StronglyConvexSimple(Index num_blocks, double lambda, double rho = 1.0);
  /// gamma = lambda (2n + T) / rho, alpha_t = n + t, alpha_{-1} = 0.
  static Schedule StronglyConvexAggressive(Index num_blocks, double lambda, double rho,
                                           Index horizon);
  /// gamma^(i) = sqrt((1 + T) p_i M_i^2 / (2 rho D_i)) for any positive p.
  static Schedule ConstNonuniform(const BlockParams& params, Index horizon, double rho,
                                  const SamplingDistribution& dist);
  /// gamma^(i) = sqrt((t + 1) p_i M_i^2 / (rho D_i)) on the sampled block.
  static Schedule AdaptiveNonuniform(const BlockParams& params, double rho,
                                     const SamplingDistribution& dist);

  /// Same rule with every gamma multiplied by factor > 0.
  Schedule Scaled(double factor) const;

  ScheduleKind kind() const { return kind_; }
  std::string id() const;
  Index num_blocks() const { return base_.size(); }
  bool adaptive() const;
  double scale() const { return scale_; }

  /// alpha_t for t >= -1.
  double alpha(Index t) const;
  /// gamma_{-1}.
  Vector InitialGamma() const { return scale_ * base_; }

  ScheduleState Start() const;
  /// Advances to t + 1 with sampled block i: sets alpha_t, gamma_t and l_t.
  void Advance(ScheduleState& state, Index block) const;

 private:
  Schedule(ScheduleKind kind, Vector base) : kind_(kind), base_(std::move(base)) {}

  ScheduleKind kind_;
  /// Constant gamma, or u_i for adaptive rules.
  Vector base_;
  double scale_ = 1.0;
};

/// Parses a schedule id as written by Schedule::id().
ScheduleKind ParseScheduleKind(const std::string& id);
std::string ScheduleKindId(ScheduleKind kind);

/// p_i = M_i^(2/3) D_i^(1/3) / C.
SamplingDistribution OptimalSampling(const BlockParams& params);

/// sqrt((1 + T) / (2 rho C)) M_i^(4/3) D_i^(-1/3) with C = sum_j M_j^(2/3) D_j^(1/3).
Vector OptimalConstGamma(const BlockParams& params, Index horizon, double rho = 1.0);

struct JointSolution {
  Vector x;
  Vector y;
};

/// Minimizer of sum_i [a_i / x_i + x_i / (b_i y_i)] over x > 0 and y in the
/// simplex: y_i = (a_i/b_i)^(1/3) W, x_i = a_i^(2/3) b_i^(1/3) sqrt(W) with
/// W = 1 / sum_j (a_j/b_j)^(1/3).
JointSolution JointOptimum(const Vector& a, const Vector& b);
double JointObjective(const Vector& a, const Vector& b, const Vector& x, const Vector& y);

}  // namespace sbda
