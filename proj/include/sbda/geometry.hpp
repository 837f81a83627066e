#pragma once

#include <string>

#include "sbda/blocks.hpp"

namespace sbda {

/// Block-separable simple term omega(x) = sum_i omega_i(x^(i)).
///
/// Box is the indicator of [lo, hi]^N and doubles as the feasible set X when
/// it is the only term present.
class Regularizer {
 public:
  enum class Kind { kZero, kL1, kSqL2, kBox };

  static Regularizer Zero() { return Regularizer(Kind::kZero, 0.0, 0.0, 0.0); }
  /// weight * ||x||_1
  static Regularizer L1(double weight);
  /// (modulus / 2) * ||x||^2
  static Regularizer SqL2(double modulus);
  static Regularizer Box(double lo, double hi);

  /// Parses "zero", "l1:<w>", "sql2:<lambda>" or "box:<lo>:<hi>".
  static Regularizer Parse(const std::string& text);
  std::string ToString() const;

  Kind kind() const { return kind_; }
  double weight() const { return weight_; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }

  /// Strong-convexity modulus lambda (nonzero only for SqL2).
  double modulus() const { return kind_ == Kind::kSqL2 ? weight_ : 0.0; }

  /// Value on any slice; +inf outside the box for kBox.
  double Value(const ConstVectorRef& x) const;

  friend bool operator==(const Regularizer&, const Regularizer&) = default;

 private:
  Regularizer(Kind kind, double weight, double lo, double hi)
      : kind_(kind), weight_(weight), lo_(lo), hi_(hi) {}

  Kind kind_;
  double weight_;
  double lo_;
  double hi_;
};

/// Quadratic distance-generating function d_i(x) = 1/2 ||x - c^(i)||^2 per
/// block, 1-strongly convex in the Euclidean block norm.
class DistanceFunction {
 public:
  explicit DistanceFunction(BlockVector center) : center_(std::move(center)) {}
  static DistanceFunction Origin(const BlockPartition& partition) {
    return DistanceFunction(BlockVector(partition));
  }

  const BlockVector& center() const { return center_; }
  double modulus() const { return 1.0; }

  double Value(const BlockVector& x, Index i) const;
  double Value(const BlockVector& x) const;
  Vector Gradient(const BlockVector& x, Index i) const;

 private:
  BlockVector center_;
};

/// V_i(z, x) = d_i(x) - d_i(z) - <grad_i d(z), x - z>.
double Bregman(const DistanceFunction& d, const BlockVector& z, const BlockVector& x, Index i);
double Bregman(const DistanceFunction& d, const BlockVector& z, const BlockVector& x);

/// sign(v) * max(|v| - t, 0); exact ties |v| == t return 0.
double SoftThreshold(double v, double threshold);

/// argmin_x { <gbar, x> + weight * omega(x) + gamma * 1/2 ||x - center||^2 }.
Vector ProxStepU(const ConstVectorRef& gbar, double weight, const Regularizer& omega, double gamma,
                 const ConstVectorRef& center);
Vector ProxStepU(const ConstVectorRef& gbar, double weight, const Regularizer& omega, double gamma,
                 const DistanceFunction& d, Index i);

/// argmin_{x in X} { <gbar, x> + (gamma / p) * 1/2 ||x - center||^2 }, where X
/// is R^N_i unless `feasible` is a box.
Vector ProxStepR(const ConstVectorRef& gbar, double gamma, double p, const ConstVectorRef& center,
                 const Regularizer& feasible = Regularizer::Zero());
Vector ProxStepR(const ConstVectorRef& gbar, double gamma, double p, const DistanceFunction& d,
                 Index i, const Regularizer& feasible = Regularizer::Zero());

/// Objective minimized by ProxStepU, evaluated at x.
double ProxObjectiveU(const ConstVectorRef& gbar, double weight, const Regularizer& omega,
                      double gamma, const ConstVectorRef& center, const ConstVectorRef& x);

}  // namespace sbda
