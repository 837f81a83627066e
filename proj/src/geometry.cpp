#include "sbda/geometry.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

namespace sbda {
namespace {

std::vector<std::string> SplitColon(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream stream(text);
  std::string item;
  while (std::getline(stream, item, ':')) parts.push_back(item);
  return parts;
}

double ParseNumber(const std::string& text, const std::string& context) {
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || text.empty()) {
    throw std::invalid_argument("cannot parse number '" + text + "' in " + context);
  }
  return value;
}

// Shortest text that parses back to the same double.
std::string FormatNumber(double v) {
  char buffer[64];
  const auto [end, ec] = std::to_chars(buffer, buffer + sizeof(buffer), v);
  return std::string(buffer, end);
}

}  // namespace

Regularizer Regularizer::L1(double weight) {
  if (!(weight >= 0.0)) throw std::invalid_argument("L1 weight must be nonnegative");
  return Regularizer(Kind::kL1, weight, 0.0, 0.0);
}

Regularizer Regularizer::SqL2(double modulus) {
  if (!(modulus >= 0.0)) throw std::invalid_argument("SqL2 modulus must be nonnegative");
  return Regularizer(Kind::kSqL2, modulus, 0.0, 0.0);
}

Regularizer Regularizer::Box(double lo, double hi) {
  if (!(lo <= hi)) throw std::invalid_argument("Box requires lo <= hi");
  return Regularizer(Kind::kBox, 0.0, lo, hi);
}

Regularizer Regularizer::Parse(const std::string& text) {
  const auto parts = SplitColon(text);
  if (parts.empty()) throw std::invalid_argument("empty regularizer text");
  const std::string& kind = parts[0];
  if (kind == "zero" && parts.size() == 1) return Zero();
  if (kind == "l1" && parts.size() == 2) return L1(ParseNumber(parts[1], text));
  if (kind == "sql2" && parts.size() == 2) return SqL2(ParseNumber(parts[1], text));
  if (kind == "box" && parts.size() == 3) {
    return Box(ParseNumber(parts[1], text), ParseNumber(parts[2], text));
  }
  throw std::invalid_argument("unknown regularizer '" + text +
                              "' (expected zero, l1:<w>, sql2:<lambda>, box:<lo>:<hi>)");
}

std::string Regularizer::ToString() const {
  switch (kind_) {
    case Kind::kZero:
      return "zero";
    case Kind::kL1:
      return "l1:" + FormatNumber(weight_);
    case Kind::kSqL2:
      return "sql2:" + FormatNumber(weight_);
    case Kind::kBox:
      return "box:" + FormatNumber(lo_) + ":" + FormatNumber(hi_);
  }
  return "zero";
}

double Regularizer::Value(const ConstVectorRef& x) const {
  switch (kind_) {
    case Kind::kZero:
      return 0.0;
    case Kind::kL1:
      return weight_ * x.lpNorm<1>();
    case Kind::kSqL2:
      return 0.5 * weight_ * x.squaredNorm();
    case Kind::kBox:
      for (Index k = 0; k < x.size(); ++k) {
        if (x[k] < lo_ || x[k] > hi_) return std::numeric_limits<double>::infinity();
      }
      return 0.0;
  }
  return 0.0;
}

double DistanceFunction::Value(const BlockVector& x, Index i) const {
  return 0.5 * (x.block(i) - center_.block(i)).squaredNorm();
}

double DistanceFunction::Value(const BlockVector& x) const {
  return 0.5 * (x.data() - center_.data()).squaredNorm();
}

Vector DistanceFunction::Gradient(const BlockVector& x, Index i) const {
  return x.block(i) - center_.block(i);
}

double Bregman(const DistanceFunction& d, const BlockVector& z, const BlockVector& x, Index i) {
  const Vector grad = d.Gradient(z, i);
  return d.Value(x, i) - d.Value(z, i) - grad.dot(x.block(i) - z.block(i));
}

double Bregman(const DistanceFunction& d, const BlockVector& z, const BlockVector& x) {
  double total = 0.0;
  for (Index i = 0; i < x.num_blocks(); ++i) total += Bregman(d, z, x, i);
  return total;
}

double SoftThreshold(double v, double threshold) {
  if (v > threshold) return v - threshold;
  if (v < -threshold) return v + threshold;
  return 0.0;
}

Vector ProxStepU(const ConstVectorRef& gbar, double weight, const Regularizer& omega, double gamma,
                 const ConstVectorRef& center) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw InvalidStepsize("prox step requires a finite gamma > 0");
  }
  if (!(weight >= 0.0)) throw std::invalid_argument("prox step requires weight l >= 0");
  switch (omega.kind()) {
    case Regularizer::Kind::kZero:
      return center - gbar / gamma;
    case Regularizer::Kind::kSqL2:
      return (gamma * center - gbar) / (gamma + weight * omega.weight());
    case Regularizer::Kind::kL1: {
      const double threshold = weight * omega.weight();
      Vector v = gamma * center - gbar;
      for (Index k = 0; k < v.size(); ++k) v[k] = SoftThreshold(v[k], threshold) / gamma;
      return v;
    }
    case Regularizer::Kind::kBox:
      return (center - gbar / gamma).cwiseMax(omega.lo()).cwiseMin(omega.hi());
  }
  return center;
}

Vector ProxStepU(const ConstVectorRef& gbar, double weight, const Regularizer& omega, double gamma,
                 const DistanceFunction& d, Index i) {
  return ProxStepU(gbar, weight, omega, gamma, d.center().block(i));
}

Vector ProxStepR(const ConstVectorRef& gbar, double gamma, double p, const ConstVectorRef& center,
                 const Regularizer& feasible) {
  if (!(p > 0.0 && p <= 1.0)) {
    throw InvalidDistribution("block probability must lie in (0, 1]");
  }
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw InvalidStepsize("prox step requires a finite gamma > 0");
  }
  Vector x = center - (p / gamma) * gbar;
  if (feasible.kind() == Regularizer::Kind::kBox) {
    x = x.cwiseMax(feasible.lo()).cwiseMin(feasible.hi());
  } else if (feasible.kind() != Regularizer::Kind::kZero) {
    throw UnsupportedConfiguration("nonuniform prox step supports only an unconstrained or box set");
  }
  return x;
}

Vector ProxStepR(const ConstVectorRef& gbar, double gamma, double p, const DistanceFunction& d,
                 Index i, const Regularizer& feasible) {
  return ProxStepR(gbar, gamma, p, d.center().block(i), feasible);
}

double ProxObjectiveU(const ConstVectorRef& gbar, double weight, const Regularizer& omega,
                      double gamma, const ConstVectorRef& center, const ConstVectorRef& x) {
  // The box indicator is not scaled by the accumulated weight.
  const double reg =
      omega.kind() == Regularizer::Kind::kBox ? omega.Value(x) : weight * omega.Value(x);
  return gbar.dot(x) + reg + 0.5 * gamma * (x - center).squaredNorm();
}

}  // namespace sbda
