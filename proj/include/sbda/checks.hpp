#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "sbda/common.hpp"

namespace sbda {

struct CheckResult {
  std::string name;
  bool passed = false;
  /// Smallest slack (bound minus measured side) over everything probed.
  double margin = 0.0;
  std::string detail;
};

struct CheckInfo {
  std::string name;
  std::string summary;
  std::function<CheckResult(std::uint64_t seed)> run;
};

/// Every inequality/identity checker, in report order.
const std::vector<CheckInfo>& CheckRegistry();

/// Names that must be present in the registry.
const std::vector<std::string>& RequiredCheckNames();

/// Runs the named checks (all when `names` is empty). Unknown names throw.
std::vector<CheckResult> RunChecks(std::uint64_t seed, const std::vector<std::string>& names = {});

// Building blocks exposed for reuse and testing.

/// E[1 / (r1 x + r2 (a - x) + b)] for r1, r2 ~ Bernoulli(p), by enumeration.
double CouplingLhs(double p, double a, double b, double x);
/// E[1 / (r a + b)] for r ~ Bernoulli(p).
double CouplingRhs(double p, double a, double b);

/// Runs a_t = p b_t + (1 - p) a_{t-1} for t = 1..len(b) from a0 and returns
/// (sum_{s>=1} b_s + a0 / p) - sum_{s>=0} a_s.
double RecursiveSumSlack(double p, double a0, std::span<const double> b);

/// E[1 / (lambda l + c)] with l ~ Binomial(t, 1/n), summed over the pmf.
double BinomialInverseMean(Index n, Index t, double lambda, double c);
/// n / (lambda (t + 1)) * (1 - ((n - 1) / n)^(t + 1)).
double BinomialInverseMeanClosedForm(Index n, Index t, double lambda);

/// Minimizes f over [lo, hi] for unimodal f.
double GoldenSectionMinimize(const std::function<double(double)>& f, double lo, double hi,
                             int iterations = 200);

/// Minimizes f over the probability simplex (n = 2 or 3) by a coarse grid
/// followed by successively finer grids around the incumbent.
Vector SimplexGridMinimize(const std::function<double(const Vector&)>& f, Index n,
                           double tolerance = 1e-5);

}  // namespace sbda
