#include "sbda/checks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "sbda/geometry.hpp"
#include "sbda/oracles.hpp"
#include "sbda/schedules.hpp"

namespace sbda {
namespace {

constexpr double kRoundoff = 1e-12;

std::string Format(double v) {
  std::ostringstream out;
  out.precision(6);
  out << v;
  return out.str();
}

double Uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * UniformUnit(rng); }

Vector UniformVector(Rng& rng, Index n, double lo, double hi) {
  Vector v(n);
  for (Index k = 0; k < n; ++k) v[k] = Uniform(rng, lo, hi);
  return v;
}

Vector NormalVector(Rng& rng, Index n) {
  std::normal_distribution<double> normal;
  Vector v(n);
  for (Index k = 0; k < n; ++k) v[k] = normal(rng);
  return v;
}

Regularizer RandomRegularizer(Rng& rng, int kind) {
  switch (kind % 4) {
    case 0:
      return Regularizer::Zero();
    case 1:
      return Regularizer::L1(Uniform(rng, 0.01, 2.0));
    case 2:
      return Regularizer::SqL2(Uniform(rng, 0.01, 2.0));
    default: {
      const double lo = Uniform(rng, -2.0, 0.0);
      return Regularizer::Box(lo, lo + Uniform(rng, 0.1, 3.0));
    }
  }
}

// Random point that is feasible for omega.
Vector FeasiblePoint(Rng& rng, Index n, const Regularizer& omega) {
  if (omega.kind() == Regularizer::Kind::kBox) return UniformVector(rng, n, omega.lo(), omega.hi());
  return 3.0 * NormalVector(rng, n);
}

CheckResult ProxOptimality(std::uint64_t seed) {
  Rng rng = MakeStream(seed, 101);
  double margin = std::numeric_limits<double>::infinity();
  for (int instance = 0; instance < 40; ++instance) {
    const Index n = 1 + static_cast<Index>(rng() % 6);
    const Regularizer omega = RandomRegularizer(rng, instance);
    const Vector gbar = 2.0 * NormalVector(rng, n);
    const Vector center = NormalVector(rng, n);
    const double weight = Uniform(rng, 0.0, 5.0);
    const double gamma = Uniform(rng, 0.1, 5.0);
    const Vector z = ProxStepU(gbar, weight, omega, gamma, center);
    const double psi_z = ProxObjectiveU(gbar, weight, omega, gamma, center, z);
    for (int probe = 0; probe < 100; ++probe) {
      const Vector x = FeasiblePoint(rng, n, omega);
      const double psi_x = ProxObjectiveU(gbar, weight, omega, gamma, center, x);
      const double bregman = 0.5 * gamma * (x - z).squaredNorm();
      margin = std::min(margin, psi_x - psi_z - bregman);
    }
  }
  return {"prox_optimality", margin >= -1e-9, margin,
          "Psi(x) - Psi(z) - V(z, x) over 40 subproblems x 100 points"};
}

CheckResult BlockDescentBound(std::uint64_t seed) {
  Rng rng = MakeStream(seed, 102);
  double margin = std::numeric_limits<double>::infinity();
  for (int instance = 0; instance < 200; ++instance) {
    const Index n = 1 + static_cast<Index>(rng() % 4);
    const BlockPartition partition = BlockPartition::Uniform(n * (1 + static_cast<Index>(rng() % 3)), n);
    const Regularizer omega = RandomRegularizer(rng, instance);
    const Vector c = NormalVector(rng, partition.total());
    const Vector center = NormalVector(rng, partition.total());
    const double weight = Uniform(rng, 0.0, 3.0);
    const double gamma = Uniform(rng, 0.2, 4.0);
    const Index i = static_cast<Index>(rng() % static_cast<std::uint64_t>(n));
    const Vector g = 3.0 * NormalVector(rng, partition.size(i));

    Vector shifted = c;
    shifted.segment(partition.offset(i), partition.size(i)) += g;
    const Vector x0 = ProxStepU(c, weight, omega, gamma, center);
    const Vector z = ProxStepU(shifted, weight, omega, gamma, center);
    const auto psi = [&](const Vector& x) {
      return ProxObjectiveU(c, weight, omega, gamma, center, x);
    };
    const double lhs = g.dot(x0.segment(partition.offset(i), partition.size(i))) + psi(x0);
    const double rhs = g.dot(z.segment(partition.offset(i), partition.size(i))) + psi(z) +
                       g.squaredNorm() / (2.0 * gamma);
    margin = std::min(margin, rhs - lhs);
  }
  return {"block_descent_bound", margin >= -1e-9, margin,
          "one-block linear perturbation of a strongly convex separable Psi, 200 instances"};
}

CheckResult BlockFunctionBound(std::uint64_t seed) {
  Rng rng = MakeStream(seed, 103);
  double margin = std::numeric_limits<double>::infinity();
  for (int instance = 0; instance < 10; ++instance) {
    const Index m = 30;
    const BlockPartition partition = BlockPartition::Uniform(9, 3);
    Matrix rows(m, partition.total());
    for (Index k = 0; k < m; ++k) rows.row(k) = NormalVector(rng, partition.total()).transpose();
    const Vector targets = NormalVector(rng, m);
    const FiniteSumOracle oracle(partition, rows, targets, FiniteSumOracle::LossKind::kAbsolute);
    // Every stochastic block subgradient is +-a_k^(i), so the largest row
    // block norm is a uniform bound.
    Vector bound(partition.num_blocks());
    for (Index i = 0; i < partition.num_blocks(); ++i) {
      bound[i] = rows.middleCols(partition.offset(i), partition.size(i)).rowwise().norm().maxCoeff();
    }
    for (int probe = 0; probe < 100; ++probe) {
      const BlockVector x(partition, 2.0 * NormalVector(rng, partition.total()));
      const Index i = static_cast<Index>(rng() % 3);
      const Vector y = Uniform(rng, 0.01, 3.0) * NormalVector(rng, partition.size(i));
      BlockVector z = x;
      z.block(i) += y;
      const double rhs = oracle.Loss(x) + oracle.ExpectedBlockSubgradient(x, i).dot(y) +
                         2.0 * bound[i] * y.norm();
      margin = std::min(margin, rhs - oracle.Loss(z));
    }
  }
  return {"block_function_bound", margin >= -1e-9, margin,
          "l1 regression, 10 instances x 100 block moves"};
}

CheckResult RecursiveSumBound(std::uint64_t seed) {
  Rng rng = MakeStream(seed, 104);
  double margin = std::numeric_limits<double>::infinity();
  for (int instance = 0; instance < 100; ++instance) {
    const double p = Uniform(rng, 0.01, 0.99);
    const double a0 = Uniform(rng, 0.0, 5.0);
    std::vector<double> b(1 + rng() % 60);
    for (double& v : b) v = instance % 5 == 0 ? 0.0 : Uniform(rng, 0.0, 5.0);
    margin = std::min(margin, RecursiveSumSlack(p, a0, b));
  }
  // b = 0: the slack is exactly a0 (1 - p)^(t+1) / p.
  double closed_error = 0.0;
  for (double p : {0.1, 0.5, 0.9}) {
    for (int t : {1, 5, 20}) {
      const std::vector<double> zeros(static_cast<std::size_t>(t), 0.0);
      const double a0 = 2.0;
      const double expected = a0 * std::pow(1.0 - p, t + 1) / p;
      closed_error = std::max(closed_error, std::abs(RecursiveSumSlack(p, a0, zeros) - expected));
    }
  }
  const bool passed = margin >= -kRoundoff && closed_error <= 1e-12;
  return {"recursive_sum_bound", passed, margin,
          "100 random (p, a0, b); zero-input slack error " + Format(closed_error)};
}

CheckResult BernoulliCoupling(std::uint64_t) {
  const double pairs[5][2] = {{2.0, 1.0}, {1.0, 1.0}, {0.5, 2.0}, {5.0, 0.1}, {10.0, 3.0}};
  double margin = std::numeric_limits<double>::infinity();
  for (const auto& pair : pairs) {
    const double a = pair[0];
    const double b = pair[1];
    for (int ip = 0; ip < 50; ++ip) {
      const double p = (ip + 1) / 51.0;
      for (int ix = 0; ix < 50; ++ix) {
        const double x = a * ix / 49.0;
        margin = std::min(margin, CouplingRhs(p, a, b) - CouplingLhs(p, a, b, x));
      }
    }
  }
  const double example = CouplingRhs(0.5, 2.0, 1.0) - CouplingLhs(0.5, 2.0, 1.0, 1.0);
  return {"bernoulli_coupling", margin >= -kRoundoff, margin,
          "50x50 (p, x) grid for 5 (a, b) pairs; margin at p=0.5 a=2 x=1 b=1 is " +
              Format(example)};
}

// min over x > 0 of a / x + x / c, by golden section on log x.
double InnerReciprocalMin(double a, double c) {
  const auto f = [&](double s) { return a * std::exp(-s) + std::exp(s) / c; };
  return f(GoldenSectionMinimize(f, -30.0, 30.0));
}

CheckResult JointOptimumCheck(std::uint64_t seed) {
  Rng rng = MakeStream(seed, 105);
  double margin = std::numeric_limits<double>::infinity();
  for (int instance = 0; instance < 10; ++instance) {
    const Vector a = UniformVector(rng, 3, 0.1, 10.0);
    const Vector b = UniformVector(rng, 3, 0.1, 10.0);
    const JointSolution solution = JointOptimum(a, b);
    const double closed = JointObjective(a, b, solution.x, solution.y);
    const auto reduced = [&](const Vector& y) {
      double total = 0.0;
      for (Index k = 0; k < 3; ++k) total += InnerReciprocalMin(a[k], b[k] * y[k]);
      return total;
    };
    const Vector y_grid = SimplexGridMinimize(reduced, 3);
    margin = std::min(margin, reduced(y_grid) + 1e-3 - closed);
    for (int probe = 0; probe < 1000; ++probe) {
      Vector y(3);
      for (Index k = 0; k < 3; ++k) y[k] = -std::log(1.0 - UniformUnit(rng));
      y /= y.sum();
      const Vector x = UniformVector(rng, 3, 0.01, 20.0);
      margin = std::min(margin, JointObjective(a, b, x, y) - closed + 1e-3);
    }
  }
  return {"joint_optimum", margin >= 0.0, margin,
          "closed form vs simplex grid and 1000 random points, 10 instances (slack includes 1e-3)"};
}

CheckResult BinomialExpectation(std::uint64_t) {
  double worst = 0.0;
  double bound_margin = std::numeric_limits<double>::infinity();
  for (Index n : {2, 3, 5}) {
    for (Index t = 0; t <= 12; ++t) {
      for (double lambda : {0.5, 1.0, 2.0}) {
        const double exact = BinomialInverseMean(n, t, lambda, lambda);
        worst = std::max(worst, std::abs(exact - BinomialInverseMeanClosedForm(n, t, lambda)));
        bound_margin = std::min(bound_margin,
                                static_cast<double>(n) / (lambda * static_cast<double>(t + 1)) - exact);
      }
    }
  }
  const double example = BinomialInverseMean(2, 1, 1.0, 1.0);
  const double margin = std::min(1e-12 - worst, bound_margin);
  return {"binomial_expectation", worst <= 1e-12 && bound_margin >= 0.0, margin,
          "n in {2,3,5}, t <= 12; max identity error " + Format(worst) + ", n=2 t=1 value " +
              Format(example)};
}

CheckResult OptimalSamplingCheck(std::uint64_t seed) {
  Rng rng = MakeStream(seed, 106);
  double worst = 0.0;
  for (int instance = 0; instance < 10; ++instance) {
    BlockParams params{UniformVector(rng, 3, 0.1, 10.0), UniformVector(rng, 3, 0.1, 10.0)};
    const double horizon = 100.0;
    const double rho = 1.0;
    const auto objective = [&](const Vector& p) {
      double total = 0.0;
      for (Index i = 0; i < 3; ++i) {
        const double a = (horizon + 1.0) * params.M[i] * params.M[i] / (2.0 * rho);
        total += InnerReciprocalMin(a, p[i] / params.D[i]);
      }
      return total;
    };
    const Vector p_grid = SimplexGridMinimize(objective, 3);
    const Vector p_formula = OptimalSampling(params).probabilities();
    worst = std::max(worst, (p_grid - p_formula).cwiseAbs().maxCoeff());
  }
  return {"optimal_sampling", worst <= 1e-3, 1e-3 - worst,
          "10 random 3-block instances; max coordinate gap " + Format(worst)};
}

}  // namespace

double CouplingLhs(double p, double a, double b, double x) {
  double total = 0.0;
  for (int r1 = 0; r1 <= 1; ++r1) {
    for (int r2 = 0; r2 <= 1; ++r2) {
      const double prob = (r1 ? p : 1.0 - p) * (r2 ? p : 1.0 - p);
      total += prob / (r1 * x + r2 * (a - x) + b);
    }
  }
  return total;
}

double CouplingRhs(double p, double a, double b) { return p / (a + b) + (1.0 - p) / b; }

double RecursiveSumSlack(double p, double a0, std::span<const double> b) {
  double a = a0;
  double sum_a = a0;
  double sum_b = 0.0;
  for (double bt : b) {
    a = p * bt + (1.0 - p) * a;
    sum_a += a;
    sum_b += bt;
  }
  return sum_b + a0 / p - sum_a;
}

double BinomialInverseMean(Index n, Index t, double lambda, double c) {
  const double q = 1.0 / static_cast<double>(n);
  double total = 0.0;
  double choose = 1.0;
  for (Index k = 0; k <= t; ++k) {
    if (k > 0) choose = choose * static_cast<double>(t - k + 1) / static_cast<double>(k);
    const double prob = choose * std::pow(q, static_cast<double>(k)) *
                        std::pow(1.0 - q, static_cast<double>(t - k));
    total += prob / (lambda * static_cast<double>(k) + c);
  }
  return total;
}

double BinomialInverseMeanClosedForm(Index n, Index t, double lambda) {
  const double nn = static_cast<double>(n);
  return nn / (lambda * static_cast<double>(t + 1)) *
         (1.0 - std::pow((nn - 1.0) / nn, static_cast<double>(t + 1)));
}

double GoldenSectionMinimize(const std::function<double(double)>& f, double lo, double hi,
                             int iterations) {
  const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - ratio * (hi - lo);
  double x2 = lo + ratio * (hi - lo);
  double f1 = f(x1);
  double f2 = f(x2);
  for (int k = 0; k < iterations && hi - lo > 1e-14 * (1.0 + std::abs(lo)); ++k) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - ratio * (hi - lo);
      f1 = f(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + ratio * (hi - lo);
      f2 = f(x2);
    }
  }
  return 0.5 * (lo + hi);
}

Vector SimplexGridMinimize(const std::function<double(const Vector&)>& f, Index n,
                           double tolerance) {
  if (n != 2 && n != 3) throw std::invalid_argument("SimplexGridMinimize supports n = 2 or 3");
  Vector best = Vector::Constant(n, 1.0 / static_cast<double>(n));
  double best_value = f(best);
  const auto consider = [&](const Vector& p) {
    if ((p.array() <= 0.0).any()) return;
    const double v = f(p);
    if (v < best_value) {
      best_value = v;
      best = p;
    }
  };

  double step = 0.01;
  // Coarse pass over the whole simplex.
  for (int i = 1; i < 100; ++i) {
    if (n == 2) {
      consider(Vector{{i * step, 1.0 - i * step}});
      continue;
    }
    for (int j = 1; i + j < 100; ++j) {
      consider(Vector{{i * step, j * step, 1.0 - (i + j) * step}});
    }
  }
  // Zoom: a 21-point window per free coordinate at a fifth of the spacing.
  while (step > tolerance) {
    const Vector center = best;
    step /= 5.0;
    for (int di = -10; di <= 10; ++di) {
      if (n == 2) {
        consider(Vector{{center[0] + di * step, center[1] - di * step}});
        continue;
      }
      for (int dj = -10; dj <= 10; ++dj) {
        const double p0 = center[0] + di * step;
        const double p1 = center[1] + dj * step;
        consider(Vector{{p0, p1, 1.0 - p0 - p1}});
      }
    }
  }
  return best;
}

const std::vector<CheckInfo>& CheckRegistry() {
  static const std::vector<CheckInfo> registry = {
      {"prox_optimality", "prox subproblem minimizer dominates with a Bregman gap", ProxOptimality},
      {"block_descent_bound", "one-block perturbation changes the minimum by at most ||g||^2/2rho",
       BlockDescentBound},
      {"block_function_bound", "f(x + U_i y) <= f(x) + <g_i, y> + 2 M_i ||y||", BlockFunctionBound},
      {"recursive_sum_bound", "sum a_s <= sum b_s + a_0 / p for the mixing recursion",
       RecursiveSumBound},
      {"bernoulli_coupling", "split Bernoulli denominators are dominated by a single draw",
       BernoulliCoupling},
      {"joint_optimum", "closed-form minimizer of sum a/x + x/(b y) over x and the simplex",
       JointOptimumCheck},
      {"binomial_expectation", "E[1/(lambda(l+1))] for binomial l matches its closed form",
       BinomialExpectation},
      {"optimal_sampling", "p ~ M^(2/3) D^(1/3) minimizes the sampling/stepsize bound",
       OptimalSamplingCheck},
  };
  return registry;
}

const std::vector<std::string>& RequiredCheckNames() {
  static const std::vector<std::string> names = {
      "prox_optimality",    "block_descent_bound", "block_function_bound", "recursive_sum_bound",
      "bernoulli_coupling", "joint_optimum",       "binomial_expectation", "optimal_sampling",
  };
  return names;
}

std::vector<CheckResult> RunChecks(std::uint64_t seed, const std::vector<std::string>& names) {
  std::vector<CheckResult> results;
  const auto& registry = CheckRegistry();
  if (names.empty()) {
    for (const CheckInfo& info : registry) results.push_back(info.run(seed));
    return results;
  }
  for (const std::string& name : names) {
    const auto it = std::find_if(registry.begin(), registry.end(),
                                 [&](const CheckInfo& info) { return info.name == name; });
    if (it == registry.end()) throw std::invalid_argument("unknown check '" + name + "'");
    results.push_back(it->run(seed));
  }
  return results;
}

}  // namespace sbda
