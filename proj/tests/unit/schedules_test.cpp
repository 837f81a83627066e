#include <doctest.h>

#include <cmath>

#include "sbda/checks.hpp"
#include "sbda/schedules.hpp"

using namespace sbda;

namespace {

BlockParams Params(Vector m, Vector d) { return BlockParams{std::move(m), std::move(d)}; }

BlockParams Ones(Index n) { return Params(Vector::Ones(n), Vector::Ones(n)); }

BlockParams RandomParams(Index n, Rng& rng) {
  BlockParams p{Vector(n), Vector(n)};
  for (Index i = 0; i < n; ++i) {
    p.M[i] = 0.1 + 5.0 * UniformUnit(rng);
    p.D[i] = 0.1 + 5.0 * UniformUnit(rng);
  }
  return p;
}

}  // namespace

TEST_CASE("constant convex stepsizes") {
  const Schedule s = Schedule::ConstConvex(Ones(5), 5, 1.0);
  for (Index i = 0; i < 5; ++i) CHECK(s.InitialGamma()[i] == doctest::Approx(2.23607).epsilon(1e-5));
  CHECK(s.id() == "const_convex");
  CHECK_FALSE(s.adaptive());

  const BlockParams base = Params(Vector{{1.0, 2.0, 0.5}}, Vector{{1.0, 3.0, 2.0}});
  BlockParams doubled = base;
  doubled.M *= 2.0;
  const Vector g1 = Schedule::ConstConvex(base, 100).InitialGamma();
  const Vector g2 = Schedule::ConstConvex(doubled, 100).InitialGamma();
  CHECK((g2 - 2.0 * g1).cwiseAbs().maxCoeff() < 1e-12);

  const Vector equal = Schedule::ConstConvex(Params(Vector{{1.0, 2.0}}, Vector{{1.0, 4.0}}), 9)
                           .InitialGamma();
  CHECK(equal[0] == doctest::Approx(equal[1]));

  ScheduleState state = s.Start();
  s.Advance(state, 2);
  CHECK(state.gamma == s.InitialGamma());
  CHECK(state.alpha == 1.0);
  CHECK_THROWS(Schedule::ConstConvex(Ones(2), 0));
}

TEST_CASE("adaptive convex stepsizes") {
  const Schedule s = Schedule::AdaptiveConvex(Ones(1), 1.0);
  CHECK(s.InitialGamma()[0] == doctest::Approx(std::sqrt(10.0)));
  ScheduleState state = s.Start();
  for (int t = 0; t < 4; ++t) s.Advance(state, 0);
  CHECK(state.t == 3);
  CHECK(state.gamma[0] == doctest::Approx(6.32456).epsilon(1e-5));

  const Schedule three = Schedule::AdaptiveConvex(Ones(3), 1.0);
  ScheduleState path = three.Start();
  const Vector initial = three.InitialGamma();
  Rng rng = MakeStream(2, 1);
  Vector previous = path.gamma;
  for (int t = 0; t < 200; ++t) {
    const Index i = t < 100 ? static_cast<Index>(UniformUnit(rng) * 2) : 1;
    three.Advance(path, i);
    for (Index j = 0; j < 3; ++j) {
      if (j == i) {
        CHECK(path.gamma[j] >= previous[j]);
      } else {
        CHECK(path.gamma[j] == previous[j]);
      }
    }
    previous = path.gamma;
  }
  CHECK(path.gamma[2] == initial[2]);  // never sampled
}

TEST_CASE("strongly convex simple schedule") {
  const Schedule s = Schedule::StronglyConvexSimple(3, 2.0, 1.0);
  CHECK(s.InitialGamma() == Vector::Constant(3, 2.0));
  CHECK(s.alpha(0) == 1.0);
  CHECK(s.alpha(57) == 1.0);
  CHECK_THROWS(Schedule::StronglyConvexSimple(3, 0.0, 1.0));
  CHECK_THROWS(Schedule::StronglyConvexSimple(3, -1.0, 1.0));
}

TEST_CASE("accumulated weight on a block is Binomial(t, 1/n)") {
  // Chi-square goodness of fit of l after t = 20 uniform draws over n = 4 blocks.
  const Index n = 4;
  const int t = 20;
  const int runs = 10000;
  const Schedule s = Schedule::StronglyConvexSimple(n, 1.0, 1.0);
  const auto uniform = SamplingDistribution::Uniform(n);
  Rng rng = MakeStream(11, 1);
  std::vector<int> counts(t + 1, 0);
  for (int r = 0; r < runs; ++r) {
    ScheduleState state = s.Start();
    for (int k = 0; k < t; ++k) s.Advance(state, uniform.Sample(rng));
    ++counts[static_cast<std::size_t>(state.l[0])];
  }
  // Pool cells with expected count below 5 into the tails.
  std::vector<double> pmf(t + 1);
  for (int k = 0; k <= t; ++k) {
    pmf[k] = std::exp(std::lgamma(t + 1.0) - std::lgamma(k + 1.0) - std::lgamma(t - k + 1.0) +
                      k * std::log(0.25) + (t - k) * std::log(0.75));
  }
  double chi2 = 0.0;
  int cells = 0;
  double pooled_expected = 0.0, pooled_observed = 0.0;
  for (int k = 0; k <= t; ++k) {
    const double expected = runs * pmf[k];
    if (expected < 5.0) {
      pooled_expected += expected;
      pooled_observed += counts[k];
      continue;
    }
    chi2 += (counts[k] - expected) * (counts[k] - expected) / expected;
    ++cells;
  }
  if (pooled_expected > 0.0) {
    chi2 += (pooled_observed - pooled_expected) * (pooled_observed - pooled_expected) / pooled_expected;
    ++cells;
  }
  // 99.9% quantile of chi-square with at most 13 degrees of freedom is 34.5.
  CHECK(cells - 1 <= 13);
  CHECK(chi2 < 34.5);
}

TEST_CASE("inverse mean of the accumulated weight") {
  CHECK(BinomialInverseMean(2, 1, 1.0, 1.0) == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(BinomialInverseMeanClosedForm(2, 1, 1.0) == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(BinomialInverseMean(2, 1, 1.0, 1.0) <= 2.0 / (1.0 * 2.0));
}

TEST_CASE("strongly convex aggressive schedule") {
  const Schedule s = Schedule::StronglyConvexAggressive(2, 1.0, 1.0, 10);
  CHECK(s.InitialGamma() == Vector::Constant(2, 14.0));
  CHECK(s.alpha(-1) == 0.0);
  CHECK(s.alpha(0) == 2.0);
  CHECK(s.alpha(1) == 3.0);
  CHECK(s.alpha(2) == 4.0);
  ScheduleState state = s.Start();
  s.Advance(state, 0);
  s.Advance(state, 1);
  s.Advance(state, 0);
  CHECK(state.l[0] == 2.0 + 4.0);
  CHECK(state.l[1] == 3.0);
  CHECK_THROWS(Schedule::StronglyConvexAggressive(2, 0.0, 1.0, 10));
  CHECK_THROWS(Schedule::StronglyConvexAggressive(2, 1.0, 1.0, 0));
}

TEST_CASE("l accounting over random paths") {
  const Schedule s = Schedule::StronglyConvexAggressive(3, 0.5, 1.0, 100);
  const auto uniform = SamplingDistribution::Uniform(3);
  Rng rng = MakeStream(5, 1);
  ScheduleState state = s.Start();
  Vector expected = Vector::Zero(3);
  for (Index t = 0; t < 100; ++t) {
    const Index i = uniform.Sample(rng);
    s.Advance(state, i);
    expected[i] += static_cast<double>(3 + t);
  }
  CHECK(state.l == expected);
}

TEST_CASE("nonuniform constant stepsizes") {
  const BlockParams ones = Ones(2);
  const auto p = OptimalSampling(ones);
  CHECK(OptimalConstGamma(ones, 1, 1.0)[0] == doctest::Approx(0.70711).epsilon(1e-5));
  CHECK(Schedule::ConstNonuniform(ones, 1, 1.0, p).InitialGamma()[1] ==
        doctest::Approx(0.70711).epsilon(1e-5));

  // At p = 1/n the generic rule is the convex constant rule up to sqrt((1 + T) / (10 T)).
  Rng rng = MakeStream(3, 0);
  const BlockParams params = RandomParams(4, rng);
  const Index T = 50;
  const Vector generic =
      Schedule::ConstNonuniform(params, T, 1.0, SamplingDistribution::Uniform(4)).InitialGamma();
  const Vector convex = Schedule::ConstConvex(params, T, 1.0).InitialGamma();
  for (Index i = 0; i < 4; ++i) {
    CHECK(generic[i] / convex[i] == doctest::Approx(std::sqrt((1.0 + T) / (10.0 * T))));
  }

  // The generic rule at the optimal p equals the closed form.
  for (int k = 0; k < 100; ++k) {
    const BlockParams q = RandomParams(3, rng);
    const Vector a = Schedule::ConstNonuniform(q, 200, 0.5, OptimalSampling(q)).InitialGamma();
    const Vector b = OptimalConstGamma(q, 200, 0.5);
    CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-10 * b.maxCoeff());
  }
  CHECK_THROWS_AS(Schedule::ConstNonuniform(ones, 1, 1.0, SamplingDistribution::Uniform(3)),
                  InvalidDistribution);
}

TEST_CASE("nonuniform adaptive stepsizes") {
  const auto p = SamplingDistribution::FromWeights(Vector{{1.0, 1.0}});
  const Schedule s = Schedule::AdaptiveNonuniform(Ones(2), 1.0, p);
  ScheduleState state = s.Start();
  s.Advance(state, 0);
  CHECK(state.gamma[0] == doctest::Approx(0.70711).epsilon(1e-5));
  s.Advance(state, 0);
  CHECK(state.gamma[0] == doctest::Approx(1.0));
  CHECK(state.gamma[1] == s.InitialGamma()[1]);
  // p = 1/n gives the convex adaptive rule up to the factor sqrt(10).
  const Schedule convex = Schedule::AdaptiveConvex(Ones(2), 1.0);
  CHECK(convex.InitialGamma()[0] / s.InitialGamma()[0] == doctest::Approx(std::sqrt(10.0)));
}

TEST_CASE("optimal sampling law") {
  CHECK(OptimalSampling(Ones(2)).probabilities() == Vector::Constant(2, 0.5));
  const auto p = OptimalSampling(Params(Vector{{8.0, 1.0}}, Vector{{1.0, 1.0}}));
  CHECK(p.p(0) == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(p.p(1) == doctest::Approx(0.2).epsilon(1e-12));

  // Grid search over the 2-simplex of sum_i sqrt(M_i^2 D_i / p_i), the bound
  // left after optimizing gamma for fixed p.
  double best = 0.0, best_value = INFINITY;
  for (int k = 1; k < 100000; ++k) {
    const double q = k / 100000.0;
    const double v = std::sqrt(64.0 / q) + std::sqrt(1.0 / (1.0 - q));
    if (v < best_value) {
      best_value = v;
      best = q;
    }
  }
  CHECK(std::abs(best - p.p(0)) <= 1e-3);

  Rng rng = MakeStream(8, 0);
  BlockParams q = RandomParams(4, rng);
  const Vector before = OptimalSampling(q).probabilities();
  q.D *= 7.5;
  CHECK((OptimalSampling(q).probabilities() - before).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("joint optimum closed form") {
  const JointSolution even = JointOptimum(Vector{{1.0, 1.0}}, Vector{{1.0, 1.0}});
  CHECK(even.y[0] == doctest::Approx(0.5));
  CHECK(even.x[0] == doctest::Approx(0.70711).epsilon(1e-5));

  const Vector a{{8.0, 1.0}}, b{{1.0, 1.0}};
  const JointSolution skew = JointOptimum(a, b);
  CHECK(skew.y[0] == doctest::Approx(2.0 / 3.0));
  CHECK(skew.y[1] == doctest::Approx(1.0 / 3.0));
  CHECK(skew.x[0] == doctest::Approx(4.0 / std::sqrt(3.0)));
  CHECK(skew.x[1] == doctest::Approx(1.0 / std::sqrt(3.0)));

  // Dense grid over y with x minimized in closed form for each y.
  double grid = INFINITY;
  for (int k = 1; k < 20000; ++k) {
    const Vector y{{k / 20000.0, 1.0 - k / 20000.0}};
    const Vector x = (a.array() * b.array() * y.array()).sqrt();
    grid = std::min(grid, JointObjective(a, b, x, y));
  }
  const double closed = JointObjective(a, b, skew.x, skew.y);
  CHECK(closed <= grid + 1e-3);

  Rng rng = MakeStream(9, 0);
  for (int k = 0; k < 1000; ++k) {
    Vector y{{UniformUnit(rng) + 1e-9, UniformUnit(rng) + 1e-9}};
    y /= y.sum();
    const Vector x{{0.01 + 5 * UniformUnit(rng), 0.01 + 5 * UniformUnit(rng)}};
    CHECK(closed <= JointObjective(a, b, x, y) + 1e-12);
  }
  CHECK_THROWS(JointOptimum(Vector{{1.0, -1.0}}, Vector{{1.0, 1.0}}));
  CHECK_THROWS(JointOptimum(Vector{{1.0}}, Vector{{1.0, 1.0}}));
}

TEST_CASE("schedule ids and scaling") {
  for (const char* id : {"const_convex", "adaptive_convex", "strong_simple", "strong_aggressive",
                         "const_nonuniform", "adaptive_nonuniform"}) {
    CHECK(ScheduleKindId(ParseScheduleKind(id)) == id);
  }
  CHECK_THROWS(ParseScheduleKind("cosine"));
  const Schedule s = Schedule::ConstConvex(Ones(2), 10).Scaled(3.0);
  CHECK(s.scale() == 3.0);
  CHECK(s.InitialGamma()[0] == doctest::Approx(3.0 * std::sqrt(5.0 * 10 / 2)));
  CHECK_THROWS(s.Scaled(0.0));
  ScheduleState state = s.Start();
  CHECK_THROWS_AS(s.Advance(state, 2), std::out_of_range);
}
