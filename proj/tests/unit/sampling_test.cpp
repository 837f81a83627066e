#include <doctest.h>

#include <cmath>

#include "sbda/sampling.hpp"

using namespace sbda;

TEST_CASE("uniform frequencies over 1e5 draws") {
  const auto dist = SamplingDistribution::Uniform(4);
  Rng rng = MakeStream(3, 1);
  const int draws = 100000;
  std::vector<int> counts(4, 0);
  for (int k = 0; k < draws; ++k) ++counts[static_cast<std::size_t>(dist.Sample(rng))];
  const double sigma = std::sqrt(draws * 0.25 * 0.75);
  for (int c : counts) CHECK(std::abs(c - draws * 0.25) <= 3.0 * sigma);
}

TEST_CASE("explicit distribution frequencies") {
  const auto dist = SamplingDistribution::FromWeights(Vector{{8.0, 2.0}});
  CHECK(dist.p(0) == doctest::Approx(0.8));
  Rng rng = MakeStream(4, 1);
  int zeros = 0;
  const int draws = 100000;
  for (int k = 0; k < draws; ++k) zeros += dist.Sample(rng) == 0;
  CHECK(std::abs(zeros - 0.8 * draws) <= 3.0 * std::sqrt(draws * 0.16));
}

TEST_CASE("distribution invariants") {
  const auto dist = SamplingDistribution::FromWeights(Vector{{1, 2, 3, 4}});
  CHECK(dist.probabilities().sum() == doctest::Approx(1.0).epsilon(1e-12));
  for (Index i = 1; i < dist.size(); ++i) CHECK(dist.cumulative()[i] > dist.cumulative()[i - 1]);
  CHECK(dist.cumulative()[3] == 1.0);
  CHECK_FALSE(dist.floored());
}

TEST_CASE("near-degenerate weights are floored") {
  const auto dist = SamplingDistribution::FromWeights(Vector{{1.0, 0.0, 1e-12}});
  CHECK(dist.floored());
  CHECK(dist.p(1) > 0.0);
  CHECK(dist.p(1) == doctest::Approx(SamplingDistribution::kFloor).epsilon(1e-3));
  CHECK(dist.probabilities().sum() == doctest::Approx(1.0).epsilon(1e-12));

  const auto single = SamplingDistribution::FromWeights(Vector{{5.0}});
  Rng rng = MakeStream(1, 1);
  for (int k = 0; k < 100; ++k) CHECK(single.Sample(rng) == 0);
}

TEST_CASE("invalid weights") {
  CHECK_THROWS_AS(SamplingDistribution::FromWeights(Vector{}), InvalidDistribution);
  CHECK_THROWS_AS(SamplingDistribution::FromWeights(Vector{{1.0, -1.0}}), InvalidDistribution);
  CHECK_THROWS_AS(SamplingDistribution::FromWeights(Vector{{0.0, 0.0}}), InvalidDistribution);
  CHECK_THROWS_AS(SamplingDistribution::FromWeights(Vector{{1.0, NAN}}), InvalidDistribution);
  CHECK_THROWS_AS(SamplingDistribution::Uniform(0), InvalidDistribution);
}

TEST_CASE("fixed seed gives the same sequence and one draw per sample") {
  const auto dist = SamplingDistribution::FromWeights(Vector{{1, 1, 2}});
  Rng a = MakeStream(9, 1);
  Rng b = MakeStream(9, 1);
  for (int k = 0; k < 1000; ++k) CHECK(dist.Sample(a) == dist.Sample(b));
  Rng c = MakeStream(9, 1);
  Rng d = MakeStream(9, 1);
  dist.Sample(c);
  d();
  CHECK(c() == d());
}
