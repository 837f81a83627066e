#include <doctest.h>

#include <cmath>

#include "sbda/oracles.hpp"

using namespace sbda;

namespace {

BlockVector RandomPoint(const BlockPartition& p, Rng& rng, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  BlockVector x(p);
  for (Index j = 0; j < x.size(); ++j) x.data()[j] = normal(rng);
  return x;
}

// Largest |mean - reference| / standard error over the coordinates of draws.
double WorstZ(const std::function<Vector()>& draw, const Vector& reference, int draws) {
  Vector sum = Vector::Zero(reference.size());
  Vector sum_sq = Vector::Zero(reference.size());
  for (int k = 0; k < draws; ++k) {
    const Vector g = draw();
    sum += g;
    sum_sq += g.cwiseProduct(g);
  }
  double worst = 0.0;
  for (Index c = 0; c < reference.size(); ++c) {
    const double mean = sum[c] / draws;
    const double var = std::max(sum_sq[c] / draws - mean * mean, 0.0);
    const double se = std::sqrt(var / draws);
    const double gap = std::abs(mean - reference[c]);
    worst = std::max(worst, se > 0.0 ? gap / se : (gap < 1e-12 ? 0.0 : INFINITY));
  }
  return worst;
}

BlockVector Origin(const StochasticOracle& o) { return BlockVector(o.partition()); }

std::vector<BlockVector> Probes(const StochasticOracle& o, Rng& rng) {
  std::vector<BlockVector> probes = {Origin(o)};
  for (int k = 0; k < 4; ++k) probes.push_back(RandomPoint(o.partition(), rng));
  return probes;
}

double Spread(const Vector& m) { return m.maxCoeff() / m.minCoeff(); }

}  // namespace

TEST_CASE("linear oracle: estimated M equals the true block norms") {
  const BlockPartition p({2, 1});
  const LinearOracle oracle(p, Vector{{3.0, 4.0, -2.0}});
  Rng rng = MakeStream(1, 0);
  std::vector<BlockVector> probes = {BlockVector(p), RandomPoint(p, rng)};
  const BlockParams params = EstimateParams(oracle, probes, 10, 2.0, rng);
  CHECK(params.M[0] == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(params.M[1] == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(params.D[0] == doctest::Approx(2.0));
  CHECK(oracle.Objective(BlockVector(p, Vector{{1, 1, 1}})) == doctest::Approx(5.0));
}

TEST_CASE("parameter estimation floors and validation") {
  const BlockPartition p({1, 1});
  const LinearOracle oracle(p, Vector{{0.0, 1.0}});
  Rng rng = MakeStream(1, 0);
  std::vector<BlockVector> probes = {BlockVector(p)};
  const BlockParams params = EstimateParams(oracle, probes, 1, 1.0, rng);
  CHECK(params.M[0] == BlockParams::kFloor);
  CHECK_NOTHROW(params.Validate());
  CHECK_THROWS(EstimateParams(oracle, {}, 1, 1.0, rng));
  CHECK_THROWS(EstimateParams(oracle, probes, 0, 1.0, rng));
  const BlockVector solution(p, Vector{{0.0, 2.0}});
  const Vector d = PlantedDistanceBounds(DistanceFunction::Origin(p), solution);
  CHECK(d[0] == BlockParams::kFloor);
  CHECK(d[1] == doctest::Approx(2.0));
  BlockParams bad{Vector{{1.0}}, Vector{{0.0}}};
  CHECK_THROWS(bad.Validate());
}

TEST_CASE("l1 regression: exact data vanishes at the planted point") {
  L1RegressionOptions o;
  o.samples = 50;
  o.dim = 20;
  o.num_blocks = 4;
  o.noise = 0.0;
  o.seed = 3;
  const auto oracle = GenerateL1Regression(o);
  CHECK(oracle->Objective(*oracle->planted()) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
}

TEST_CASE("l1 regression: planted point is a near minimizer") {
  L1RegressionOptions o;
  o.seed = 7;
  const auto oracle = GenerateL1Regression(o);
  const BlockVector& star = *oracle->planted();
  const double at_star = oracle->Objective(star);
  Rng rng = MakeStream(8, 0);
  for (int k = 0; k < 20; ++k) {
    BlockVector dir = RandomPoint(oracle->partition(), rng);
    dir.data() /= dir.norm();
    BlockVector moved(oracle->partition(), star.data() + dir.data());
    CHECK(at_star <= oracle->Objective(moved));
  }
}

TEST_CASE("l1 regression subgradient is the signed sampled row") {
  const BlockPartition p({1, 1});
  Matrix rows(1, 2);
  rows << 1.0, 2.0;
  const FiniteSumOracle oracle(p, rows, Vector{{1.0}}, FiniteSumOracle::LossKind::kAbsolute);
  Rng rng = MakeStream(1, 2);
  // residual 1 - (0 + 2) = -1 at x = (0, 1): G = +a.
  const BlockVector x(p, Vector{{0.0, 1.0}});
  CHECK(oracle.BlockSubgradient(x, 1, rng)[0] == 2.0);
  CHECK(oracle.BlockSubgradient(BlockVector(p), 0, rng)[0] == -1.0);
  CHECK(oracle.FullSubgradient(x, rng).data() == Vector{{1.0, 2.0}});
  // residual exactly 0: sign(0) = 0.
  CHECK(oracle.BlockSubgradient(BlockVector(p, Vector{{1.0, 0.0}}), 0, rng)[0] == 0.0);
  CHECK_THROWS(FiniteSumOracle(p, Matrix(1, 3), Vector{{1.0}}, FiniteSumOracle::LossKind::kAbsolute));
}

TEST_CASE("l1 regression: uniform scaling gives nearly equal M") {
  L1RegressionOptions o;
  o.seed = 5;
  const auto oracle = GenerateL1Regression(o);
  Rng rng = MakeStream(6, 0);
  const auto probes = Probes(*oracle, rng);
  const BlockParams params = EstimateParams(*oracle, probes, 2000, 1.0, rng);
  CHECK(Spread(params.M) < 1.2);
}

TEST_CASE("l1 regression: power-law scaling spreads M by 10x or more") {
  L1RegressionOptions o;
  o.scaling = ScalingLaw::Parse("powerlaw:30");
  o.num_blocks = o.dim;  // single-coordinate blocks
  o.seed = 7;
  const auto oracle = GenerateL1Regression(o);
  Rng rng = MakeStream(8, 0);
  const auto probes = Probes(*oracle, rng);
  const BlockParams params = EstimateParams(*oracle, probes, 200, 1.0, rng);
  CHECK(Spread(params.M) >= 10.0);
}

TEST_CASE("heavy blocks get unit column scale") {
  L1RegressionOptions o;
  o.scaling = ScalingLaw::Parse("powerlaw:30");
  o.num_blocks = 20;
  o.heavy_blocks = 2;
  o.seed = 9;
  const auto oracle = GenerateL1Regression(o);
  // Column norms of A S are ~sqrt(m) on unit-scale columns and much smaller otherwise.
  const Vector col_norms = oracle->rows().colwise().norm().transpose();
  int heavy = 0;
  for (Index i = 0; i < 20; ++i) {
    const double block = col_norms.segment(oracle->partition().offset(i), 10).minCoeff();
    heavy += block > 0.5 * std::sqrt(static_cast<double>(o.samples));
  }
  CHECK(heavy == 2);
  o.heavy_blocks = 21;
  CHECK_THROWS(GenerateL1Regression(o));
}

TEST_CASE("scaling law parsing and draws") {
  CHECK(ScalingLaw::Parse("uniform").kind == ScalingLaw::Kind::kUniform);
  const ScalingLaw law = ScalingLaw::Parse("powerlaw:5");
  CHECK(law.exponent == 5.0);
  CHECK(ScalingLaw::Parse(law.ToString()).exponent == 5.0);
  CHECK_THROWS(ScalingLaw::Parse("powerlaw:-1"));
  CHECK_THROWS(ScalingLaw::Parse("powerlaw:x"));
  CHECK_THROWS(ScalingLaw::Parse("lognormal"));
  Rng rng = MakeStream(1, 0);
  const Vector s = DrawColumnScales(ScalingLaw::Parse("powerlaw:30"), 100000, rng);
  CHECK(s.minCoeff() >= 0.0);
  CHECK(s.maxCoeff() <= 1.0);
  // E[s] = 1 / (a + 1) for density a (1 - s)^(a - 1).
  CHECK(s.mean() == doctest::Approx(1.0 / 31.0).epsilon(0.02));
  CHECK(DrawColumnScales(ScalingLaw{}, 5, rng) == Vector::Ones(5));
}

TEST_CASE("generators reject nonpositive dimensions") {
  L1RegressionOptions l1;
  l1.samples = 0;
  CHECK_THROWS(GenerateL1Regression(l1));
  TransformedLsOptions tls;
  tls.dim = 0;
  CHECK_THROWS(GenerateTransformedLs(tls));
  tls = {};
  tls.rescaled_fraction = 1.0;
  CHECK_THROWS(GenerateTransformedLs(tls));
  tls = {};
  tls.rescale = 0.0;
  CHECK_THROWS(GenerateTransformedLs(tls));
  OnlineLassoOptions lasso;
  lasso.dim = 0;
  CHECK_THROWS(GenerateOnlineLasso(lasso));
}

TEST_CASE("transformed least squares defaults and planted point") {
  TransformedLsOptions o;
  o.seed = 2;
  const auto oracle = GenerateTransformedLs(o);
  CHECK(oracle->dataset_size() == 3000);
  CHECK(oracle->holdout_rows().rows() == 10000);
  CHECK(oracle->partition().total() == 200);
  CHECK(oracle->planted()->data().cwiseAbs().maxCoeff() <= 1.0);
  // Noise variance 0.01: the loss at x* is about 0.01 on both splits.
  CHECK(oracle->Loss(*oracle->planted()) == doctest::Approx(0.01).epsilon(0.1));
  CHECK(oracle->HoldoutLoss(*oracle->planted()) == doctest::Approx(0.01).epsilon(0.1));
}

TEST_CASE("transformed least squares: rescale 1 gives nearly equal M") {
  TransformedLsOptions o;
  o.seed = 4;
  o.test_samples = 0;
  const auto oracle = GenerateTransformedLs(o);
  Rng rng = MakeStream(5, 0);
  std::vector<BlockVector> probes = {*oracle->planted()};
  // Monte Carlo estimate of E||G_i||^2 at the planted point over 1e4 samples.
  const BlockParams params = EstimateParams(*oracle, probes, 10000, 1.0, rng);
  CHECK(Spread(params.M) < 1.2);
  CHECK(std::isnan(oracle->HoldoutLoss(*oracle->planted())));
}

TEST_CASE("online lasso: zero weights leave only the response term") {
  OnlineLassoOptions o;
  o.seed = 3;
  o.lambda = 0.1;
  const auto oracle = GenerateOnlineLasso(o);
  CHECK(oracle->regularizer() == Regularizer::L1(0.1));
  Rng rng = MakeStream(4, 0);
  const BlockVector w(oracle->partition());
  for (Index row : {0, 5, 17}) {
    for (Index i : {0, 3}) {
      const Vector g = oracle->BlockEstimate(w, row, i, rng);
      const Index offset = oracle->partition().offset(i);
      CHECK(g[0] == doctest::Approx(-oracle->responses()[row] * oracle->features()(row, offset)));
    }
  }
}

TEST_CASE("online lasso estimate is unbiased over the feature draw") {
  OnlineLassoOptions o;
  o.dim = 12;
  o.num_blocks = 4;
  o.seed = 3;
  o.feature_sampler = SamplingDistribution::FromWeights(Vector::LinSpaced(12, 1.0, 3.0));
  const auto oracle = GenerateOnlineLasso(o);
  Rng rng = MakeStream(4, 0);
  const BlockVector w = RandomPoint(oracle->partition(), rng);
  const Index row = 7;
  for (Index i = 0; i < 4; ++i) {
    const Vector x_i = oracle->features().row(row).segment(oracle->partition().offset(i), 3).transpose();
    const double inner = oracle->features().row(row).dot(w.data().transpose());
    const Vector reference = x_i * (inner - oracle->responses()[row]);
    CHECK(WorstZ([&] { return oracle->BlockEstimate(w, row, i, rng); }, reference, 100000) <= 3.0);
  }
}

TEST_CASE("online lasso feature sampler must match the features") {
  const BlockPartition p({2});
  CHECK_THROWS_AS(OnlineLassoOracle(p, Matrix::Ones(3, 2), Vector::Ones(3),
                                    SamplingDistribution::Uniform(3), 0.1),
                  InvalidDistribution);
  // A zero weight is floored, so every feature stays reachable.
  const auto floored = SamplingDistribution::FromWeights(Vector{{1.0, 0.0}});
  CHECK_NOTHROW(OnlineLassoOracle(p, Matrix::Ones(3, 2), Vector::Ones(3), floored, 0.1));
}

TEST_CASE("unbiasedness at random points for every generator") {
  L1RegressionOptions l1;
  l1.samples = 300;
  l1.dim = 20;
  l1.num_blocks = 4;
  l1.seed = 1;
  TransformedLsOptions tls;
  tls.dim = 20;
  tls.num_blocks = 4;
  tls.train_samples = 300;
  tls.test_samples = 0;
  tls.seed = 1;
  OnlineLassoOptions lasso;
  lasso.dim = 12;
  lasso.num_blocks = 4;
  lasso.samples = 300;
  lasso.seed = 1;
  std::vector<std::unique_ptr<StochasticOracle>> oracles;
  oracles.push_back(GenerateL1Regression(l1));
  oracles.push_back(GenerateTransformedLs(tls));
  oracles.push_back(GenerateOnlineLasso(lasso));
  Rng rng = MakeStream(2, 0);
  for (const auto& oracle : oracles) {
    for (int point = 0; point < 5; ++point) {
      const BlockVector x = RandomPoint(oracle->partition(), rng);
      const Index i = point % oracle->partition().num_blocks();
      CHECK(WorstZ([&] { return oracle->BlockSubgradient(x, i, rng); },
                   oracle->ExpectedBlockSubgradient(x, i), 20000) <= 4.0);
    }
  }
}

TEST_CASE("estimated M bounds held-out second moments within 5 percent") {
  L1RegressionOptions o;
  o.samples = 300;
  o.dim = 40;
  o.num_blocks = 4;
  o.scaling = ScalingLaw::Parse("powerlaw:5");
  o.seed = 11;
  const auto oracle = GenerateL1Regression(o);
  Rng rng = MakeStream(12, 0);
  const auto probes = Probes(*oracle, rng);
  const BlockParams params = EstimateParams(*oracle, probes, 2000, 1.0, rng);
  for (int point = 0; point < 5; ++point) {
    const BlockVector x = RandomPoint(oracle->partition(), rng);
    for (Index i = 0; i < 4; ++i) {
      double total = 0.0;
      for (int k = 0; k < 5000; ++k) total += oracle->BlockSubgradient(x, i, rng).squaredNorm();
      CHECK(total / 5000 <= 1.05 * params.M[i] * params.M[i]);
    }
  }
}

TEST_CASE("generators are deterministic per seed") {
  L1RegressionOptions o;
  o.samples = 40;
  o.dim = 10;
  o.num_blocks = 2;
  o.seed = 5;
  const auto a = GenerateL1Regression(o);
  const auto b = GenerateL1Regression(o);
  CHECK(a->rows() == b->rows());
  CHECK(a->targets() == b->targets());
  o.seed = 6;
  CHECK(GenerateL1Regression(o)->targets() != a->targets());
  Rng r1 = MakeStream(1, 2), r2 = MakeStream(1, 2);
  const BlockVector x(a->partition());
  for (int k = 0; k < 50; ++k) CHECK(a->BlockSubgradient(x, 1, r1) == b->BlockSubgradient(x, 1, r2));
}

TEST_CASE("deterministic mode and regularizer swap") {
  L1RegressionOptions o;
  o.samples = 40;
  o.dim = 10;
  o.num_blocks = 2;
  o.seed = 5;
  const auto oracle = GenerateL1Regression(o);
  const auto exact = oracle->AsDeterministic();
  Rng rng = MakeStream(1, 2);
  const BlockVector x(oracle->partition());
  CHECK(exact->deterministic());
  CHECK(exact->samples_per_query() == 40);
  CHECK(exact->BlockSubgradient(x, 0, rng) == oracle->ExpectedBlockSubgradient(x, 0));
  const auto regularized = oracle->WithRegularizer(Regularizer::SqL2(0.5));
  BlockVector ones(oracle->partition(), Vector::Ones(10));
  CHECK(regularized->Objective(ones) == doctest::Approx(oracle->Objective(ones) + 2.5));
  CHECK(regularized->meta().at("regularizer") == "sql2:0.5");
}
