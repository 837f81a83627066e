#include "sbda/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace sbda {
namespace {

Vector DrawGaussian(Index n, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(n);
  for (Index k = 0; k < n; ++k) v[k] = normal(rng);
  return v;
}

Matrix DrawGaussianMatrix(Index rows, Index cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix a(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) a(r, c) = normal(rng);
  }
  return a;
}

std::string Num(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

Index UniformIndex(Index n, Rng& rng) {
  return std::min<Index>(static_cast<Index>(UniformUnit(rng) * static_cast<double>(n)), n - 1);
}

}  // namespace

BlockVector StochasticOracle::ExpectedSubgradient(const BlockVector& x) const {
  BlockVector g(partition_);
  for (Index i = 0; i < partition_.num_blocks(); ++i) g.block(i) = ExpectedBlockSubgradient(x, i);
  return g;
}

std::unique_ptr<StochasticOracle> StochasticOracle::WithRegularizer(const Regularizer& omega) const {
  auto copy = Clone();
  copy->regularizer_ = omega;
  copy->meta_["regularizer"] = omega.ToString();
  return copy;
}

// ---------------------------------------------------------------------------
// FiniteSumOracle

FiniteSumOracle::FiniteSumOracle(BlockPartition partition, Matrix rows, Vector targets,
                                 LossKind loss, Regularizer regularizer)
    : StochasticOracle(std::move(partition), regularizer),
      rows_(std::move(rows)),
      targets_(std::move(targets)),
      loss_(loss) {
  if (rows_.rows() < 1) throw std::invalid_argument("FiniteSumOracle: need at least one row");
  if (rows_.cols() != partition_.total()) {
    throw std::invalid_argument("FiniteSumOracle: row length does not match the partition");
  }
  if (targets_.size() != rows_.rows()) {
    throw std::invalid_argument("FiniteSumOracle: one target per row required");
  }
}

std::unique_ptr<FiniteSumOracle> FiniteSumOracle::AsDeterministic() const {
  auto copy = std::make_unique<FiniteSumOracle>(*this);
  copy->deterministic_ = true;
  copy->meta_["mode"] = "deterministic";
  return copy;
}

void FiniteSumOracle::set_holdout(Matrix rows, Vector targets) {
  if (rows.cols() != partition_.total() || rows.rows() != targets.size()) {
    throw std::invalid_argument("FiniteSumOracle: holdout shape mismatch");
  }
  holdout_rows_ = std::move(rows);
  holdout_targets_ = std::move(targets);
}

double FiniteSumOracle::ResidualSlope(double residual) const {
  if (loss_ == LossKind::kSquared) return 2.0 * residual;
  if (residual > 0.0) return 1.0;
  if (residual < 0.0) return -1.0;
  return 0.0;
}

double FiniteSumOracle::RowLoss(double residual) const {
  return loss_ == LossKind::kSquared ? residual * residual : std::abs(residual);
}

Index FiniteSumOracle::SampleRow(Rng& rng) const { return UniformIndex(rows_.rows(), rng); }

double FiniteSumOracle::Loss(const BlockVector& x) const {
  const Vector residuals = targets_ - rows_ * x.data();
  double total = 0.0;
  for (Index k = 0; k < residuals.size(); ++k) total += RowLoss(residuals[k]);
  return total / static_cast<double>(rows_.rows());
}

double FiniteSumOracle::HoldoutLoss(const BlockVector& x) const {
  if (holdout_rows_.rows() == 0) return std::numeric_limits<double>::quiet_NaN();
  const Vector residuals = holdout_targets_ - holdout_rows_ * x.data();
  double total = 0.0;
  for (Index k = 0; k < residuals.size(); ++k) total += RowLoss(residuals[k]);
  return total / static_cast<double>(holdout_rows_.rows());
}

// loss(b - <a, x>) has subgradient -loss'(r) a.
Vector FiniteSumOracle::BlockSubgradient(const BlockVector& x, Index i, Rng& rng) const {
  if (deterministic_) return ExpectedBlockSubgradient(x, i);
  const Index k = SampleRow(rng);
  const double residual = targets_[k] - rows_.row(k).dot(x.data().transpose());
  const Index offset = partition_.offset(i);
  return -ResidualSlope(residual) * rows_.row(k).segment(offset, partition_.size(i)).transpose();
}

BlockVector FiniteSumOracle::FullSubgradient(const BlockVector& x, Rng& rng) const {
  if (deterministic_) return ExpectedSubgradient(x);
  const Index k = SampleRow(rng);
  const double residual = targets_[k] - rows_.row(k).dot(x.data().transpose());
  return BlockVector(partition_, -ResidualSlope(residual) * rows_.row(k).transpose());
}

Vector FiniteSumOracle::ExpectedBlockSubgradient(const BlockVector& x, Index i) const {
  const Vector residuals = targets_ - rows_ * x.data();
  Vector slopes(residuals.size());
  for (Index k = 0; k < residuals.size(); ++k) slopes[k] = ResidualSlope(residuals[k]);
  const Index offset = partition_.offset(i);
  const auto block_cols = rows_.middleCols(offset, partition_.size(i));
  return -(block_cols.transpose() * slopes) / static_cast<double>(rows_.rows());
}

std::unique_ptr<StochasticOracle> FiniteSumOracle::Clone() const {
  return std::make_unique<FiniteSumOracle>(*this);
}

// ---------------------------------------------------------------------------
// OnlineLassoOracle

OnlineLassoOracle::OnlineLassoOracle(BlockPartition partition, Matrix features, Vector responses,
                                     SamplingDistribution feature_sampler, double lambda)
    : StochasticOracle(std::move(partition), Regularizer::L1(lambda)),
      features_(std::move(features)),
      responses_(std::move(responses)),
      feature_sampler_(std::move(feature_sampler)) {
  if (features_.rows() < 1) throw std::invalid_argument("OnlineLassoOracle: need samples");
  if (features_.cols() != partition_.total() || responses_.size() != features_.rows()) {
    throw std::invalid_argument("OnlineLassoOracle: data shape mismatch");
  }
  if (feature_sampler_.size() != features_.cols()) {
    throw InvalidDistribution("OnlineLassoOracle: feature sampler must cover every feature");
  }
  for (Index j = 0; j < feature_sampler_.size(); ++j) {
    if (!(feature_sampler_.p(j) > 0.0)) {
      throw InvalidDistribution("OnlineLassoOracle: feature " + std::to_string(j) +
                                " has zero sampling probability");
    }
  }
}

double OnlineLassoOracle::Loss(const BlockVector& w) const {
  return 0.5 * (responses_ - features_ * w.data()).squaredNorm() /
         static_cast<double>(features_.rows());
}

Vector OnlineLassoOracle::BlockEstimate(const BlockVector& w, Index row, Index i, Rng& rng) const {
  const Index j = feature_sampler_.Sample(rng);
  const double inner_estimate = features_(row, j) * w.data()[j] / feature_sampler_.p(j);
  const auto block_features =
      features_.row(row).segment(partition_.offset(i), partition_.size(i)).transpose();
  return (inner_estimate - responses_[row]) * block_features;
}

Vector OnlineLassoOracle::BlockSubgradient(const BlockVector& w, Index i, Rng& rng) const {
  const Index row = UniformIndex(features_.rows(), rng);
  return BlockEstimate(w, row, i, rng);
}

BlockVector OnlineLassoOracle::FullSubgradient(const BlockVector& w, Rng& rng) const {
  const Index row = UniformIndex(features_.rows(), rng);
  const double residual = features_.row(row).dot(w.data().transpose()) - responses_[row];
  return BlockVector(partition_, residual * features_.row(row).transpose());
}

Vector OnlineLassoOracle::ExpectedBlockSubgradient(const BlockVector& w, Index i) const {
  const Vector residuals = features_ * w.data() - responses_;
  const auto block_cols = features_.middleCols(partition_.offset(i), partition_.size(i));
  return (block_cols.transpose() * residuals) / static_cast<double>(features_.rows());
}

std::unique_ptr<StochasticOracle> OnlineLassoOracle::Clone() const {
  return std::make_unique<OnlineLassoOracle>(*this);
}

// ---------------------------------------------------------------------------
// LinearOracle

LinearOracle::LinearOracle(BlockPartition partition, Vector slope, Regularizer regularizer)
    : StochasticOracle(std::move(partition), regularizer), slope_(std::move(slope)) {
  if (slope_.size() != partition_.total()) {
    throw std::invalid_argument("LinearOracle: slope length does not match the partition");
  }
  meta_["generator"] = "linear";
}

Vector LinearOracle::BlockSubgradient(const BlockVector& x, Index i, Rng&) const {
  return ExpectedBlockSubgradient(x, i);
}

BlockVector LinearOracle::FullSubgradient(const BlockVector&, Rng&) const {
  return BlockVector(partition_, slope_);
}

Vector LinearOracle::ExpectedBlockSubgradient(const BlockVector&, Index i) const {
  return slope_.segment(partition_.offset(i), partition_.size(i));
}

std::unique_ptr<StochasticOracle> LinearOracle::Clone() const {
  return std::make_unique<LinearOracle>(*this);
}

// ---------------------------------------------------------------------------
// Generators

ScalingLaw ScalingLaw::Parse(const std::string& text) {
  if (text == "uniform") return {};
  const std::string prefix = "powerlaw:";
  if (text.rfind(prefix, 0) == 0) {
    std::size_t used = 0;
    double a = 0.0;
    try {
      a = std::stod(text.substr(prefix.size()), &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != text.size() - prefix.size() || !(a > 0.0)) {
      throw std::invalid_argument("powerlaw exponent must be a positive number: '" + text + "'");
    }
    return {Kind::kPowerLaw, a};
  }
  throw std::invalid_argument("unknown scaling law '" + text + "' (expected uniform or powerlaw:<a>)");
}

std::string ScalingLaw::ToString() const {
  return kind == Kind::kUniform ? "uniform" : "powerlaw:" + Num(exponent);
}

// Inverse CDF of a (1 - s)^(a - 1): F(s) = 1 - (1 - s)^a.
Vector DrawColumnScales(const ScalingLaw& law, Index dim, Rng& rng) {
  if (law.kind == ScalingLaw::Kind::kUniform) return Vector::Ones(dim);
  Vector s(dim);
  for (Index k = 0; k < dim; ++k) {
    const double u = UniformUnit(rng);
    s[k] = 1.0 - std::pow(1.0 - u, 1.0 / law.exponent);
  }
  return s;
}

std::unique_ptr<FiniteSumOracle> GenerateL1Regression(const L1RegressionOptions& options) {
  if (options.samples < 1 || options.dim < 1) {
    throw std::invalid_argument("l1 regression: dimensions must be positive");
  }
  if (!(options.noise >= 0.0)) throw std::invalid_argument("l1 regression: noise must be >= 0");
  if (options.heavy_blocks < 0 || options.heavy_blocks > options.num_blocks) {
    throw std::invalid_argument("l1 regression: heavy_blocks must lie in [0, num_blocks]");
  }
  auto partition = BlockPartition::Uniform(options.dim, options.num_blocks);

  Rng rng = MakeStream(options.seed, 0);
  Matrix a = DrawGaussianMatrix(options.samples, options.dim, rng);
  const Vector solution = DrawGaussian(options.dim, rng);
  Vector scales = DrawColumnScales(options.scaling, options.dim, rng);

  if (options.heavy_blocks > 0) {
    std::vector<Index> order(static_cast<std::size_t>(options.num_blocks));
    std::iota(order.begin(), order.end(), Index{0});
    std::shuffle(order.begin(), order.end(), rng);
    for (Index h = 0; h < options.heavy_blocks; ++h) {
      const Index blk = order[static_cast<std::size_t>(h)];
      scales.segment(partition.offset(blk), partition.size(blk)).setOnes();
    }
  }

  a = a * scales.asDiagonal();
  Vector b = a * solution;
  const double noise_stddev = std::sqrt(options.noise);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Index k = 0; k < b.size(); ++k) b[k] += noise_stddev * normal(rng);

  auto oracle = std::make_unique<FiniteSumOracle>(partition, std::move(a), std::move(b),
                                                  FiniteSumOracle::LossKind::kAbsolute,
                                                  options.regularizer);
  oracle->set_planted(BlockVector(partition, solution));
  oracle->set_meta({{"generator", "l1reg"},
                    {"m", std::to_string(options.samples)},
                    {"n", std::to_string(options.dim)},
                    {"blocks", std::to_string(options.num_blocks)},
                    {"noise", Num(options.noise)},
                    {"scaling", options.scaling.ToString()},
                    {"heavy_blocks", std::to_string(options.heavy_blocks)},
                    {"regularizer", options.regularizer.ToString()},
                    {"seed", std::to_string(options.seed)}});
  return oracle;
}

std::unique_ptr<FiniteSumOracle> GenerateTransformedLs(const TransformedLsOptions& options) {
  if (options.dim < 1 || options.train_samples < 1 || options.test_samples < 0) {
    throw std::invalid_argument("transformed least squares: dimensions must be positive");
  }
  if (!(options.rescaled_fraction > 0.0 && options.rescaled_fraction < 1.0)) {
    throw std::invalid_argument("transformed least squares: rescaled fraction must lie in (0, 1)");
  }
  if (!(options.rescale > 0.0)) {
    throw std::invalid_argument("transformed least squares: rescale factor must be positive");
  }
  auto partition = BlockPartition::Uniform(options.dim, options.num_blocks);
  const Index n = options.dim;

  Rng rng = MakeStream(options.seed, 0);
  Matrix transform = DrawGaussianMatrix(n, n, rng);
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::shuffle(order.begin(), order.end(), rng);
  const auto rescaled =
      static_cast<Index>(std::llround(options.rescaled_fraction * static_cast<double>(n)));
  for (Index r = 0; r < rescaled; ++r) transform.row(order[static_cast<std::size_t>(r)]) *= options.rescale;

  Vector solution = DrawGaussian(n, rng).cwiseMax(-1.0).cwiseMin(1.0);

  auto draw = [&](Index count, Matrix& rows, Vector& targets) {
    // Each row is (L a)^T with a ~ N(0, I).
    rows = DrawGaussianMatrix(count, n, rng) * transform.transpose();
    targets = rows * solution;
    std::normal_distribution<double> normal(0.0, options.noise_stddev);
    for (Index k = 0; k < count; ++k) targets[k] += normal(rng);
  };
  Matrix train_rows, test_rows;
  Vector train_targets, test_targets;
  draw(options.train_samples, train_rows, train_targets);
  draw(options.test_samples, test_rows, test_targets);

  auto oracle = std::make_unique<FiniteSumOracle>(partition, std::move(train_rows),
                                                  std::move(train_targets),
                                                  FiniteSumOracle::LossKind::kSquared,
                                                  options.regularizer);
  if (options.test_samples > 0) oracle->set_holdout(std::move(test_rows), std::move(test_targets));
  oracle->set_planted(BlockVector(partition, solution));
  oracle->set_meta({{"generator", "tls"},
                    {"n", std::to_string(n)},
                    {"blocks", std::to_string(options.num_blocks)},
                    {"train", std::to_string(options.train_samples)},
                    {"test", std::to_string(options.test_samples)},
                    {"rescale", Num(options.rescale)},
                    {"fraction", Num(options.rescaled_fraction)},
                    {"regularizer", options.regularizer.ToString()},
                    {"seed", std::to_string(options.seed)}});
  return oracle;
}

std::unique_ptr<OnlineLassoOracle> GenerateOnlineLasso(const OnlineLassoOptions& options) {
  if (options.dim < 1 || options.samples < 1) {
    throw std::invalid_argument("online lasso: dimensions must be positive");
  }
  if (!(options.lambda >= 0.0)) throw std::invalid_argument("online lasso: lambda must be >= 0");
  auto partition = BlockPartition::Uniform(options.dim, options.num_blocks);
  auto sampler = options.feature_sampler.value_or(SamplingDistribution::Uniform(options.dim));

  Rng rng = MakeStream(options.seed, 0);
  Matrix features = DrawGaussianMatrix(options.samples, options.dim, rng);
  Vector weights = Vector::Zero(options.dim);
  std::vector<Index> order(static_cast<std::size_t>(options.dim));
  std::iota(order.begin(), order.end(), Index{0});
  std::shuffle(order.begin(), order.end(), rng);
  const auto support = std::max<Index>(
      1, static_cast<Index>(std::llround(options.support_fraction * static_cast<double>(options.dim))));
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Index k = 0; k < support; ++k) weights[order[static_cast<std::size_t>(k)]] = normal(rng);
  Vector responses = features * weights;
  for (Index k = 0; k < responses.size(); ++k) responses[k] += options.noise_stddev * normal(rng);

  auto oracle = std::make_unique<OnlineLassoOracle>(partition, std::move(features),
                                                    std::move(responses), sampler, options.lambda);
  oracle->set_planted(BlockVector(partition, weights));
  oracle->set_meta({{"generator", "lasso"},
                    {"n", std::to_string(options.dim)},
                    {"m", std::to_string(options.samples)},
                    {"blocks", std::to_string(options.num_blocks)},
                    {"lambda", Num(options.lambda)},
                    {"support", Num(options.support_fraction)},
                    {"seed", std::to_string(options.seed)}});
  return oracle;
}

// ---------------------------------------------------------------------------
// Parameter estimation

void BlockParams::Validate() const {
  if (M.size() == 0 || M.size() != D.size()) {
    throw std::invalid_argument("BlockParams: M and D must be nonempty and of equal length");
  }
  for (Index i = 0; i < M.size(); ++i) {
    if (!(M[i] > 0.0) || !(D[i] > 0.0) || !std::isfinite(M[i]) || !std::isfinite(D[i])) {
      throw std::invalid_argument("BlockParams: M and D must be finite and positive");
    }
  }
}

BlockParams EstimateParams(const StochasticOracle& oracle, std::span<const BlockVector> probes,
                           Index samples_per_point, double radius_guess, Rng& rng) {
  if (probes.empty()) throw std::invalid_argument("EstimateParams: need at least one probe point");
  if (samples_per_point < 1) throw std::invalid_argument("EstimateParams: samples_per_point >= 1");
  if (!(radius_guess > 0.0)) throw std::invalid_argument("EstimateParams: radius must be positive");

  const Index n = oracle.partition().num_blocks();
  const Index draws = oracle.deterministic() ? 1 : samples_per_point;
  Vector max_second_moment = Vector::Zero(n);
  for (const BlockVector& x : probes) {
    for (Index i = 0; i < n; ++i) {
      double total = 0.0;
      for (Index s = 0; s < draws; ++s) total += oracle.BlockSubgradient(x, i, rng).squaredNorm();
      max_second_moment[i] = std::max(max_second_moment[i], total / static_cast<double>(draws));
    }
  }
  BlockParams params;
  params.M = max_second_moment.cwiseSqrt().cwiseMax(BlockParams::kFloor);
  params.D = Vector::Constant(n, std::max(0.5 * radius_guess * radius_guess, BlockParams::kFloor));
  return params;
}

Vector PlantedDistanceBounds(const DistanceFunction& d, const BlockVector& solution) {
  Vector bounds(solution.num_blocks());
  for (Index i = 0; i < bounds.size(); ++i) {
    bounds[i] = std::max(d.Value(solution, i), BlockParams::kFloor);
  }
  return bounds;
}

}  // namespace sbda
