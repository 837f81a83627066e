#include "sbda/instance_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace sbda {
namespace {

static_assert(std::endian::native == std::endian::little, "instance files assume a little-endian host");

constexpr char kMagic[] = "SBDA-INSTANCE";
constexpr std::size_t kMagicSize = sizeof(kMagic) - 1;
// Guards against reading absurd sizes from a corrupt file.
constexpr std::uint64_t kMaxElements = std::uint64_t{1} << 34;

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  template <class T>
  void Pod(T value) {
    out_.write(reinterpret_cast<const char*>(&value), sizeof(T));
  }
  void String(const std::string& s) {
    Pod<std::uint64_t>(s.size());
    out_.write(s.data(), static_cast<std::streamsize>(s.size()));
  }
  void Vec(const Vector& v) {
    Pod<std::uint64_t>(static_cast<std::uint64_t>(v.size()));
    out_.write(reinterpret_cast<const char*>(v.data()),
               static_cast<std::streamsize>(v.size() * sizeof(double)));
  }
  void Mat(const Matrix& m) {
    Pod<std::uint64_t>(static_cast<std::uint64_t>(m.rows()));
    Pod<std::uint64_t>(static_cast<std::uint64_t>(m.cols()));
    out_.write(reinterpret_cast<const char*>(m.data()),
               static_cast<std::streamsize>(m.size() * sizeof(double)));
  }

 private:
  std::ostream& out_;
};

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  template <class T>
  T Pod() {
    T value{};
    in_.read(reinterpret_cast<char*>(&value), sizeof(T));
    Check();
    return value;
  }
  std::string String() {
    const std::uint64_t n = Size();
    std::string s(n, '\0');
    in_.read(s.data(), static_cast<std::streamsize>(n));
    Check();
    return s;
  }
  Vector Vec() {
    const std::uint64_t n = Size();
    Vector v(static_cast<Index>(n));
    in_.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
    Check();
    return v;
  }
  Matrix Mat() {
    const std::uint64_t rows = Size();
    const std::uint64_t cols = Size();
    if (rows != 0 && cols > kMaxElements / rows) throw std::runtime_error("instance: matrix too large");
    Matrix m(static_cast<Index>(rows), static_cast<Index>(cols));
    in_.read(reinterpret_cast<char*>(m.data()),
             static_cast<std::streamsize>(rows * cols * sizeof(double)));
    Check();
    return m;
  }

 private:
  std::uint64_t Size() {
    const auto n = Pod<std::uint64_t>();
    if (n > kMaxElements) throw std::runtime_error("instance: corrupt length field");
    return n;
  }
  void Check() {
    if (!in_) throw std::runtime_error("instance: truncated file");
  }

  std::istream& in_;
};

void WriteCommon(Writer& w, const std::string& kind, const StochasticOracle& oracle) {
  w.String(kind);
  w.Pod<std::uint64_t>(oracle.meta().size());
  for (const auto& [key, value] : oracle.meta()) {
    w.String(key);
    w.String(value);
  }
  const auto& sizes = oracle.partition().sizes();
  w.Pod<std::uint64_t>(sizes.size());
  for (Index s : sizes) w.Pod<std::int64_t>(s);
  w.String(oracle.regularizer().ToString());
}

void WritePlanted(Writer& w, const StochasticOracle& oracle) {
  w.Pod<std::uint8_t>(oracle.planted().has_value());
  if (oracle.planted()) w.Vec(oracle.planted()->data());
}

}  // namespace

void WriteInstance(const StochasticOracle& oracle, std::ostream& out) {
  Writer w(out);
  out.write(kMagic, kMagicSize);
  w.Pod<std::uint32_t>(kInstanceFormatVersion);
  if (const auto* fs = dynamic_cast<const FiniteSumOracle*>(&oracle)) {
    WriteCommon(w, "finite_sum", oracle);
    w.Pod<std::uint8_t>(fs->loss_kind() == FiniteSumOracle::LossKind::kAbsolute ? 0 : 1);
    w.Pod<std::uint8_t>(fs->deterministic());
    w.Mat(fs->rows());
    w.Vec(fs->targets());
    w.Mat(fs->holdout_rows());
    w.Vec(fs->holdout_targets());
    WritePlanted(w, oracle);
  } else if (const auto* lasso = dynamic_cast<const OnlineLassoOracle*>(&oracle)) {
    WriteCommon(w, "online_lasso", oracle);
    w.Mat(lasso->features());
    w.Vec(lasso->responses());
    w.Vec(lasso->feature_sampler().probabilities());
    WritePlanted(w, oracle);
  } else {
    throw std::invalid_argument("instance serialization supports finite-sum and lasso oracles only");
  }
  if (!out) throw std::runtime_error("instance: write failed");
}

void SaveInstance(const StochasticOracle& oracle, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  WriteInstance(oracle, out);
  out.close();
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

std::unique_ptr<StochasticOracle> ReadInstance(std::istream& in) {
  char magic[kMagicSize];
  in.read(magic, kMagicSize);
  if (!in || std::memcmp(magic, kMagic, kMagicSize) != 0) {
    throw std::runtime_error("not an instance file (bad magic)");
  }
  Reader r(in);
  const auto version = r.Pod<std::uint32_t>();
  if (version != kInstanceFormatVersion) {
    throw std::runtime_error("unsupported instance format version " + std::to_string(version));
  }
  const std::string kind = r.String();
  std::map<std::string, std::string> meta;
  const auto meta_count = r.Pod<std::uint64_t>();
  for (std::uint64_t k = 0; k < meta_count; ++k) {
    std::string key = r.String();
    meta[key] = r.String();
  }
  std::vector<Index> sizes(r.Pod<std::uint64_t>());
  for (Index& s : sizes) s = r.Pod<std::int64_t>();
  const BlockPartition partition(sizes);
  const Regularizer regularizer = Regularizer::Parse(r.String());

  if (kind == "finite_sum") {
    const auto loss = r.Pod<std::uint8_t>() == 0 ? FiniteSumOracle::LossKind::kAbsolute
                                                 : FiniteSumOracle::LossKind::kSquared;
    const bool deterministic = r.Pod<std::uint8_t>() != 0;
    Matrix rows = r.Mat();
    Vector targets = r.Vec();
    Matrix holdout_rows = r.Mat();
    Vector holdout_targets = r.Vec();
    auto oracle = std::make_unique<FiniteSumOracle>(partition, std::move(rows), std::move(targets),
                                                    loss, regularizer);
    if (holdout_rows.rows() > 0) oracle->set_holdout(std::move(holdout_rows), std::move(holdout_targets));
    if (r.Pod<std::uint8_t>()) oracle->set_planted(BlockVector(partition, r.Vec()));
    oracle->set_meta(meta);
    if (deterministic) {
      auto exact = oracle->AsDeterministic();
      exact->set_meta(meta);
      return exact;
    }
    return oracle;
  }
  if (kind == "online_lasso") {
    Matrix features = r.Mat();
    Vector responses = r.Vec();
    const Vector p = r.Vec();
    if (regularizer.kind() != Regularizer::Kind::kL1) {
      throw std::runtime_error("instance: lasso regularizer must be l1");
    }
    auto oracle = std::make_unique<OnlineLassoOracle>(partition, std::move(features),
                                                      std::move(responses),
                                                      SamplingDistribution::FromWeights(p),
                                                      regularizer.weight());
    if (r.Pod<std::uint8_t>()) oracle->set_planted(BlockVector(partition, r.Vec()));
    oracle->set_meta(meta);
    return oracle;
  }
  throw std::runtime_error("unknown instance kind '" + kind + "'");
}

std::unique_ptr<StochasticOracle> LoadInstance(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open instance '" + path + "'");
  return ReadInstance(in);
}

}  // namespace sbda
