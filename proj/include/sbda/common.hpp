#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace sbda {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using VectorRef = Eigen::Ref<Vector>;
using ConstVectorRef = Eigen::Ref<const Vector>;

using Rng = std::mt19937_64;

/// Independent generator for a given (seed, stream) pair. Solvers use one
/// stream for block sampling and another for oracle samples so the two never
/// interleave.
Rng MakeStream(std::uint64_t seed, std::uint64_t stream);

/// Uniform double in [0, 1) built from the top 53 bits of one draw.
inline double UniformUnit(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

class InvalidStepsize : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class InvalidDistribution : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class UnsupportedConfiguration : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace sbda
