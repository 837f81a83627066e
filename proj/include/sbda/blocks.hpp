#pragma once

#include <vector>

#include "sbda/common.hpp"

namespace sbda {

/// Decomposition of R^N into n contiguous coordinate blocks. Block i covers
/// coordinates [offset(i), offset(i) + size(i)).
class BlockPartition {
 public:
  BlockPartition() = default;
  explicit BlockPartition(std::vector<Index> sizes);

  /// n blocks of total / n coordinates; the last block absorbs the remainder.
  static BlockPartition Uniform(Index total, Index num_blocks);

  Index num_blocks() const { return static_cast<Index>(sizes_.size()); }
  Index total() const { return offsets_.empty() ? 0 : offsets_.back(); }
  Index size(Index i) const;
  Index offset(Index i) const;
  const std::vector<Index>& sizes() const { return sizes_; }

  /// Fraction of all coordinates that block i covers.
  double fraction(Index i) const { return static_cast<double>(size(i)) / total(); }

  void CheckIndex(Index i) const;

  friend bool operator==(const BlockPartition&, const BlockPartition&) = default;

 private:
  std::vector<Index> sizes_;
  std::vector<Index> offsets_;
};

/// Dense N-vector addressable by block.
class BlockVector {
 public:
  BlockVector() = default;
  explicit BlockVector(BlockPartition partition);
  BlockVector(BlockPartition partition, Vector data);

  const BlockPartition& partition() const { return partition_; }
  Index num_blocks() const { return partition_.num_blocks(); }
  Index size() const { return data_.size(); }

  Vector& data() { return data_; }
  const Vector& data() const { return data_; }

  Eigen::VectorBlock<Vector> block(Index i);
  Eigen::VectorBlock<const Vector> block(Index i) const;

  /// Euclidean norm of block i.
  double block_norm(Index i) const;
  double norm() const { return data_.norm(); }

  void SetZero() { data_.setZero(); }

 private:
  BlockPartition partition_;
  Vector data_;
};

}  // namespace sbda
