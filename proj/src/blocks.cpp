#include "sbda/blocks.hpp"

#include <string>
#include <utility>

namespace sbda {

Rng MakeStream(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return Rng(seq);
}

BlockPartition::BlockPartition(std::vector<Index> sizes) : sizes_(std::move(sizes)) {
  if (sizes_.empty()) {
    throw std::invalid_argument("BlockPartition: need at least one block");
  }
  offsets_.reserve(sizes_.size() + 1);
  offsets_.push_back(0);
  for (Index s : sizes_) {
    if (s < 1) {
      throw std::invalid_argument("BlockPartition: block sizes must be positive");
    }
    offsets_.push_back(offsets_.back() + s);
  }
}

BlockPartition BlockPartition::Uniform(Index total, Index num_blocks) {
  if (num_blocks < 1 || total < num_blocks) {
    throw std::invalid_argument("BlockPartition::Uniform: need 1 <= num_blocks <= total, got " +
                                std::to_string(num_blocks) + " blocks for " +
                                std::to_string(total) + " coordinates");
  }
  std::vector<Index> sizes(static_cast<std::size_t>(num_blocks), total / num_blocks);
  sizes.back() += total % num_blocks;
  return BlockPartition(std::move(sizes));
}

void BlockPartition::CheckIndex(Index i) const {
  if (i < 0 || i >= num_blocks()) {
    throw std::out_of_range("block index " + std::to_string(i) + " out of range [0, " +
                            std::to_string(num_blocks()) + ")");
  }
}

Index BlockPartition::size(Index i) const {
  CheckIndex(i);
  return sizes_[static_cast<std::size_t>(i)];
}

Index BlockPartition::offset(Index i) const {
  CheckIndex(i);
  return offsets_[static_cast<std::size_t>(i)];
}

BlockVector::BlockVector(BlockPartition partition)
    : partition_(std::move(partition)), data_(Vector::Zero(partition_.total())) {}

BlockVector::BlockVector(BlockPartition partition, Vector data)
    : partition_(std::move(partition)), data_(std::move(data)) {
  if (data_.size() != partition_.total()) {
    throw std::invalid_argument("BlockVector: data length " + std::to_string(data_.size()) +
                                " does not match partition total " +
                                std::to_string(partition_.total()));
  }
}

Eigen::VectorBlock<Vector> BlockVector::block(Index i) {
  return data_.segment(partition_.offset(i), partition_.size(i));
}

Eigen::VectorBlock<const Vector> BlockVector::block(Index i) const {
  return data_.segment(partition_.offset(i), partition_.size(i));
}

double BlockVector::block_norm(Index i) const { return block(i).norm(); }

}  // namespace sbda
