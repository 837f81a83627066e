#pragma once

#include <iosfwd>
#include <memory>
#include <string>

#include "sbda/oracles.hpp"

namespace sbda {

/// Binary instance files: "SBDA-INSTANCE", a format version, then the oracle
/// kind, metadata, partition, regularizer and all data arrays. Numbers are
/// stored little-endian, so the bytes depend only on the instance.
inline constexpr std::uint32_t kInstanceFormatVersion = 1;

/// Supports FiniteSumOracle and OnlineLassoOracle; other oracles throw.
void WriteInstance(const StochasticOracle& oracle, std::ostream& out);
void SaveInstance(const StochasticOracle& oracle, const std::string& path);

std::unique_ptr<StochasticOracle> ReadInstance(std::istream& in);
std::unique_ptr<StochasticOracle> LoadInstance(const std::string& path);

}  // namespace sbda
