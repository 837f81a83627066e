#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "sbda/solvers.hpp"

namespace sbda {

struct TraceRecord {
  std::string run_id;
  std::string algorithm;
  std::uint64_t seed = 0;
  Index t = 0;
  Index queries = 0;
  double passes = 0.0;
  double objective = 0.0;
  double ms = 0.0;

  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

inline constexpr char kTraceVersionLine[] = "# sbda-trace v1";
inline constexpr char kTraceHeader[] = "run_id,algo,seed,t,queries,passes,objective,ms";

std::vector<TraceRecord> ToRecords(const RunResult& result, const std::string& run_id);

/// One CSV row; doubles use 17 significant digits so parsing is lossless.
std::string FormatRecord(const TraceRecord& record);
TraceRecord ParseRecord(const std::string& line);

void WriteTrace(std::ostream& out, const std::vector<TraceRecord>& records, bool with_header);

/// Appends rows, writing the version line and header first when the file is
/// new or empty. An existing file must carry the same header.
void AppendTrace(const std::string& path, const std::vector<TraceRecord>& records);

std::vector<TraceRecord> ReadTrace(std::istream& in);
std::vector<TraceRecord> ReadTraceFile(const std::string& path);

}  // namespace sbda
