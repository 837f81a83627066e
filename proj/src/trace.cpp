#include "sbda/trace.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace sbda {
namespace {

std::string Double17(double v) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", v);
  return buffer;
}

template <class T>
T ParseNumber(const std::string& field, const char* what) {
  T value{};
  const auto* begin = field.data();
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) {
    throw std::runtime_error(std::string("trace: bad ") + what + " field '" + field + "'");
  }
  return value;
}

double ParseDouble(const std::string& field, const char* what) {
  // strtod accepts "inf"/"nan" spellings from %g as well.
  char* end = nullptr;
  const double value = std::strtod(field.c_str(), &end);
  if (field.empty() || end != field.c_str() + field.size()) {
    throw std::runtime_error(std::string("trace: bad ") + what + " field '" + field + "'");
  }
  return value;
}

}  // namespace

std::vector<TraceRecord> ToRecords(const RunResult& result, const std::string& run_id) {
  std::vector<TraceRecord> records;
  records.reserve(result.trace.size());
  for (const TracePoint& point : result.trace) {
    records.push_back({run_id, result.meta.algorithm, result.meta.seed, point.t, point.queries,
                       point.passes, point.objective, point.ms});
  }
  return records;
}

std::string FormatRecord(const TraceRecord& r) {
  if (r.run_id.find(',') != std::string::npos || r.algorithm.find(',') != std::string::npos) {
    throw std::invalid_argument("trace: run ids and algorithm names cannot contain commas");
  }
  char ms[64];
  std::snprintf(ms, sizeof(ms), "%.3f", r.ms);
  std::ostringstream out;
  out << r.run_id << ',' << r.algorithm << ',' << r.seed << ',' << r.t << ',' << r.queries << ','
      << Double17(r.passes) << ',' << Double17(r.objective) << ',' << ms;
  return out.str();
}

TraceRecord ParseRecord(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  if (fields.size() != 8) throw std::runtime_error("trace: expected 8 fields in '" + line + "'");
  TraceRecord r;
  r.run_id = fields[0];
  r.algorithm = fields[1];
  r.seed = ParseNumber<std::uint64_t>(fields[2], "seed");
  r.t = ParseNumber<Index>(fields[3], "t");
  r.queries = ParseNumber<Index>(fields[4], "queries");
  r.passes = ParseDouble(fields[5], "passes");
  r.objective = ParseDouble(fields[6], "objective");
  r.ms = ParseDouble(fields[7], "ms");
  return r;
}

void WriteTrace(std::ostream& out, const std::vector<TraceRecord>& records, bool with_header) {
  if (with_header) out << kTraceVersionLine << '\n' << kTraceHeader << '\n';
  for (const TraceRecord& r : records) out << FormatRecord(r) << '\n';
}

void AppendTrace(const std::string& path, const std::vector<TraceRecord>& records) {
  namespace fs = std::filesystem;
  const bool fresh = !fs::exists(path) || fs::file_size(path) == 0;
  if (!fresh) {
    std::ifstream in(path);
    std::string version, header;
    std::getline(in, version);
    std::getline(in, header);
    if (version != kTraceVersionLine || header != kTraceHeader) {
      throw std::runtime_error("'" + path + "' is not a v1 trace file");
    }
  }
  std::ofstream out(path, std::ios::app);
  if (!out) throw std::runtime_error("cannot open trace '" + path + "' for appending");
  WriteTrace(out, records, fresh);
  if (!out) throw std::runtime_error("failed writing trace '" + path + "'");
}

std::vector<TraceRecord> ReadTrace(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kTraceVersionLine) {
    throw std::runtime_error("trace: missing '" + std::string(kTraceVersionLine) + "' line");
  }
  if (!std::getline(in, line) || line != kTraceHeader) {
    throw std::runtime_error("trace: unexpected header '" + line + "'");
  }
  std::vector<TraceRecord> records;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    records.push_back(ParseRecord(line));
  }
  return records;
}

std::vector<TraceRecord> ReadTraceFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trace '" + path + "'");
  return ReadTrace(in);
}

}  // namespace sbda
