#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "sbda/config.hpp"
#include "sbda/oracles.hpp"
#include "sbda/schedules.hpp"
#include "sbda/solvers.hpp"
#include "sbda/trace.hpp"

namespace sbda {

/// Generates the configured instance, or loads it from `problem.instance`.
std::unique_ptr<StochasticOracle> BuildProblem(const ProblemConfig& problem);

/// M_i from probes (origin, planted point, random points); D_i from the
/// planted solution when available and allowed, else from the radius guess.
BlockParams ResolveParams(const StochasticOracle& oracle, const ParamsConfig& params,
                          std::uint64_t seed);

SamplingDistribution ResolveSampler(const SamplerConfig& sampler, const BlockParams& params);

Schedule ResolveSchedule(const RunConfig& config, const StochasticOracle& oracle,
                         const BlockParams& params, const SamplingDistribution& sampler);

/// Runs config.algorithm on the oracle with config.run settings.
RunResult ExecuteRun(const StochasticOracle& oracle, const RunConfig& config,
                     const BlockParams& params, bool record_trace = true);

/// Best logged objective of a full dual-averaging run of the given horizon.
double ReferenceOptimum(const StochasticOracle& oracle, const BlockParams& params, Index horizon,
                        std::uint64_t seed);

struct SummaryRow {
  std::string label;
  Index horizon = 0;
  Index t = 0;
  double passes = 0.0;
  double mean_objective = 0.0;
  /// Mean of objective - reference.
  double mean_error = 0.0;
  double stderr_error = 0.0;
  Index n_seeds = 0;
};

struct SlopeRow {
  std::string label;
  double slope = 0.0;
  double intercept = 0.0;
  Index points = 0;
};

struct CompareResult {
  double reference = 0.0;
  std::vector<TraceRecord> traces;
  std::vector<SummaryRow> summary;
  std::vector<SlopeRow> slopes;
};

/// Groups rows by run id (horizon = last t of the run), then by label,
/// horizon and t.
std::vector<SummaryRow> Summarize(const std::vector<TraceRecord>& records, double reference);

/// Least-squares fit of log(mean final error) against log(T) per label;
/// horizons with nonpositive error are skipped.
std::vector<SlopeRow> FitSlopes(const std::vector<SummaryRow>& summary);

/// Ordinary least squares y = slope * x + intercept.
std::pair<double, double> FitLine(const std::vector<double>& x, const std::vector<double>& y);

/// Every (run config, horizon, seed) combination; runs fan out over worker
/// threads but results do not depend on scheduling.
CompareResult RunCompare(const CompareConfig& config,
                         const std::function<void(const std::string&)>& progress = {});

/// Writes traces.csv (round-tripped through the parser), summary.csv,
/// slopes.csv and plot.py into `dir`.
CompareResult WriteCompareOutputs(const CompareResult& result, const std::string& dir);

}  // namespace sbda
