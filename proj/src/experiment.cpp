#include "sbda/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <tuple>
#include <cstdio>
#include <stdexcept>
#include <thread>

#include "sbda/instance_io.hpp"

namespace sbda {
namespace {

constexpr std::uint64_t kParamsStream = 77;
constexpr std::uint64_t kReferenceIndex = 1'000'003;

StepRule::Kind StepKind(const std::string& rule, const std::string& fallback) {
  const std::string id = rule.empty() ? fallback : rule;
  if (id == "sm1") return StepRule::Kind::kInvSqrt;
  if (id == "sm2") return StepRule::Kind::kInvNorm;
  if (id == "const") return StepRule::Kind::kConstant;
  throw std::invalid_argument("unknown step rule '" + id + "'");
}

// Scale that makes eta match the constant default step at the horizon.
double DefaultStepScale(StepRule::Kind kind, const BlockParams& params, Index horizon, bool block) {
  switch (kind) {
    case StepRule::Kind::kConstant:
      return DefaultMirrorStep(params, horizon, block);
    case StepRule::Kind::kInvSqrt:
      return DefaultMirrorStep(params, 1, block);
    case StepRule::Kind::kInvNorm:
      return DefaultMirrorStep(params, horizon, block) * params.M.norm();
  }
  return 1.0;
}

double Mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

std::unique_ptr<StochasticOracle> BuildProblem(const ProblemConfig& problem) {
  if (!problem.instance.empty()) return LoadInstance(problem.instance);
  if (problem.generator == "l1reg") {
    L1RegressionOptions o;
    o.samples = problem.samples;
    o.dim = problem.dim;
    o.num_blocks = problem.blocks;
    o.noise = problem.noise;
    o.scaling = ScalingLaw::Parse(problem.scaling);
    o.heavy_blocks = problem.heavy_blocks;
    o.regularizer = Regularizer::Parse(problem.regularizer);
    o.seed = problem.seed;
    return GenerateL1Regression(o);
  }
  if (problem.generator == "tls") {
    TransformedLsOptions o;
    o.dim = problem.dim;
    o.num_blocks = problem.blocks;
    o.train_samples = problem.samples;
    o.test_samples = problem.test_samples;
    o.rescale = problem.rescale;
    o.rescaled_fraction = problem.rescaled_fraction;
    o.regularizer = Regularizer::Parse(problem.regularizer);
    o.seed = problem.seed;
    return GenerateTransformedLs(o);
  }
  if (problem.generator == "lasso") {
    OnlineLassoOptions o;
    o.dim = problem.dim;
    o.num_blocks = problem.blocks;
    o.samples = problem.samples;
    o.lambda = problem.lambda;
    o.support_fraction = problem.support_fraction;
    o.seed = problem.seed;
    return GenerateOnlineLasso(o);
  }
  throw std::invalid_argument("unknown generator '" + problem.generator + "'");
}

BlockParams ResolveParams(const StochasticOracle& oracle, const ParamsConfig& config,
                          std::uint64_t seed) {
  const BlockPartition& partition = oracle.partition();
  Rng rng = MakeStream(seed, kParamsStream);
  std::normal_distribution<double> normal;
  std::vector<BlockVector> probes;
  probes.emplace_back(partition);
  if (oracle.planted()) probes.push_back(*oracle.planted());
  for (Index k = 0; k < config.probes; ++k) {
    BlockVector x(partition);
    for (Index j = 0; j < partition.total(); ++j) x.data()[j] = config.radius * normal(rng);
    probes.push_back(std::move(x));
  }
  BlockParams params = EstimateParams(oracle, probes, config.samples, config.radius, rng);
  if (config.planted && oracle.planted()) {
    params.D = PlantedDistanceBounds(DistanceFunction::Origin(partition), *oracle.planted());
  }
  params.Validate();
  return params;
}

SamplingDistribution ResolveSampler(const SamplerConfig& sampler, const BlockParams& params) {
  if (sampler.id == "uniform") return SamplingDistribution::Uniform(params.num_blocks());
  if (sampler.id == "optimal") return OptimalSampling(params);
  if (sampler.id == "explicit") {
    if (static_cast<Index>(sampler.p.size()) != params.num_blocks()) {
      throw InvalidDistribution("explicit sampler needs one probability per block");
    }
    return SamplingDistribution::FromWeights(
        Eigen::Map<const Vector>(sampler.p.data(), static_cast<Index>(sampler.p.size())));
  }
  throw std::invalid_argument("unknown sampler '" + sampler.id + "'");
}

Schedule ResolveSchedule(const RunConfig& config, const StochasticOracle& oracle,
                         const BlockParams& params, const SamplingDistribution& sampler) {
  const ScheduleConfig& s = config.schedule;
  const Index n = params.num_blocks();
  const Index horizon = config.run.horizon;
  const double lambda = s.lambda > 0.0 ? s.lambda : oracle.regularizer().modulus();
  const Schedule schedule = [&] {
    switch (ParseScheduleKind(s.id)) {
      case ScheduleKind::kConstConvex:
        return Schedule::ConstConvex(params, horizon, s.rho);
      case ScheduleKind::kAdaptiveConvex:
        return Schedule::AdaptiveConvex(params, s.rho);
      case ScheduleKind::kStronglyConvexSimple:
        return Schedule::StronglyConvexSimple(n, lambda, s.rho);
      case ScheduleKind::kStronglyConvexAggressive:
        return Schedule::StronglyConvexAggressive(n, lambda, s.rho, horizon);
      case ScheduleKind::kConstNonuniform:
        return Schedule::ConstNonuniform(params, horizon, s.rho, sampler);
      case ScheduleKind::kAdaptiveNonuniform:
        return Schedule::AdaptiveNonuniform(params, s.rho, sampler);
    }
    throw std::invalid_argument("unknown schedule '" + s.id + "'");
  }();
  return s.scale == 1.0 ? schedule : schedule.Scaled(s.scale);
}

RunResult ExecuteRun(const StochasticOracle& oracle, const RunConfig& config,
                     const BlockParams& params, bool record_trace) {
  RunOptions options;
  options.horizon = config.run.horizon;
  options.seed = config.run.seed;
  options.log_every = config.run.log_every;
  options.timing = config.run.timing;
  options.record_trace = record_trace;

  const std::string& algo = config.algorithm;
  if (algo == "sbda_u" || algo == "sbda_r") {
    const SamplingDistribution sampler = ResolveSampler(config.sampler, params);
    const Schedule schedule = ResolveSchedule(config, oracle, params, sampler);
    if (algo == "sbda_u") return SbdaU(oracle, schedule, options);
    RunResult result = SbdaR(oracle, schedule, sampler, options);
    result.meta.sampler_id = config.sampler.id;
    return result;
  }
  if (algo == "da") {
    BetaSchedule beta = BetaSchedule::FromParams(params);
    if (config.step.rule == "const") beta.kind = BetaSchedule::Kind::kConstant;
    if (config.step.scale > 0.0) beta.scale = config.step.scale;
    return BaselineDa(oracle, beta, options);
  }
  if (algo == "md" || algo == "sbmd") {
    const bool block = algo == "sbmd";
    StepRule rule;
    rule.kind = StepKind(config.step.rule, block ? "const" : "sm1");
    rule.scale = config.step.scale > 0.0 ? config.step.scale
                                         : DefaultStepScale(rule.kind, params, options.horizon, block);
    if (!block) return BaselineMd(oracle, rule, options);
    const SamplingDistribution sampler = ResolveSampler(config.sampler, params);
    RunResult result = BaselineSbmd(oracle, rule, sampler, options);
    result.meta.sampler_id = config.sampler.id;
    return result;
  }
  throw std::invalid_argument("unknown algorithm '" + algo + "'");
}

double ReferenceOptimum(const StochasticOracle& oracle, const BlockParams& params, Index horizon,
                        std::uint64_t seed) {
  RunOptions options;
  options.horizon = horizon;
  options.seed = seed;
  options.timing = false;
  const RunResult result = BaselineDa(oracle, BetaSchedule::FromParams(params), options);
  double best = std::numeric_limits<double>::infinity();
  for (const TracePoint& point : result.trace) best = std::min(best, point.objective);
  return best;
}

std::vector<SummaryRow> Summarize(const std::vector<TraceRecord>& records, double reference) {
  // run id -> rows, in first-seen order.
  std::vector<std::string> order;
  std::map<std::string, std::vector<const TraceRecord*>> runs;
  for (const TraceRecord& r : records) {
    auto [it, inserted] = runs.try_emplace(r.run_id);
    if (inserted) order.push_back(r.run_id);
    it->second.push_back(&r);
  }
  struct Cell {
    std::vector<double> objective;
    std::vector<double> passes;
  };
  std::vector<std::tuple<std::string, Index, Index>> keys;
  std::map<std::tuple<std::string, Index, Index>, Cell> cells;
  for (const std::string& id : order) {
    const auto& rows = runs[id];
    Index horizon = 0;
    for (const TraceRecord* r : rows) horizon = std::max(horizon, r->t);
    for (const TraceRecord* r : rows) {
      const auto key = std::make_tuple(r->algorithm, horizon, r->t);
      auto [it, inserted] = cells.try_emplace(key);
      if (inserted) keys.push_back(key);
      it->second.objective.push_back(r->objective);
      it->second.passes.push_back(r->passes);
    }
  }
  std::sort(keys.begin(), keys.end());
  std::vector<SummaryRow> summary;
  for (const auto& key : keys) {
    const Cell& cell = cells[key];
    SummaryRow row;
    row.label = std::get<0>(key);
    row.horizon = std::get<1>(key);
    row.t = std::get<2>(key);
    row.n_seeds = static_cast<Index>(cell.objective.size());
    row.passes = Mean(cell.passes);
    row.mean_objective = Mean(cell.objective);
    row.mean_error = row.mean_objective - reference;
    if (row.n_seeds > 1) {
      double ss = 0.0;
      for (double v : cell.objective) ss += (v - row.mean_objective) * (v - row.mean_objective);
      row.stderr_error = std::sqrt(ss / static_cast<double>(row.n_seeds - 1) /
                                   static_cast<double>(row.n_seeds));
    }
    summary.push_back(row);
  }
  return summary;
}

std::pair<double, double> FitLine(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("FitLine needs >= 2 points");
  const double mx = Mean(x);
  const double my = Mean(y);
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxy += (x[k] - mx) * (y[k] - my);
    sxx += (x[k] - mx) * (x[k] - mx);
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("FitLine needs distinct x values");
  const double slope = sxy / sxx;
  return {slope, my - slope * mx};
}

std::vector<SlopeRow> FitSlopes(const std::vector<SummaryRow>& summary) {
  std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> points;
  std::vector<std::string> order;
  for (const SummaryRow& row : summary) {
    if (row.t != row.horizon || !(row.mean_error > 0.0)) continue;
    auto [it, inserted] = points.try_emplace(row.label);
    if (inserted) order.push_back(row.label);
    it->second.first.push_back(std::log(static_cast<double>(row.horizon)));
    it->second.second.push_back(std::log(row.mean_error));
  }
  std::vector<SlopeRow> slopes;
  for (const std::string& label : order) {
    const auto& [x, y] = points[label];
    SlopeRow row;
    row.label = label;
    row.points = static_cast<Index>(x.size());
    if (x.size() >= 2) {
      std::tie(row.slope, row.intercept) = FitLine(x, y);
    } else {
      row.slope = std::numeric_limits<double>::quiet_NaN();
      row.intercept = std::numeric_limits<double>::quiet_NaN();
    }
    slopes.push_back(row);
  }
  return slopes;
}

CompareResult RunCompare(const CompareConfig& config,
                         const std::function<void(const std::string&)>& progress) {
  config.Validate();
  const auto oracle = BuildProblem(config.runs.front().problem);

  std::vector<BlockParams> params;
  for (const RunConfig& run : config.runs) {
    params.push_back(ResolveParams(*oracle, run.params, run.problem.seed));
  }

  struct Job {
    std::size_t config;
    Index horizon;
    Index seed_index;
  };
  std::vector<Job> jobs;
  Index max_horizon = 0;
  for (std::size_t c = 0; c < config.runs.size(); ++c) {
    std::vector<Index> horizons = config.horizons;
    if (horizons.empty()) horizons.push_back(config.runs[c].run.horizon);
    for (Index horizon : horizons) {
      max_horizon = std::max(max_horizon, horizon);
      for (Index s = 0; s < config.num_seeds; ++s) jobs.push_back({c, horizon, s});
    }
  }

  std::vector<std::vector<TraceRecord>> outputs(jobs.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const auto worker = [&] {
    for (std::size_t k = next++; k < jobs.size(); k = next++) {
      try {
        const Job& job = jobs[k];
        RunConfig run = config.runs[job.config];
        run.run.horizon = job.horizon;
        run.run.seed = DeriveSeed(config.master_seed, static_cast<std::uint64_t>(job.seed_index));
        const RunResult result = ExecuteRun(*oracle, run, params[job.config]);
        const std::string label = run.DisplayLabel();
        const std::string run_id =
            label + "-T" + std::to_string(job.horizon) + "-s" + std::to_string(job.seed_index);
        outputs[k] = ToRecords(result, run_id);
        for (TraceRecord& r : outputs[k]) r.algorithm = label;
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const Index workers =
      config.workers > 0 ? config.workers
                         : std::max<Index>(1, static_cast<Index>(std::thread::hardware_concurrency()));
  std::vector<std::thread> pool;
  for (Index w = 1; w < std::min<Index>(workers, static_cast<Index>(jobs.size())); ++w) {
    pool.emplace_back(worker);
  }
  worker();
  for (std::thread& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  if (progress) progress("finished " + std::to_string(jobs.size()) + " runs");

  CompareResult result;
  result.reference = ReferenceOptimum(*oracle, params.front(), config.reference_factor * max_horizon,
                                      DeriveSeed(config.master_seed, kReferenceIndex));
  if (progress) progress("reference objective " + std::to_string(result.reference));
  for (auto& rows : outputs) {
    result.traces.insert(result.traces.end(), rows.begin(), rows.end());
  }
  result.summary = Summarize(result.traces, result.reference);
  result.slopes = FitSlopes(result.summary);
  return result;
}

CompareResult WriteCompareOutputs(const CompareResult& result, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const fs::path base(dir);

  {
    std::ofstream out(base / "traces.csv", std::ios::trunc);
    WriteTrace(out, result.traces, true);
    if (!out) throw std::runtime_error("failed writing traces.csv");
  }
  // Aggregate from the file as written so the tables reflect exactly what
  // downstream tools will read.
  CompareResult parsed;
  parsed.reference = result.reference;
  parsed.traces = ReadTraceFile((base / "traces.csv").string());
  parsed.summary = Summarize(parsed.traces, parsed.reference);
  parsed.slopes = FitSlopes(parsed.summary);

  char buffer[512];
  {
    std::ofstream out(base / "summary.csv", std::ios::trunc);
    out << "# reference_objective=" << [&] {
      std::snprintf(buffer, sizeof(buffer), "%.17g", parsed.reference);
      return std::string(buffer);
    }() << '\n';
    out << "algo,T,t,passes,mean_objective,mean_error,stderr,n_seeds\n";
    for (const SummaryRow& r : parsed.summary) {
      std::snprintf(buffer, sizeof(buffer), "%s,%lld,%lld,%.17g,%.17g,%.17g,%.17g,%lld\n",
                    r.label.c_str(), static_cast<long long>(r.horizon), static_cast<long long>(r.t),
                    r.passes, r.mean_objective, r.mean_error, r.stderr_error,
                    static_cast<long long>(r.n_seeds));
      out << buffer;
    }
  }
  {
    std::ofstream out(base / "slopes.csv", std::ios::trunc);
    out << "algo,slope,intercept,points\n";
    for (const SlopeRow& r : parsed.slopes) {
      std::snprintf(buffer, sizeof(buffer), "%s,%.6f,%.6f,%lld\n", r.label.c_str(), r.slope,
                    r.intercept, static_cast<long long>(r.points));
      out << buffer;
    }
  }
  {
    std::ofstream out(base / "plot.py", std::ios::trunc);
    out << R"(#!/usr/bin/env python3
# Error versus data passes at the largest horizon, one curve per algorithm.
import csv
import sys
from collections import defaultdict

import matplotlib.pyplot as plt

path = sys.argv[1] if len(sys.argv) > 1 else "summary.csv"
rows = [r for r in csv.DictReader(line for line in open(path) if not line.startswith("#"))]
horizon = max(int(r["T"]) for r in rows)
curves = defaultdict(list)
for r in rows:
    if int(r["T"]) == horizon:
        curves[r["algo"]].append((float(r["passes"]), float(r["mean_error"]), float(r["stderr"])))
for algo, pts in sorted(curves.items()):
    pts.sort()
    x = [p[0] for p in pts]
    y = [max(p[1], 1e-12) for p in pts]
    e = [p[2] for p in pts]
    plt.plot(x, y, label=algo)
    plt.fill_between(x, [max(a - b, 1e-12) for a, b in zip(y, e)], [a + b for a, b in zip(y, e)], alpha=0.2)
plt.yscale("log")
plt.xlabel("passes over data")
plt.ylabel("objective - reference")
plt.legend()
plt.savefig("compare.png", dpi=150)
)";
  }
  return parsed;
}

}  // namespace sbda
