#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sbda/common.hpp"

namespace sbda {

/// Problem section: either a generator with its parameters or a saved
/// instance file. Keys not used by the chosen generator keep their defaults.
struct ProblemConfig {
  /// "l1reg", "tls" or "lasso".
  std::string generator = "l1reg";
  /// When non-empty the instance is loaded from this file instead.
  std::string instance;
  std::uint64_t seed = 0;
  Index samples = 500;
  Index dim = 200;
  Index blocks = 10;
  /// l1reg: noise variance.
  double noise = 0.01;
  /// l1reg: "uniform" or "powerlaw:<a>".
  std::string scaling = "uniform";
  Index heavy_blocks = 0;
  /// tls.
  Index test_samples = 10000;
  double rescale = 1.0;
  double rescaled_fraction = 0.9;
  /// lasso.
  double lambda = 0.1;
  double support_fraction = 0.2;
  /// "zero", "l1:<w>", "sql2:<lambda>" or "box:<lo>:<hi>" (ignored for lasso).
  std::string regularizer = "zero";

  friend bool operator==(const ProblemConfig&, const ProblemConfig&) = default;
};

struct ScheduleConfig {
  /// One of the schedule ids, e.g. "const_convex".
  std::string id = "adaptive_convex";
  /// Strong convexity modulus; 0 takes it from the regularizer.
  double lambda = 0.0;
  double rho = 1.0;
  /// Multiplies every gamma.
  double scale = 1.0;

  friend bool operator==(const ScheduleConfig&, const ScheduleConfig&) = default;
};

struct SamplerConfig {
  /// "uniform", "optimal" or "explicit".
  std::string id = "uniform";
  std::vector<double> p;

  friend bool operator==(const SamplerConfig&, const SamplerConfig&) = default;
};

/// Stepsizes for the baselines.
struct StepConfig {
  /// md/sbmd: "sm1" (default), "sm2" or "const"; da: "sqrt" (default) or "const".
  std::string rule;
  /// 0 selects the default constant derived from the block parameters.
  double scale = 0.0;

  friend bool operator==(const StepConfig&, const StepConfig&) = default;
};

/// How M_i and D_i are obtained.
struct ParamsConfig {
  /// Random probe points in addition to the origin.
  Index probes = 4;
  Index samples = 200;
  double radius = 1.0;
  /// Use d_i(x*) when the instance has a planted solution.
  bool planted = true;

  friend bool operator==(const ParamsConfig&, const ParamsConfig&) = default;
};

struct RunSection {
  Index horizon = 1000;
  std::uint64_t seed = 0;
  Index log_every = 0;
  bool timing = true;

  friend bool operator==(const RunSection&, const RunSection&) = default;
};

struct OutputConfig {
  std::string trace;
  std::string run_id;

  friend bool operator==(const OutputConfig&, const OutputConfig&) = default;
};

struct RunConfig {
  ProblemConfig problem;
  /// "sbda_u", "sbda_r", "da", "md" or "sbmd".
  std::string algorithm = "sbda_u";
  /// Display name in comparisons; defaults to the algorithm id.
  std::string label;
  ScheduleConfig schedule;
  SamplerConfig sampler;
  StepConfig step;
  ParamsConfig params;
  RunSection run;
  OutputConfig output;

  /// Throws std::invalid_argument on unknown ids or out-of-range values.
  void Validate() const;
  std::string DisplayLabel() const { return label.empty() ? algorithm : label; }

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Multi-configuration sweep for `compare`.
struct CompareConfig {
  std::vector<RunConfig> runs;
  std::uint64_t master_seed = 0;
  Index num_seeds = 20;
  std::vector<Index> horizons;
  /// Reference optimum horizon as a multiple of the largest horizon.
  Index reference_factor = 50;
  Index workers = 0;
  std::string output_dir = "compare_out";

  void Validate() const;
};

const std::vector<std::string>& AlgorithmIds();

/// Strict parsing: unknown keys anywhere are rejected with their path.
RunConfig ParseRunConfig(const nlohmann::json& json);
nlohmann::json ToJson(const RunConfig& config);
CompareConfig ParseCompareConfig(const nlohmann::json& json);
nlohmann::json ToJson(const CompareConfig& config);

nlohmann::json LoadJsonFile(const std::string& path);

/// Value of SBDA_SEED when set and numeric.
std::optional<std::uint64_t> SeedOverrideFromEnv();

/// Independent seed for run `index` under a master seed.
std::uint64_t DeriveSeed(std::uint64_t master, std::uint64_t index);

}  // namespace sbda
