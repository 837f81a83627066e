// sbda: generate instances, run solvers, compare algorithms, check inequalities.
//
// Exit codes: 0 success, 1 usage or runtime error, 2 a check failed.
// SBDA_SEED, when set, replaces the seed taken from flags' defaults or config
// files (instance seed for gen, run seed for run, master seed for compare).
// An explicit --seed flag still wins.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sbda/checks.hpp"
#include "sbda/config.hpp"
#include "sbda/experiment.hpp"
#include "sbda/instance_io.hpp"
#include "sbda/trace.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kCheckFailed = 2;

using sbda::Index;

struct GenArgs {
  sbda::ProblemConfig problem;
  std::string out = "instance.sbdi";
  std::optional<std::uint64_t> seed;
  sbda::ParamsConfig params;
};

struct RunArgs {
  std::string config;
  std::string instance;
  std::string trace;
  std::string run_id;
  std::string algorithm;
  std::optional<Index> horizon;
  std::optional<std::uint64_t> seed;
  std::optional<Index> log_every;
  bool no_timing = false;
};

struct CompareArgs {
  std::string config;
  std::string out;
  std::optional<Index> seeds;
  std::optional<Index> workers;
  std::optional<std::uint64_t> seed;
};

struct CheckArgs {
  std::optional<std::uint64_t> seed;
  std::vector<std::string> only;
};

std::uint64_t PickSeed(std::optional<std::uint64_t> flag, std::uint64_t configured) {
  if (flag) return *flag;
  if (auto env = sbda::SeedOverrideFromEnv()) return *env;
  return configured;
}

void PrintParams(const sbda::BlockParams& params) {
  std::printf("%-6s %-14s %-14s\n", "block", "M_i", "D_i");
  for (Index i = 0; i < params.num_blocks(); ++i) {
    std::printf("%-6lld %-14.6g %-14.6g\n", static_cast<long long>(i), params.M[i], params.D[i]);
  }
}

int Gen(GenArgs& args) {
  args.problem.seed = PickSeed(args.seed, 0);
  args.problem.instance.clear();
  sbda::RunConfig check;
  check.problem = args.problem;
  check.Validate();
  const auto oracle = sbda::BuildProblem(args.problem);
  sbda::SaveInstance(*oracle, args.out);
  const sbda::BlockParams params = sbda::ResolveParams(*oracle, args.params, args.problem.seed);
  std::printf("wrote %s (%s, N=%lld, n=%lld, m=%lld, seed=%llu)\n", args.out.c_str(),
              args.problem.generator.c_str(), static_cast<long long>(oracle->partition().total()),
              static_cast<long long>(oracle->partition().num_blocks()),
              static_cast<long long>(oracle->dataset_size()),
              static_cast<unsigned long long>(args.problem.seed));
  PrintParams(params);
  return kOk;
}

int Run(const RunArgs& args) {
  sbda::RunConfig config = sbda::ParseRunConfig(sbda::LoadJsonFile(args.config));
  if (!args.instance.empty()) config.problem.instance = args.instance;
  if (!args.trace.empty()) config.output.trace = args.trace;
  if (!args.run_id.empty()) config.output.run_id = args.run_id;
  if (!args.algorithm.empty()) config.algorithm = args.algorithm;
  if (args.horizon) config.run.horizon = *args.horizon;
  if (args.log_every) config.run.log_every = *args.log_every;
  if (args.no_timing) config.run.timing = false;
  config.run.seed = PickSeed(args.seed, config.run.seed);
  config.Validate();

  const auto oracle = sbda::BuildProblem(config.problem);
  const sbda::BlockParams params =
      sbda::ResolveParams(*oracle, config.params, config.problem.seed);
  const sbda::RunResult result = sbda::ExecuteRun(*oracle, config, params);
  const std::string run_id = config.output.run_id.empty()
                                 ? config.DisplayLabel() + "-" + std::to_string(config.run.seed)
                                 : config.output.run_id;
  const auto records = sbda::ToRecords(result, run_id);
  if (config.output.trace.empty()) {
    sbda::WriteTrace(std::cout, records, true);
  } else {
    sbda::AppendTrace(config.output.trace, records);
  }
  std::fprintf(stderr, "%s: T=%lld queries=%lld passes=%.4f objective=%.10g schedule=%s sampler=%s%s\n",
               result.meta.algorithm.c_str(), static_cast<long long>(config.run.horizon),
               static_cast<long long>(result.queries), result.passes,
               result.trace.empty() ? 0.0 : result.trace.back().objective,
               result.meta.schedule_id.c_str(), result.meta.sampler_id.c_str(),
               result.meta.sampler_floored ? " (floored)" : "");
  return kOk;
}

int Compare(const CompareArgs& args) {
  sbda::CompareConfig config = sbda::ParseCompareConfig(sbda::LoadJsonFile(args.config));
  if (!args.out.empty()) config.output_dir = args.out;
  if (args.seeds) config.num_seeds = *args.seeds;
  if (args.workers) config.workers = *args.workers;
  config.master_seed = PickSeed(args.seed, config.master_seed);
  const sbda::CompareResult raw = sbda::RunCompare(
      config, [](const std::string& msg) { std::fprintf(stderr, "%s\n", msg.c_str()); });
  const sbda::CompareResult result = sbda::WriteCompareOutputs(raw, config.output_dir);
  std::printf("reference objective %.10g\n", result.reference);
  std::printf("%-24s %-10s %s\n", "algo", "slope", "points");
  for (const sbda::SlopeRow& row : result.slopes) {
    std::printf("%-24s %-10.4f %lld\n", row.label.c_str(), row.slope,
                static_cast<long long>(row.points));
  }
  std::printf("outputs in %s\n", config.output_dir.c_str());
  return kOk;
}

int Check(const CheckArgs& args) {
  const std::uint64_t seed = PickSeed(args.seed, 0);
  bool all_passed = true;
  for (const sbda::CheckResult& r : sbda::RunChecks(seed, args.only)) {
    std::printf("%s %-22s margin=%-12.6g %s\n", r.passed ? "PASS" : "FAIL", r.name.c_str(), r.margin,
                r.detail.c_str());
    all_passed = all_passed && r.passed;
  }
  return all_passed ? kOk : kCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic block dual averaging toolkit"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate and save a problem instance");
  gen_cmd->add_option("--problem", gen.problem.generator, "l1reg | tls | lasso")
      ->required()
      ->check(CLI::IsMember({"l1reg", "tls", "lasso"}));
  gen_cmd->add_option("--m", gen.problem.samples, "Number of samples");
  gen_cmd->add_option("--n", gen.problem.dim, "Dimension");
  gen_cmd->add_option("--blocks", gen.problem.blocks, "Number of blocks");
  gen_cmd->add_option("--noise", gen.problem.noise, "l1reg noise variance");
  gen_cmd->add_option("--scaling", gen.problem.scaling, "uniform | powerlaw:<a>");
  gen_cmd->add_option("--heavy", gen.problem.heavy_blocks, "Blocks reset to unit column scale");
  gen_cmd->add_option("--test", gen.problem.test_samples, "tls held-out samples");
  gen_cmd->add_option("--rescale", gen.problem.rescale, "tls row rescale factor");
  gen_cmd->add_option("--fraction", gen.problem.rescaled_fraction, "tls rescaled row fraction");
  gen_cmd->add_option("--lambda", gen.problem.lambda, "lasso penalty");
  gen_cmd->add_option("--support", gen.problem.support_fraction, "lasso planted support fraction");
  gen_cmd->add_option("--regularizer", gen.problem.regularizer, "zero | l1:w | sql2:lambda | box:lo:hi");
  gen_cmd->add_option("--seed", gen.seed, "Instance seed");
  gen_cmd->add_option("--out,-o", gen.out, "Output instance file");
  gen_cmd->add_option("--radius", gen.params.radius, "Radius guess for D_i without a planted point");

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Run one algorithm and append its trace");
  run_cmd->add_option("--config,-c", run.config, "Run config (JSON)")->required();
  run_cmd->add_option("--instance", run.instance, "Instance file (overrides the problem section)");
  run_cmd->add_option("--trace", run.trace, "Trace file to append to (stdout when omitted)");
  run_cmd->add_option("--run-id", run.run_id, "Run id column value");
  run_cmd->add_option("--algorithm", run.algorithm, "sbda_u | sbda_r | da | md | sbmd");
  run_cmd->add_option("--horizon,-T", run.horizon, "Iterations");
  run_cmd->add_option("--seed", run.seed, "Run seed");
  run_cmd->add_option("--log-every", run.log_every, "Logging cadence (0 = T/200)");
  run_cmd->add_flag("--no-timing", run.no_timing, "Write 0 in the ms column");

  CompareArgs compare;
  auto* compare_cmd = app.add_subcommand("compare", "Sweep algorithms x seeds x horizons");
  compare_cmd->add_option("--config,-c", compare.config, "Compare config (JSON)")->required();
  compare_cmd->add_option("--out,-o", compare.out, "Output directory");
  compare_cmd->add_option("--seeds", compare.seeds, "Number of seeds");
  compare_cmd->add_option("--workers", compare.workers, "Worker threads (0 = all cores)");
  compare_cmd->add_option("--seed", compare.seed, "Master seed");

  CheckArgs check;
  auto* check_cmd = app.add_subcommand("check", "Run the inequality and identity checkers");
  check_cmd->add_option("--seed", check.seed, "Seed for randomized instances");
  check_cmd->add_option("--only", check.only, "Restrict to these checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (gen_cmd->parsed()) return Gen(gen);
    if (run_cmd->parsed()) return Run(run);
    if (compare_cmd->parsed()) return Compare(compare);
    if (check_cmd->parsed()) return Check(check);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsage;
  }
  return kUsage;
}
