#include "sbda/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <set>
#include <stdexcept>

#include "sbda/geometry.hpp"
#include "sbda/oracles.hpp"
#include "sbda/schedules.hpp"

namespace sbda {
namespace {

using nlohmann::json;

// Reads known keys from one JSON object and rejects the rest.
class Reader {
 public:
  Reader(const json& object, std::string path) : object_(object), path_(std::move(path)) {
    if (!object_.is_object()) throw std::invalid_argument(path_ + ": expected an object");
  }

  template <class T>
  void Get(const std::string& key, T& out) {
    seen_.insert(key);
    if (!object_.contains(key)) return;
    try {
      out = object_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw std::invalid_argument(path_ + "." + key + ": " + e.what());
    }
  }

  const json* Child(const std::string& key) {
    seen_.insert(key);
    return object_.contains(key) ? &object_.at(key) : nullptr;
  }

  std::string Path(const std::string& key) const { return path_ + "." + key; }

  void Finish() const {
    for (const auto& item : object_.items()) {
      if (!seen_.count(item.key())) {
        throw std::invalid_argument("unknown config key '" + path_ + "." + item.key() + "'");
      }
    }
  }

 private:
  const json& object_;
  std::string path_;
  std::set<std::string> seen_;
};

void Require(bool ok, const std::string& message) {
  if (!ok) throw std::invalid_argument("config: " + message);
}

ProblemConfig ParseProblem(const json& j, const std::string& path) {
  ProblemConfig c;
  Reader r(j, path);
  r.Get("generator", c.generator);
  r.Get("instance", c.instance);
  r.Get("seed", c.seed);
  r.Get("samples", c.samples);
  r.Get("dim", c.dim);
  r.Get("blocks", c.blocks);
  r.Get("noise", c.noise);
  r.Get("scaling", c.scaling);
  r.Get("heavy_blocks", c.heavy_blocks);
  r.Get("test_samples", c.test_samples);
  r.Get("rescale", c.rescale);
  r.Get("rescaled_fraction", c.rescaled_fraction);
  r.Get("lambda", c.lambda);
  r.Get("support_fraction", c.support_fraction);
  r.Get("regularizer", c.regularizer);
  r.Finish();
  return c;
}

json ProblemJson(const ProblemConfig& c) {
  return {{"generator", c.generator},
          {"instance", c.instance},
          {"seed", c.seed},
          {"samples", c.samples},
          {"dim", c.dim},
          {"blocks", c.blocks},
          {"noise", c.noise},
          {"scaling", c.scaling},
          {"heavy_blocks", c.heavy_blocks},
          {"test_samples", c.test_samples},
          {"rescale", c.rescale},
          {"rescaled_fraction", c.rescaled_fraction},
          {"lambda", c.lambda},
          {"support_fraction", c.support_fraction},
          {"regularizer", c.regularizer}};
}

void ValidateProblem(const ProblemConfig& c) {
  if (!c.instance.empty()) return;
  Require(c.generator == "l1reg" || c.generator == "tls" || c.generator == "lasso",
          "unknown generator '" + c.generator + "'");
  Require(c.samples >= 1 && c.dim >= 1, "samples and dim must be >= 1");
  Require(c.blocks >= 1 && c.blocks <= c.dim, "blocks must be in [1, dim]");
  Require(c.noise >= 0.0, "noise must be >= 0");
  ScalingLaw::Parse(c.scaling);
  Require(c.heavy_blocks >= 0 && c.heavy_blocks <= c.blocks, "heavy_blocks must be in [0, blocks]");
  Require(c.test_samples >= 0, "test_samples must be >= 0");
  Require(c.rescale > 0.0, "rescale must be > 0");
  Require(c.rescaled_fraction > 0.0 && c.rescaled_fraction < 1.0,
          "rescaled_fraction must be in (0, 1)");
  Require(c.lambda >= 0.0, "lambda must be >= 0");
  Require(c.support_fraction > 0.0 && c.support_fraction <= 1.0,
          "support_fraction must be in (0, 1]");
  Regularizer::Parse(c.regularizer);
}

RunConfig ParseRun(const json& j, const std::string& path) {
  RunConfig c;
  Reader r(j, path);
  if (const json* p = r.Child("problem")) c.problem = ParseProblem(*p, r.Path("problem"));
  r.Get("algorithm", c.algorithm);
  r.Get("label", c.label);
  if (const json* s = r.Child("schedule")) {
    Reader sr(*s, r.Path("schedule"));
    sr.Get("id", c.schedule.id);
    sr.Get("lambda", c.schedule.lambda);
    sr.Get("rho", c.schedule.rho);
    sr.Get("scale", c.schedule.scale);
    sr.Finish();
  }
  if (const json* s = r.Child("sampler")) {
    Reader sr(*s, r.Path("sampler"));
    sr.Get("id", c.sampler.id);
    sr.Get("p", c.sampler.p);
    sr.Finish();
  }
  if (const json* s = r.Child("step")) {
    Reader sr(*s, r.Path("step"));
    sr.Get("rule", c.step.rule);
    sr.Get("scale", c.step.scale);
    sr.Finish();
  }
  if (const json* s = r.Child("params")) {
    Reader sr(*s, r.Path("params"));
    sr.Get("probes", c.params.probes);
    sr.Get("samples", c.params.samples);
    sr.Get("radius", c.params.radius);
    sr.Get("planted", c.params.planted);
    sr.Finish();
  }
  if (const json* s = r.Child("run")) {
    Reader sr(*s, r.Path("run"));
    sr.Get("horizon", c.run.horizon);
    sr.Get("seed", c.run.seed);
    sr.Get("log_every", c.run.log_every);
    sr.Get("timing", c.run.timing);
    sr.Finish();
  }
  if (const json* s = r.Child("output")) {
    Reader sr(*s, r.Path("output"));
    sr.Get("trace", c.output.trace);
    sr.Get("run_id", c.output.run_id);
    sr.Finish();
  }
  r.Finish();
  return c;
}

}  // namespace

const std::vector<std::string>& AlgorithmIds() {
  static const std::vector<std::string> ids = {"sbda_u", "sbda_r", "da", "md", "sbmd"};
  return ids;
}

void RunConfig::Validate() const {
  ValidateProblem(problem);
  const auto& ids = AlgorithmIds();
  Require(std::find(ids.begin(), ids.end(), algorithm) != ids.end(),
          "unknown algorithm '" + algorithm + "'");
  if (algorithm == "sbda_u" || algorithm == "sbda_r") ParseScheduleKind(schedule.id);
  Require(schedule.lambda >= 0.0, "schedule.lambda must be >= 0");
  Require(schedule.rho > 0.0 && schedule.scale > 0.0, "schedule.rho and schedule.scale must be > 0");
  Require(sampler.id == "uniform" || sampler.id == "optimal" || sampler.id == "explicit",
          "unknown sampler '" + sampler.id + "'");
  if (sampler.id == "explicit") {
    Require(!sampler.p.empty(), "explicit sampler needs p");
    for (double v : sampler.p) Require(v >= 0.0, "sampler.p entries must be >= 0");
  }
  if (algorithm == "da") {
    Require(step.rule.empty() || step.rule == "sqrt" || step.rule == "const",
            "da step.rule must be sqrt or const");
  }
  if (algorithm == "md" || algorithm == "sbmd") {
    Require(step.rule.empty() || step.rule == "sm1" || step.rule == "sm2" || step.rule == "const",
            "unknown step.rule '" + step.rule + "'");
  }
  Require(step.scale >= 0.0, "step.scale must be >= 0");
  Require(params.probes >= 0 && params.samples >= 1 && params.radius > 0.0,
          "params need probes >= 0, samples >= 1, radius > 0");
  Require(run.horizon >= 1, "run.horizon must be >= 1");
  Require(run.log_every >= 0, "run.log_every must be >= 0");
}

void CompareConfig::Validate() const {
  Require(!runs.empty(), "compare needs at least one run");
  Require(num_seeds >= 1, "compare needs at least one seed");
  Require(reference_factor >= 1, "reference_factor must be >= 1");
  Require(workers >= 0, "workers must be >= 0");
  for (Index t : horizons) Require(t >= 1, "horizons must be >= 1");
  for (const RunConfig& run : runs) {
    run.Validate();
    Require(run.problem == runs.front().problem, "mismatched problem instances across runs");
  }
}

RunConfig ParseRunConfig(const json& j) { return ParseRun(j, "$"); }

json ToJson(const RunConfig& c) {
  return {{"problem", ProblemJson(c.problem)},
          {"algorithm", c.algorithm},
          {"label", c.label},
          {"schedule",
           {{"id", c.schedule.id},
            {"lambda", c.schedule.lambda},
            {"rho", c.schedule.rho},
            {"scale", c.schedule.scale}}},
          {"sampler", {{"id", c.sampler.id}, {"p", c.sampler.p}}},
          {"step", {{"rule", c.step.rule}, {"scale", c.step.scale}}},
          {"params",
           {{"probes", c.params.probes},
            {"samples", c.params.samples},
            {"radius", c.params.radius},
            {"planted", c.params.planted}}},
          {"run",
           {{"horizon", c.run.horizon},
            {"seed", c.run.seed},
            {"log_every", c.run.log_every},
            {"timing", c.run.timing}}},
          {"output", {{"trace", c.output.trace}, {"run_id", c.output.run_id}}}};
}

CompareConfig ParseCompareConfig(const json& j) {
  CompareConfig c;
  Reader r(j, "$");
  // Shared sections are merged into every run before parsing it.
  json shared = json::object();
  if (const json* base = r.Child("base")) shared = *base;
  if (const json* runs = r.Child("runs")) {
    Require(runs->is_array(), "runs must be an array");
    for (std::size_t k = 0; k < runs->size(); ++k) {
      json merged = shared;
      merged.merge_patch((*runs)[k]);
      c.runs.push_back(ParseRun(merged, "$.runs[" + std::to_string(k) + "]"));
    }
  }
  r.Get("master_seed", c.master_seed);
  r.Get("num_seeds", c.num_seeds);
  r.Get("horizons", c.horizons);
  r.Get("reference_factor", c.reference_factor);
  r.Get("workers", c.workers);
  r.Get("output_dir", c.output_dir);
  r.Finish();
  return c;
}

json ToJson(const CompareConfig& c) {
  json runs = json::array();
  for (const RunConfig& run : c.runs) runs.push_back(ToJson(run));
  return {{"runs", runs},
          {"master_seed", c.master_seed},
          {"num_seeds", c.num_seeds},
          {"horizons", c.horizons},
          {"reference_factor", c.reference_factor},
          {"workers", c.workers},
          {"output_dir", c.output_dir}};
}

json LoadJsonFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("config '" + path + "': " + e.what());
  }
}

std::optional<std::uint64_t> SeedOverrideFromEnv() {
  const char* value = std::getenv("SBDA_SEED");
  if (value == nullptr || *value == '\0') return std::nullopt;
  char* end = nullptr;
  const unsigned long long parsed = std::strtoull(value, &end, 10);
  if (end == nullptr || *end != '\0') {
    throw std::invalid_argument(std::string("SBDA_SEED is not an unsigned integer: ") + value);
  }
  return static_cast<std::uint64_t>(parsed);
}

std::uint64_t DeriveSeed(std::uint64_t master, std::uint64_t index) {
  Rng rng = MakeStream(master, 1000 + index);
  return rng();
}

}  // namespace sbda
