#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "rasptk/lower.hpp"
#include "rasptk/task.hpp"
#include "rasptk/validate.hpp"
#include "rasptk/value.hpp"

namespace rasptk {

// Deterministic 64-bit generator with an unbiased bounded draw, so batches do
// not depend on the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}
  uint64_t next() { return engine_(); }
  // Uniform in [0, bound).
  uint64_t below(uint64_t bound);

 private:
  std::mt19937_64 engine_;
};

uint64_t splitmix64(uint64_t x);
// Per-attempt seed from the global seed, task name and attempt index.
uint64_t derive_seed(uint64_t global_seed, std::string_view task_name, int attempt);

struct InputBatch {
  std::vector<std::vector<Value>> inputs;
  uint64_t seed = 0;
  int min_len = 1;
  int max_len = 10;
};

InputBatch generate_inputs(const TaskSpec& task, size_t n, uint64_t seed);

enum class StageStatus { kPass, kFail, kNotRun };
std::string_view stage_status_name(StageStatus s);
std::string_view stage_name(int stage);  // 1..5

struct StageResult {
  int stage = 0;
  StageStatus status = StageStatus::kNotRun;
  std::string detail;
  double duration_ms = 0;
};

struct Counterexample {
  std::vector<Value> input;
  std::vector<Value> expected;
  std::vector<Value> actual;
};

struct VerdictRecord {
  std::string task;
  int attempt = 1;
  uint64_t seed = 0;
  bool passed = false;
  int failed_stage = 0;  // 0 when passed
  std::vector<StageResult> stages;
  std::string error_code;  // code of the first failure, if an error caused it
  std::string diagnostic;
  std::optional<Counterexample> counterexample;
  std::vector<Violation> violations;
  std::vector<Value> witness;  // stage-4 witness values
  bool infrastructure_failure = false;
};

struct PipelineOptions {
  size_t n_inputs = 1000;
  int attempt = 1;
  bool forensic = false;  // run every stage even after a failure
  bool timing = false;    // include durations in JSON
  LowerOptions lower;
};

VerdictRecord run_pipeline(std::string_view candidate, const TaskSpec& task, uint64_t seed,
                           const PipelineOptions& options = {});

nlohmann::json verdict_to_json(const VerdictRecord& v, bool include_durations = false);

}  // namespace rasptk
