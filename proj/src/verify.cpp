#include "rasptk/verify.hpp"

#include <chrono>
#include <functional>

#include "rasptk/elaborate.hpp"
#include "rasptk/interp.hpp"
#include "rasptk/surface.hpp"

namespace rasptk {

using nlohmann::json;

uint64_t Rng::below(uint64_t bound) {
  if (bound <= 1) return 0;
  // Rejection sampling on the largest multiple of `bound`.
  const uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  uint64_t x;
  do x = engine_();
  while (x >= limit);
  return x % bound;
}

uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

uint64_t derive_seed(uint64_t global_seed, std::string_view task_name, int attempt) {
  uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char c : task_name) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  uint64_t s = splitmix64(global_seed);
  s = splitmix64(s ^ h);
  return splitmix64(s ^ static_cast<uint64_t>(attempt));
}

InputBatch generate_inputs(const TaskSpec& task, size_t n, uint64_t seed) {
  InputBatch batch;
  batch.seed = seed;
  batch.max_len = task.max_len;
  if (task.vocab.empty()) throw Error(ErrorCode::kConfigError, "task '" + task.name + "' has no vocabulary");
  Rng rng(seed);
  const bool distinct = task.input_constraint == InputConstraint::kDistinct;
  int max_len = task.max_len;
  if (distinct) max_len = std::min<int>(max_len, static_cast<int>(task.vocab.size()));
  batch.max_len = max_len;
  batch.inputs.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    size_t len = 1 + rng.below(static_cast<uint64_t>(max_len));
    std::vector<Value> seq;
    seq.reserve(len);
    if (distinct) {
      std::vector<Value> pool = task.vocab;
      for (size_t k = 0; k < len; ++k) {
        size_t j = k + rng.below(pool.size() - k);
        std::swap(pool[k], pool[j]);
        seq.push_back(pool[k]);
      }
    } else {
      for (size_t k = 0; k < len; ++k) seq.push_back(task.vocab[rng.below(task.vocab.size())]);
    }
    batch.inputs.push_back(std::move(seq));
  }
  return batch;
}

std::string_view stage_status_name(StageStatus s) {
  switch (s) {
    case StageStatus::kPass: return "pass";
    case StageStatus::kFail: return "fail";
    case StageStatus::kNotRun: return "not-run";
  }
  return "?";
}

std::string_view stage_name(int stage) {
  switch (stage) {
    case 1: return "compile";
    case 2: return "oracle";
    case 3: return "validate";
    case 4: return "lower";
    case 5: return "equivalence";
  }
  return "?";
}

namespace {

class Pipeline {
 public:
  Pipeline(std::string_view candidate, const TaskSpec& task, uint64_t seed, const PipelineOptions& options)
      : candidate_(candidate), task_(task), options_(options) {
    v_.task = task.name;
    v_.attempt = options.attempt;
    v_.seed = seed;
    for (int s = 1; s <= 5; ++s) v_.stages.push_back(StageResult{s, StageStatus::kNotRun, "", 0});
  }

  VerdictRecord run() {
    try {
      bool ok = stage(1, [&] { return compile(); });
      if (!graph_) return finish();
      if (ok || options_.forensic) ok = stage(2, [&] { return differential(); });
      if (ok || options_.forensic) ok = stage(3, [&] { return validate(); });
      if (ok || options_.forensic) ok = stage(4, [&] { return lower(); });
      if ((ok || options_.forensic) && model_) stage(5, [&] { return equivalence(); });
    } catch (const std::exception& e) {
      // Anything escaping a stage is a bug in the toolkit, not the candidate.
      v_.infrastructure_failure = true;
      v_.stages[0].status = StageStatus::kFail;
      for (size_t i = 1; i < v_.stages.size(); ++i) v_.stages[i].status = StageStatus::kNotRun;
      v_.failed_stage = 1;
      v_.error_code = "InternalError";
      v_.diagnostic = std::string("internal failure: ") + e.what();
      v_.stages[0].detail = v_.diagnostic;
    }
    return finish();
  }

 private:
  bool stage(int s, const std::function<bool()>& body) {
    auto start = std::chrono::steady_clock::now();
    bool ok = body();
    auto& r = v_.stages[static_cast<size_t>(s - 1)];
    r.duration_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    r.status = ok ? StageStatus::kPass : StageStatus::kFail;
    return ok;
  }

  bool fail(int s, const std::string& detail, std::string code = {}) {
    auto& r = v_.stages[static_cast<size_t>(s - 1)];
    r.detail = detail;
    if (v_.failed_stage == 0) {
      v_.failed_stage = s;
      v_.diagnostic = detail;
      v_.error_code = std::move(code);
    }
    return false;
  }

  VerdictRecord finish() {
    v_.passed = v_.failed_stage == 0 && !v_.infrastructure_failure;
    for (const auto& s : v_.stages) {
      if (s.status != StageStatus::kPass) v_.passed = false;
    }
    return v_;
  }

  bool compile() {
    try {
      graph_ = compile_program(candidate_, task_.function);
    } catch (const Error& e) {
      return fail(1, e.what(), std::string(error_code_name(e.code())));
    }
    const auto& smoke = task_.examples.front().input;
    try {
      eval_program(*graph_, smoke);
    } catch (const Error& e) {
      return fail(1, "runtime error on " + repr_sequence(smoke) + ": " + e.what(),
                  std::string(error_code_name(e.code())));
    }
    v_.stages[0].detail = std::to_string(graph_->size()) + " nodes";
    return true;
  }

  bool differential() {
    batch_ = generate_inputs(task_, options_.n_inputs, v_.seed);
    traces_.reserve(batch_.inputs.size());
    bool ok = true;
    for (const auto& input : batch_.inputs) {
      std::vector<Value> expected;
      try {
        expected = eval_oracle(task_, input);
      } catch (const Error& e) {
        v_.infrastructure_failure = true;
        return fail(2, std::string("oracle failure: ") + e.what(), std::string(error_code_name(e.code())));
      }
      Trace trace;
      try {
        trace = eval_trace(*graph_, input);
      } catch (const Error& e) {
        if (ok) {
          v_.counterexample = Counterexample{input, expected, {}};
          fail(2, "runtime error on " + repr_sequence(input) + ": " + e.what(),
               std::string(error_code_name(e.code())));
        }
        ok = false;
        if (!options_.forensic) return false;
        continue;
      }
      const auto& actual = trace.output(*graph_);
      if (ok && actual != expected) {
        v_.counterexample = Counterexample{input, expected, actual};
        fail(2, "mismatch on " + repr_sequence(input) + ": expected " + repr_sequence(expected) +
                    ", got " + repr_sequence(actual));
        ok = false;
        if (!options_.forensic) return false;
      }
      traces_.push_back(std::move(trace));
    }
    if (ok) v_.stages[1].detail = std::to_string(batch_.inputs.size()) + " inputs agree";
    return ok;
  }

  bool validate() {
    auto violations = static_validate(*graph_);
    std::optional<ValueSetMap> sets;
    try {
      sets = infer_value_sets(*graph_, task_.vocab, task_.max_len, options_.lower);
    } catch (const Error&) {
      // Stage 4 reports this; aggregate modes fall back to observed values.
    }
    auto dynamic = dynamic_validate(*graph_, traces_, sets ? &*sets : nullptr);
    violations.insert(violations.end(), dynamic.begin(), dynamic.end());
    if (violations.empty()) return true;
    std::string detail;
    for (const auto& v : violations) {
      if (!detail.empty()) detail += "; ";
      detail += std::string(rule_id(v.rule)) + ": " + v.message;
    }
    v_.violations = violations;
    return fail(3, detail, std::string(rule_id(violations.front().rule)));
  }

  bool lower() {
    try {
      model_ = lower_program(*graph_, task_.vocab, task_.max_len, options_.lower);
    } catch (const LowerError& e) {
      if (v_.failed_stage == 0) v_.witness = e.witness();
      return fail(4, e.what(), std::string(error_code_name(e.code())));
    } catch (const Error& e) {
      return fail(4, e.what(), std::string(error_code_name(e.code())));
    }
    v_.stages[3].detail = std::to_string(model_->layers.size()) + " layers, " +
                          std::to_string(model_->residual_width()) + " lanes";
    return true;
  }

  bool equivalence() {
    for (const auto& trace : traces_) {
      const auto& expected = trace.output(*graph_);
      std::vector<Value> actual;
      try {
        actual = run_lowered(*model_, trace.input);
      } catch (const Error& e) {
        if (v_.failed_stage == 0) v_.counterexample = Counterexample{trace.input, expected, {}};
        return fail(5, "lowered model failed on " + repr_sequence(trace.input) + ": " + e.what(),
                    std::string(error_code_name(e.code())));
      }
      if (actual != expected) {
        if (v_.failed_stage == 0) v_.counterexample = Counterexample{trace.input, expected, actual};
        return fail(5, "lowered model disagrees on " + repr_sequence(trace.input) + ": interpreter " +
                           repr_sequence(expected) + ", lowered " + repr_sequence(actual));
      }
    }
    v_.stages[4].detail = std::to_string(traces_.size()) + " inputs agree";
    return true;
  }

  std::string candidate_;
  const TaskSpec& task_;
  PipelineOptions options_;
  VerdictRecord v_;
  std::optional<ProgramGraph> graph_;
  InputBatch batch_;
  std::vector<Trace> traces_;
  std::optional<LoweredModel> model_;
};

}  // namespace

VerdictRecord run_pipeline(std::string_view candidate, const TaskSpec& task, uint64_t seed,
                           const PipelineOptions& options) {
  return Pipeline(candidate, task, seed, options).run();
}

json verdict_to_json(const VerdictRecord& v, bool include_durations) {
  json stages = json::array();
  for (const auto& s : v.stages) {
    json j = {{"stage", s.stage},
              {"name", std::string(stage_name(s.stage))},
              {"status", std::string(stage_status_name(s.status))},
              {"detail", s.detail}};
    if (include_durations) j["duration_ms"] = s.duration_ms;
    stages.push_back(std::move(j));
  }
  json out = {{"task", v.task},
              {"attempt", v.attempt},
              {"seed", v.seed},
              {"outcome", v.passed ? "pass" : "fail"},
              {"failed_stage", v.failed_stage == 0 ? json(nullptr) : json(v.failed_stage)},
              {"stages", std::move(stages)}};
  if (!v.error_code.empty()) out["error_code"] = v.error_code;
  if (!v.diagnostic.empty()) out["diagnostic"] = v.diagnostic;
  if (v.infrastructure_failure) out["infrastructure_failure"] = true;
  if (v.counterexample) {
    out["counterexample"] = {{"input", sequence_to_json(v.counterexample->input)},
                             {"expected", sequence_to_json(v.counterexample->expected)},
                             {"actual", sequence_to_json(v.counterexample->actual)}};
  }
  if (!v.violations.empty()) {
    json list = json::array();
    for (const auto& viol : v.violations) {
      json j = {{"rule", std::string(rule_id(viol.rule))},
                {"node", viol.node},
                {"severity", viol.severity},
                {"message", viol.message}};
      if (viol.witness) j["witness"] = {{"input", sequence_to_json(viol.witness->input)}, {"row", viol.witness->row}};
      list.push_back(std::move(j));
    }
    out["violations"] = std::move(list);
  }
  if (!v.witness.empty()) out["witness"] = sequence_to_json(v.witness);
  return out;
}

}  // namespace rasptk
