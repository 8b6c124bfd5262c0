#include "rasptk/harness.hpp"

#include <fstream>
#include <sstream>

#ifndef RASPTK_DATA_DIR
#define RASPTK_DATA_DIR "data"
#endif

namespace rasptk {

using nlohmann::json;

std::filesystem::path default_template_path() {
  if (const char* dir = std::getenv("RASPTK_DATA_DIR")) return std::filesystem::path(dir) / "prompt" / "template.txt";
  return std::filesystem::path(RASPTK_DATA_DIR) / "prompt" / "template.txt";
}

std::string load_prompt_template(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read prompt template " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

void replace_all(std::string& text, std::string_view needle, const std::string& with) {
  size_t pos = 0;
  while ((pos = text.find(needle, pos)) != std::string::npos) {
    text.replace(pos, needle.size(), with);
    pos += with.size();
  }
}

std::string trim_trailing(std::string s) {
  while (!s.empty() && (s.back() == '\n' || s.back() == ' ')) s.pop_back();
  return s;
}

}  // namespace

std::string render_task_block(const TaskSpec& task) {
  const Example& ex = task.examples.front();
  return "# Task\n" + task.description + "\nExample: " + repr_sequence(ex.input) + " --> " +
         repr_sequence(ex.output) + "\nEntry point: '" +
         task.function + "()'\n";
}

std::string assemble_prompt(const PromptSpec& spec, const TaskSpec& task) {
  if (spec.shots < 0) throw Error(ErrorCode::kConfigError, "shot count must be non-negative");
  if (static_cast<size_t>(spec.shots) > spec.example_bank.size()) {
    throw Error(ErrorCode::kInsufficientExamples, "requested " + std::to_string(spec.shots) +
                                                      " examples but the bank holds " +
                                                      std::to_string(spec.example_bank.size()));
  }
  std::string examples;
  if (spec.shots > 0) {
    examples = "\n# Reference programs\nThese programs solve other tasks. Study how they combine the operations.\n";
    for (int i = 0; i < spec.shots; ++i) {
      const TaskSpec& ex = *spec.example_bank[static_cast<size_t>(i)];
      if (ex.split != Split::kPromptExamples) {
        throw Error(ErrorCode::kConfigError, "task '" + ex.name + "' is not a prompt example");
      }
      if (ex.reference_program.empty()) {
        throw Error(ErrorCode::kConfigError, "prompt example '" + ex.name + "' has no reference program");
      }
      examples += "\n### Reference program " + std::to_string(i + 1) + "\n" + ex.description + "\nExample: " +
                  repr_sequence(ex.examples.front().input) + " --> " + repr_sequence(ex.examples.front().output) +
                  "\n```python\n" + trim_trailing(ex.reference_program) + "\n```\n";
    }
  }
  std::string out = spec.template_text;
  replace_all(out, "{{EXAMPLES}}", examples);
  replace_all(out, "{{TASK}}", trim_trailing(render_task_block(task)));
  return out;
}

std::string extract_program_text(std::string_view response) {
  std::optional<std::string> last;
  bool open = false;
  bool accept = false;
  std::string current;
  size_t pos = 0;
  while (pos <= response.size()) {
    size_t end = response.find('\n', pos);
    if (end == std::string_view::npos) end = response.size();
    std::string_view line = response.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    size_t indent = line.find_first_not_of(" \t");
    std::string_view stripped = indent == std::string_view::npos ? std::string_view() : line.substr(indent);
    if (stripped.substr(0, 3) == "```") {
      if (!open) {
        std::string_view info = stripped.substr(3);
        while (!info.empty() && (info.back() == ' ' || info.back() == '\t')) info.remove_suffix(1);
        while (!info.empty() && (info.front() == ' ' || info.front() == '\t')) info.remove_prefix(1);
        open = true;
        accept = info.empty() || info == "python";
        current.clear();
      } else if (stripped.find_first_not_of('`') == std::string_view::npos) {
        open = false;
        if (accept) last = current;
      } else {
        current += std::string(line) + "\n";
      }
    } else if (open) {
      current += std::string(line) + "\n";
    }
    if (end == response.size()) break;
    pos = end + 1;
  }
  if (last) return *last;
  if (open && accept) throw Error(ErrorCode::kUnterminatedFence, "code block is never closed");
  throw Error(ErrorCode::kNoCodeBlock, "response contains no python code block");
}

std::vector<AttemptLog> best_of_k(ChatProvider& provider, const PromptSpec& spec, const TaskSpec& task,
                                  const BestOfKOptions& options) {
  if (options.k < 1) throw Error(ErrorCode::kConfigError, "k must be at least 1");
  const std::string prompt = assemble_prompt(spec, task);
  ChatRequest request;
  request.model = options.sampling.model;
  request.temperature = options.sampling.temperature;
  request.top_p = options.sampling.top_p;
  request.max_tokens = options.sampling.max_tokens;
  if (!options.system_message.empty()) request.messages.push_back({"system", options.system_message});
  request.messages.push_back({"user", prompt});

  std::vector<AttemptLog> logs;
  for (int attempt = 1; attempt <= options.k; ++attempt) {
    AttemptLog log;
    log.attempt = attempt;
    log.raw_response = provider.complete(request).text;
    uint64_t seed = derive_seed(options.seed, task.name, attempt);
    PipelineOptions pipeline = options.pipeline;
    pipeline.attempt = attempt;
    try {
      log.code = extract_program_text(log.raw_response);
    } catch (const Error& e) {
      log.extraction_error = e.what();
      VerdictRecord v;
      v.task = task.name;
      v.attempt = attempt;
      v.seed = seed;
      v.failed_stage = 1;
      v.error_code = std::string(error_code_name(e.code()));
      v.diagnostic = e.what();
      for (int s = 1; s <= 5; ++s) {
        v.stages.push_back(StageResult{s, s == 1 ? StageStatus::kFail : StageStatus::kNotRun,
                                       s == 1 ? std::string(e.what()) : "", 0});
      }
      log.verdict = std::move(v);
    }
    if (log.code) log.verdict = run_pipeline(*log.code, task, seed, pipeline);
    bool passed = log.verdict.passed;
    logs.push_back(std::move(log));
    if (passed) break;
  }
  return logs;
}

json attempt_to_json(const AttemptLog& log) {
  json j = {{"attempt", log.attempt},
            {"raw_response", log.raw_response},
            {"code", log.code ? json(*log.code) : json(nullptr)},
            {"verdict", verdict_to_json(log.verdict)}};
  if (!log.extraction_error.empty()) j["extraction_error"] = log.extraction_error;
  return j;
}

}  // namespace rasptk
