#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "rasptk/provider.hpp"
#include "rasptk/task.hpp"
#include "rasptk/verify.hpp"

namespace rasptk {

struct PromptSpec {
  int shots = 0;                              // 0, 1 or 20
  std::string template_text;                  // with {{TASK}} and {{EXAMPLES}}
  std::vector<const TaskSpec*> example_bank;  // prompt_examples split only
};

std::filesystem::path default_template_path();
std::string load_prompt_template(const std::filesystem::path& path = default_template_path());

// "# Task" block: description, one example, required function name.
std::string render_task_block(const TaskSpec& task);

// Errors: InsufficientExamples; ConfigError when a bank entry is not a
// prompt example or has no reference program.
std::string assemble_prompt(const PromptSpec& spec, const TaskSpec& task);

// Contents of the last complete fenced block tagged `python` (or untagged).
// Errors: NoCodeBlock, UnterminatedFence.
std::string extract_program_text(std::string_view response);

struct AttemptLog {
  int attempt = 0;
  std::string raw_response;
  std::optional<std::string> code;
  std::string extraction_error;
  VerdictRecord verdict;
};

struct BestOfKOptions {
  int k = 5;
  uint64_t seed = 0;  // global seed; per-attempt seeds are derived
  SamplingParams sampling;
  std::string system_message;
  PipelineOptions pipeline;
};

// Errors: ProviderError, BudgetExceeded.
std::vector<AttemptLog> best_of_k(ChatProvider& provider, const PromptSpec& spec, const TaskSpec& task,
                                  const BestOfKOptions& options);

nlohmann::json attempt_to_json(const AttemptLog& log);

}  // namespace rasptk
