#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "rasptk/value.hpp"

namespace rasptk {

// Dataset cell encoding: Int -> number, Rat -> {"frac": "p/q"}, Bool -> bool,
// Null -> null, Token -> string.
nlohmann::json value_to_json(const Value& v);
Value value_from_json(const nlohmann::json& j);
nlohmann::json sequence_to_json(const std::vector<Value>& values);
std::vector<Value> sequence_from_json(const nlohmann::json& j);

class OracleExpr;  // compiled expression oracle

struct Oracle {
  enum class Kind { kBuiltin, kExpression };
  Kind kind = Kind::kBuiltin;
  std::string text;  // builtin id or expression source
  std::shared_ptr<const OracleExpr> compiled;
};

// Parses an expression oracle (variables xs, i, n). Throws SchemaError.
Oracle compile_expression_oracle(std::string_view source);
// Resolves a builtin id. Throws UnknownOracle.
Oracle builtin_oracle(std::string_view id);
std::vector<std::string> builtin_oracle_ids();

struct Example {
  std::vector<Value> input;
  std::vector<Value> output;
};

enum class Split { kPromptExamples, kTest };
std::string_view split_name(Split split);

enum class InputConstraint { kNone, kDistinct };

struct TaskSpec {
  std::string name;
  std::string description;
  std::string function;  // e.g. make_index_parity
  std::vector<Example> examples;
  std::vector<Value> vocab;
  int max_len = 10;
  Oracle oracle;
  Split split = Split::kTest;
  InputConstraint input_constraint = InputConstraint::kNone;
  std::string reference_program;  // empty when absent
  std::vector<std::string> tags;
};

struct TaskSet {
  std::vector<TaskSpec> tasks;
  nlohmann::json metadata;

  const TaskSpec* find(std::string_view name) const;
  std::vector<const TaskSpec*> split(Split s) const;
};

// Errors: IoError, SchemaError (with the offending field path),
// DuplicateName, UnknownOracle, ExampleMismatch.
TaskSet load_taskset(const std::filesystem::path& path);
TaskSet parse_taskset(const nlohmann::json& doc, const std::filesystem::path& base_dir);

// Independent reference output. Errors: OracleError.
std::vector<Value> eval_oracle(const TaskSpec& task, const std::vector<Value>& input);

}  // namespace rasptk
