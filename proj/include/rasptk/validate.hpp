#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rasptk/graph.hpp"
#include "rasptk/interp.hpp"
#include "rasptk/lower.hpp"

namespace rasptk {

// Rule registry:
//   V1  Aggregate default must be Null
//   V2  only whitelisted node kinds (no constant sequences)
//   V3  element-wise functions reference only parameters and builtins
//   V4  categorical Aggregate whose selector has a row with >= 2 true entries
//   V5  numerical Aggregate fed values outside {0, 1}
enum class Rule { kV1, kV2, kV3, kV4, kV5 };

std::string_view rule_id(Rule rule);
std::string_view rule_summary(Rule rule);

struct Witness {
  std::vector<Value> input;
  int row = -1;
};

struct Violation {
  Rule rule = Rule::kV1;
  NodeId node = -1;
  std::string severity = "error";
  std::string message;
  std::optional<Witness> witness;
};

std::vector<Violation> static_validate(const ProgramGraph& graph);

// `value_sets` (when given) decides each Aggregate's mode; otherwise the mode
// comes from the values observed in the traces.
std::vector<Violation> dynamic_validate(const ProgramGraph& graph, const std::vector<Trace>& traces,
                                        const ValueSetMap* value_sets = nullptr);

}  // namespace rasptk
