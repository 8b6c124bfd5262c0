#include "rasptk/validate.hpp"

#include <set>

namespace rasptk {

std::string_view rule_id(Rule rule) {
  switch (rule) {
    case Rule::kV1: return "V1";
    case Rule::kV2: return "V2";
    case Rule::kV3: return "V3";
    case Rule::kV4: return "V4";
    case Rule::kV5: return "V5";
  }
  return "?";
}

std::string_view rule_summary(Rule rule) {
  switch (rule) {
    case Rule::kV1: return "Aggregate default must be None";
    case Rule::kV2: return "node kind is not allowed";
    case Rule::kV3: return "function references an undeclared name";
    case Rule::kV4: return "categorical Aggregate selects more than one value in a row";
    case Rule::kV5: return "numerical Aggregate averages values outside {0, 1}";
  }
  return "?";
}

std::vector<Violation> static_validate(const ProgramGraph& graph) {
  std::vector<Violation> out;
  for (NodeId id = 0; id < static_cast<NodeId>(graph.size()); ++id) {
    const Node& node = graph.node(id);
    if (node.kind == NodeKind::kAggregate && !node.constant.is_null()) {
      out.push_back({Rule::kV1, id, "error",
                     graph.describe(id) + " has default " + node.constant.repr(), std::nullopt});
    }
    if (node.kind == NodeKind::kFull) {
      out.push_back({Rule::kV2, id, "error",
                     graph.describe(id) + " is a constant sequence (Full)", std::nullopt});
    }
    if (node.fn) {
      auto names = undeclared_references(*node.fn);
      if (!names.empty()) {
        std::string list;
        for (const auto& n : names) list += (list.empty() ? "" : ", ") + n;
        out.push_back({Rule::kV3, id, "error",
                       graph.describe(id) + " references undeclared " + list, std::nullopt});
      }
    }
  }
  return out;
}

namespace {

bool zero_or_one(const Value& v) {
  return v.is_numeric() && (v == Value::integer(0) || v == Value::integer(1));
}

// Mode from observed values: numerical iff everything aggregated was 0/1.
bool observed_numerical(NodeId sop, const std::vector<Trace>& traces) {
  bool any = false;
  for (const auto& t : traces) {
    for (const auto& v : t.sequences[static_cast<size_t>(sop)]) {
      if (!zero_or_one(v)) return false;
      any = true;
    }
  }
  return any;
}

}  // namespace

std::vector<Violation> dynamic_validate(const ProgramGraph& graph, const std::vector<Trace>& traces,
                                        const ValueSetMap* value_sets) {
  std::vector<Violation> out;
  for (NodeId id = 0; id < static_cast<NodeId>(graph.size()); ++id) {
    const Node& node = graph.node(id);
    if (node.kind != NodeKind::kAggregate) continue;
    NodeId selector = node.children[0];
    NodeId sop = node.children[1];
    bool numerical = value_sets && (*value_sets)[static_cast<size_t>(sop)]
                         ? is_numerical_set(*(*value_sets)[static_cast<size_t>(sop)])
                         : observed_numerical(sop, traces);

    std::optional<Violation> found;
    for (const auto& t : traces) {
      const auto& m = t.selectors[static_cast<size_t>(selector)];
      const auto& values = t.sequences[static_cast<size_t>(sop)];
      if (!m) continue;
      for (size_t q = 0; q < m->size() && !found; ++q) {
        if (!numerical) {
          size_t width = m->row_width(q);
          if (width >= 2) {
            found = Violation{Rule::kV4, id, "error",
                              graph.describe(id) + " selects " + std::to_string(width) +
                                  " values in row " + std::to_string(q) + " on input " +
                                  repr_sequence(t.input),
                              Witness{t.input, static_cast<int>(q)}};
          }
        } else {
          for (size_t k = 0; k < m->size(); ++k) {
            if (m->at(q, k) && !zero_or_one(values[k])) {
              found = Violation{Rule::kV5, id, "error",
                                graph.describe(id) + " averages " + values[k].repr() +
                                    " in row " + std::to_string(q) + " on input " +
                                    repr_sequence(t.input),
                                Witness{t.input, static_cast<int>(q)}};
              break;
            }
          }
        }
      }
      if (found) break;
    }
    if (found) out.push_back(std::move(*found));
  }
  return out;
}

}  // namespace rasptk
