#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rasptk/error.hpp"
#include "rasptk/expr.hpp"
#include "rasptk/value.hpp"

namespace rasptk {

using NodeId = int;

enum class NodeKind {
  kTokens,
  kIndices,
  kFull,  // constant sequence; only reachable through GraphBuilder
  kMap,
  kSequenceMap,
  kAggregate,
  kSelectorWidth,
  kSelect,
};

std::string_view node_kind_name(NodeKind kind);

struct Node {
  NodeKind kind = NodeKind::kTokens;
  // Map: {sop}. SequenceMap: {fst, snd}. Aggregate: {selector, sop}.
  // SelectorWidth: {selector}. Select: {keys, queries}.
  std::vector<NodeId> children;
  std::shared_ptr<const ExprFn> fn;
  Comparison comparison = Comparison::kTrue;
  Value constant;  // Aggregate default, Full value
  std::string label;

  bool is_selector() const { return kind == NodeKind::kSelect; }
};

// Immutable DAG of RASP nodes. Children always carry smaller ids than their
// parents, so id order is a topological order.
class ProgramGraph {
 public:
  const std::vector<Node>& nodes() const { return nodes_; }
  const Node& node(NodeId id) const { return nodes_.at(static_cast<size_t>(id)); }
  NodeId entry() const { return entry_; }
  size_t size() const { return nodes_.size(); }

  std::optional<SourceSpan> span_of(NodeId id) const;
  std::map<NodeKind, int> kind_counts() const;

  // "label" when present, else "kind#id".
  std::string describe(NodeId id) const;

 private:
  friend class GraphBuilder;
  std::vector<Node> nodes_;
  std::vector<std::optional<SourceSpan>> spans_;
  NodeId entry_ = -1;
};

// Mutable construction front end. Tokens and Indices are singletons.
// Kind and arity errors surface here as KindError / ArityError.
class GraphBuilder {
 public:
  NodeId tokens();
  NodeId indices();
  NodeId full(Value v);
  NodeId map(ExprFn fn, NodeId sop);
  NodeId sequence_map(ExprFn fn, NodeId fst, NodeId snd);
  NodeId aggregate(NodeId selector, NodeId sop, Value default_value = Value::null());
  NodeId selector_width(NodeId selector);
  NodeId select(NodeId keys, NodeId queries, Comparison cmp);

  void set_label(NodeId id, std::string label);
  void set_span(NodeId id, SourceSpan span);
  bool is_selector(NodeId id) const;
  size_t size() const { return nodes_.size(); }

  // Keeps the nodes reachable from `entry`, renumbered in creation order.
  ProgramGraph build(NodeId entry) const;

 private:
  NodeId add(Node node);
  void require_sop(NodeId id, std::string_view role) const;
  void require_selector(NodeId id, std::string_view role) const;

  std::vector<Node> nodes_;
  std::vector<std::optional<SourceSpan>> spans_;
  NodeId tokens_ = -1;
  NodeId indices_ = -1;
};

}  // namespace rasptk
