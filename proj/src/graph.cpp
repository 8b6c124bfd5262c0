#include "rasptk/graph.hpp"

namespace rasptk {

std::string_view node_kind_name(NodeKind kind) {
  switch (kind) {
    case NodeKind::kTokens: return "tokens";
    case NodeKind::kIndices: return "indices";
    case NodeKind::kFull: return "Full";
    case NodeKind::kMap: return "Map";
    case NodeKind::kSequenceMap: return "SequenceMap";
    case NodeKind::kAggregate: return "Aggregate";
    case NodeKind::kSelectorWidth: return "SelectorWidth";
    case NodeKind::kSelect: return "Select";
  }
  return "?";
}

std::optional<SourceSpan> ProgramGraph::span_of(NodeId id) const {
  if (id < 0 || static_cast<size_t>(id) >= spans_.size()) return std::nullopt;
  return spans_[static_cast<size_t>(id)];
}

std::map<NodeKind, int> ProgramGraph::kind_counts() const {
  std::map<NodeKind, int> out;
  for (const auto& n : nodes_) ++out[n.kind];
  return out;
}

std::string ProgramGraph::describe(NodeId id) const {
  const Node& n = node(id);
  if (!n.label.empty()) return n.label;
  return std::string(node_kind_name(n.kind)) + "#" + std::to_string(id);
}

NodeId GraphBuilder::add(Node node) {
  nodes_.push_back(std::move(node));
  spans_.push_back(std::nullopt);
  return static_cast<NodeId>(nodes_.size() - 1);
}

void GraphBuilder::require_sop(NodeId id, std::string_view role) const {
  if (id < 0 || static_cast<size_t>(id) >= nodes_.size()) {
    throw Error(ErrorCode::kKindError, "dangling node reference for " + std::string(role));
  }
  if (nodes_[static_cast<size_t>(id)].is_selector()) {
    throw Error(ErrorCode::kKindError,
                "a selector was used where an SOp is expected (" + std::string(role) + ")",
                spans_[static_cast<size_t>(id)]);
  }
}

void GraphBuilder::require_selector(NodeId id, std::string_view role) const {
  if (id < 0 || static_cast<size_t>(id) >= nodes_.size()) {
    throw Error(ErrorCode::kKindError, "dangling node reference for " + std::string(role));
  }
  if (!nodes_[static_cast<size_t>(id)].is_selector()) {
    throw Error(ErrorCode::kKindError,
                "an SOp was used where a selector is expected (" + std::string(role) + ")",
                spans_[static_cast<size_t>(id)]);
  }
}

NodeId GraphBuilder::tokens() {
  if (tokens_ < 0) tokens_ = add(Node{.kind = NodeKind::kTokens});
  return tokens_;
}

NodeId GraphBuilder::indices() {
  if (indices_ < 0) indices_ = add(Node{.kind = NodeKind::kIndices});
  return indices_;
}

NodeId GraphBuilder::full(Value v) {
  return add(Node{.kind = NodeKind::kFull, .constant = std::move(v)});
}

NodeId GraphBuilder::map(ExprFn fn, NodeId sop) {
  require_sop(sop, "Map input");
  if (fn.arity() != 1) {
    throw Error(ErrorCode::kArityError,
                "Map expects a one-parameter function, got " + std::to_string(fn.arity()));
  }
  return add(Node{.kind = NodeKind::kMap,
                  .children = {sop},
                  .fn = std::make_shared<const ExprFn>(std::move(fn))});
}

NodeId GraphBuilder::sequence_map(ExprFn fn, NodeId fst, NodeId snd) {
  require_sop(fst, "SequenceMap first input");
  require_sop(snd, "SequenceMap second input");
  if (fn.arity() != 2) {
    throw Error(ErrorCode::kArityError,
                "SequenceMap expects a two-parameter function, got " +
                    std::to_string(fn.arity()));
  }
  return add(Node{.kind = NodeKind::kSequenceMap,
                  .children = {fst, snd},
                  .fn = std::make_shared<const ExprFn>(std::move(fn))});
}

NodeId GraphBuilder::aggregate(NodeId selector, NodeId sop, Value default_value) {
  require_selector(selector, "Aggregate selector");
  require_sop(sop, "Aggregate input");
  return add(Node{.kind = NodeKind::kAggregate,
                  .children = {selector, sop},
                  .constant = std::move(default_value)});
}

NodeId GraphBuilder::selector_width(NodeId selector) {
  require_selector(selector, "SelectorWidth selector");
  return add(Node{.kind = NodeKind::kSelectorWidth, .children = {selector}});
}

NodeId GraphBuilder::select(NodeId keys, NodeId queries, Comparison cmp) {
  require_sop(keys, "Select keys");
  require_sop(queries, "Select queries");
  return add(Node{.kind = NodeKind::kSelect, .children = {keys, queries}, .comparison = cmp});
}

void GraphBuilder::set_label(NodeId id, std::string label) {
  nodes_.at(static_cast<size_t>(id)).label = std::move(label);
}

void GraphBuilder::set_span(NodeId id, SourceSpan span) {
  auto& slot = spans_.at(static_cast<size_t>(id));
  if (!slot) slot = span;
}

bool GraphBuilder::is_selector(NodeId id) const {
  return nodes_.at(static_cast<size_t>(id)).is_selector();
}

ProgramGraph GraphBuilder::build(NodeId entry) const {
  require_sop(entry, "program entry");
  std::vector<bool> live(nodes_.size(), false);
  live[static_cast<size_t>(entry)] = true;
  for (size_t i = nodes_.size(); i-- > 0;) {
    if (!live[i]) continue;
    for (NodeId c : nodes_[i].children) live[static_cast<size_t>(c)] = true;
  }
  std::vector<NodeId> remap(nodes_.size(), -1);
  ProgramGraph g;
  for (size_t i = 0; i < nodes_.size(); ++i) {
    if (!live[i]) continue;
    Node n = nodes_[i];
    for (NodeId& c : n.children) c = remap[static_cast<size_t>(c)];
    remap[i] = static_cast<NodeId>(g.nodes_.size());
    g.nodes_.push_back(std::move(n));
    g.spans_.push_back(spans_[i]);
  }
  g.entry_ = remap[static_cast<size_t>(entry)];
  return g;
}

}  // namespace rasptk
