#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "rasptk/error.hpp"
#include "rasptk/graph.hpp"
#include "rasptk/value.hpp"

namespace rasptk {

// n x n boolean matrix; row = query position, column = key position.
class SelectorMatrix {
 public:
  explicit SelectorMatrix(size_t n = 0) : n_(n), cells_(n * n, 0) {}

  size_t size() const { return n_; }
  bool at(size_t query, size_t key) const { return cells_[query * n_ + key] != 0; }
  void set(size_t query, size_t key, bool v) { cells_[query * n_ + key] = v ? 1 : 0; }
  size_t row_width(size_t query) const;

  friend bool operator==(const SelectorMatrix&, const SelectorMatrix&) = default;

 private:
  size_t n_;
  std::vector<uint8_t> cells_;
};

// Every node's value for one input: a sequence for SOps, a matrix for Select.
struct Trace {
  std::vector<Value> input;
  std::vector<std::vector<Value>> sequences;
  std::vector<std::optional<SelectorMatrix>> selectors;

  const std::vector<Value>& output(const ProgramGraph& g) const {
    return sequences[static_cast<size_t>(g.entry())];
  }
};

// Evaluation failure at a specific node and position; code() is the cause
// (DivisionByZero, TypeMismatch, NonNumericAverage, UnknownIdentifier, ...).
class EvalError : public Error {
 public:
  EvalError(ErrorCode cause, NodeId node, int position, const std::string& message,
            std::optional<SourceSpan> span = std::nullopt);

  NodeId node() const { return node_; }
  int position() const { return position_; }

 private:
  NodeId node_;
  int position_;
};

// Strict Null propagation: any Null argument yields Null without evaluating
// the body. Errors: DivisionByZero, TypeMismatch, UnknownIdentifier.
Value eval_function(const ExprFn& fn, std::span<const Value> args);

SelectorMatrix eval_selector(const std::vector<Value>& keys, const std::vector<Value>& queries,
                             Comparison cmp);

// Mean/default semantics of Aggregate for one row of selected values.
// Throws NonNumericAverage for two or more distinct non-numeric values.
Value aggregate_row(const std::vector<Value>& selected, const Value& default_value);

Trace eval_trace(const ProgramGraph& graph, const std::vector<Value>& input);
std::vector<Value> eval_program(const ProgramGraph& graph, const std::vector<Value>& input);

}  // namespace rasptk
