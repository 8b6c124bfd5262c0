#include "rasptk/interp.hpp"

#include <algorithm>

namespace rasptk {

size_t SelectorMatrix::row_width(size_t query) const {
  size_t count = 0;
  for (size_t k = 0; k < n_; ++k) count += cells_[query * n_ + k];
  return count;
}

EvalError::EvalError(ErrorCode cause, NodeId node, int position, const std::string& message,
                     std::optional<SourceSpan> span)
    : Error(cause,
            "node " + std::to_string(node) +
                (position >= 0 ? ", position " + std::to_string(position) : std::string()) +
                ": " + message,
            span),
      node_(node),
      position_(position) {}

namespace {

Value eval_expr(const Expr& e, std::span<const Value> args) {
  switch (e.op) {
    case ExprOp::kLiteral: return e.literal;
    case ExprOp::kParam:
      if (e.param < 0 || static_cast<size_t>(e.param) >= args.size()) {
        throw Error(ErrorCode::kInternal, "parameter index out of range");
      }
      return args[static_cast<size_t>(e.param)];
    case ExprOp::kFreeName:
      throw Error(ErrorCode::kUnknownIdentifier, "name '" + e.name + "' is not defined");
    case ExprOp::kNeg:
    case ExprOp::kPos:
    case ExprOp::kNot: return apply_unary(e.op, eval_expr(*e.operands[0], args));
    case ExprOp::kAdd:
    case ExprOp::kSub:
    case ExprOp::kMul:
    case ExprOp::kDiv:
    case ExprOp::kFloorDiv:
    case ExprOp::kMod:
    case ExprOp::kPow: {
      Value a = eval_expr(*e.operands[0], args);
      Value b = eval_expr(*e.operands[1], args);
      return apply_binary(e.op, a, b);
    }
    case ExprOp::kCompare: {
      Value left = eval_expr(*e.operands[0], args);
      for (size_t i = 0; i < e.compare_ops.size(); ++i) {
        Value right = eval_expr(*e.operands[i + 1], args);
        if (!compare_values(e.compare_ops[i], left, right)) return Value::boolean(false);
        left = std::move(right);
      }
      return Value::boolean(true);
    }
    case ExprOp::kAnd:
    case ExprOp::kOr: {
      Value last;
      for (const auto& operand : e.operands) {
        last = eval_expr(*operand, args);
        bool t = last.truthy();
        if ((e.op == ExprOp::kAnd && !t) || (e.op == ExprOp::kOr && t)) return last;
      }
      return last;
    }
    case ExprOp::kCond:
      return eval_expr(*e.operands[eval_expr(*e.operands[1], args).truthy() ? 0 : 2], args);
    case ExprOp::kCall: {
      const Builtin* b = find_builtin(e.name);
      if (!b) throw Error(ErrorCode::kUnknownIdentifier, "name '" + e.name + "' is not defined");
      int n = static_cast<int>(e.operands.size());
      if (n < b->min_args || n > b->max_args) {
        throw Error(ErrorCode::kArityError, "wrong number of arguments to '" + e.name + "'");
      }
      std::vector<Value> values;
      values.reserve(e.operands.size());
      for (const auto& operand : e.operands) values.push_back(eval_expr(*operand, args));
      return b->fn(values);
    }
  }
  throw Error(ErrorCode::kInternal, "unhandled expression");
}

}  // namespace

Value eval_function(const ExprFn& fn, std::span<const Value> args) {
  if (static_cast<int>(args.size()) != fn.arity()) {
    throw Error(ErrorCode::kArityError, "function expects " + std::to_string(fn.arity()) +
                                            " argument(s), got " + std::to_string(args.size()));
  }
  for (const auto& a : args) {
    if (a.is_null()) return Value::null();
  }
  return eval_expr(*fn.body, args);
}

SelectorMatrix eval_selector(const std::vector<Value>& keys, const std::vector<Value>& queries,
                             Comparison cmp) {
  size_t n = queries.size();
  SelectorMatrix m(n);
  for (size_t q = 0; q < n; ++q) {
    for (size_t k = 0; k < keys.size() && k < n; ++k) {
      m.set(q, k, evaluate_comparison(cmp, keys[k], queries[q]));
    }
  }
  return m;
}

Value aggregate_row(const std::vector<Value>& selected, const Value& default_value) {
  if (selected.empty()) return default_value;
  if (selected.size() == 1) return selected.front();
  bool all_numeric = std::all_of(selected.begin(), selected.end(),
                                 [](const Value& v) { return v.is_numeric(); });
  if (all_numeric) {
    mpq_class sum = 0;
    for (const auto& v : selected) sum += v.to_rational();
    return Value::rational(sum / static_cast<long>(selected.size()));
  }
  bool all_equal = std::all_of(selected.begin(), selected.end(),
                               [&](const Value& v) { return v == selected.front(); });
  if (all_equal) return selected.front();
  throw Error(ErrorCode::kNonNumericAverage,
              "cannot average non-numeric values " + repr_sequence(selected));
}

Trace eval_trace(const ProgramGraph& graph, const std::vector<Value>& input) {
  Trace trace;
  trace.input = input;
  trace.sequences.resize(graph.size());
  trace.selectors.resize(graph.size());
  const size_t n = input.size();

  for (NodeId id = 0; id < static_cast<NodeId>(graph.size()); ++id) {
    const Node& node = graph.node(id);
    auto& out = trace.sequences[static_cast<size_t>(id)];
    auto seq = [&](size_t child) -> const std::vector<Value>& {
      return trace.sequences[static_cast<size_t>(node.children[child])];
    };
    int position = -1;
    try {
      switch (node.kind) {
        case NodeKind::kTokens: out = input; break;
        case NodeKind::kIndices:
          out.reserve(n);
          for (size_t i = 0; i < n; ++i) out.push_back(Value::integer(static_cast<long>(i)));
          break;
        case NodeKind::kFull: out.assign(n, node.constant); break;
        case NodeKind::kMap: {
          const auto& in = seq(0);
          out.reserve(n);
          for (size_t i = 0; i < n; ++i) {
            position = static_cast<int>(i);
            out.push_back(eval_function(*node.fn, std::span<const Value>(&in[i], 1)));
          }
          break;
        }
        case NodeKind::kSequenceMap: {
          const auto& a = seq(0);
          const auto& b = seq(1);
          out.reserve(n);
          for (size_t i = 0; i < n; ++i) {
            position = static_cast<int>(i);
            Value args[2] = {a[i], b[i]};
            out.push_back(eval_function(*node.fn, args));
          }
          break;
        }
        case NodeKind::kSelect:
          trace.selectors[static_cast<size_t>(id)] =
              eval_selector(seq(0), seq(1), node.comparison);
          break;
        case NodeKind::kAggregate: {
          const auto& m = *trace.selectors[static_cast<size_t>(node.children[0])];
          const auto& values = seq(1);
          out.reserve(n);
          std::vector<Value> selected;
          for (size_t q = 0; q < n; ++q) {
            position = static_cast<int>(q);
            selected.clear();
            for (size_t k = 0; k < n; ++k) {
              if (m.at(q, k)) selected.push_back(values[k]);
            }
            out.push_back(aggregate_row(selected, node.constant));
          }
          break;
        }
        case NodeKind::kSelectorWidth: {
          const auto& m = *trace.selectors[static_cast<size_t>(node.children[0])];
          out.reserve(n);
          for (size_t q = 0; q < n; ++q) {
            out.push_back(Value::integer(static_cast<long>(m.row_width(q))));
          }
          break;
        }
      }
    } catch (const EvalError&) {
      throw;
    } catch (const Error& err) {
      throw EvalError(err.code(), id, position, graph.describe(id) + ": " + err.detail(),
                      graph.span_of(id));
    }
  }
  return trace;
}

std::vector<Value> eval_program(const ProgramGraph& graph, const std::vector<Value>& input) {
  Trace trace = eval_trace(graph, input);
  return std::move(trace.sequences[static_cast<size_t>(graph.entry())]);
}

}  // namespace rasptk
