#include <cctype>
#include <set>

#include "rasptk/surface.hpp"

namespace rasptk {

namespace {

std::string literal_text(const Value& v) {
  switch (v.kind()) {
    case Value::Kind::kInt:
      return v.int_value() < 0 ? "(" + v.repr() + ")" : v.repr();
    case Value::Kind::kRat: return "(" + v.repr() + ")";
    default: return v.repr();
  }
}

std::string_view binary_symbol(ExprOp op) {
  switch (op) {
    case ExprOp::kAdd: return "+";
    case ExprOp::kSub: return "-";
    case ExprOp::kMul: return "*";
    case ExprOp::kDiv: return "/";
    case ExprOp::kFloorDiv: return "//";
    case ExprOp::kMod: return "%";
    case ExprOp::kPow: return "**";
    default: return "?";
  }
}

std::string expr_text(const Expr& e, const std::vector<std::string>& params) {
  switch (e.op) {
    case ExprOp::kLiteral: return literal_text(e.literal);
    case ExprOp::kParam:
      return e.param >= 0 && static_cast<size_t>(e.param) < params.size()
                 ? params[static_cast<size_t>(e.param)]
                 : "_p" + std::to_string(e.param);
    case ExprOp::kFreeName: return e.name;
    case ExprOp::kNeg: return "(-" + expr_text(*e.operands[0], params) + ")";
    case ExprOp::kPos: return "(+" + expr_text(*e.operands[0], params) + ")";
    case ExprOp::kNot: return "(not " + expr_text(*e.operands[0], params) + ")";
    case ExprOp::kAdd:
    case ExprOp::kSub:
    case ExprOp::kMul:
    case ExprOp::kDiv:
    case ExprOp::kFloorDiv:
    case ExprOp::kMod:
    case ExprOp::kPow:
      return "(" + expr_text(*e.operands[0], params) + " " + std::string(binary_symbol(e.op)) +
             " " + expr_text(*e.operands[1], params) + ")";
    case ExprOp::kCompare: {
      std::string out = "(" + expr_text(*e.operands[0], params);
      for (size_t i = 0; i < e.compare_ops.size(); ++i) {
        out += " ";
        out += compare_op_symbol(e.compare_ops[i]);
        out += " " + expr_text(*e.operands[i + 1], params);
      }
      return out + ")";
    }
    case ExprOp::kAnd:
    case ExprOp::kOr: {
      std::string sep = e.op == ExprOp::kAnd ? " and " : " or ";
      std::string out = "(";
      for (size_t i = 0; i < e.operands.size(); ++i) {
        if (i) out += sep;
        out += expr_text(*e.operands[i], params);
      }
      return out + ")";
    }
    case ExprOp::kCond:
      return "(" + expr_text(*e.operands[0], params) + " if " +
             expr_text(*e.operands[1], params) + " else " + expr_text(*e.operands[2], params) +
             ")";
    case ExprOp::kCall: {
      std::string out = e.name + "(";
      for (size_t i = 0; i < e.operands.size(); ++i) {
        if (i) out += ", ";
        out += expr_text(*e.operands[i], params);
      }
      return out + ")";
    }
  }
  return "?";
}

bool is_identifier(const std::string& s) {
  static const std::set<std::string> reserved = {
      "rasp", "def",  "return", "lambda", "if",   "else",  "and",  "or",  "not",
      "in",   "is",   "None",   "True",   "False", "for",  "while", "import", "from",
      "class", "pass", "with",  "try",    "global", "del", "as"};
  if (s.empty() || reserved.count(s)) return false;
  if (!(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  for (char c : s) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
  }
  return true;
}

std::string quote(const std::string& s) { return Value::token(s).repr(); }

}  // namespace

std::string print_function(const ExprFn& fn) {
  std::string out = "lambda ";
  for (size_t i = 0; i < fn.params.size(); ++i) {
    if (i) out += ", ";
    out += fn.params[i];
  }
  out += ": ";
  out += fn.body ? expr_text(*fn.body, fn.params) : "None";
  return out;
}

std::string print_program(const ProgramGraph& graph, std::string_view function_name) {
  std::vector<std::string> var(graph.size());
  std::set<std::string> used;
  for (NodeId id = 0; id < static_cast<NodeId>(graph.size()); ++id) {
    const Node& n = graph.node(id);
    if (n.kind == NodeKind::kTokens) {
      var[static_cast<size_t>(id)] = "rasp.tokens";
      continue;
    }
    if (n.kind == NodeKind::kIndices) {
      var[static_cast<size_t>(id)] = "rasp.indices";
      continue;
    }
    std::string name = is_identifier(n.label) && !used.count(n.label)
                           ? n.label
                           : "v" + std::to_string(id);
    while (used.count(name)) name += "_";
    used.insert(name);
    var[static_cast<size_t>(id)] = name;
  }

  auto ref = [&](NodeId id) { return var[static_cast<size_t>(id)]; };
  std::string out = "def " + std::string(function_name) + "():\n";
  for (NodeId id = 0; id < static_cast<NodeId>(graph.size()); ++id) {
    const Node& n = graph.node(id);
    std::string rhs;
    switch (n.kind) {
      case NodeKind::kTokens:
      case NodeKind::kIndices: continue;
      case NodeKind::kFull:
        // No surface form exists; rendered as the constant-map idiom.
        rhs = "rasp.Map(lambda x: " + literal_text(n.constant) + ", rasp.indices)";
        break;
      case NodeKind::kMap:
        rhs = "rasp.Map(" + print_function(*n.fn) + ", " + ref(n.children[0]) + ")";
        break;
      case NodeKind::kSequenceMap:
        rhs = "rasp.SequenceMap(" + print_function(*n.fn) + ", " + ref(n.children[0]) + ", " +
              ref(n.children[1]) + ")";
        break;
      case NodeKind::kAggregate:
        rhs = "rasp.Aggregate(" + ref(n.children[0]) + ", " + ref(n.children[1]);
        if (!n.constant.is_null()) rhs += ", default=" + literal_text(n.constant);
        rhs += ")";
        break;
      case NodeKind::kSelectorWidth:
        rhs = "rasp.SelectorWidth(" + ref(n.children[0]) + ")";
        break;
      case NodeKind::kSelect:
        rhs = "rasp.Select(" + ref(n.children[0]) + ", " + ref(n.children[1]) +
              ", rasp.Comparison." + std::string(comparison_name(n.comparison)) + ")";
        break;
    }
    if (!n.label.empty()) rhs += ".named(" + quote(n.label) + ")";
    out += "    " + ref(id) + " = " + rhs + "\n";
  }
  out += "    return " + ref(graph.entry()) + "\n";
  return out;
}

}  // namespace rasptk
