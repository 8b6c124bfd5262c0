#include "rasptk/elaborate.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <variant>

namespace rasptk {

namespace {

struct NodeRef {
  NodeId id;
};
struct FunctionRef {
  const FunctionDef* def;
};
struct BuiltinRef {
  const Builtin* builtin;
};
struct CtorRef {
  std::string name;
};

struct LambdaRef;
using Staged = std::variant<Value, NodeRef, Comparison, std::shared_ptr<const LambdaRef>,
                            FunctionRef, BuiltinRef, CtorRef>;
using Scope = std::map<std::string, Staged>;

struct LambdaRef {
  const AstExpr* lambda;
  std::shared_ptr<const Scope> closure;
};

// Bindings visible while translating a function body into an Expr tree.
struct ExprContext {
  std::map<std::string, ExprPtr> bound;
  std::shared_ptr<const Scope> closure;  // may be null (module level)
};

// Attaches `span` to errors raised without one.
template <typename F>
auto with_span(SourceSpan span, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& err) {
    if (err.span()) throw;
    throw Error(err.code(), err.detail(), span);
  }
}

class Elaborator {
 public:
  explicit Elaborator(const SurfaceAst& ast) : ast_(ast) {}

  ProgramGraph run(std::string_view entry) {
    const FunctionDef* def = ast_.find(entry);
    if (!def) {
      throw Error(ErrorCode::kUnknownIdentifier,
                  "function '" + std::string(entry) + "' is not defined", SourceSpan{1, 1, 1, 1});
    }
    Staged result = call_function(*def, {}, {}, def->span);
    const auto* ref = std::get_if<NodeRef>(&result);
    if (!ref || builder_.is_selector(ref->id)) {
      throw Error(ErrorCode::kKindError,
                  "'" + def->name + "' must return an SOp, got " + describe(result), def->span);
    }
    return builder_.build(ref->id);
  }

 private:
  std::string describe(const Staged& v) const {
    return std::visit(
        [&](const auto& x) -> std::string {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, Value>) return "the value " + x.repr();
          else if constexpr (std::is_same_v<T, NodeRef>)
            return builder_.is_selector(x.id) ? "a selector" : "an SOp";
          else if constexpr (std::is_same_v<T, Comparison>) return "a comparison";
          else if constexpr (std::is_same_v<T, std::shared_ptr<const LambdaRef>>) return "a lambda";
          else if constexpr (std::is_same_v<T, FunctionRef>) return "function '" + x.def->name + "'";
          else if constexpr (std::is_same_v<T, BuiltinRef>)
            return "builtin '" + std::string(x.builtin->name) + "'";
          else return "rasp." + x.name;
        },
        v);
  }

  [[noreturn]] void kind_error(const std::string& msg, SourceSpan span) const {
    throw Error(ErrorCode::kKindError, msg, span);
  }

  // --- graph-level evaluation ------------------------------------------------

  Staged lookup(const std::string& name, const Scope& scope, SourceSpan span) const {
    if (auto it = scope.find(name); it != scope.end()) return it->second;
    if (const FunctionDef* def = ast_.find(name)) return FunctionRef{def};
    if (const Builtin* b = find_builtin(name)) return BuiltinRef{b};
    throw Error(ErrorCode::kUnknownIdentifier, "name '" + name + "' is not defined", span);
  }

  Value require_value(const Staged& v, SourceSpan span, std::string_view what) const {
    if (const auto* value = std::get_if<Value>(&v)) return *value;
    kind_error(std::string(what) + " needs a plain value, got " + describe(v) +
                   " (use rasp.Map / rasp.SequenceMap for element-wise arithmetic)",
               span);
  }

  Staged eval(const AstExpr& e, const Scope& scope) {
    switch (e.kind) {
      case AstKind::kLiteral: return e.literal;
      case AstKind::kName: return lookup(e.name, scope, e.span);
      case AstKind::kComparison: return e.comparison;
      case AstKind::kRaspMember: {
        if (e.name == "tokens" || e.name == "indices") {
          NodeId id = e.name == "tokens" ? builder_.tokens() : builder_.indices();
          return NodeRef{id};
        }
        return CtorRef{e.name};
      }
      case AstKind::kLambda:
        return std::make_shared<const LambdaRef>(
            LambdaRef{&e, std::make_shared<const Scope>(scope)});
      case AstKind::kNamed: {
        Staged target = eval(*e.operands[0], scope);
        const auto* ref = std::get_if<NodeRef>(&target);
        if (!ref) kind_error(".named() applies to an SOp or selector, got " + describe(target), e.span);
        builder_.set_label(ref->id, e.name);
        return target;
      }
      case AstKind::kCall: return eval_call(e, scope);
      case AstKind::kUnary: {
        Value a = require_value(eval(*e.operands[0], scope), e.span, "operator");
        return with_span(e.span, [&] { return apply_unary(e.op, a); });
      }
      case AstKind::kBinary: {
        Value a = require_value(eval(*e.operands[0], scope), e.span, "operator");
        Value b = require_value(eval(*e.operands[1], scope), e.span, "operator");
        return with_span(e.span, [&] { return apply_binary(e.op, a, b); });
      }
      case AstKind::kCompare: {
        Value left = require_value(eval(*e.operands[0], scope), e.span, "comparison");
        for (size_t i = 0; i < e.compare_ops.size(); ++i) {
          Value right = require_value(eval(*e.operands[i + 1], scope), e.span, "comparison");
          bool ok = with_span(e.span, [&] { return compare_values(e.compare_ops[i], left, right); });
          if (!ok) return Value::boolean(false);
          left = right;
        }
        return Value::boolean(true);
      }
      case AstKind::kBoolOp: {
        Value last;
        for (const auto& operand : e.operands) {
          last = require_value(eval(*operand, scope), e.span, "boolean operator");
          bool t = last.truthy();
          if ((e.op == ExprOp::kAnd && !t) || (e.op == ExprOp::kOr && t)) return last;
        }
        return last;
      }
      case AstKind::kCond: {
        Value test = require_value(eval(*e.operands[1], scope), e.span, "conditional");
        return eval(*e.operands[test.truthy() ? 0 : 2], scope);
      }
    }
    throw Error(ErrorCode::kInternal, "unhandled expression", e.span);
  }

  Staged eval_call(const AstExpr& e, const Scope& scope) {
    Staged callee = eval(*e.operands[0], scope);
    std::vector<Staged> args;
    for (size_t i = 1; i < e.operands.size(); ++i) args.push_back(eval(*e.operands[i], scope));
    std::map<std::string, std::pair<Staged, SourceSpan>> kwargs;
    for (const auto& kw : e.keywords) kwargs.emplace(kw.name, std::make_pair(eval(*kw.value, scope), kw.span));

    if (const auto* ctor = std::get_if<CtorRef>(&callee)) {
      if (ctor->name == "numerical" || ctor->name == "categorical") {
        // Encoding annotations; the aggregation mode is inferred instead.
        if (args.size() != 1 || !kwargs.empty() || !std::holds_alternative<NodeRef>(args[0])) {
          throw Error(ErrorCode::kArityError, "rasp." + ctor->name + "() takes exactly one SOp", e.span);
        }
        return args[0];
      }
      NodeId id = build_node(ctor->name, args, kwargs, e.span);
      builder_.set_span(id, e.span);
      return NodeRef{id};
    }
    if (const auto* fn = std::get_if<FunctionRef>(&callee)) {
      return call_function(*fn->def, std::move(args), std::move(kwargs), e.span);
    }
    if (const auto* b = std::get_if<BuiltinRef>(&callee)) {
      if (!kwargs.empty()) {
        throw Error(ErrorCode::kArityError,
                    "builtin '" + std::string(b->builtin->name) + "' takes no keyword arguments",
                    e.span);
      }
      check_builtin_arity(*b->builtin, static_cast<int>(args.size()), e.span);
      std::vector<Value> values;
      for (const auto& a : args) values.push_back(require_value(a, e.span, "builtin call"));
      return with_span(e.span, [&] { return b->builtin->fn(values); });
    }
    kind_error(describe(callee) + " is not callable", e.span);
  }

  static void check_builtin_arity(const Builtin& b, int n, SourceSpan span) {
    if (n < b.min_args || n > b.max_args) {
      throw Error(ErrorCode::kArityError,
                  "builtin '" + std::string(b.name) + "' takes " + std::to_string(b.min_args) +
                      (b.max_args != b.min_args ? "+" : "") + " argument(s), got " +
                      std::to_string(n),
                  span);
    }
  }

  // Python-style binding of positional and keyword arguments to parameters.
  template <typename T>
  std::vector<std::optional<T>> bind_arguments(
      const std::vector<std::string>& names, const std::vector<bool>& keyword_only,
      std::vector<T> args, std::map<std::string, std::pair<T, SourceSpan>> kwargs,
      std::string_view callee, SourceSpan span) const {
    std::vector<std::optional<T>> bound(names.size());
    size_t next_positional = 0;
    for (auto& a : args) {
      while (next_positional < names.size() && keyword_only[next_positional]) ++next_positional;
      if (next_positional >= names.size()) {
        throw Error(ErrorCode::kArityError,
                    std::string(callee) + "() takes " + std::to_string(names.size()) +
                        " positional argument(s) but more were given",
                    span);
      }
      bound[next_positional++] = std::move(a);
    }
    for (auto& [name, value] : kwargs) {
      auto it = std::find(names.begin(), names.end(), name);
      if (it == names.end()) {
        throw Error(ErrorCode::kArityError,
                    std::string(callee) + "() got an unexpected keyword argument '" + name + "'",
                    value.second);
      }
      auto& slot = bound[static_cast<size_t>(it - names.begin())];
      if (slot) {
        throw Error(ErrorCode::kArityError,
                    std::string(callee) + "() got multiple values for argument '" + name + "'",
                    value.second);
      }
      slot = std::move(value.first);
    }
    return bound;
  }

  NodeId node_arg(const Staged& v, bool want_selector, std::string_view ctor,
                  std::string_view role, SourceSpan span) const {
    const auto* ref = std::get_if<NodeRef>(&v);
    if (!ref) {
      kind_error("rasp." + std::string(ctor) + " " + std::string(role) + " must be " +
                     (want_selector ? "a selector" : "an SOp") + ", got " + describe(v),
                 span);
    }
    if (builder_.is_selector(ref->id) != want_selector) {
      kind_error("rasp." + std::string(ctor) + " " + std::string(role) + " must be " +
                     (want_selector ? "a selector" : "an SOp") + ", got " + describe(v),
                 span);
    }
    return ref->id;
  }

  NodeId build_node(const std::string& ctor, std::vector<Staged> args,
                    std::map<std::string, std::pair<Staged, SourceSpan>> kwargs, SourceSpan span) {
    static const std::map<std::string, std::vector<std::string>> kSignatures = {
        {"Select", {"keys", "queries", "predicate"}},
        {"Aggregate", {"selector", "sop", "default"}},
        {"SelectorWidth", {"selector"}},
        {"Map", {"f", "inner"}},
        {"SequenceMap", {"f", "fst", "snd"}},
    };
    const auto& names = kSignatures.at(ctor);
    auto bound = bind_arguments<Staged>(names, std::vector<bool>(names.size(), false),
                                        std::move(args), std::move(kwargs), "rasp." + ctor, span);
    auto required = [&](size_t i) -> const Staged& {
      if (!bound[i]) {
        throw Error(ErrorCode::kArityError,
                    "rasp." + ctor + "() missing required argument '" + names[i] + "'", span);
      }
      return *bound[i];
    };
    auto with_builder_span = [&](auto&& f) -> NodeId { return with_span(span, f); };

    if (ctor == "Select") {
      NodeId keys = node_arg(required(0), false, ctor, "keys", span);
      NodeId queries = node_arg(required(1), false, ctor, "queries", span);
      const auto* cmp = std::get_if<Comparison>(&required(2));
      if (!cmp) kind_error("rasp.Select predicate must be a rasp.Comparison, got " + describe(*bound[2]), span);
      return builder_.select(keys, queries, *cmp);
    }
    if (ctor == "Aggregate") {
      NodeId selector = node_arg(required(0), true, ctor, "selector", span);
      NodeId sop = node_arg(required(1), false, ctor, "sop", span);
      Value default_value;
      if (bound[2]) default_value = require_value(*bound[2], span, "Aggregate default");
      return builder_.aggregate(selector, sop, default_value);
    }
    if (ctor == "SelectorWidth") {
      return builder_.selector_width(node_arg(required(0), true, ctor, "selector", span));
    }
    if (ctor == "Map") {
      ExprFn fn = to_function(required(0), 1, span);
      NodeId inner = node_arg(required(1), false, ctor, "inner", span);
      return with_builder_span([&] { return builder_.map(std::move(fn), inner); });
    }
    ExprFn fn = to_function(required(0), 2, span);
    NodeId fst = node_arg(required(1), false, ctor, "fst", span);
    NodeId snd = node_arg(required(2), false, ctor, "snd", span);
    return with_builder_span([&] { return builder_.sequence_map(std::move(fn), fst, snd); });
  }

  Staged call_function(const FunctionDef& def, std::vector<Staged> args,
                       std::map<std::string, std::pair<Staged, SourceSpan>> kwargs,
                       SourceSpan span) {
    if (std::find(stack_.begin(), stack_.end(), def.name) != stack_.end()) {
      throw Error(ErrorCode::kCycleError, "recursive call to '" + def.name + "'", span);
    }
    std::vector<std::string> names;
    std::vector<bool> keyword_only;
    for (const auto& p : def.params) {
      names.push_back(p.name);
      keyword_only.push_back(p.keyword_only);
    }
    auto bound = bind_arguments<Staged>(names, keyword_only, std::move(args), std::move(kwargs),
                                        def.name, span);
    Scope scope;
    for (size_t i = 0; i < def.params.size(); ++i) {
      if (bound[i]) {
        scope[names[i]] = std::move(*bound[i]);
      } else if (def.params[i].default_value) {
        scope[names[i]] = eval(*def.params[i].default_value, Scope{});
      } else {
        throw Error(ErrorCode::kArityError,
                    def.name + "() missing required argument '" + names[i] + "'", span);
      }
    }
    stack_.push_back(def.name);
    for (const auto& stmt : def.body) {
      Staged v = eval(*stmt.value, scope);
      if (stmt.kind == Statement::Kind::kReturn) {
        stack_.pop_back();
        return v;
      }
      scope[stmt.target] = std::move(v);
    }
    stack_.pop_back();
    throw Error(ErrorCode::kSyntaxError, "function '" + def.name + "' has no return", def.span);
  }

  // --- lambda / helper translation ------------------------------------------

  ExprFn to_function(const Staged& f, int arity, SourceSpan span) {
    if (const auto* lambda = std::get_if<std::shared_ptr<const LambdaRef>>(&f)) {
      const AstExpr& node = *(*lambda)->lambda;
      if (static_cast<int>(node.params.size()) != arity) {
        throw Error(ErrorCode::kArityError,
                    "expected a function of " + std::to_string(arity) + " parameter(s), got " +
                        std::to_string(node.params.size()),
                    node.span);
      }
      ExprContext ctx;
      ctx.closure = (*lambda)->closure;
      for (int i = 0; i < arity; ++i) ctx.bound[node.params[static_cast<size_t>(i)]] = make_param(i);
      return ExprFn{node.params, translate(*node.operands[0], ctx)};
    }
    if (const auto* fn = std::get_if<FunctionRef>(&f)) {
      std::vector<std::string> params;
      std::vector<ExprPtr> args;
      for (int i = 0; i < arity; ++i) {
        params.push_back(i < static_cast<int>(fn->def->params.size())
                             ? fn->def->params[static_cast<size_t>(i)].name
                             : "_" + std::to_string(i));
        args.push_back(make_param(i));
      }
      return ExprFn{params, inline_helper(*fn->def, std::move(args), {}, span)};
    }
    if (const auto* b = std::get_if<BuiltinRef>(&f)) {
      check_builtin_arity(*b->builtin, arity, span);
      std::vector<std::string> params;
      std::vector<ExprPtr> args;
      for (int i = 0; i < arity; ++i) {
        params.push_back(i == 0 ? "x" : "y");
        args.push_back(make_param(i));
      }
      return ExprFn{params, make_call(std::string(b->builtin->name), std::move(args))};
    }
    kind_error("expected a function, got " + describe(f), span);
  }

  ExprPtr inline_helper(const FunctionDef& def, std::vector<ExprPtr> args,
                        std::map<std::string, std::pair<ExprPtr, SourceSpan>> kwargs,
                        SourceSpan span) {
    if (std::find(stack_.begin(), stack_.end(), def.name) != stack_.end()) {
      throw Error(ErrorCode::kCycleError, "recursive call to '" + def.name + "'", span);
    }
    std::vector<std::string> names;
    std::vector<bool> keyword_only;
    for (const auto& p : def.params) {
      names.push_back(p.name);
      keyword_only.push_back(p.keyword_only);
    }
    auto bound = bind_arguments<ExprPtr>(names, keyword_only, std::move(args), std::move(kwargs),
                                         def.name, span);
    ExprContext ctx;
    for (size_t i = 0; i < names.size(); ++i) {
      if (bound[i]) {
        ctx.bound[names[i]] = *bound[i];
      } else if (def.params[i].default_value) {
        ctx.bound[names[i]] = translate(*def.params[i].default_value, ExprContext{});
      } else {
        throw Error(ErrorCode::kArityError,
                    def.name + "() missing required argument '" + names[i] + "'", span);
      }
    }
    stack_.push_back(def.name);
    for (const auto& stmt : def.body) {
      ExprPtr value = translate(*stmt.value, ctx);
      if (stmt.kind == Statement::Kind::kReturn) {
        stack_.pop_back();
        return value;
      }
      ctx.bound[stmt.target] = std::move(value);
    }
    stack_.pop_back();
    throw Error(ErrorCode::kSyntaxError, "function '" + def.name + "' has no return", def.span);
  }

  ExprPtr translate_name(const std::string& name, const ExprContext& ctx, SourceSpan span) {
    if (auto it = ctx.bound.find(name); it != ctx.bound.end()) return it->second;
    if (ctx.closure) {
      if (auto it = ctx.closure->find(name); it != ctx.closure->end()) {
        if (const auto* v = std::get_if<Value>(&it->second)) return make_literal(*v);
        kind_error("lambda captures '" + name + "', which is " + describe(it->second) +
                       "; only plain values can be captured",
                   span);
      }
    }
    return make_free_name(name);
  }

  ExprPtr translate(const AstExpr& e, const ExprContext& ctx) {
    switch (e.kind) {
      case AstKind::kLiteral: return make_literal(e.literal);
      case AstKind::kName: return translate_name(e.name, ctx, e.span);
      case AstKind::kUnary: return make_unary(e.op, translate(*e.operands[0], ctx));
      case AstKind::kBinary:
        return make_binary(e.op, translate(*e.operands[0], ctx), translate(*e.operands[1], ctx));
      case AstKind::kCompare: {
        std::vector<ExprPtr> operands;
        for (const auto& o : e.operands) operands.push_back(translate(*o, ctx));
        return make_compare(e.compare_ops, std::move(operands));
      }
      case AstKind::kBoolOp: {
        std::vector<ExprPtr> operands;
        for (const auto& o : e.operands) operands.push_back(translate(*o, ctx));
        return make_bool_op(e.op, std::move(operands));
      }
      case AstKind::kCond:
        return make_cond(translate(*e.operands[0], ctx), translate(*e.operands[1], ctx),
                         translate(*e.operands[2], ctx));
      case AstKind::kCall: return translate_call(e, ctx);
      case AstKind::kLambda:
        kind_error("nested lambdas are not supported inside element-wise functions", e.span);
      case AstKind::kRaspMember:
      case AstKind::kComparison:
      case AstKind::kNamed:
        kind_error("RASP operations cannot be used inside an element-wise function", e.span);
    }
    throw Error(ErrorCode::kInternal, "unhandled expression", e.span);
  }

  ExprPtr translate_call(const AstExpr& e, const ExprContext& ctx) {
    const AstExpr& callee = *e.operands[0];
    if (callee.kind != AstKind::kName) {
      kind_error("only helper functions and builtins can be called inside an element-wise function",
                 e.span);
    }
    std::vector<ExprPtr> args;
    for (size_t i = 1; i < e.operands.size(); ++i) args.push_back(translate(*e.operands[i], ctx));
    const std::string& name = callee.name;
    bool shadowed = ctx.bound.count(name) || (ctx.closure && ctx.closure->count(name));
    if (!shadowed) {
      if (const FunctionDef* def = ast_.find(name)) {
        std::map<std::string, std::pair<ExprPtr, SourceSpan>> kwargs;
        for (const auto& kw : e.keywords) {
          kwargs.emplace(kw.name, std::make_pair(translate(*kw.value, ctx), kw.span));
        }
        return inline_helper(*def, std::move(args), std::move(kwargs), e.span);
      }
    } else if (ctx.closure && ctx.closure->count(name)) {
      const Staged& v = ctx.closure->at(name);
      if (const auto* fn = std::get_if<FunctionRef>(&v)) {
        return inline_helper(*fn->def, std::move(args), {}, e.span);
      }
      if (const auto* b = std::get_if<BuiltinRef>(&v)) {
        check_builtin_arity(*b->builtin, static_cast<int>(args.size()), e.span);
        return make_call(std::string(b->builtin->name), std::move(args));
      }
      kind_error("'" + name + "' is " + describe(v) + ", which is not callable here", e.span);
    }
    if (!e.keywords.empty()) {
      throw Error(ErrorCode::kArityError,
                  "keyword arguments are only supported for helper functions", e.span);
    }
    if (const Builtin* b = find_builtin(name)) {
      check_builtin_arity(*b, static_cast<int>(args.size()), e.span);
    }
    return make_call(name, std::move(args));
  }

  const SurfaceAst& ast_;
  GraphBuilder builder_;
  std::vector<std::string> stack_;
};

}  // namespace

ProgramGraph elaborate(const SurfaceAst& ast, std::string_view entry_function) {
  Elaborator elaborator(ast);
  return elaborator.run(entry_function);
}

ProgramGraph compile_program(std::string_view text, std::string_view entry_function) {
  return elaborate(parse_program(text), entry_function);
}

std::string default_entry_function(const SurfaceAst& ast) {
  auto callable = [](const FunctionDef& fn) {
    return std::all_of(fn.params.begin(), fn.params.end(),
                       [](const Param& p) { return p.default_value != nullptr; });
  };
  for (auto it = ast.functions.rbegin(); it != ast.functions.rend(); ++it) {
    if (it->name.rfind("make_", 0) == 0 && callable(*it)) return it->name;
  }
  for (auto it = ast.functions.rbegin(); it != ast.functions.rend(); ++it) {
    if (callable(*it)) return it->name;
  }
  return {};
}

}  // namespace rasptk
