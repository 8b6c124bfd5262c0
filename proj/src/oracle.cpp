// Reference oracles: a registry of hand-written sequence functions and a
// small expression language evaluated per output position. Neither shares
// code with the RASP interpreter beyond the Value arithmetic primitives.

#include <algorithm>
#include <cctype>
#include <functional>
#include <map>
#include <optional>

#include "rasptk/error.hpp"
#include "rasptk/expr.hpp"
#include "rasptk/task.hpp"

namespace rasptk {

namespace {

using Seq = std::vector<Value>;

[[noreturn]] void oracle_fail(const std::string& msg) { throw Error(ErrorCode::kOracleError, msg); }

long as_long(const Value& v) {
  mpq_class q = v.to_rational();
  if (q.get_den() != 1 || !q.get_num().fits_slong_p()) oracle_fail("expected an integer, got " + v.repr());
  return q.get_num().get_si();
}

Value count_where(const Seq& xs, const std::function<bool(const Value&)>& pred) {
  long c = 0;
  for (const auto& x : xs) c += pred(x) ? 1 : 0;
  return Value::integer(c);
}

Seq each(const Seq& xs, const std::function<Value(size_t)>& f) {
  Seq out;
  out.reserve(xs.size());
  for (size_t i = 0; i < xs.size(); ++i) out.push_back(f(i));
  return out;
}

Seq sorted_copy(Seq xs, bool descending) {
  std::stable_sort(xs.begin(), xs.end(), [](const Value& a, const Value& b) {
    return compare_values(CompareOp::kLt, a, b);
  });
  if (descending) std::reverse(xs.begin(), xs.end());
  return xs;
}

const std::map<std::string, std::function<Seq(const Seq&)>, std::less<>>& builtin_registry() {
  static const std::map<std::string, std::function<Seq(const Seq&)>, std::less<>> registry = {
      {"identity", [](const Seq& xs) { return xs; }},
      {"reverse", [](const Seq& xs) { return Seq(xs.rbegin(), xs.rend()); }},
      {"sort_ascending", [](const Seq& xs) { return sorted_copy(xs, false); }},
      {"sort_descending", [](const Seq& xs) { return sorted_copy(xs, true); }},
      {"length",
       [](const Seq& xs) { return Seq(xs.size(), Value::integer(static_cast<long>(xs.size()))); }},
      {"index_parity",
       [](const Seq& xs) { return each(xs, [](size_t i) { return Value::integer(static_cast<long>(i % 2)); }); }},
      {"token_parity",
       [](const Seq& xs) { return each(xs, [&](size_t i) { return modulo(xs[i], Value::integer(2)); }); }},
      {"is_prime",
       [](const Seq& xs) {
         return each(xs, [&](size_t i) {
           mpq_class q = xs[i].to_rational();
           return Value::integer(q.get_den() == 1 && is_prime_number(q.get_num()) ? 1 : 0);
         });
       }},
      {"histogram",
       [](const Seq& xs) {
         return each(xs, [&](size_t i) { return count_where(xs, [&](const Value& v) { return v == xs[i]; }); });
       }},
      {"count_smaller",
       [](const Seq& xs) {
         return each(xs, [&](size_t i) {
           return count_where(xs, [&](const Value& v) { return compare_values(CompareOp::kLt, v, xs[i]); });
         });
       }},
      {"count_greater",
       [](const Seq& xs) {
         return each(xs, [&](size_t i) {
           return count_where(xs, [&](const Value& v) { return compare_values(CompareOp::kGt, v, xs[i]); });
         });
       }},
      {"first", [](const Seq& xs) { return Seq(xs.size(), xs.front()); }},
      {"last", [](const Seq& xs) { return Seq(xs.size(), xs.back()); }},
      {"min",
       [](const Seq& xs) { return Seq(xs.size(), sorted_copy(xs, false).front()); }},
      {"max",
       [](const Seq& xs) { return Seq(xs.size(), sorted_copy(xs, false).back()); }},
      {"shift_right_1",
       [](const Seq& xs) { return each(xs, [&](size_t i) { return i == 0 ? Value::null() : xs[i - 1]; }); }},
      {"shift_left_1",
       [](const Seq& xs) {
         return each(xs, [&](size_t i) { return i + 1 == xs.size() ? Value::null() : xs[i + 1]; });
       }},
      {"frac_ones",
       [](const Seq& xs) {
         Seq out;
         long ones = 0;
         for (size_t i = 0; i < xs.size(); ++i) {
           if (xs[i] == Value::integer(1)) ++ones;
           out.push_back(Value::rational(ones, static_cast<long>(i + 1)));
         }
         return out;
       }},
  };
  return registry;
}

// --- expression oracles ------------------------------------------------------

struct OVal {
  bool is_list = false;
  Value scalar;
  Seq list;

  static OVal of(Value v) { return OVal{false, std::move(v), {}}; }
  static OVal of(Seq s) { return OVal{true, Value(), std::move(s)}; }
};

struct Env {
  const Seq* xs;
  long i;
};

struct ONode {
  enum class Kind { kLiteral, kVar, kUnary, kBinary, kCompare, kAnd, kOr, kNot, kCond, kCall, kIndex, kSlice };
  Kind kind = Kind::kLiteral;
  Value literal;
  std::string name;  // variable, function, or operator symbol
  std::vector<CompareOp> cmp;
  std::vector<std::shared_ptr<ONode>> kids;  // slice: target, lo|null, hi|null
};
using ONodePtr = std::shared_ptr<ONode>;

class OParser {
 public:
  explicit OParser(std::string_view src) : src_(src) { advance(); }

  ONodePtr parse() {
    ONodePtr e = expr();
    if (tok_ != "") fail("unexpected '" + tok_ + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw Error(ErrorCode::kSchemaError,
                "oracle expression: " + msg + " in \"" + std::string(src_) + "\"");
  }

  void advance() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    if (pos_ >= src_.size()) {
      tok_.clear();
      return;
    }
    char c = src_[pos_];
    size_t start = pos_;
    if (std::isdigit(static_cast<unsigned char>(c))) {
      while (pos_ < src_.size() && (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.')) ++pos_;
    } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) ++pos_;
    } else if (c == '\'' || c == '"') {
      size_t end = src_.find(c, pos_ + 1);
      if (end == std::string_view::npos) fail("unterminated string");
      pos_ = end + 1;
    } else {
      static const char* kTwo[] = {"//", "**", "==", "!=", "<=", ">="};
      pos_ += 1;
      for (const char* t : kTwo) {
        if (src_.substr(start, 2) == t) {
          pos_ = start + 2;
          break;
        }
      }
    }
    tok_ = std::string(src_.substr(start, pos_ - start));
  }

  bool accept(const std::string& t) {
    if (tok_ != t) return false;
    advance();
    return true;
  }
  void expect(const std::string& t) {
    if (!accept(t)) fail("expected '" + t + "'");
  }

  static ONodePtr node(ONode::Kind k, std::vector<ONodePtr> kids = {}, std::string name = {}) {
    auto n = std::make_shared<ONode>();
    n->kind = k;
    n->kids = std::move(kids);
    n->name = std::move(name);
    return n;
  }

  ONodePtr expr() {
    ONodePtr then_branch = disjunction();
    if (accept("if")) {
      ONodePtr test = disjunction();
      expect("else");
      ONodePtr else_branch = expr();
      return node(ONode::Kind::kCond, {then_branch, test, else_branch});
    }
    return then_branch;
  }
  ONodePtr disjunction() {
    ONodePtr left = conjunction();
    while (accept("or")) left = node(ONode::Kind::kOr, {left, conjunction()});
    return left;
  }
  ONodePtr conjunction() {
    ONodePtr left = negation();
    while (accept("and")) left = node(ONode::Kind::kAnd, {left, negation()});
    return left;
  }
  ONodePtr negation() {
    if (accept("not")) return node(ONode::Kind::kNot, {negation()});
    return comparison();
  }
  ONodePtr comparison() {
    ONodePtr first = arith();
    static const std::map<std::string, CompareOp> kOps = {
        {"==", CompareOp::kEq}, {"!=", CompareOp::kNe}, {"<", CompareOp::kLt},
        {"<=", CompareOp::kLe}, {">", CompareOp::kGt}, {">=", CompareOp::kGe}};
    auto it = kOps.find(tok_);
    if (it == kOps.end()) return first;
    auto n = node(ONode::Kind::kCompare, {first});
    while ((it = kOps.find(tok_)) != kOps.end()) {
      advance();
      n->cmp.push_back(it->second);
      n->kids.push_back(arith());
    }
    return n;
  }
  ONodePtr arith() {
    ONodePtr left = term();
    while (tok_ == "+" || tok_ == "-") {
      std::string op = tok_;
      advance();
      left = node(ONode::Kind::kBinary, {left, term()}, op);
    }
    return left;
  }
  ONodePtr term() {
    ONodePtr left = unary();
    while (tok_ == "*" || tok_ == "/" || tok_ == "//" || tok_ == "%") {
      std::string op = tok_;
      advance();
      left = node(ONode::Kind::kBinary, {left, unary()}, op);
    }
    return left;
  }
  ONodePtr unary() {
    if (accept("-")) return node(ONode::Kind::kUnary, {unary()}, "-");
    ONodePtr base = postfix();
    if (accept("**")) return node(ONode::Kind::kBinary, {base, unary()}, "**");
    return base;
  }
  ONodePtr postfix() {
    ONodePtr target = primary();
    while (accept("[")) {
      ONodePtr lo, hi;
      if (tok_ != ":") lo = expr();
      if (accept(":")) {
        if (tok_ != "]") hi = expr();
        expect("]");
        target = node(ONode::Kind::kSlice, {target, lo, hi});
      } else {
        expect("]");
        target = node(ONode::Kind::kIndex, {target, lo});
      }
    }
    return target;
  }
  ONodePtr primary() {
    if (tok_.empty()) fail("unexpected end");
    if (accept("(")) {
      ONodePtr e = expr();
      expect(")");
      return e;
    }
    char c = tok_[0];
    auto lit = node(ONode::Kind::kLiteral);
    if (std::isdigit(static_cast<unsigned char>(c))) {
      lit->literal = parse_value_literal(tok_);
      advance();
      return lit;
    }
    if (c == '\'' || c == '"') {
      lit->literal = Value::token(tok_.substr(1, tok_.size() - 2));
      advance();
      return lit;
    }
    if (tok_ == "None" || tok_ == "True" || tok_ == "False") {
      lit->literal = parse_value_literal(tok_);
      advance();
      return lit;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::string name = tok_;
      advance();
      if (accept("(")) {
        auto call = node(ONode::Kind::kCall, {}, name);
        if (!accept(")")) {
          do call->kids.push_back(expr());
          while (accept(","));
          expect(")");
        }
        static const std::vector<std::string> kFns = {"len", "sum", "max", "min", "sorted", "reversed",
                                                      "count", "abs", "is_prime"};
        if (std::find(kFns.begin(), kFns.end(), name) == kFns.end()) fail("unknown function " + name);
        return call;
      }
      if (name != "xs" && name != "i" && name != "n") fail("unknown variable " + name);
      return node(ONode::Kind::kVar, {}, name);
    }
    fail("unexpected '" + tok_ + "'");
  }

  std::string_view src_;
  size_t pos_ = 0;
  std::string tok_;
};

Value scalar(const OVal& v) {
  if (v.is_list) oracle_fail("expected a value, got a list");
  return v.scalar;
}
const Seq& list(const OVal& v) {
  if (!v.is_list) oracle_fail("expected a list, got " + v.scalar.repr());
  return v.list;
}

OVal eval(const ONode& e, const Env& env);

Seq args_as_list(const ONode& e, const Env& env) {
  if (e.kids.size() == 1) {
    OVal only = eval(*e.kids[0], env);
    if (only.is_list) return only.list;
    return {only.scalar};
  }
  Seq out;
  for (const auto& k : e.kids) out.push_back(scalar(eval(*k, env)));
  return out;
}

OVal call(const ONode& e, const Env& env) {
  const std::string& f = e.name;
  if (f == "len") return OVal::of(Value::integer(static_cast<long>(list(eval(*e.kids.at(0), env)).size())));
  if (f == "sorted") return OVal::of(sorted_copy(list(eval(*e.kids.at(0), env)), false));
  if (f == "reversed") {
    Seq s = list(eval(*e.kids.at(0), env));
    return OVal::of(Seq(s.rbegin(), s.rend()));
  }
  if (f == "sum") {
    Value total = Value::integer(0);
    OVal arg = eval(*e.kids.at(0), env);
    for (const auto& v : list(arg)) total = add(total, v);
    return OVal::of(total);
  }
  if (f == "max" || f == "min") {
    Seq s = args_as_list(e, env);
    if (s.empty()) oracle_fail(f + "() of an empty sequence");
    Seq sorted = sorted_copy(s, false);
    return OVal::of(f == "max" ? sorted.back() : sorted.front());
  }
  if (f == "count") {
    if (e.kids.size() != 2) oracle_fail("count(list, value) takes two arguments");
    const Seq s = list(eval(*e.kids[0], env));
    Value v = scalar(eval(*e.kids[1], env));
    return OVal::of(count_where(s, [&](const Value& x) { return x == v; }));
  }
  if (f == "abs") {
    Value v = scalar(eval(*e.kids.at(0), env));
    return OVal::of(Value::rational(abs(v.to_rational())));
  }
  Value v = scalar(eval(*e.kids.at(0), env));
  mpq_class q = v.to_rational();
  return OVal::of(Value::integer(q.get_den() == 1 && is_prime_number(q.get_num()) ? 1 : 0));
}

long normalize_index(long idx, size_t size) {
  if (idx < 0) idx += static_cast<long>(size);
  if (idx < 0 || idx >= static_cast<long>(size)) oracle_fail("index out of range");
  return idx;
}

OVal eval(const ONode& e, const Env& env) {
  switch (e.kind) {
    case ONode::Kind::kLiteral: return OVal::of(e.literal);
    case ONode::Kind::kVar:
      if (e.name == "xs") return OVal::of(*env.xs);
      if (e.name == "i") return OVal::of(Value::integer(env.i));
      return OVal::of(Value::integer(static_cast<long>(env.xs->size())));
    case ONode::Kind::kUnary: return OVal::of(negate(scalar(eval(*e.kids[0], env))));
    case ONode::Kind::kBinary: {
      Value a = scalar(eval(*e.kids[0], env));
      Value b = scalar(eval(*e.kids[1], env));
      if (e.name == "+") return OVal::of(add(a, b));
      if (e.name == "-") return OVal::of(subtract(a, b));
      if (e.name == "*") return OVal::of(multiply(a, b));
      if (e.name == "/") return OVal::of(true_divide(a, b));
      if (e.name == "//") return OVal::of(floor_divide(a, b));
      if (e.name == "%") return OVal::of(modulo(a, b));
      return OVal::of(power(a, b));
    }
    case ONode::Kind::kCompare: {
      Value left = scalar(eval(*e.kids[0], env));
      for (size_t k = 0; k < e.cmp.size(); ++k) {
        Value right = scalar(eval(*e.kids[k + 1], env));
        if (!compare_values(e.cmp[k], left, right)) return OVal::of(Value::boolean(false));
        left = right;
      }
      return OVal::of(Value::boolean(true));
    }
    case ONode::Kind::kAnd: {
      OVal a = eval(*e.kids[0], env);
      return scalar(a).truthy() ? eval(*e.kids[1], env) : a;
    }
    case ONode::Kind::kOr: {
      OVal a = eval(*e.kids[0], env);
      return scalar(a).truthy() ? a : eval(*e.kids[1], env);
    }
    case ONode::Kind::kNot: return OVal::of(Value::boolean(!scalar(eval(*e.kids[0], env)).truthy()));
    case ONode::Kind::kCond:
      return scalar(eval(*e.kids[1], env)).truthy() ? eval(*e.kids[0], env) : eval(*e.kids[2], env);
    case ONode::Kind::kCall: return call(e, env);
    case ONode::Kind::kIndex: {
      const Seq s = list(eval(*e.kids[0], env));
      long idx = normalize_index(as_long(scalar(eval(*e.kids[1], env))), s.size());
      return OVal::of(s[static_cast<size_t>(idx)]);
    }
    case ONode::Kind::kSlice: {
      const Seq s = list(eval(*e.kids[0], env));
      long size = static_cast<long>(s.size());
      auto bound = [&](const ONodePtr& k, long dflt) {
        if (!k) return dflt;
        long b = as_long(scalar(eval(*k, env)));
        if (b < 0) b += size;
        return std::clamp(b, 0L, size);
      };
      long lo = bound(e.kids[1], 0), hi = bound(e.kids[2], size);
      if (hi < lo) hi = lo;
      return OVal::of(Seq(s.begin() + lo, s.begin() + hi));
    }
  }
  oracle_fail("unhandled oracle expression");
}

}  // namespace

class OracleExpr {
 public:
  explicit OracleExpr(ONodePtr root) : root_(std::move(root)) {}
  Value at(const Seq& xs, size_t i) const {
    OVal v = eval(*root_, Env{&xs, static_cast<long>(i)});
    return scalar(v);
  }

 private:
  ONodePtr root_;
};

Oracle compile_expression_oracle(std::string_view source) {
  Oracle o;
  o.kind = Oracle::Kind::kExpression;
  o.text = std::string(source);
  o.compiled = std::make_shared<const OracleExpr>(OParser(source).parse());
  return o;
}

Oracle builtin_oracle(std::string_view id) {
  if (!builtin_registry().count(id)) {
    throw Error(ErrorCode::kUnknownOracle, "no builtin oracle named '" + std::string(id) + "'");
  }
  Oracle o;
  o.kind = Oracle::Kind::kBuiltin;
  o.text = std::string(id);
  return o;
}

std::vector<std::string> builtin_oracle_ids() {
  std::vector<std::string> out;
  for (const auto& [id, fn] : builtin_registry()) out.push_back(id);
  return out;
}

std::vector<Value> eval_oracle(const TaskSpec& task, const std::vector<Value>& input) {
  if (input.empty()) throw Error(ErrorCode::kOracleError, "empty input");
  try {
    if (task.oracle.kind == Oracle::Kind::kBuiltin) {
      auto it = builtin_registry().find(task.oracle.text);
      if (it == builtin_registry().end()) {
        throw Error(ErrorCode::kUnknownOracle, "no builtin oracle named '" + task.oracle.text + "'");
      }
      return it->second(input);
    }
    std::vector<Value> out;
    out.reserve(input.size());
    for (size_t i = 0; i < input.size(); ++i) out.push_back(task.oracle.compiled->at(input, i));
    return out;
  } catch (const Error& err) {
    if (err.code() == ErrorCode::kOracleError || err.code() == ErrorCode::kUnknownOracle) throw;
    throw Error(ErrorCode::kOracleError, "oracle for '" + task.name + "' failed on " +
                                             repr_sequence(input) + ": " + err.detail());
  }
}

}  // namespace rasptk
