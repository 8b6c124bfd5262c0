#include "rasptk/expr.hpp"

#include <algorithm>
#include <array>
#include <set>

#include "rasptk/error.hpp"

namespace rasptk {

std::string_view comparison_name(Comparison cmp) {
  switch (cmp) {
    case Comparison::kEq: return "EQ";
    case Comparison::kNeq: return "NEQ";
    case Comparison::kLt: return "LT";
    case Comparison::kLeq: return "LEQ";
    case Comparison::kGt: return "GT";
    case Comparison::kGeq: return "GEQ";
    case Comparison::kTrue: return "TRUE";
    case Comparison::kFalse: return "FALSE";
  }
  return "?";
}

bool comparison_from_name(std::string_view name, Comparison* out) {
  static constexpr std::array kAll = {
      Comparison::kEq, Comparison::kNeq, Comparison::kLt,   Comparison::kLeq,
      Comparison::kGt, Comparison::kGeq, Comparison::kTrue, Comparison::kFalse};
  for (auto c : kAll) {
    if (comparison_name(c) == name) {
      *out = c;
      return true;
    }
  }
  return false;
}

bool evaluate_comparison(Comparison cmp, const Value& key, const Value& query) {
  if (key.is_null() || query.is_null()) return false;
  switch (cmp) {
    case Comparison::kTrue: return true;
    case Comparison::kFalse: return false;
    case Comparison::kEq: return key == query;
    case Comparison::kNeq: return !(key == query);
    default: break;
  }
  bool orderable = (key.is_numeric() && query.is_numeric()) ||
                   (key.is_token() && query.is_token());
  if (!orderable) return false;
  auto c = compare_total(key, query);
  switch (cmp) {
    case Comparison::kLt: return c < 0;
    case Comparison::kLeq: return c <= 0;
    case Comparison::kGt: return c > 0;
    case Comparison::kGeq: return c >= 0;
    default: return false;
  }
}

ExprPtr make_literal(Value v) {
  auto e = std::make_shared<Expr>();
  e->op = ExprOp::kLiteral;
  e->literal = std::move(v);
  return e;
}

ExprPtr make_param(int index) {
  auto e = std::make_shared<Expr>();
  e->op = ExprOp::kParam;
  e->param = index;
  return e;
}

ExprPtr make_free_name(std::string name) {
  auto e = std::make_shared<Expr>();
  e->op = ExprOp::kFreeName;
  e->name = std::move(name);
  return e;
}

ExprPtr make_unary(ExprOp op, ExprPtr a) {
  auto e = std::make_shared<Expr>();
  e->op = op;
  e->operands = {std::move(a)};
  return e;
}

ExprPtr make_binary(ExprOp op, ExprPtr a, ExprPtr b) {
  auto e = std::make_shared<Expr>();
  e->op = op;
  e->operands = {std::move(a), std::move(b)};
  return e;
}

ExprPtr make_compare(std::vector<CompareOp> ops, std::vector<ExprPtr> operands) {
  auto e = std::make_shared<Expr>();
  e->op = ExprOp::kCompare;
  e->compare_ops = std::move(ops);
  e->operands = std::move(operands);
  return e;
}

ExprPtr make_bool_op(ExprOp op, std::vector<ExprPtr> operands) {
  auto e = std::make_shared<Expr>();
  e->op = op;
  e->operands = std::move(operands);
  return e;
}

ExprPtr make_cond(ExprPtr then_expr, ExprPtr test, ExprPtr else_expr) {
  auto e = std::make_shared<Expr>();
  e->op = ExprOp::kCond;
  e->operands = {std::move(then_expr), std::move(test), std::move(else_expr)};
  return e;
}

ExprPtr make_call(std::string name, std::vector<ExprPtr> args) {
  auto e = std::make_shared<Expr>();
  e->op = ExprOp::kCall;
  e->name = std::move(name);
  e->operands = std::move(args);
  return e;
}

bool is_prime_number(const mpz_class& n) {
  if (n < 2) return false;
  return mpz_probab_prime_p(n.get_mpz_t(), 40) != 0;
}

namespace {

mpz_class truncate_toward_zero(const mpq_class& q) {
  mpz_class out;
  mpz_tdiv_q(out.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  return out;
}

Value builtin_abs(std::span<const Value> a) {
  return Value::rational(abs(a[0].to_rational()));
}

Value builtin_min(std::span<const Value> a) {
  Value best = a[0];
  for (size_t i = 1; i < a.size(); ++i) {
    if (compare_values(CompareOp::kLt, a[i], best)) best = a[i];
  }
  return best;
}

Value builtin_max(std::span<const Value> a) {
  Value best = a[0];
  for (size_t i = 1; i < a.size(); ++i) {
    if (compare_values(CompareOp::kGt, a[i], best)) best = a[i];
  }
  return best;
}

Value builtin_int(std::span<const Value> a) {
  if (a[0].is_token()) {
    try {
      Value v = parse_value_literal(a[0].token_text());
      if (v.kind() == Value::Kind::kInt) return v;
    } catch (const Error&) {
    }
    throw Error(ErrorCode::kTypeMismatch,
                "invalid literal for int(): " + a[0].repr());
  }
  return Value::integer(truncate_toward_zero(a[0].to_rational()));
}

// Round half to even, as the host language does.
Value builtin_round(std::span<const Value> a) {
  mpq_class q = a[0].to_rational();
  mpz_class fl;
  mpz_fdiv_q(fl.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  mpq_class frac = q - mpq_class(fl);
  int c = cmp(frac, mpq_class(1, 2));
  if (c > 0 || (c == 0 && mpz_odd_p(fl.get_mpz_t()))) fl += 1;
  return Value::integer(fl);
}

Value builtin_bool(std::span<const Value> a) { return Value::boolean(a[0].truthy()); }

Value builtin_float(std::span<const Value> a) {
  return Value::rational(a[0].to_rational());
}

Value builtin_is_prime(std::span<const Value> a) {
  mpq_class q = a[0].to_rational();
  if (q.get_den() != 1) return Value::integer(0);
  return Value::integer(is_prime_number(q.get_num()) ? 1 : 0);
}

Value builtin_pow(std::span<const Value> a) { return power(a[0], a[1]); }

constexpr std::array<Builtin, 9> kBuiltins = {{
    {"abs", 1, 1, builtin_abs},
    {"bool", 1, 1, builtin_bool},
    {"float", 1, 1, builtin_float},
    {"int", 1, 1, builtin_int},
    {"is_prime", 1, 1, builtin_is_prime},
    {"max", 2, 16, builtin_max},
    {"min", 2, 16, builtin_min},
    {"pow", 2, 2, builtin_pow},
    {"round", 1, 1, builtin_round},
}};

void collect_undeclared(const Expr& e, int arity, std::set<std::string>* out) {
  switch (e.op) {
    case ExprOp::kFreeName: out->insert(e.name); break;
    case ExprOp::kParam:
      if (e.param < 0 || e.param >= arity) out->insert("<param " + std::to_string(e.param) + ">");
      break;
    case ExprOp::kCall:
      if (!find_builtin(e.name)) out->insert(e.name);
      break;
    default: break;
  }
  for (const auto& child : e.operands) collect_undeclared(*child, arity, out);
}

}  // namespace

Value apply_unary(ExprOp op, const Value& a) {
  switch (op) {
    case ExprOp::kNeg: return negate(a);
    case ExprOp::kPos: return unary_plus(a);
    case ExprOp::kNot: return logical_not(a);
    default: break;
  }
  throw Error(ErrorCode::kInternal, "not a unary operator");
}

Value apply_binary(ExprOp op, const Value& a, const Value& b) {
  switch (op) {
    case ExprOp::kAdd: return add(a, b);
    case ExprOp::kSub: return subtract(a, b);
    case ExprOp::kMul: return multiply(a, b);
    case ExprOp::kDiv: return true_divide(a, b);
    case ExprOp::kFloorDiv: return floor_divide(a, b);
    case ExprOp::kMod: return modulo(a, b);
    case ExprOp::kPow: return power(a, b);
    default: break;
  }
  throw Error(ErrorCode::kInternal, "not a binary operator");
}

const Builtin* find_builtin(std::string_view name) {
  auto it = std::find_if(kBuiltins.begin(), kBuiltins.end(),
                         [&](const Builtin& b) { return b.name == name; });
  return it == kBuiltins.end() ? nullptr : &*it;
}

std::vector<std::string_view> builtin_names() {
  std::vector<std::string_view> out;
  for (const auto& b : kBuiltins) out.push_back(b.name);
  return out;
}

std::vector<std::string> undeclared_references(const ExprFn& fn) {
  std::set<std::string> names;
  if (fn.body) collect_undeclared(*fn.body, fn.arity(), &names);
  return {names.begin(), names.end()};
}

}  // namespace rasptk
