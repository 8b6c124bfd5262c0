#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rasptk/value.hpp"

namespace rasptk {

// Selector predicates. Select(keys, queries, cmp) puts predicate(key, query)
// at row = query position, column = key position.
enum class Comparison { kEq, kNeq, kLt, kLeq, kGt, kGeq, kTrue, kFalse };

std::string_view comparison_name(Comparison cmp);
bool comparison_from_name(std::string_view name, Comparison* out);

// Total over all value pairs. Null on either side is always false, TRUE and
// FALSE ignore the operands otherwise, and ordering predicates between a token
// and a number are false.
bool evaluate_comparison(Comparison cmp, const Value& key, const Value& query);

enum class ExprOp {
  kLiteral,
  kParam,
  kFreeName,  // unresolved reference; flagged by static validation
  kNeg,
  kPos,
  kNot,
  kAdd,
  kSub,
  kMul,
  kDiv,
  kFloorDiv,
  kMod,
  kPow,
  kCompare,  // chained: operands[0] ops[0] operands[1] ops[1] ...
  kAnd,
  kOr,
  kCond,  // operands: then, test, else
  kCall,  // builtin call by name
};

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  ExprOp op = ExprOp::kLiteral;
  Value literal;
  int param = -1;
  std::string name;
  std::vector<CompareOp> compare_ops;
  std::vector<ExprPtr> operands;
};

ExprPtr make_literal(Value v);
ExprPtr make_param(int index);
ExprPtr make_free_name(std::string name);
ExprPtr make_unary(ExprOp op, ExprPtr a);
ExprPtr make_binary(ExprOp op, ExprPtr a, ExprPtr b);
ExprPtr make_compare(std::vector<CompareOp> ops, std::vector<ExprPtr> operands);
ExprPtr make_bool_op(ExprOp op, std::vector<ExprPtr> operands);
ExprPtr make_cond(ExprPtr then_expr, ExprPtr test, ExprPtr else_expr);
ExprPtr make_call(std::string name, std::vector<ExprPtr> args);

// The element-wise function of a Map (one parameter) or SequenceMap (two).
struct ExprFn {
  std::vector<std::string> params;
  ExprPtr body;

  int arity() const { return static_cast<int>(params.size()); }
};

// Builtin pure functions callable from function bodies.
struct Builtin {
  std::string_view name;
  int min_args;
  int max_args;
  Value (*fn)(std::span<const Value> args);
};

const Builtin* find_builtin(std::string_view name);
std::vector<std::string_view> builtin_names();

// Unary (kNeg, kPos, kNot) and arithmetic binary operators on values.
Value apply_unary(ExprOp op, const Value& a);
Value apply_binary(ExprOp op, const Value& a, const Value& b);

// Names in `fn` that are neither parameters nor registered builtins.
std::vector<std::string> undeclared_references(const ExprFn& fn);

// True primality (0 and 1 are not prime).
bool is_prime_number(const mpz_class& n);

}  // namespace rasptk
