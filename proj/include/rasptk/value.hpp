#pragma once

#include <gmpxx.h>

#include <compare>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace rasptk {

struct NullValue {
  friend bool operator==(NullValue, NullValue) { return true; }
};

struct Token {
  std::string text;
  friend bool operator==(const Token&, const Token&) = default;
};

// A run-time cell of a RASP sequence.
//
// Rationals are kept canonical (lowest terms, positive denominator) and a
// rational with denominator 1 is stored as Int, so structurally equal numbers
// have a single representation. Bool participates in arithmetic as 0/1, the
// way the host language of candidate programs treats it.
class Value {
 public:
  enum class Kind { kNull, kInt, kRat, kBool, kToken };

  Value() = default;

  static Value null() { return Value(); }
  static Value integer(mpz_class v);
  static Value integer(long v) { return integer(mpz_class(v)); }
  static Value rational(mpq_class v);
  static Value rational(long num, long den);
  static Value boolean(bool v);
  static Value token(std::string text);

  Kind kind() const { return static_cast<Kind>(data_.index()); }
  bool is_null() const { return kind() == Kind::kNull; }
  bool is_numeric() const {
    auto k = kind();
    return k == Kind::kInt || k == Kind::kRat || k == Kind::kBool;
  }
  bool is_token() const { return kind() == Kind::kToken; }

  const mpz_class& int_value() const { return std::get<mpz_class>(data_); }
  const mpq_class& rat_value() const { return std::get<mpq_class>(data_); }
  bool bool_value() const { return std::get<bool>(data_); }
  const std::string& token_text() const { return std::get<Token>(data_).text; }

  // Numeric view; throws TypeMismatch for Null and Token.
  mpq_class to_rational() const;
  bool truthy() const;

  // Host-language style rendering: 3, 7/2, True, 'a', None.
  std::string repr() const;

  // Equality as the host language defines it: numbers compare by value
  // across Int/Rat/Bool, tokens by text, Null only equals Null.
  friend bool operator==(const Value& a, const Value& b);

 private:
  std::variant<NullValue, mpz_class, mpq_class, bool, Token> data_;
};

// Total order used for value sets: numbers (by value) < tokens < Null.
// Consistent with operator==.
std::strong_ordering compare_total(const Value& a, const Value& b);

struct ValueLess {
  bool operator()(const Value& a, const Value& b) const {
    return compare_total(a, b) < 0;
  }
};

std::string repr_sequence(const std::vector<Value>& values);

// Parses one literal as typed on a command line or in a program:
// 3, -2, 7/2, 3.5, True, False, None, 'a', "a". Any other bare word is a
// token. Throws SyntaxError on malformed numbers.
Value parse_value_literal(std::string_view text);

// Exact decimal text (as in "0.25") to a rational.
mpq_class parse_decimal(std::string_view text);

// Arithmetic with the host language's semantics over exact numbers.
// Errors: TypeMismatch, DivisionByZero.
Value add(const Value& a, const Value& b);
Value subtract(const Value& a, const Value& b);
Value multiply(const Value& a, const Value& b);
Value true_divide(const Value& a, const Value& b);
Value floor_divide(const Value& a, const Value& b);
Value modulo(const Value& a, const Value& b);
Value power(const Value& a, const Value& b);
Value negate(const Value& a);
Value unary_plus(const Value& a);
Value logical_not(const Value& a);

enum class CompareOp { kEq, kNe, kLt, kLe, kGt, kGe };

std::string_view compare_op_symbol(CompareOp op);

// Comparison inside function bodies. Ordering between incomparable kinds
// (token vs number, anything vs None) raises TypeMismatch.
bool compare_values(CompareOp op, const Value& a, const Value& b);

}  // namespace rasptk
