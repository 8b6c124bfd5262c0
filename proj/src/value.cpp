#include "rasptk/value.hpp"

#include <cctype>

#include "rasptk/error.hpp"

namespace rasptk {

namespace {

// Exponents beyond this are rejected rather than materialized.
constexpr unsigned long kMaxExponent = 4096;

[[noreturn]] void type_mismatch(std::string_view op, const Value& a,
                                const Value* b = nullptr) {
  std::string msg = "unsupported operand(s) for ";
  msg += op;
  msg += ": ";
  msg += a.repr();
  if (b) {
    msg += ", ";
    msg += b->repr();
  }
  throw Error(ErrorCode::kTypeMismatch, msg);
}

int kind_rank(const Value& v) {
  if (v.is_numeric()) return 0;
  if (v.is_token()) return 1;
  return 2;
}

mpz_class floor_of(const mpq_class& q) {
  mpz_class out;
  mpz_fdiv_q(out.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  return out;
}

std::string escape_token(const std::string& text) {
  std::string out = "'";
  for (char c : text) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\'': out += "\\'"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  out += "'";
  return out;
}

bool is_integer_text(std::string_view s) {
  size_t i = 0;
  if (i < s.size() && (s[i] == '-' || s[i] == '+')) ++i;
  if (i == s.size()) return false;
  for (; i < s.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  }
  return true;
}

}  // namespace

Value Value::integer(mpz_class v) {
  Value out;
  out.data_ = std::move(v);
  return out;
}

Value Value::rational(mpq_class v) {
  v.canonicalize();
  if (v.get_den() == 1) return integer(v.get_num());
  Value out;
  out.data_ = std::move(v);
  return out;
}

Value Value::rational(long num, long den) {
  if (den == 0) throw Error(ErrorCode::kDivisionByZero, "zero denominator");
  return rational(mpq_class(mpz_class(num), mpz_class(den)));
}

Value Value::boolean(bool v) {
  Value out;
  out.data_ = v;
  return out;
}

Value Value::token(std::string text) {
  Value out;
  out.data_ = Token{std::move(text)};
  return out;
}

mpq_class Value::to_rational() const {
  switch (kind()) {
    case Kind::kInt: return mpq_class(int_value());
    case Kind::kRat: return rat_value();
    case Kind::kBool: return mpq_class(bool_value() ? 1 : 0);
    default: break;
  }
  throw Error(ErrorCode::kTypeMismatch, "expected a number, got " + repr());
}

bool Value::truthy() const {
  switch (kind()) {
    case Kind::kNull: return false;
    case Kind::kInt: return int_value() != 0;
    case Kind::kRat: return true;  // canonical rationals are never zero
    case Kind::kBool: return bool_value();
    case Kind::kToken: return !token_text().empty();
  }
  return false;
}

std::string Value::repr() const {
  switch (kind()) {
    case Kind::kNull: return "None";
    case Kind::kInt: return int_value().get_str();
    case Kind::kRat:
      return rat_value().get_num().get_str() + "/" +
             rat_value().get_den().get_str();
    case Kind::kBool: return bool_value() ? "True" : "False";
    case Kind::kToken: return escape_token(token_text());
  }
  return "?";
}

bool operator==(const Value& a, const Value& b) {
  if (a.is_numeric() && b.is_numeric()) {
    if (a.kind() == Value::Kind::kInt && b.kind() == Value::Kind::kInt) {
      return a.int_value() == b.int_value();
    }
    return a.to_rational() == b.to_rational();
  }
  if (a.kind() != b.kind()) return false;
  if (a.is_token()) return a.token_text() == b.token_text();
  return a.is_null();
}

std::strong_ordering compare_total(const Value& a, const Value& b) {
  int ra = kind_rank(a);
  int rb = kind_rank(b);
  if (ra != rb) return ra <=> rb;
  if (ra == 0) {
    int c = cmp(a.to_rational(), b.to_rational());
    return c <=> 0;
  }
  if (ra == 1) return a.token_text().compare(b.token_text()) <=> 0;
  return std::strong_ordering::equal;
}

std::string repr_sequence(const std::vector<Value>& values) {
  std::string out = "[";
  for (size_t i = 0; i < values.size(); ++i) {
    if (i) out += ", ";
    out += values[i].repr();
  }
  out += "]";
  return out;
}

mpq_class parse_decimal(std::string_view text) {
  std::string_view s = text;
  bool negative = false;
  if (!s.empty() && (s[0] == '-' || s[0] == '+')) {
    negative = s[0] == '-';
    s.remove_prefix(1);
  }
  auto dot = s.find('.');
  std::string whole(s.substr(0, dot));
  std::string frac = dot == std::string_view::npos ? "" : std::string(s.substr(dot + 1));
  if (whole.empty()) whole = "0";
  for (char c : whole + frac) {
    if (!std::isdigit(static_cast<unsigned char>(c))) {
      throw Error(ErrorCode::kSyntaxError,
                  "malformed number '" + std::string(text) + "'");
    }
  }
  mpz_class num(whole + frac);
  mpz_class den = 1;
  for (size_t i = 0; i < frac.size(); ++i) den *= 10;
  mpq_class out(num, den);
  out.canonicalize();
  return negative ? mpq_class(-out) : out;
}

Value parse_value_literal(std::string_view raw) {
  size_t b = 0;
  size_t e = raw.size();
  while (b < e && std::isspace(static_cast<unsigned char>(raw[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(raw[e - 1]))) --e;
  std::string_view s = raw.substr(b, e - b);
  if (s.empty()) throw Error(ErrorCode::kSyntaxError, "empty value literal");
  if (s == "None") return Value::null();
  if (s == "True") return Value::boolean(true);
  if (s == "False") return Value::boolean(false);
  if (s.size() >= 2 && (s.front() == '\'' || s.front() == '"') &&
      s.back() == s.front()) {
    std::string text;
    for (size_t i = 1; i + 1 < s.size(); ++i) {
      if (s[i] == '\\' && i + 2 < s.size()) {
        char n = s[++i];
        text += n == 'n' ? '\n' : n == 't' ? '\t' : n;
      } else {
        text += s[i];
      }
    }
    return Value::token(std::move(text));
  }
  char first = s[0];
  bool looks_numeric =
      std::isdigit(static_cast<unsigned char>(first)) ||
      ((first == '-' || first == '+' || first == '.') && s.size() > 1 &&
       (std::isdigit(static_cast<unsigned char>(s[1])) || s[1] == '.'));
  if (!looks_numeric) return Value::token(std::string(s));
  auto slash = s.find('/');
  if (slash != std::string_view::npos) {
    auto num = s.substr(0, slash);
    auto den = s.substr(slash + 1);
    if (!is_integer_text(num) || !is_integer_text(den)) {
      throw Error(ErrorCode::kSyntaxError,
                  "malformed fraction '" + std::string(s) + "'");
    }
    mpz_class d(std::string(den[0] == '+' ? den.substr(1) : den));
    if (d == 0) throw Error(ErrorCode::kDivisionByZero, "zero denominator");
    mpz_class n(std::string(num[0] == '+' ? num.substr(1) : num));
    return Value::rational(mpq_class(n, d));
  }
  return Value::rational(parse_decimal(s));
}

Value add(const Value& a, const Value& b) {
  if (a.is_numeric() && b.is_numeric()) {
    return Value::rational(a.to_rational() + b.to_rational());
  }
  if (a.is_token() && b.is_token()) {
    return Value::token(a.token_text() + b.token_text());
  }
  type_mismatch("+", a, &b);
}

Value subtract(const Value& a, const Value& b) {
  if (!a.is_numeric() || !b.is_numeric()) type_mismatch("-", a, &b);
  return Value::rational(a.to_rational() - b.to_rational());
}

Value multiply(const Value& a, const Value& b) {
  if (!a.is_numeric() || !b.is_numeric()) type_mismatch("*", a, &b);
  return Value::rational(a.to_rational() * b.to_rational());
}

Value true_divide(const Value& a, const Value& b) {
  if (!a.is_numeric() || !b.is_numeric()) type_mismatch("/", a, &b);
  mpq_class d = b.to_rational();
  if (d == 0) throw Error(ErrorCode::kDivisionByZero, "division by zero");
  return Value::rational(a.to_rational() / d);
}

Value floor_divide(const Value& a, const Value& b) {
  if (!a.is_numeric() || !b.is_numeric()) type_mismatch("//", a, &b);
  mpq_class d = b.to_rational();
  if (d == 0) throw Error(ErrorCode::kDivisionByZero, "integer division by zero");
  return Value::integer(floor_of(a.to_rational() / d));
}

Value modulo(const Value& a, const Value& b) {
  if (!a.is_numeric() || !b.is_numeric()) type_mismatch("%", a, &b);
  mpq_class n = a.to_rational();
  mpq_class d = b.to_rational();
  if (d == 0) throw Error(ErrorCode::kDivisionByZero, "modulo by zero");
  mpq_class q = n / d;
  return Value::rational(n - d * mpq_class(floor_of(q)));
}

Value power(const Value& a, const Value& b) {
  if (!a.is_numeric() || !b.is_numeric()) type_mismatch("**", a, &b);
  mpq_class e = b.to_rational();
  if (e.get_den() != 1) {
    throw Error(ErrorCode::kTypeMismatch,
                "non-integral exponent " + b.repr() + " has no exact result");
  }
  mpz_class ez = e.get_num();
  bool negative = ez < 0;
  if (negative) ez = -ez;
  if (ez > kMaxExponent) {
    throw Error(ErrorCode::kTypeMismatch, "exponent " + b.repr() + " too large");
  }
  unsigned long n = ez.get_ui();
  mpq_class base = a.to_rational();
  if (negative && base == 0) {
    throw Error(ErrorCode::kDivisionByZero, "zero raised to a negative power");
  }
  mpz_class num;
  mpz_class den;
  mpz_pow_ui(num.get_mpz_t(), base.get_num_mpz_t(), n);
  mpz_pow_ui(den.get_mpz_t(), base.get_den_mpz_t(), n);
  mpq_class out = negative ? mpq_class(den, num) : mpq_class(num, den);
  return Value::rational(out);
}

Value negate(const Value& a) {
  if (!a.is_numeric()) type_mismatch("unary -", a);
  return Value::rational(-a.to_rational());
}

Value unary_plus(const Value& a) {
  if (!a.is_numeric()) type_mismatch("unary +", a);
  return Value::rational(a.to_rational());
}

Value logical_not(const Value& a) { return Value::boolean(!a.truthy()); }

std::string_view compare_op_symbol(CompareOp op) {
  switch (op) {
    case CompareOp::kEq: return "==";
    case CompareOp::kNe: return "!=";
    case CompareOp::kLt: return "<";
    case CompareOp::kLe: return "<=";
    case CompareOp::kGt: return ">";
    case CompareOp::kGe: return ">=";
  }
  return "?";
}

bool compare_values(CompareOp op, const Value& a, const Value& b) {
  if (op == CompareOp::kEq) return a == b;
  if (op == CompareOp::kNe) return !(a == b);
  int c = 0;
  if (a.is_numeric() && b.is_numeric()) {
    c = cmp(a.to_rational(), b.to_rational());
  } else if (a.is_token() && b.is_token()) {
    c = a.token_text().compare(b.token_text());
  } else {
    type_mismatch(compare_op_symbol(op), a, &b);
  }
  switch (op) {
    case CompareOp::kLt: return c < 0;
    case CompareOp::kLe: return c <= 0;
    case CompareOp::kGt: return c > 0;
    case CompareOp::kGe: return c >= 0;
    default: return false;
  }
}

}  // namespace rasptk
