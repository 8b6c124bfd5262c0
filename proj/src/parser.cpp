#include <cctype>
#include <set>

#include "rasptk/surface.hpp"

namespace rasptk {

namespace {

// ---------------------------------------------------------------------------
// Lexer

enum class Tok { kName, kNumber, kString, kOp, kNewline, kIndent, kDedent, kEnd };

struct Lexeme {
  Tok kind = Tok::kEnd;
  std::string text;  // identifier, operator, or decoded string contents
  Value number;
  SourceSpan span;
};

const std::set<std::string, std::less<>> kThreeCharOps = {"**=", "//=", ">>=", "<<=", "..."};
const std::set<std::string, std::less<>> kTwoCharOps = {
    "**", "//", "==", "!=", "<=", ">=", "->", "+=", "-=", "*=", "/=",
    "%=", "&=", "|=", "^=", "<<", ">>", ":=", "@="};
constexpr std::string_view kOneCharOps = "()[]{}:,.;+-*/%<>=@&|^~";

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  std::vector<Lexeme> run() {
    indents_.push_back(0);
    while (pos_ < text_.size()) {
      if (at_line_start_) {
        if (handle_line_start()) continue;
      }
      char c = text_[pos_];
      if (c == '\n') {
        if (depth_ == 0) push(Tok::kNewline, "\n", here(), here());
        advance();
        at_line_start_ = true;
        continue;
      }
      if (c == ' ' || c == '\t' || c == '\r' || c == '\f') {
        advance();
        continue;
      }
      if (c == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
        continue;
      }
      if (c == '\\' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '\n') {
        advance();
        advance();
        continue;
      }
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        lex_name_or_string();
        continue;
      }
      if (std::isdigit(static_cast<unsigned char>(c)) ||
          (c == '.' && pos_ + 1 < text_.size() &&
           std::isdigit(static_cast<unsigned char>(text_[pos_ + 1])))) {
        lex_number();
        continue;
      }
      if (c == '\'' || c == '"') {
        lex_string(here());
        continue;
      }
      lex_operator();
    }
    SourceSpan end = here();
    if (!tokens_.empty() && tokens_.back().kind != Tok::kNewline) {
      push(Tok::kNewline, "\n", end, end);
    }
    while (indents_.size() > 1) {
      indents_.pop_back();
      push(Tok::kDedent, "", end, end);
    }
    push(Tok::kEnd, "", end, end);
    return std::move(tokens_);
  }

 private:
  SourceSpan here() const { return {line_, col_, line_, col_}; }

  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void push(Tok kind, std::string text, SourceSpan start, SourceSpan end) {
    Lexeme l;
    l.kind = kind;
    l.text = std::move(text);
    l.span = {start.line, start.column, end.line, end.column};
    tokens_.push_back(std::move(l));
  }

  [[noreturn]] void fail(const std::string& msg, SourceSpan at) const {
    throw Error(ErrorCode::kSyntaxError, msg, at);
  }

  // Measures indentation; returns true when the line was blank/comment-only
  // and has been consumed entirely.
  bool handle_line_start() {
    int width = 0;
    size_t p = pos_;
    while (p < text_.size() && (text_[p] == ' ' || text_[p] == '\t' || text_[p] == '\f')) {
      width = text_[p] == '\t' ? (width / 8 + 1) * 8 : width + 1;
      ++p;
    }
    bool blank = p >= text_.size() || text_[p] == '\n' || text_[p] == '#' ||
                 (text_[p] == '\r' && p + 1 < text_.size() && text_[p + 1] == '\n');
    if (blank) {
      while (pos_ < text_.size() && text_[pos_] != '\n') advance();
      if (pos_ < text_.size()) advance();
      return true;
    }
    while (pos_ < p) advance();
    at_line_start_ = false;
    if (depth_ > 0) return false;
    SourceSpan at = here();
    if (width > indents_.back()) {
      indents_.push_back(width);
      push(Tok::kIndent, "", at, at);
    } else {
      while (width < indents_.back()) {
        indents_.pop_back();
        push(Tok::kDedent, "", at, at);
      }
      if (width != indents_.back()) fail("inconsistent dedent", at);
    }
    return false;
  }

  void lex_name_or_string() {
    SourceSpan start = here();
    size_t b = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      advance();
    }
    std::string word(text_.substr(b, pos_ - b));
    if (pos_ < text_.size() && (text_[pos_] == '\'' || text_[pos_] == '"') && word.size() <= 2) {
      std::string lower;
      for (char c : word) lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      if (lower.find('f') != std::string::npos) {
        throw Error(ErrorCode::kUnsupportedConstruct, "f-string", start);
      }
      if (lower.find('b') != std::string::npos) {
        throw Error(ErrorCode::kUnsupportedConstruct, "bytes literal", start);
      }
      if (lower == "r" || lower == "u") {
        lex_string(start, lower == "r");
        return;
      }
    }
    push(Tok::kName, std::move(word), start, here());
  }

  void lex_number() {
    SourceSpan start = here();
    std::string digits;
    bool is_float = false;
    auto take_digits = [&] {
      while (pos_ < text_.size() &&
             (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
        if (text_[pos_] != '_') digits += text_[pos_];
        advance();
      }
    };
    if (text_[pos_] == '0' && pos_ + 1 < text_.size() &&
        std::isalpha(static_cast<unsigned char>(text_[pos_ + 1])) &&
        std::tolower(static_cast<unsigned char>(text_[pos_ + 1])) != 'e') {
      throw Error(ErrorCode::kUnsupportedConstruct, "non-decimal integer literal", start);
    }
    take_digits();
    if (pos_ < text_.size() && text_[pos_] == '.') {
      is_float = true;
      digits += '.';
      advance();
      take_digits();
    }
    long exponent = 0;
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      is_float = true;
      advance();
      std::string exp;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) {
        exp += text_[pos_];
        advance();
      }
      size_t before = exp.size();
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        exp += text_[pos_];
        advance();
      }
      if (exp.size() == before) fail("malformed exponent", start);
      exponent = std::stol(exp);
      if (exponent > 400 || exponent < -400) fail("exponent out of range", start);
    }
    if (pos_ < text_.size() &&
        (std::isalpha(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      if (text_[pos_] == 'j' || text_[pos_] == 'J') {
        throw Error(ErrorCode::kUnsupportedConstruct, "complex literal", start);
      }
      fail("invalid numeric literal", start);
    }
    Lexeme l;
    l.kind = Tok::kNumber;
    l.text = digits;
    mpq_class q = is_float ? parse_decimal(digits) : mpq_class(mpz_class(digits));
    if (exponent != 0) {
      mpz_class scale;
      mpz_ui_pow_ui(scale.get_mpz_t(), 10, static_cast<unsigned long>(exponent < 0 ? -exponent : exponent));
      q = exponent > 0 ? mpq_class(q * scale) : mpq_class(q / scale);
    }
    l.number = Value::rational(q);
    l.span = {start.line, start.column, line_, col_};
    tokens_.push_back(std::move(l));
  }

  void lex_string(SourceSpan start, bool raw = false) {
    char quote = text_[pos_];
    bool triple = pos_ + 2 < text_.size() && text_[pos_ + 1] == quote && text_[pos_ + 2] == quote;
    advance();
    if (triple) {
      advance();
      advance();
    }
    std::string out;
    while (true) {
      if (pos_ >= text_.size()) fail("unterminated string literal", start);
      char c = text_[pos_];
      if (!triple && c == '\n') fail("unterminated string literal", start);
      if (c == quote) {
        if (!triple) {
          advance();
          break;
        }
        if (pos_ + 2 < text_.size() + 0 && text_[pos_ + 1] == quote && text_[pos_ + 2] == quote) {
          advance();
          advance();
          advance();
          break;
        }
      }
      if (c == '\\' && !raw && pos_ + 1 < text_.size()) {
        advance();
        char n = text_[pos_];
        switch (n) {
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          case '\\': out += '\\'; break;
          case '\'': out += '\''; break;
          case '"': out += '"'; break;
          case '\n': break;
          default:
            out += '\\';
            out += n;
        }
        advance();
        continue;
      }
      out += c;
      advance();
    }
    push(Tok::kString, std::move(out), start, here());
  }

  void lex_operator() {
    SourceSpan start = here();
    std::string_view rest = text_.substr(pos_);
    std::string op;
    if (rest.size() >= 3 && kThreeCharOps.count(rest.substr(0, 3))) {
      op = std::string(rest.substr(0, 3));
    } else if (rest.size() >= 2 && kTwoCharOps.count(rest.substr(0, 2))) {
      op = std::string(rest.substr(0, 2));
    } else if (kOneCharOps.find(rest[0]) != std::string_view::npos) {
      op = std::string(1, rest[0]);
    } else {
      fail(std::string("unexpected character '") + rest[0] + "'", start);
    }
    for (size_t i = 0; i < op.size(); ++i) advance();
    if (op == "(" || op == "[" || op == "{") ++depth_;
    if (op == ")" || op == "]" || op == "}") {
      if (depth_ == 0) fail("unbalanced '" + op + "'", start);
      --depth_;
    }
    push(Tok::kOp, std::move(op), start, here());
  }

  std::string_view text_;
  size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
  int depth_ = 0;
  bool at_line_start_ = true;
  std::vector<int> indents_;
  std::vector<Lexeme> tokens_;
};

// ---------------------------------------------------------------------------
// Parser

const std::set<std::string, std::less<>> kConstructors = {"Select", "Aggregate", "SelectorWidth",
                                                          "Map", "SequenceMap"};

const std::set<std::string, std::less<>> kForbiddenStatementKeywords = {
    "for",    "while", "if",     "class",  "with",  "try",   "global", "nonlocal",
    "del",    "assert", "raise", "yield",  "async", "await", "break",  "continue",
    "except", "finally", "elif", "else",   "match"};

class Parser {
 public:
  explicit Parser(std::vector<Lexeme> toks) : toks_(std::move(toks)) {}

  SurfaceAst run() {
    SurfaceAst ast;
    while (!at(Tok::kEnd)) {
      if (at(Tok::kNewline)) {
        next();
        continue;
      }
      if (at(Tok::kIndent)) fail("unexpected indent");
      if (is_name("def")) {
        ast.functions.push_back(parse_def());
        continue;
      }
      reject_statement(/*top_level=*/true);
    }
    if (ast.functions.empty()) {
      throw Error(ErrorCode::kEmptyProgram, "no function definitions found",
                  SourceSpan{1, 1, 1, 1});
    }
    std::set<std::string> seen;
    for (const auto& fn : ast.functions) {
      if (!seen.insert(fn.name).second) {
        throw Error(ErrorCode::kUnsupportedConstruct,
                    "redefinition of function '" + fn.name + "'", fn.span);
      }
    }
    return ast;
  }

 private:
  const Lexeme& peek(size_t ahead = 0) const {
    size_t i = std::min(pos_ + ahead, toks_.size() - 1);
    return toks_[i];
  }
  bool at(Tok kind) const { return peek().kind == kind; }
  bool is_op(std::string_view op, size_t ahead = 0) const {
    return peek(ahead).kind == Tok::kOp && peek(ahead).text == op;
  }
  bool is_name(std::string_view name, size_t ahead = 0) const {
    return peek(ahead).kind == Tok::kName && peek(ahead).text == name;
  }
  const Lexeme& next() {
    const Lexeme& l = toks_[pos_];
    if (pos_ + 1 < toks_.size()) ++pos_;
    return l;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw Error(ErrorCode::kSyntaxError, msg, peek().span);
  }
  [[noreturn]] void unsupported(const std::string& what, SourceSpan span) const {
    throw Error(ErrorCode::kUnsupportedConstruct, what, span);
  }

  void expect_op(std::string_view op) {
    if (!is_op(op)) {
      fail("expected '" + std::string(op) + "' but found " + describe(peek()));
    }
    next();
  }

  std::string expect_name() {
    if (!at(Tok::kName) || is_keyword(peek().text)) {
      fail("expected an identifier but found " + describe(peek()));
    }
    return next().text;
  }

  static bool is_keyword(std::string_view s) {
    static const std::set<std::string, std::less<>> kw = {
        "def",   "return", "lambda", "if",    "else",  "elif", "and",   "or",
        "not",   "in",     "is",     "None",  "True",  "False", "for",  "while",
        "import", "from",  "class",  "pass",  "with",  "try",  "except", "finally",
        "global", "nonlocal", "del", "assert", "raise", "yield", "async", "await",
        "break", "continue", "as"};
    return kw.count(s) > 0;
  }

  static std::string describe(const Lexeme& l) {
    switch (l.kind) {
      case Tok::kName: return "'" + l.text + "'";
      case Tok::kNumber: return "number";
      case Tok::kString: return "string literal";
      case Tok::kOp: return "'" + l.text + "'";
      case Tok::kNewline: return "end of line";
      case Tok::kIndent: return "indent";
      case Tok::kDedent: return "dedent";
      case Tok::kEnd: return "end of input";
    }
    return "?";
  }

  // Raises the most specific error for a statement outside the whitelist.
  [[noreturn]] void reject_statement(bool top_level) {
    const Lexeme& l = peek();
    if (l.kind == Tok::kName) {
      if (l.text == "import" || l.text == "from") unsupported("import", l.span);
      if (kForbiddenStatementKeywords.count(l.text)) unsupported(l.text + " statement", l.span);
      if (l.text == "def") unsupported("nested function definition", l.span);
      if (l.text == "lambda") unsupported("expression statement", l.span);
    }
    if (l.kind == Tok::kOp && l.text == "@") unsupported("decorator", l.span);
    if (top_level) {
      unsupported("top-level statement (only function definitions are allowed)", l.span);
    }
    unsupported("expression statement", l.span);
  }

  SourceSpan span_from(SourceSpan start) const {
    const Lexeme& prev = toks_[pos_ == 0 ? 0 : pos_ - 1];
    return {start.line, start.column, prev.span.end_line, prev.span.end_column};
  }

  // Annotations are parsed loosely and discarded: dotted names with optional
  // subscripts, e.g. rasp.SOp, Optional[int], Callable[[Value], Value].
  void skip_annotation() {
    int depth = 0;
    while (true) {
      if (at(Tok::kEnd) || at(Tok::kNewline)) fail("unterminated annotation");
      if (depth == 0 && (is_op(",") || is_op("=") || is_op(")") || is_op(":"))) return;
      if (is_op("[") || is_op("(")) ++depth;
      if (is_op("]") || is_op(")")) --depth;
      next();
    }
  }

  FunctionDef parse_def() {
    SourceSpan start = next().span;  // def
    FunctionDef fn;
    fn.name = expect_name();
    expect_op("(");
    bool keyword_only = false;
    while (!is_op(")")) {
      if (is_op("*")) {
        SourceSpan star = next().span;
        if (at(Tok::kName)) unsupported("*args parameter", star);
        keyword_only = true;
      } else if (is_op("**")) {
        unsupported("**kwargs parameter", peek().span);
      } else {
        Param p;
        p.span = peek().span;
        p.name = expect_name();
        p.keyword_only = keyword_only;
        if (is_op(":")) {
          next();
          skip_annotation();
        }
        if (is_op("=")) {
          next();
          p.default_value = parse_default();
        }
        for (const auto& other : fn.params) {
          if (other.name == p.name) {
            throw Error(ErrorCode::kSyntaxError, "duplicate parameter '" + p.name + "'", p.span);
          }
        }
        fn.params.push_back(std::move(p));
      }
      if (!is_op(",")) break;
      next();
    }
    expect_op(")");
    if (is_op("->")) {
      next();
      skip_annotation();
    }
    expect_op(":");
    fn.span = span_from(start);
    if (at(Tok::kNewline)) {
      next();
      if (!at(Tok::kIndent)) fail("expected an indented block after 'def " + fn.name + "'");
      next();
      while (!at(Tok::kDedent) && !at(Tok::kEnd)) {
        if (at(Tok::kNewline)) {
          next();
          continue;
        }
        parse_statement(&fn);
      }
      if (at(Tok::kDedent)) next();
    } else {
      parse_statement(&fn);
    }
    if (fn.body.empty() || fn.body.back().kind != Statement::Kind::kReturn) {
      throw Error(ErrorCode::kSyntaxError, "function '" + fn.name + "' must end with a return",
                  fn.span);
    }
    return fn;
  }

  AstPtr parse_default() {
    AstPtr e = parse_test();
    bool ok = e->kind == AstKind::kLiteral ||
              (e->kind == AstKind::kUnary && e->operands[0]->kind == AstKind::kLiteral) ||
              (e->kind == AstKind::kRaspMember && (e->name == "tokens" || e->name == "indices"));
    if (!ok) unsupported("non-literal default parameter value", e->span);
    return e;
  }

  void parse_statement(FunctionDef* fn) {
    const Lexeme& l = peek();
    if (!fn->body.empty() && fn->body.back().kind == Statement::Kind::kReturn) {
      unsupported("statement after return", l.span);
    }
    if (is_name("return")) {
      SourceSpan start = next().span;
      if (at(Tok::kNewline)) unsupported("return without a value", start);
      Statement s;
      s.kind = Statement::Kind::kReturn;
      s.value = parse_test();
      if (is_op(",")) unsupported("tuple return", peek().span);
      s.span = span_from(start);
      fn->body.push_back(std::move(s));
      end_statement();
      return;
    }
    if (is_name("pass")) {
      next();
      end_statement();
      return;
    }
    if (l.kind == Tok::kString) {
      // Docstring or bare string: no effect.
      parse_test();
      end_statement();
      return;
    }
    if (l.kind == Tok::kName && !is_keyword(l.text)) {
      if (is_op("=", 1) || is_op(":", 1)) {
        Statement s;
        s.kind = Statement::Kind::kAssign;
        s.span = l.span;
        s.target = next().text;
        if (is_op(":")) {
          next();
          skip_annotation();
        }
        expect_op("=");
        s.value = parse_test();
        if (is_op("=")) unsupported("chained assignment", peek().span);
        if (is_op(",")) unsupported("tuple assignment", peek().span);
        s.span = span_from(s.span);
        fn->body.push_back(std::move(s));
        end_statement();
        return;
      }
      if (is_op(",", 1)) unsupported("tuple assignment", l.span);
      const Lexeme& op = peek(1);
      if (op.kind == Tok::kOp && op.text.size() >= 2 && op.text.back() == '=' &&
          op.text != "==" && op.text != "<=" && op.text != ">=" && op.text != "!=") {
        unsupported("augmented assignment (mutation)", op.span);
      }
      // Attribute or subscript assignment: scan the rest of the line.
      size_t depth = 0;
      for (size_t i = 1;; ++i) {
        const Lexeme& t = peek(i);
        if (t.kind == Tok::kNewline || t.kind == Tok::kEnd) break;
        if (t.kind == Tok::kOp) {
          if (t.text == "(" || t.text == "[" || t.text == "{") ++depth;
          if (t.text == ")" || t.text == "]" || t.text == "}") --depth;
          if (depth == 0 && t.text == "=") unsupported("mutation of an attribute or element", t.span);
        }
      }
    }
    reject_statement(/*top_level=*/false);
  }

  void end_statement() {
    if (is_op(";")) unsupported("multiple statements on one line", peek().span);
    if (at(Tok::kNewline)) {
      next();
      return;
    }
    if (at(Tok::kDedent) || at(Tok::kEnd)) return;
    fail("unexpected " + describe(peek()) + " after statement");
  }

  // test: lambda | or_test ['if' or_test 'else' test]
  AstPtr parse_test() {
    if (is_name("lambda")) return parse_lambda();
    AstPtr value = parse_or();
    if (is_name("if")) {
      next();
      AstPtr test = parse_or();
      if (!is_name("else")) fail("expected 'else' in conditional expression");
      next();
      AstPtr other = parse_test();
      auto e = std::make_shared<AstExpr>();
      e->kind = AstKind::kCond;
      e->span = {value->span.line, value->span.column, other->span.end_line,
                 other->span.end_column};
      e->operands = {value, test, other};
      return e;
    }
    return value;
  }

  AstPtr parse_lambda() {
    SourceSpan start = next().span;
    auto e = std::make_shared<AstExpr>();
    e->kind = AstKind::kLambda;
    while (!is_op(":")) {
      if (is_op("*") || is_op("**")) unsupported("variadic lambda parameter", peek().span);
      std::string name = expect_name();
      if (is_op("=")) unsupported("lambda parameter default", peek().span);
      for (const auto& p : e->params) {
        if (p == name) fail("duplicate lambda parameter '" + name + "'");
      }
      e->params.push_back(std::move(name));
      if (!is_op(",")) break;
      next();
    }
    expect_op(":");
    e->operands = {parse_test()};
    e->span = span_from(start);
    return e;
  }

  AstPtr parse_or() {
    AstPtr first = parse_and();
    if (!is_name("or")) return first;
    std::vector<AstPtr> parts = {first};
    while (is_name("or")) {
      next();
      parts.push_back(parse_and());
    }
    return bool_op(ExprOp::kOr, std::move(parts));
  }

  AstPtr parse_and() {
    AstPtr first = parse_not();
    if (!is_name("and")) return first;
    std::vector<AstPtr> parts = {first};
    while (is_name("and")) {
      next();
      parts.push_back(parse_not());
    }
    return bool_op(ExprOp::kAnd, std::move(parts));
  }

  AstPtr bool_op(ExprOp op, std::vector<AstPtr> parts) {
    auto e = std::make_shared<AstExpr>();
    e->kind = AstKind::kBoolOp;
    e->op = op;
    e->span = {parts.front()->span.line, parts.front()->span.column, parts.back()->span.end_line,
               parts.back()->span.end_column};
    e->operands = std::move(parts);
    return e;
  }

  AstPtr parse_not() {
    if (is_name("not")) {
      SourceSpan start = next().span;
      AstPtr inner = parse_not();
      return unary(ExprOp::kNot, inner, start);
    }
    return parse_comparison();
  }

  AstPtr unary(ExprOp op, AstPtr inner, SourceSpan start) {
    auto e = std::make_shared<AstExpr>();
    e->kind = AstKind::kUnary;
    e->op = op;
    e->span = {start.line, start.column, inner->span.end_line, inner->span.end_column};
    e->operands = {std::move(inner)};
    return e;
  }

  bool comparison_ahead(CompareOp* op, int* width) const {
    static const std::pair<std::string_view, CompareOp> kOps[] = {
        {"==", CompareOp::kEq}, {"!=", CompareOp::kNe}, {"<", CompareOp::kLt},
        {"<=", CompareOp::kLe}, {">", CompareOp::kGt},  {">=", CompareOp::kGe}};
    for (const auto& [text, value] : kOps) {
      if (is_op(text)) {
        *op = value;
        *width = 1;
        return true;
      }
    }
    if (is_name("is")) {
      bool negated = is_name("not", 1);
      *op = negated ? CompareOp::kNe : CompareOp::kEq;
      *width = negated ? 2 : 1;
      return true;
    }
    if (is_name("in") || (is_name("not") && is_name("in", 1))) {
      unsupported("membership test ('in')", peek().span);
    }
    if (is_op("<>")) fail("invalid operator '<>'");
    return false;
  }

  AstPtr parse_comparison() {
    AstPtr first = parse_bitwise();
    CompareOp op;
    int width = 0;
    if (!comparison_ahead(&op, &width)) return first;
    auto e = std::make_shared<AstExpr>();
    e->kind = AstKind::kCompare;
    e->operands = {first};
    while (comparison_ahead(&op, &width)) {
      for (int i = 0; i < width; ++i) next();
      e->compare_ops.push_back(op);
      e->operands.push_back(parse_bitwise());
    }
    e->span = {first->span.line, first->span.column, e->operands.back()->span.end_line,
               e->operands.back()->span.end_column};
    return e;
  }

  AstPtr parse_bitwise() {
    AstPtr e = parse_arith();
    for (std::string_view op : {"|", "^", "&", "<<", ">>"}) {
      if (is_op(op)) unsupported("bitwise operator '" + std::string(op) + "'", peek().span);
    }
    return e;
  }

  AstPtr binary(ExprOp op, AstPtr a, AstPtr b) {
    auto e = std::make_shared<AstExpr>();
    e->kind = AstKind::kBinary;
    e->op = op;
    e->span = {a->span.line, a->span.column, b->span.end_line, b->span.end_column};
    e->operands = {std::move(a), std::move(b)};
    return e;
  }

  AstPtr parse_arith() {
    AstPtr left = parse_term();
    while (is_op("+") || is_op("-")) {
      ExprOp op = next().text == "+" ? ExprOp::kAdd : ExprOp::kSub;
      left = binary(op, left, parse_term());
    }
    return left;
  }

  AstPtr parse_term() {
    AstPtr left = parse_factor();
    while (true) {
      ExprOp op;
      if (is_op("*")) op = ExprOp::kMul;
      else if (is_op("/")) op = ExprOp::kDiv;
      else if (is_op("//")) op = ExprOp::kFloorDiv;
      else if (is_op("%")) op = ExprOp::kMod;
      else if (is_op("@")) unsupported("matrix multiplication operator", peek().span);
      else break;
      next();
      left = binary(op, left, parse_factor());
    }
    return left;
  }

  AstPtr parse_factor() {
    if (is_op("-") || is_op("+")) {
      const Lexeme& l = next();
      ExprOp op = l.text == "-" ? ExprOp::kNeg : ExprOp::kPos;
      SourceSpan start = l.span;
      AstPtr inner = parse_factor();
      return unary(op, inner, start);
    }
    if (is_op("~")) unsupported("bitwise operator '~'", peek().span);
    return parse_power();
  }

  AstPtr parse_power() {
    AstPtr base = parse_primary();
    if (is_op("**")) {
      next();
      return binary(ExprOp::kPow, base, parse_factor());
    }
    return base;
  }

  AstPtr parse_primary() {
    AstPtr e = parse_atom();
    while (true) {
      if (is_op("(")) {
        e = parse_call(e);
      } else if (is_op(".")) {
        e = parse_attribute(e);
      } else if (is_op("[")) {
        unsupported("subscript", peek().span);
      } else {
        return e;
      }
    }
  }

  AstPtr parse_call(AstPtr callee) {
    next();  // (
    auto e = std::make_shared<AstExpr>();
    e->kind = AstKind::kCall;
    e->operands = {callee};
    while (!is_op(")")) {
      if (is_op("*") || is_op("**")) unsupported("argument unpacking", peek().span);
      if (at(Tok::kName) && is_op("=", 1)) {
        KeywordArg kw;
        kw.span = peek().span;
        kw.name = next().text;
        next();
        kw.value = parse_test();
        for (const auto& other : e->keywords) {
          if (other.name == kw.name) {
            throw Error(ErrorCode::kSyntaxError, "repeated keyword argument '" + kw.name + "'",
                        kw.span);
          }
        }
        e->keywords.push_back(std::move(kw));
      } else {
        if (!e->keywords.empty()) fail("positional argument follows keyword argument");
        AstPtr arg = parse_test();
        if (is_name("for")) unsupported("generator expression", peek().span);
        e->operands.push_back(std::move(arg));
      }
      if (!is_op(",")) break;
      next();
    }
    expect_op(")");
    e->span = span_from(callee->span);
    return e;
  }

  AstPtr parse_attribute(AstPtr base) {
    next();  // .
    SourceSpan member_span = peek().span;
    std::string member = expect_name();
    SourceSpan full = {base->span.line, base->span.column, member_span.end_line,
                       member_span.end_column};
    if (member == "named") {
      if (!is_op("(")) unsupported("'.named' without a call", member_span);
      next();
      if (!at(Tok::kString)) {
        unsupported(".named() with a non-literal label", peek().span);
      }
      std::string label = next().text;
      expect_op(")");
      auto e = std::make_shared<AstExpr>();
      e->kind = AstKind::kNamed;
      e->name = std::move(label);
      e->operands = {base};
      e->span = span_from(base->span);
      return e;
    }
    if (base->kind == AstKind::kName && base->name == "rasp") {
      if (member == "Comparison") {
        expect_op(".");
        SourceSpan cmp_span = peek().span;
        std::string cmp_name = expect_name();
        Comparison cmp;
        if (!comparison_from_name(cmp_name, &cmp)) {
          unsupported("rasp.Comparison." + cmp_name, cmp_span);
        }
        auto e = std::make_shared<AstExpr>();
        e->kind = AstKind::kComparison;
        e->comparison = cmp;
        e->span = span_from(base->span);
        return e;
      }
      if (member == "tokens" || member == "indices" || kConstructors.count(member) ||
          member == "numerical" || member == "categorical") {
        auto e = std::make_shared<AstExpr>();
        e->kind = AstKind::kRaspMember;
        e->name = member;
        e->span = full;
        return e;
      }
      unsupported("rasp." + member, full);
    }
    std::string base_text = base->kind == AstKind::kName ? base->name : "<expression>";
    unsupported("attribute access '" + base_text + "." + member + "'", full);
  }

  AstPtr parse_atom() {
    const Lexeme& l = peek();
    auto e = std::make_shared<AstExpr>();
    e->span = l.span;
    switch (l.kind) {
      case Tok::kNumber:
        e->kind = AstKind::kLiteral;
        e->literal = next().number;
        return e;
      case Tok::kString: {
        e->kind = AstKind::kLiteral;
        std::string text = next().text;
        while (at(Tok::kString)) text += next().text;  // implicit concatenation
        e->literal = Value::token(std::move(text));
        e->span = span_from(l.span);
        return e;
      }
      case Tok::kName: {
        if (l.text == "None" || l.text == "True" || l.text == "False") {
          e->kind = AstKind::kLiteral;
          e->literal = l.text == "None"  ? Value::null()
                       : l.text == "True" ? Value::boolean(true)
                                          : Value::boolean(false);
          next();
          return e;
        }
        if (l.text == "lambda") return parse_lambda();
        if (is_keyword(l.text)) {
          if (l.text == "import" || l.text == "from") unsupported("import", l.span);
          if (l.text == "for") unsupported("comprehension", l.span);
          fail("unexpected keyword '" + l.text + "'");
        }
        e->kind = AstKind::kName;
        e->name = next().text;
        return e;
      }
      case Tok::kOp:
        if (l.text == "(") {
          next();
          if (is_op(")")) unsupported("tuple literal", l.span);
          AstPtr inner = parse_test();
          if (is_op(",")) unsupported("tuple literal", l.span);
          if (is_name("for")) unsupported("generator expression", peek().span);
          expect_op(")");
          return inner;
        }
        if (l.text == "[") {
          int depth = 0;
          for (size_t k = 0; peek(k).kind != Tok::kEnd && peek(k).kind != Tok::kNewline; ++k) {
            const Lexeme& t = peek(k);
            if (t.kind == Tok::kOp && (t.text == "[" || t.text == "(" || t.text == "{")) ++depth;
            if (t.kind == Tok::kOp && (t.text == "]" || t.text == ")" || t.text == "}") && --depth == 0) break;
            if (depth == 1 && t.kind == Tok::kName && t.text == "for") unsupported("list comprehension", l.span);
          }
          unsupported("list literal", l.span);
        }
        if (l.text == "{") unsupported("dict or set literal", l.span);
        if (l.text == "...") unsupported("ellipsis", l.span);
        break;
      default:
        break;
    }
    fail("unexpected " + describe(l));
  }

  std::vector<Lexeme> toks_;
  size_t pos_ = 0;
};

int count_expr_sites(const AstExpr& e) {
  int n = 0;
  if (e.kind == AstKind::kRaspMember &&
      (e.name == "tokens" || e.name == "indices" || kConstructors.count(e.name))) {
    // Constructors are counted once per call site; a bare constructor
    // reference without a call is not a call site.
    n = (e.name == "tokens" || e.name == "indices") ? 1 : 0;
  }
  if (e.kind == AstKind::kCall && e.operands[0]->kind == AstKind::kRaspMember &&
      kConstructors.count(e.operands[0]->name)) {
    n += 1;
  }
  for (const auto& child : e.operands) n += count_expr_sites(*child);
  for (const auto& kw : e.keywords) n += count_expr_sites(*kw.value);
  return n;
}

}  // namespace

const FunctionDef* SurfaceAst::find(std::string_view name) const {
  for (const auto& fn : functions) {
    if (fn.name == name) return &fn;
  }
  return nullptr;
}

SurfaceAst parse_program(std::string_view text) {
  Lexer lexer(text);
  Parser parser(lexer.run());
  return parser.run();
}

int count_call_sites(const SurfaceAst& ast) {
  int n = 0;
  for (const auto& fn : ast.functions) {
    for (const auto& p : fn.params) {
      if (p.default_value) n += count_expr_sites(*p.default_value);
    }
    for (const auto& s : fn.body) n += count_expr_sites(*s.value);
  }
  return n;
}

}  // namespace rasptk
