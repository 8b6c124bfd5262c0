#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rasptk/error.hpp"
#include "rasptk/expr.hpp"
#include "rasptk/graph.hpp"
#include "rasptk/value.hpp"

namespace rasptk {

// Parsed form of the embedded-DSL code style candidate programs are written
// in: a list of `def` blocks made of assignments and one trailing return.

enum class AstKind {
  kName,
  kLiteral,
  kRaspMember,  // rasp.tokens, rasp.indices, rasp.Select, ...
  kComparison,  // rasp.Comparison.XX
  kCall,        // operands[0] is the callee, the rest are positional args
  kNamed,       // operands[0].named("label")
  kLambda,      // operands[0] is the body
  kUnary,
  kBinary,
  kCompare,
  kBoolOp,
  kCond,  // operands: then, test, else
};

struct AstExpr;
using AstPtr = std::shared_ptr<const AstExpr>;

struct KeywordArg {
  std::string name;
  AstPtr value;
  SourceSpan span;
};

struct AstExpr {
  AstKind kind = AstKind::kLiteral;
  SourceSpan span;
  std::string name;  // identifier, rasp member, or .named() label
  Value literal;
  Comparison comparison = Comparison::kTrue;
  ExprOp op = ExprOp::kLiteral;  // unary, binary and boolean operators
  std::vector<CompareOp> compare_ops;
  std::vector<AstPtr> operands;
  std::vector<KeywordArg> keywords;
  std::vector<std::string> params;  // lambda parameters
};

struct Param {
  std::string name;
  AstPtr default_value;  // null when absent
  bool keyword_only = false;
  SourceSpan span;
};

struct Statement {
  enum class Kind { kAssign, kReturn };
  Kind kind = Kind::kAssign;
  std::string target;
  AstPtr value;
  SourceSpan span;
};

struct FunctionDef {
  std::string name;
  std::vector<Param> params;
  std::vector<Statement> body;
  SourceSpan span;
};

struct SurfaceAst {
  std::vector<FunctionDef> functions;

  const FunctionDef* find(std::string_view name) const;
};

// Errors: SyntaxError, UnsupportedConstruct (naming the construct),
// EmptyProgram. Every error carries a source span.
SurfaceAst parse_program(std::string_view text);

// Number of RASP constructor call sites (Select, Aggregate, SelectorWidth,
// Map, SequenceMap) plus textual references to rasp.tokens / rasp.indices.
int count_call_sites(const SurfaceAst& ast);

// Canonical text for a graph as a single zero-argument function.
std::string print_program(const ProgramGraph& graph,
                          std::string_view function_name = "make_program");

// "lambda x: (x % 2)"
std::string print_function(const ExprFn& fn);

}  // namespace rasptk
