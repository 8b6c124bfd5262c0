#pragma once

#include <string_view>

#include "rasptk/graph.hpp"
#include "rasptk/surface.hpp"

namespace rasptk {

// Calls `entry_function` with no arguments and expands every helper call at
// its call site, producing the program DAG.
//
// Lambdas become closed ExprFns: captured parameters turn into literals and
// calls to single-expression helpers are inlined. Names a lambda cannot
// resolve are kept as free references for static validation to report.
//
// Errors: UnknownIdentifier, ArityError, KindError, CycleError (recursive
// helper expansion), UnsupportedConstruct.
ProgramGraph elaborate(const SurfaceAst& ast, std::string_view entry_function);

// parse_program + elaborate.
ProgramGraph compile_program(std::string_view text, std::string_view entry_function);

// The last zero-argument-callable `make_*` function in the program, or the
// last function when none is named that way. Empty when nothing qualifies.
std::string default_entry_function(const SurfaceAst& ast);

}  // namespace rasptk
