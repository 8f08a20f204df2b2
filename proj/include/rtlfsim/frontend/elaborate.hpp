// Hierarchy flattening and lowering into the design IR.
//
// Expression widths follow Verilog's context rule restricted to unsigned
// arithmetic: operands of bitwise, arithmetic and ?: operators are
// zero-extended to max(target width, operand widths); comparison, reduction
// and logical operators are self-determined. Unsized literals take the
// minimal width that holds their value. An assignment whose right-hand side
// is wider than its target is a width-mismatch error, except that products
// are truncated to the target.
#pragma once

#include <string>

#include "rtlfsim/frontend/ast.hpp"
#include "rtlfsim/frontend/design.hpp"
#include "rtlfsim/frontend/parser.hpp"

namespace rtlfsim {

/// Throws CompileError.
Design elaborate(const ast::Ast& ast, const std::string& top);

/// parse + elaborate.
Design build_design(const SourceUnit& source);

}  // namespace rtlfsim
