// Verilog subset parser.
//
// Accepted grammar (informal):
//
//   module NAME [#(parameter P = expr, ...)] [(ports)] ; items endmodule
//   ports        ANSI `input|output|inout [wire|reg] [range] name` or plain names
//   items        input/output/inout/wire/reg declarations with optional [msb:lsb]
//                wire w = expr;
//                parameter/localparam P = const-expr;
//                assign [#d] lvalue = expr;
//                initial stmt
//                always [@(...)|@*] stmt
//                MOD [#(.P(expr))] inst (.port(expr), ...);
//   stmt         begin ... end | if/else | case/endcase | #d stmt
//                lvalue = expr; | lvalue <= expr; | ;
//   expr         ?: || && | ^ ~^ & == != < <= > >= << >> + - * and unary
//                ~ ! - & | ^ ~& ~| ~^, {a,b}, {n{a}}, a[i], a[m:l], literals
//
// Comments (`//`, `/* */`) are skipped; `` `timescale `` lines are ignored.
// Anything else outside the subset is reported as an unsupported construct.
#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "rtlfsim/frontend/ast.hpp"

namespace rtlfsim {

struct SourceFile {
  std::string path;
  std::string text;
};

struct SourceUnit {
  std::vector<SourceFile> files;
  std::string top_module_name;
};

/// Reads each path from disk. Throws ConfigError when a file is unreadable.
SourceUnit load_sources(const std::vector<std::string>& paths, std::string top);

/// Parses every file and checks that identifiers resolve inside their module.
/// Throws CompileError.
ast::Ast parse(const SourceUnit& source);
ast::Ast parse_text(std::string_view text, const std::string& path = "<input>");

/// Deterministic indented dump used for golden tests.
std::string dump_ast(const ast::Ast& ast);
std::string dump_expr(const ast::Expr& e);

}  // namespace rtlfsim
