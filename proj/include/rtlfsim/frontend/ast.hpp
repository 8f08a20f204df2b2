// Syntax tree for the supported Verilog subset.
#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rtlfsim/diagnostic.hpp"
#include "rtlfsim/logic/logic_vector.hpp"

namespace rtlfsim::ast {

struct Expr;
using ExprPtr = std::unique_ptr<Expr>;

enum class ExprKind {
  Ident,      // name
  Number,     // literal, sized
  Unary,      // op, args[0]
  Binary,     // op, args[0..1]
  Ternary,    // args[0] ? args[1] : args[2]
  Concat,     // args
  Replicate,  // args[0] = count, args[1] = concat
  BitSelect,  // name[args[0]]
  PartSelect  // name[args[0]:args[1]]
};

struct Expr {
  ExprKind kind;
  SourceLoc loc;
  std::string name;  // Ident/BitSelect/PartSelect target, Unary/Binary operator text
  std::vector<ExprPtr> args;
  LogicVector literal;  // Number
  bool sized = false;   // Number: explicit width given

  Expr(ExprKind k, SourceLoc l) : kind(k), loc(std::move(l)) {}
};

struct Range {
  ExprPtr msb;
  ExprPtr lsb;
};

enum class PortDir { Input, Output, Inout };
enum class NetType { Wire, Reg };

struct NetDecl {
  SourceLoc loc;
  NetType type = NetType::Wire;
  std::optional<Range> range;
  std::string name;
  ExprPtr init;  // `wire w = expr;`
};

struct PortDecl {
  SourceLoc loc;
  PortDir dir = PortDir::Input;
  bool is_reg = false;
  std::optional<Range> range;
  std::string name;
};

struct ParamDecl {
  SourceLoc loc;
  bool local = false;
  std::string name;
  ExprPtr value;
};

struct ContAssign {
  SourceLoc loc;
  ExprPtr delay;
  ExprPtr lhs;
  ExprPtr rhs;
};

struct Stmt;
using StmtPtr = std::unique_ptr<Stmt>;

enum class StmtKind { Blocking, Nonblocking, If, Case, Block, Delay, Null };

struct CaseItem {
  SourceLoc loc;
  std::vector<ExprPtr> labels;  // empty = default
  StmtPtr body;
};

struct Stmt {
  StmtKind kind;
  SourceLoc loc;
  ExprPtr lhs;                 // assignments
  ExprPtr expr;                // assignment rhs / if condition / case selector / delay amount
  StmtPtr then_stmt;           // if / delay body
  StmtPtr else_stmt;           // if
  std::vector<StmtPtr> stmts;  // block
  std::vector<CaseItem> items; // case

  Stmt(StmtKind k, SourceLoc l) : kind(k), loc(std::move(l)) {}
};

enum class EdgeKind { Level, Posedge, Negedge };

struct SensItem {
  SourceLoc loc;
  EdgeKind edge = EdgeKind::Level;
  ExprPtr signal;
};

enum class ProcKind { Initial, Always };

struct ProcBlock {
  SourceLoc loc;
  ProcKind kind = ProcKind::Always;
  bool has_event_control = false;
  bool star = false;
  std::vector<SensItem> sensitivity;
  StmtPtr body;
};

struct Connection {
  SourceLoc loc;
  std::string name;  // empty for positional parameter overrides
  ExprPtr expr;      // null for `.port()`
};

struct Instance {
  SourceLoc loc;
  std::string module_name;
  std::string instance_name;
  std::vector<Connection> params;
  std::vector<Connection> ports;
};

struct Module {
  SourceLoc loc;
  std::string name;
  std::vector<std::string> port_order;
  std::vector<PortDecl> ports;
  std::vector<ParamDecl> params;
  std::vector<NetDecl> nets;
  std::vector<ContAssign> assigns;
  std::vector<ProcBlock> procs;
  std::vector<Instance> instances;
};

struct Ast {
  std::vector<Module> modules;

  const Module* find(const std::string& name) const {
    for (const auto& m : modules)
      if (m.name == name) return &m;
    return nullptr;
  }
};

}  // namespace rtlfsim::ast
