// Elaborated design: a flat RTL netlist plus behavioral processes.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rtlfsim/diagnostic.hpp"
#include "rtlfsim/logic/logic_vector.hpp"
#include "rtlfsim/logic/primitive.hpp"

namespace rtlfsim {

using NetId = uint32_t;
using NodeId = uint32_t;
using ProcessId = uint32_t;
inline constexpr uint32_t kNoId = UINT32_MAX;

enum class NetKind : uint8_t { Wire, Reg };

struct Net {
  NetId id = kNoId;
  std::string path;
  uint32_t width = 1;
  NetKind kind = NetKind::Wire;
  /// Created by elaboration (`$tmp<N>`), not declared in source.
  bool internal = false;
};

struct NetlistNode {
  NodeId id = kNoId;
  PrimitiveKind kind = PrimitiveKind::Buf;
  std::vector<NetId> inputs;
  NetId output = kNoId;
  uint64_t delay = 0;
  PrimitiveParams params;
  SourceLoc loc;
};

// ---- behavioral programs --------------------------------------------------
//
// Process bodies compile to straight-line code with forward jumps only, so
// one activation always terminates. A suspended process is fully described
// by its program counter.

struct ExprNode {
  enum class Tag : uint8_t { Net, Const, Op };
  Tag tag = Tag::Const;
  NetId net = kNoId;
  PrimitiveKind op = PrimitiveKind::Buf;
  PrimitiveParams params;  // Op params, or Const value in params.value
  std::vector<uint32_t> args;
  uint32_t width = 1;
};

/// One slice of an assignment target. Targets are listed MSB first.
struct LvalPart {
  NetId net = kNoId;
  uint32_t lsb = 0;
  uint32_t width = 1;
};

enum class OpCode : uint8_t {
  Assign,       // lhs = expr (blocking)
  AssignNba,    // lhs <= expr
  JumpIfFalse,  // if truth(expr) != 1 goto target
  JumpIfCaseEq, // if expr === expr2 goto target
  Jump,         // goto target
  Delay,        // suspend for `delay` ticks, resume at pc + 1
  End,
};

struct Instr {
  OpCode op = OpCode::End;
  uint32_t expr = kNoId;
  uint32_t expr2 = kNoId;
  uint32_t target = 0;
  uint64_t delay = 0;
  std::vector<LvalPart> lhs;
  SourceLoc loc;
};

struct Program {
  std::vector<ExprNode> exprs;
  std::vector<Instr> code;
};

enum class TriggerKind : uint8_t { Posedge, Negedge, Level };

struct Trigger {
  TriggerKind kind = TriggerKind::Level;
  NetId net = kNoId;
};

enum class ProcessKind : uint8_t { Initial, Always };

struct Process {
  ProcessId id = kNoId;
  ProcessKind kind = ProcessKind::Always;
  std::string scope;  // instance path
  /// Empty for initial blocks and delay-driven always blocks.
  std::vector<Trigger> triggers;
  bool star = false;
  Program body;
  std::vector<NetId> read_set;   // sorted, unique
  std::vector<NetId> write_set;  // sorted, unique
  SourceLoc loc;
};

struct Design {
  std::string top;
  std::vector<Net> nets;
  std::vector<NetlistNode> nodes;
  std::vector<Process> processes;
  std::vector<NetId> inputs;   // top-level input ports, declaration order
  std::vector<NetId> outputs;  // top-level output ports, declaration order
  std::map<std::string, NetId> name_table;

  // Derived by finalize().
  std::vector<std::vector<NodeId>> fanout;           // net -> consuming nodes
  std::vector<std::vector<ProcessId>> sensitive;     // net -> processes triggered by it
  std::vector<NodeId> driver;                        // net -> driving node or kNoId
  std::vector<std::vector<ProcessId>> writers;       // net -> processes writing it

  /// Net paths are relative to the top module (`x`, `u1.x`); a leading
  /// `top.` is also accepted.
  std::optional<NetId> find_net(std::string_view path) const;
  const Net& net(NetId id) const { return nets[id]; }

  void finalize();
};

struct WireInfo {
  std::string path;
  uint32_t width;
};

/// Nets eligible for wire faults, lexicographic by path. Elaboration-created
/// nets are included only with `include_internal`.
std::vector<WireInfo> list_wires(const Design& design, bool include_internal = false);

}  // namespace rtlfsim
