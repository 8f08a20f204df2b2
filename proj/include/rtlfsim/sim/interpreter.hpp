// Behavioral process interpreter, shared by the good-machine kernel and the
// fault engine. The caller supplies how nets are read and where writes go.
#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "rtlfsim/frontend/design.hpp"

namespace rtlfsim {

enum class ProcMode : uint8_t { Ready, Waiting, Delayed, Done };

struct ProcState {
  ProcMode mode = ProcMode::Ready;
  uint32_t pc = 0;
  uint64_t wake_time = 0;

  friend bool operator==(const ProcState&, const ProcState&) = default;
};

struct ExecResult {
  ProcMode mode = ProcMode::Done;
  uint32_t pc = 0;
  uint64_t delay = 0;  // Delayed only
};

/// Initial state of a process at time zero.
inline ProcState initial_proc_state(const Process& p) {
  ProcState s;
  s.mode = p.triggers.empty() ? ProcMode::Ready : ProcMode::Waiting;
  return s;
}

/// Evaluates an expression of a program. `read(net)` returns the value the
/// expression sees for a net.
template <class Read>
LogicVector eval_expr(const Program& prog, uint32_t index, Read&& read) {
  const ExprNode& n = prog.exprs[index];
  switch (n.tag) {
    case ExprNode::Tag::Net: return read(n.net);
    case ExprNode::Tag::Const: return n.params.value;
    case ExprNode::Tag::Op: break;
  }
  if (n.args.size() <= 3) {
    LogicVector tmp[3];
    const LogicVector* ptrs[3];
    for (size_t i = 0; i < n.args.size(); ++i) {
      tmp[i] = eval_expr(prog, n.args[i], read);
      ptrs[i] = &tmp[i];
    }
    return eval_primitive(n.op, std::span<const LogicVector* const>(ptrs, n.args.size()), n.params);
  }
  std::vector<LogicVector> tmp;
  tmp.reserve(n.args.size());
  for (uint32_t a : n.args) tmp.push_back(eval_expr(prog, a, read));
  std::vector<const LogicVector*> ptrs;
  for (const auto& v : tmp) ptrs.push_back(&v);
  return eval_primitive(n.op, std::span<const LogicVector* const>(ptrs), n.params);
}

/// Runs one activation of `proc` from `pc` until it suspends or finishes.
///
/// `read(net)` yields the phase-start value of a net; blocking writes are
/// layered over it for the rest of the activation. `blocking(net, lsb, v)`
/// and `nonblocking(net, lsb, v)` receive every write.
template <class Read, class Blocking, class Nonblocking>
ExecResult execute_process(const Process& proc, uint32_t pc, Read&& read, Blocking&& blocking,
                           Nonblocking&& nonblocking) {
  struct Write {
    NetId net;
    uint32_t lsb;
    LogicVector value;
  };
  std::vector<Write> overlay;
  auto view = [&](NetId net) -> LogicVector {
    bool hit = false;
    for (const auto& w : overlay) hit |= w.net == net;
    if (!hit) return read(net);
    LogicVector v = read(net);
    for (const auto& w : overlay)
      if (w.net == net) v.assign_slice(w.lsb, w.value);
    return v;
  };
  const Program& prog = proc.body;
  const bool restart = proc.kind == ProcessKind::Always && proc.triggers.empty();
  uint64_t guard = 0;
  for (;;) {
    if (++guard > (uint64_t{1} << 32)) throw InternalError("process activation does not terminate");
    const Instr& in = prog.code[pc];
    switch (in.op) {
      case OpCode::Assign:
      case OpCode::AssignNba: {
        LogicVector v = eval_expr(prog, in.expr, view);
        uint32_t off = v.width();
        for (const auto& part : in.lhs) {
          off -= part.width;
          LogicVector slice = v.slice(off, part.width);
          if (in.op == OpCode::Assign) {
            overlay.push_back({part.net, part.lsb, slice});
            blocking(part.net, part.lsb, std::move(slice));
          } else {
            nonblocking(part.net, part.lsb, std::move(slice));
          }
        }
        ++pc;
        break;
      }
      case OpCode::JumpIfFalse:
        pc = truth_value(eval_expr(prog, in.expr, view)) == LogicBit::One ? pc + 1 : in.target;
        break;
      case OpCode::JumpIfCaseEq:
        pc = eval_expr(prog, in.expr, view) == eval_expr(prog, in.expr2, view) ? in.target : pc + 1;
        break;
      case OpCode::Jump: pc = in.target; break;
      case OpCode::Delay: return {ProcMode::Delayed, pc + 1, in.delay};
      case OpCode::End:
        if (restart) {
          pc = 0;
          break;
        }
        return {proc.kind == ProcessKind::Initial ? ProcMode::Done : ProcMode::Waiting, 0, 0};
    }
  }
}

/// Edge and level matching on a net transition. Edges look at bit 0.
bool trigger_matches(TriggerKind kind, const LogicVector& old_value, const LogicVector& new_value);

}  // namespace rtlfsim
