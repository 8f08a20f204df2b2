#include "rtlfsim/frontend/elaborate.hpp"

#include <algorithm>
#include <bit>
#include <functional>
#include <map>
#include <set>

namespace rtlfsim {
namespace {

using ast::Expr;
using ast::ExprKind;

[[noreturn]] void fail(const SourceLoc& loc, const std::string& msg) { throw CompileError(loc, msg); }

uint32_t minimal_bits(uint64_t v) { return v == 0 ? 1 : static_cast<uint32_t>(64 - std::countl_zero(v)); }

// Typed expression tree: the lowered form of an AST expression, every node
// with an exact width.
struct TExpr {
  enum class Tag { Net, Const, Op };
  Tag tag = Tag::Const;
  NetId net = kNoId;
  LogicVector value;
  PrimitiveKind op = PrimitiveKind::Buf;
  PrimitiveParams params;
  std::vector<TExpr> args;
  uint32_t width = 1;
};

TExpr t_const(LogicVector v) {
  TExpr t;
  t.width = v.width();
  t.value = std::move(v);
  return t;
}

TExpr t_zero(uint32_t w) { return t_const(LogicVector(w, LogicBit::Zero)); }

TExpr t_op(PrimitiveKind kind, std::vector<TExpr> args, PrimitiveParams params = {}) {
  std::vector<uint32_t> widths;
  bool all_const = true;
  for (const auto& a : args) {
    widths.push_back(a.width);
    all_const &= a.tag == TExpr::Tag::Const;
  }
  uint32_t w = result_width(kind, widths, params);
  if (all_const) {
    std::vector<const LogicVector*> in;
    for (const auto& a : args) in.push_back(&a.value);
    return t_const(eval_primitive(kind, std::span<const LogicVector* const>(in), params));
  }
  if (kind == PrimitiveKind::Cond && args[0].tag == TExpr::Tag::Const) {
    LogicBit c = truth_value(args[0].value);
    if (c == LogicBit::One) return std::move(args[1]);
    if (c == LogicBit::Zero) return std::move(args[2]);
  }
  TExpr t;
  t.tag = TExpr::Tag::Op;
  t.op = kind;
  t.params = std::move(params);
  t.args = std::move(args);
  t.width = w;
  return t;
}

TExpr t_slice(TExpr a, uint32_t lsb, uint32_t width) {
  if (lsb == 0 && width == a.width) return a;
  PrimitiveParams p;
  p.lsb = lsb;
  p.width = width;
  std::vector<TExpr> args;
  args.push_back(std::move(a));
  return t_op(PrimitiveKind::Slice, std::move(args), p);
}

TExpr t_unary(PrimitiveKind kind, TExpr a) {
  std::vector<TExpr> args;
  args.push_back(std::move(a));
  return t_op(kind, std::move(args));
}

TExpr t_binary(PrimitiveKind kind, TExpr a, TExpr b) {
  std::vector<TExpr> args;
  args.push_back(std::move(a));
  args.push_back(std::move(b));
  return t_op(kind, std::move(args));
}

/// Zero-extends or truncates to `w`.
TExpr t_ext(TExpr t, uint32_t w) {
  if (t.width == w) return t;
  if (t.width > w) return t_slice(std::move(t), 0, w);
  if (t.tag == TExpr::Tag::Const) return t_const(t.value.resized(w));
  uint32_t pad = w - t.width;
  return t_binary(PrimitiveKind::Concat, t_zero(pad), std::move(t));
}

struct NetSym {
  NetId id = kNoId;
  int64_t msb = 0;
  int64_t lsb = 0;
  uint32_t width = 1;

  /// Offset from bit 0 of the stored vector for a declared index.
  int64_t offset(int64_t index) const { return msb >= lsb ? index - lsb : lsb - index; }
};

struct PortInfo {
  ast::PortDir dir;
  NetId net;
  uint32_t width;
};

struct Scope {
  std::string path;  // empty at the top
  const ast::Module* mod = nullptr;
  std::map<std::string, int64_t> params;
  std::map<std::string, NetSym> nets;
  std::map<std::string, PortInfo> ports;

  std::string prefixed(const std::string& name) const { return path.empty() ? name : path + "." + name; }
};

struct PendingDriver {
  TExpr expr;
  uint32_t lsb = 0;
  uint32_t width = 0;
  uint64_t delay = 0;
  std::string scope;
  SourceLoc loc;
};

struct ParamOverride {
  std::map<std::string, std::pair<int64_t, SourceLoc>> named;
  std::vector<std::pair<int64_t, SourceLoc>> positional;
};

class ProgBuilder {
public:
  Program prog;
  std::set<NetId> reads;
  std::set<NetId> writes;

  uint32_t add(const TExpr& t) {
    ExprNode n;
    n.width = t.width;
    switch (t.tag) {
      case TExpr::Tag::Net:
        n.tag = ExprNode::Tag::Net;
        n.net = t.net;
        reads.insert(t.net);
        break;
      case TExpr::Tag::Const:
        n.tag = ExprNode::Tag::Const;
        n.params.value = t.value;
        break;
      case TExpr::Tag::Op:
        n.tag = ExprNode::Tag::Op;
        n.op = t.op;
        n.params = t.params;
        for (const auto& a : t.args) n.args.push_back(add(a));
        break;
    }
    prog.exprs.push_back(std::move(n));
    return static_cast<uint32_t>(prog.exprs.size() - 1);
  }

  uint32_t emit(Instr i) {
    prog.code.push_back(std::move(i));
    return static_cast<uint32_t>(prog.code.size() - 1);
  }
  uint32_t pc() const { return static_cast<uint32_t>(prog.code.size()); }
};

class Elaborator {
public:
  explicit Elaborator(const ast::Ast& ast) : ast_(ast) {}

  Design run(const std::string& top_name) {
    const ast::Module* top = ast_.find(top_name);
    if (!top) fail({}, "top module '" + top_name + "' is not defined");
    d_.top = top_name;
    Scope sc = instantiate(*top, "", {}, top->loc);
    for (const auto& name : top->port_order) {
      const PortInfo& p = sc.ports.at(name);
      if (p.dir == ast::PortDir::Input) {
        if (!drivers_[p.net].empty())
          fail(drivers_[p.net].front().loc, "input port '" + name + "' is driven inside the top module");
        d_.inputs.push_back(p.net);
        top_inputs_.insert(p.net);
      } else {
        d_.outputs.push_back(p.net);
      }
    }
    emit_drivers();
    check_writers();
    d_.finalize();
    check_loops();
    return std::move(d_);
  }

private:
  // ---- nets ---------------------------------------------------------------

  NetId new_net(const std::string& path, uint32_t width, NetKind kind, bool internal, const SourceLoc& loc) {
    if (d_.name_table.count(path)) fail(loc, "duplicate net '" + path + "'");
    Net n;
    n.id = static_cast<NetId>(d_.nets.size());
    n.path = path;
    n.width = width;
    n.kind = kind;
    n.internal = internal;
    d_.nets.push_back(n);
    d_.name_table[path] = n.id;
    drivers_.emplace_back();
    return n.id;
  }

  NetId new_tmp(const std::string& scope, uint32_t width) {
    uint32_t& counter = tmp_counter_[scope];
    std::string name = "$tmp" + std::to_string(counter++);
    return new_net(scope.empty() ? name : scope + "." + name, width, NetKind::Wire, true, {});
  }

  // ---- constants ----------------------------------------------------------

  bool is_const(const Expr& e, const Scope& sc) const {
    switch (e.kind) {
      case ExprKind::Number: return e.literal.is_known() && e.literal.width() <= 64;
      case ExprKind::Ident: return sc.params.count(e.name) > 0;
      case ExprKind::Unary:
      case ExprKind::Binary:
      case ExprKind::Ternary:
        for (const auto& a : e.args)
          if (!is_const(*a, sc)) return false;
        return true;
      default: return false;
    }
  }

  /// Constant built only from unsized literals and parameters; its width is
  /// the minimal width of its value.
  bool is_unsized_const(const Expr& e, const Scope& sc) const {
    switch (e.kind) {
      case ExprKind::Number: return !e.sized && e.literal.is_known() && e.literal.width() <= 64;
      case ExprKind::Ident: return sc.params.count(e.name) > 0;
      case ExprKind::Unary:
      case ExprKind::Binary:
      case ExprKind::Ternary:
        for (const auto& a : e.args)
          if (!is_unsized_const(*a, sc)) return false;
        return true;
      default: return false;
    }
  }

  int64_t eval_const(const Expr& e, const Scope& sc) const {
    switch (e.kind) {
      case ExprKind::Number: {
        auto v = e.literal.to_uint();
        if (!v) fail(e.loc, "constant expression contains x/z bits or exceeds 64 bits");
        return static_cast<int64_t>(*v);
      }
      case ExprKind::Ident: {
        auto it = sc.params.find(e.name);
        if (it == sc.params.end()) fail(e.loc, "'" + e.name + "' is not a constant");
        return it->second;
      }
      case ExprKind::Unary: {
        int64_t a = eval_const(*e.args[0], sc);
        if (e.name == "-") return -a;
        if (e.name == "~") return ~a;
        if (e.name == "!") return a == 0;
        fail(e.loc, "operator '" + e.name + "' is not supported in constant expressions");
      }
      case ExprKind::Binary: {
        int64_t a = eval_const(*e.args[0], sc);
        int64_t b = eval_const(*e.args[1], sc);
        const std::string& op = e.name;
        if (op == "+") return a + b;
        if (op == "-") return a - b;
        if (op == "*") return a * b;
        if (op == "/" || op == "%") {
          if (b == 0) fail(e.loc, "division by zero in constant expression");
          return op == "/" ? a / b : a % b;
        }
        if (op == "&") return a & b;
        if (op == "|") return a | b;
        if (op == "^") return a ^ b;
        if (op == "~^") return ~(a ^ b);
        if (op == "<<") return b >= 64 ? 0 : static_cast<int64_t>(static_cast<uint64_t>(a) << b);
        if (op == ">>") return b >= 64 ? 0 : static_cast<int64_t>(static_cast<uint64_t>(a) >> b);
        if (op == "==") return a == b;
        if (op == "!=") return a != b;
        if (op == "<") return a < b;
        if (op == "<=") return a <= b;
        if (op == ">") return a > b;
        if (op == ">=") return a >= b;
        if (op == "&&") return a && b;
        if (op == "||") return a || b;
        fail(e.loc, "operator '" + op + "' is not supported in constant expressions");
      }
      case ExprKind::Ternary:
        return eval_const(*e.args[0], sc) ? eval_const(*e.args[1], sc) : eval_const(*e.args[2], sc);
      default: fail(e.loc, "expression is not constant");
    }
  }

  uint32_t const_width(const Expr& e, const Scope& sc) const {
    int64_t v = eval_const(e, sc);
    if (v < 0) fail(e.loc, "negative constant value " + std::to_string(v) + " is not supported");
    return minimal_bits(static_cast<uint64_t>(v));
  }

  // ---- widths -------------------------------------------------------------

  const NetSym& net_sym(const Expr& e, const Scope& sc) const {
    auto it = sc.nets.find(e.name);
    if (it == sc.nets.end()) {
      if (sc.params.count(e.name)) fail(e.loc, "parameter '" + e.name + "' cannot be selected or assigned");
      fail(e.loc, "undeclared identifier '" + e.name + "'");
    }
    return it->second;
  }

  std::pair<uint32_t, uint32_t> part_range(const Expr& e, const Scope& sc) const {
    const NetSym& s = net_sym(e, sc);
    int64_t m = eval_const(*e.args[0], sc);
    int64_t l = eval_const(*e.args[1], sc);
    int64_t om = s.offset(m), ol = s.offset(l);
    if (om < ol) fail(e.loc, "part-select [" + std::to_string(m) + ":" + std::to_string(l) + "] of '" + e.name +
                                 "' has reversed bounds");
    if (ol < 0 || om >= s.width)
      fail(e.loc, "part-select [" + std::to_string(m) + ":" + std::to_string(l) + "] is out of range for '" +
                      e.name + "'");
    return {static_cast<uint32_t>(ol), static_cast<uint32_t>(om - ol + 1)};
  }

  uint32_t self_width(const Expr& e, const Scope& sc) const {
    if (e.kind != ExprKind::Number && is_unsized_const(e, sc)) return const_width(e, sc);
    switch (e.kind) {
      case ExprKind::Number: return e.literal.width();
      case ExprKind::Ident: return net_sym(e, sc).width;
      case ExprKind::BitSelect: return 1;
      case ExprKind::PartSelect: return part_range(e, sc).second;
      case ExprKind::Unary:
        if (e.name == "~" || e.name == "-") return self_width(*e.args[0], sc);
        self_width(*e.args[0], sc);
        return 1;
      case ExprKind::Binary: {
        const std::string& op = e.name;
        if (op == "/" || op == "%") {
          if (!is_const(e, sc)) fail(e.loc, "unsupported construct: '" + op + "' on non-constant operands");
          return const_width(e, sc);
        }
        uint32_t a = self_width(*e.args[0], sc);
        uint32_t b = self_width(*e.args[1], sc);
        if (op == "<<" || op == ">>") return a;
        if (op == "&" || op == "|" || op == "^" || op == "~^" || op == "+" || op == "-" || op == "*")
          return std::max(a, b);
        return 1;
      }
      case ExprKind::Ternary:
        self_width(*e.args[0], sc);
        return std::max(self_width(*e.args[1], sc), self_width(*e.args[2], sc));
      case ExprKind::Concat: {
        uint32_t sum = 0;
        for (const auto& a : e.args) {
          if (a->kind == ExprKind::Number && !a->sized) fail(a->loc, "unsized literal in concatenation");
          sum += self_width(*a, sc);
        }
        return sum;
      }
      case ExprKind::Replicate: {
        int64_t n = eval_const(*e.args[0], sc);
        if (n < 1) fail(e.loc, "replication count must be positive");
        return static_cast<uint32_t>(n) * self_width(*e.args[1], sc);
      }
    }
    return 1;
  }

  // ---- lowering -----------------------------------------------------------

  TExpr net_ref(const NetSym& s) const {
    TExpr t;
    t.tag = TExpr::Tag::Net;
    t.net = s.id;
    t.width = s.width;
    return t;
  }

  TExpr bool_of(const Expr& e, const Scope& sc) const {
    TExpr v = lower(e, self_width(e, sc), sc);
    if (v.width == 1) return v;
    return t_unary(PrimitiveKind::ReduceOr, std::move(v));
  }

  /// Lowers `e` in a context of width `w` (w >= self width).
  TExpr lower(const Expr& e, uint32_t w, const Scope& sc) const {
    if (e.kind != ExprKind::Number && is_unsized_const(e, sc)) {
      int64_t v = eval_const(e, sc);
      if (v < 0) fail(e.loc, "negative constant value " + std::to_string(v) + " is not supported");
      return t_const(LogicVector::from_uint(w, static_cast<uint64_t>(v)));
    }
    switch (e.kind) {
      case ExprKind::Number: {
        const LogicVector& lit = e.literal;
        if (lit.width() >= w) return t_ext(t_const(lit), w);
        LogicBit top = lit.bit(lit.width() - 1);
        if (!e.sized && (top == LogicBit::X || top == LogicBit::Z)) {
          LogicVector v(w, top);
          v.assign_slice(0, lit);
          return t_const(std::move(v));
        }
        return t_const(lit.resized(w));
      }
      case ExprKind::Ident: return t_ext(net_ref(net_sym(e, sc)), w);
      case ExprKind::BitSelect: {
        const NetSym& s = net_sym(e, sc);
        const Expr& idx = *e.args[0];
        if (is_const(idx, sc)) {
          int64_t i = eval_const(idx, sc);
          int64_t off = s.offset(i);
          if (off < 0 || off >= s.width)
            fail(e.loc, "bit-select [" + std::to_string(i) + "] is out of range for '" + e.name + "'");
          return t_ext(t_slice(net_ref(s), static_cast<uint32_t>(off), 1), w);
        }
        if (!(s.msb >= s.lsb && s.lsb == 0))
          fail(e.loc, "variable bit-select requires a [msb:0] range on '" + e.name + "'");
        TExpr shifted = t_binary(PrimitiveKind::ShrLogical, net_ref(s), lower(idx, self_width(idx, sc), sc));
        return t_ext(t_slice(std::move(shifted), 0, 1), w);
      }
      case ExprKind::PartSelect: {
        auto [lsb, width] = part_range(e, sc);
        return t_ext(t_slice(net_ref(net_sym(e, sc)), lsb, width), w);
      }
      case ExprKind::Unary: {
        const std::string& op = e.name;
        const Expr& a = *e.args[0];
        if (op == "~") return t_unary(PrimitiveKind::Not, lower(a, w, sc));
        if (op == "-") return t_binary(PrimitiveKind::Sub, t_zero(w), lower(a, w, sc));
        TExpr r;
        if (op == "!") {
          r = t_unary(PrimitiveKind::Not, bool_of(a, sc));
        } else {
          TExpr v = lower(a, self_width(a, sc), sc);
          if (op == "&") r = t_unary(PrimitiveKind::ReduceAnd, std::move(v));
          else if (op == "|") r = t_unary(PrimitiveKind::ReduceOr, std::move(v));
          else if (op == "^") r = t_unary(PrimitiveKind::ReduceXor, std::move(v));
          else if (op == "~&") r = t_unary(PrimitiveKind::Not, t_unary(PrimitiveKind::ReduceAnd, std::move(v)));
          else if (op == "~|") r = t_unary(PrimitiveKind::Not, t_unary(PrimitiveKind::ReduceOr, std::move(v)));
          else if (op == "~^") r = t_unary(PrimitiveKind::Not, t_unary(PrimitiveKind::ReduceXor, std::move(v)));
          else fail(e.loc, "unsupported construct: unary operator '" + op + "'");
        }
        return t_ext(std::move(r), w);
      }
      case ExprKind::Binary: return lower_binary(e, w, sc);
      case ExprKind::Ternary: {
        TExpr c = lower(*e.args[0], self_width(*e.args[0], sc), sc);
        std::vector<TExpr> args;
        args.push_back(std::move(c));
        args.push_back(lower(*e.args[1], w, sc));
        args.push_back(lower(*e.args[2], w, sc));
        return t_op(PrimitiveKind::Cond, std::move(args));
      }
      case ExprKind::Concat: {
        std::vector<TExpr> parts;
        for (const auto& a : e.args) parts.push_back(lower(*a, self_width(*a, sc), sc));
        TExpr cat = parts.size() == 1 ? std::move(parts[0]) : t_op(PrimitiveKind::Concat, std::move(parts));
        return t_ext(std::move(cat), w);
      }
      case ExprKind::Replicate: {
        int64_t n = eval_const(*e.args[0], sc);
        if (n < 1) fail(e.loc, "replication count must be positive");
        const Expr& body = *e.args[1];
        TExpr one = lower(body, self_width(body, sc), sc);
        if (n == 1) return t_ext(std::move(one), w);
        std::vector<TExpr> parts(static_cast<size_t>(n), one);
        return t_ext(t_op(PrimitiveKind::Concat, std::move(parts)), w);
      }
    }
    fail(e.loc, "unsupported expression");
  }

  TExpr lower_binary(const Expr& e, uint32_t w, const Scope& sc) const {
    const std::string& op = e.name;
    const Expr& a = *e.args[0];
    const Expr& b = *e.args[1];
    if (op == "/" || op == "%") {
      if (!is_const(e, sc)) fail(e.loc, "unsupported construct: '" + op + "' on non-constant operands");
      int64_t v = eval_const(e, sc);
      if (v < 0) fail(e.loc, "negative constant value " + std::to_string(v) + " is not supported");
      return t_const(LogicVector::from_uint(w, static_cast<uint64_t>(v)));
    }
    auto same = [&](PrimitiveKind k) { return t_binary(k, lower(a, w, sc), lower(b, w, sc)); };
    if (op == "&") return same(PrimitiveKind::And);
    if (op == "|") return same(PrimitiveKind::Or);
    if (op == "^") return same(PrimitiveKind::Xor);
    if (op == "~^") return same(PrimitiveKind::Xnor);
    if (op == "+") return same(PrimitiveKind::Add);
    if (op == "-") return same(PrimitiveKind::Sub);
    if (op == "*") return t_slice(same(PrimitiveKind::Mul), 0, w);
    if (op == "<<" || op == ">>") {
      TExpr amount = lower(b, self_width(b, sc), sc);
      return t_binary(op == "<<" ? PrimitiveKind::Shl : PrimitiveKind::ShrLogical, lower(a, w, sc),
                      std::move(amount));
    }
    if (op == "&&" || op == "||")
      return t_ext(t_binary(op == "&&" ? PrimitiveKind::And : PrimitiveKind::Or, bool_of(a, sc), bool_of(b, sc)), w);
    uint32_t cw = std::max(self_width(a, sc), self_width(b, sc));
    TExpr la = lower(a, cw, sc);
    TExpr lb = lower(b, cw, sc);
    TExpr r;
    if (op == "==") r = t_binary(PrimitiveKind::Eq, std::move(la), std::move(lb));
    else if (op == "!=") r = t_binary(PrimitiveKind::Neq, std::move(la), std::move(lb));
    else if (op == "<") r = t_binary(PrimitiveKind::LtUnsigned, std::move(la), std::move(lb));
    else if (op == ">") r = t_binary(PrimitiveKind::LtUnsigned, std::move(lb), std::move(la));
    else if (op == "<=") r = t_unary(PrimitiveKind::Not, t_binary(PrimitiveKind::LtUnsigned, std::move(lb), std::move(la)));
    else if (op == ">=") r = t_unary(PrimitiveKind::Not, t_binary(PrimitiveKind::LtUnsigned, std::move(la), std::move(lb)));
    else fail(e.loc, "unsupported construct: operator '" + op + "'");
    return t_ext(std::move(r), w);
  }

  /// Lowers an assignment source to the target width, rejecting wider sources.
  TExpr lower_assigned(const Expr& rhs, uint32_t target_width, const Scope& sc, const SourceLoc& loc,
                       const char* what) const {
    uint32_t rw = self_width(rhs, sc);
    bool product = rhs.kind == ExprKind::Binary && rhs.name == "*";
    if (rw > target_width && !product)
      fail(loc, std::string("width mismatch in ") + what + ": target is " + std::to_string(target_width) +
                    " bits, expression is " + std::to_string(rw) + " bits");
    return lower(rhs, target_width, sc);
  }

  // ---- assignment targets -------------------------------------------------

  void lvalue_parts(const Expr& e, const Scope& sc, std::vector<LvalPart>& out) const {
    switch (e.kind) {
      case ExprKind::Ident: {
        const NetSym& s = net_sym(e, sc);
        out.push_back({s.id, 0, s.width});
        return;
      }
      case ExprKind::BitSelect: {
        const NetSym& s = net_sym(e, sc);
        if (!is_const(*e.args[0], sc)) fail(e.loc, "unsupported construct: assignment to a variable bit-select");
        int64_t i = eval_const(*e.args[0], sc);
        int64_t off = s.offset(i);
        if (off < 0 || off >= s.width)
          fail(e.loc, "bit-select [" + std::to_string(i) + "] is out of range for '" + e.name + "'");
        out.push_back({s.id, static_cast<uint32_t>(off), 1});
        return;
      }
      case ExprKind::PartSelect: {
        auto [lsb, width] = part_range(e, sc);
        out.push_back({net_sym(e, sc).id, lsb, width});
        return;
      }
      case ExprKind::Concat:
        for (const auto& a : e.args) lvalue_parts(*a, sc, out);
        return;
      default: fail(e.loc, "invalid assignment target");
    }
  }

  static uint32_t total_width(const std::vector<LvalPart>& parts) {
    uint32_t w = 0;
    for (const auto& p : parts) w += p.width;
    return w;
  }

  void require_wire(const LvalPart& p, const SourceLoc& loc, const char* what) const {
    const Net& n = d_.nets[p.net];
    if (n.kind == NetKind::Reg) fail(loc, std::string(what) + " drives reg '" + n.path + "'");
  }

  /// Records a continuous driver `parts = value` (value already at the
  /// parts' total width).
  void add_cont_driver(const std::vector<LvalPart>& parts, TExpr value, uint64_t delay, const Scope& sc,
                       const SourceLoc& loc, const char* what) {
    for (const auto& p : parts) require_wire(p, loc, what);
    if (parts.size() == 1) {
      drivers_[parts[0].net].push_back({std::move(value), parts[0].lsb, parts[0].width, delay, sc.path, loc});
      return;
    }
    TExpr src;
    if (value.tag == TExpr::Tag::Op) {
      NetId tmp = new_tmp(sc.path, value.width);
      drivers_[tmp].push_back({std::move(value), 0, d_.nets[tmp].width, delay, sc.path, loc});
      delay = 0;
      src.tag = TExpr::Tag::Net;
      src.net = tmp;
      src.width = d_.nets[tmp].width;
    } else {
      src = std::move(value);
    }
    uint32_t off = total_width(parts);
    for (const auto& p : parts) {
      off -= p.width;
      drivers_[p.net].push_back({t_slice(src, off, p.width), p.lsb, p.width, delay, sc.path, loc});
    }
  }

  // ---- modules ------------------------------------------------------------

  Scope instantiate(const ast::Module& m, const std::string& path, const ParamOverride& ov,
                    const SourceLoc& inst_loc) {
    if (std::find(stack_.begin(), stack_.end(), m.name) != stack_.end())
      fail(inst_loc, "recursive instantiation of module '" + m.name + "'");
    stack_.push_back(m.name);

    Scope sc;
    sc.path = path;
    sc.mod = &m;

    size_t positional = 0;
    std::set<std::string> used;
    for (const auto& p : m.params) {
      int64_t v;
      auto it = ov.named.find(p.name);
      if (!p.local && it != ov.named.end()) {
        v = it->second.first;
        used.insert(p.name);
      } else if (!p.local && positional < ov.positional.size()) {
        v = ov.positional[positional++].first;
      } else {
        v = eval_const(*p.value, sc);
      }
      sc.params[p.name] = v;
    }
    for (const auto& [name, val] : ov.named) {
      if (used.count(name)) continue;
      bool local = false;
      for (const auto& p : m.params) local |= p.name == name && p.local;
      fail(val.second, local ? "cannot override localparam '" + name + "'"
                             : "module '" + m.name + "' has no parameter '" + name + "'");
    }
    if (positional < ov.positional.size())
      fail(ov.positional[positional].second, "too many parameter overrides for module '" + m.name + "'");

    auto range_of = [&](const std::optional<ast::Range>& r, int64_t& msb, int64_t& lsb) {
      msb = lsb = 0;
      if (!r) return;
      msb = eval_const(*r->msb, sc);
      lsb = eval_const(*r->lsb, sc);
    };
    auto declare = [&](const std::string& name, const SourceLoc& loc, int64_t msb, int64_t lsb, NetKind kind) {
      NetSym s;
      s.msb = msb;
      s.lsb = lsb;
      int64_t w = (msb >= lsb ? msb - lsb : lsb - msb) + 1;
      if (w > (1 << 20)) fail(loc, "net '" + name + "' is too wide");
      s.width = static_cast<uint32_t>(w);
      s.id = new_net(sc.prefixed(name), s.width, kind, false, loc);
      sc.nets[name] = s;
    };

    for (const auto& name : m.port_order) {
      const ast::PortDecl* pd = nullptr;
      for (const auto& p : m.ports)
        if (p.name == name) pd = &p;
      const ast::NetDecl* nd = nullptr;
      for (const auto& n : m.nets)
        if (n.name == name) nd = &n;
      if (pd->dir == ast::PortDir::Inout) fail(pd->loc, "unsupported construct: inout port '" + name + "'");
      int64_t msb, lsb;
      range_of(pd->range, msb, lsb);
      bool is_reg = pd->is_reg;
      if (nd) {
        int64_t nm, nl;
        range_of(nd->range, nm, nl);
        if (nd->range && pd->range && (nm != msb || nl != lsb))
          fail(nd->loc, "declaration of '" + name + "' does not match its port range");
        if (nd->range && !pd->range) {
          msb = nm;
          lsb = nl;
        }
        is_reg |= nd->type == ast::NetType::Reg;
        if (nd->init) fail(nd->loc, "unsupported construct: initializer on port '" + name + "'");
      }
      if (is_reg && pd->dir == ast::PortDir::Input) fail(pd->loc, "input port '" + name + "' cannot be a reg");
      declare(name, pd->loc, msb, lsb, is_reg ? NetKind::Reg : NetKind::Wire);
      sc.ports[name] = {pd->dir, sc.nets[name].id, sc.nets[name].width};
    }
    for (const auto& n : m.nets) {
      if (sc.ports.count(n.name)) continue;
      int64_t msb, lsb;
      range_of(n.range, msb, lsb);
      declare(n.name, n.loc, msb, lsb, n.type == ast::NetType::Reg ? NetKind::Reg : NetKind::Wire);
    }

    for (const auto& n : m.nets) {
      if (!n.init || sc.ports.count(n.name)) continue;
      const NetSym& s = sc.nets.at(n.name);
      std::vector<LvalPart> parts{{s.id, 0, s.width}};
      add_cont_driver(parts, lower_assigned(*n.init, s.width, sc, n.loc, "net initializer"), 0, sc, n.loc,
                      "net initializer");
    }
    for (const auto& a : m.assigns) {
      std::vector<LvalPart> parts;
      lvalue_parts(*a.lhs, sc, parts);
      uint64_t delay = 0;
      if (a.delay) {
        int64_t dv = eval_const(*a.delay, sc);
        if (dv < 0) fail(a.delay->loc, "negative delay");
        delay = static_cast<uint64_t>(dv);
      }
      TExpr v = lower_assigned(*a.rhs, total_width(parts), sc, a.loc, "continuous assignment");
      add_cont_driver(parts, std::move(v), delay, sc, a.loc, "continuous assignment");
    }
    for (const auto& b : m.procs) compile_process(b, sc);
    for (const auto& inst : m.instances) instantiate_child(inst, sc);

    stack_.pop_back();
    return sc;
  }

  void instantiate_child(const ast::Instance& inst, const Scope& sc) {
    const ast::Module* child = ast_.find(inst.module_name);
    if (!child) fail(inst.loc, "unknown module '" + inst.module_name + "'");
    ParamOverride ov;
    for (const auto& c : inst.params) {
      int64_t v = eval_const(*c.expr, sc);
      if (c.name.empty()) {
        ov.positional.push_back({v, c.loc});
      } else {
        if (ov.named.count(c.name)) fail(c.loc, "duplicate parameter override '" + c.name + "'");
        ov.named[c.name] = {v, c.loc};
      }
    }
    std::string path = sc.prefixed(inst.instance_name);
    Scope child_sc = instantiate(*child, path, ov, inst.loc);

    std::set<std::string> seen;
    for (const auto& c : inst.ports) {
      auto it = child_sc.ports.find(c.name);
      if (it == child_sc.ports.end())
        fail(c.loc, "module '" + child->name + "' has no port '" + c.name + "'");
      if (!seen.insert(c.name).second) fail(c.loc, "port '" + c.name + "' is connected more than once");
      if (!c.expr) continue;
      const PortInfo& p = it->second;
      if (p.dir == ast::PortDir::Input) {
        uint32_t ew = self_width(*c.expr, sc);
        if (ew > p.width)
          fail(c.loc, "width mismatch in port connection '" + c.name + "': port is " + std::to_string(p.width) +
                          " bits, expression is " + std::to_string(ew) + " bits");
        std::vector<LvalPart> parts{{p.net, 0, p.width}};
        add_cont_driver(parts, lower(*c.expr, p.width, sc), 0, child_sc, c.loc, "input port connection");
      } else {
        std::vector<LvalPart> parts;
        lvalue_parts(*c.expr, sc, parts);
        uint32_t lw = total_width(parts);
        if (lw != p.width)
          fail(c.loc, "width mismatch in port connection '" + c.name + "': port is " + std::to_string(p.width) +
                          " bits, expression is " + std::to_string(lw) + " bits");
        TExpr src;
        src.tag = TExpr::Tag::Net;
        src.net = p.net;
        src.width = p.width;
        add_cont_driver(parts, std::move(src), 0, sc, c.loc, "output port connection");
      }
    }
  }

  // ---- processes ----------------------------------------------------------

  void compile_assign(const ast::Stmt& s, const Scope& sc, ProgBuilder& pb) {
    std::vector<LvalPart> parts;
    lvalue_parts(*s.lhs, sc, parts);
    for (const auto& p : parts) {
      const Net& n = d_.nets[p.net];
      if (n.kind != NetKind::Reg) fail(s.loc, "procedural assignment to wire '" + n.path + "'");
      pb.writes.insert(p.net);
    }
    Instr in;
    in.op = s.kind == ast::StmtKind::Blocking ? OpCode::Assign : OpCode::AssignNba;
    in.expr = pb.add(lower_assigned(*s.expr, total_width(parts), sc, s.loc, "procedural assignment"));
    in.lhs = std::move(parts);
    in.loc = s.loc;
    pb.emit(std::move(in));
  }

  void compile_stmt(const ast::Stmt& s, const Scope& sc, ProgBuilder& pb) {
    switch (s.kind) {
      case ast::StmtKind::Null: return;
      case ast::StmtKind::Blocking:
      case ast::StmtKind::Nonblocking: compile_assign(s, sc, pb); return;
      case ast::StmtKind::Block:
        for (const auto& c : s.stmts) compile_stmt(*c, sc, pb);
        return;
      case ast::StmtKind::Delay: {
        int64_t dv = eval_const(*s.expr, sc);
        if (dv < 0) fail(s.loc, "negative delay");
        Instr in;
        in.op = OpCode::Delay;
        in.delay = static_cast<uint64_t>(dv);
        in.loc = s.loc;
        pb.emit(std::move(in));
        if (s.then_stmt) compile_stmt(*s.then_stmt, sc, pb);
        return;
      }
      case ast::StmtKind::If: {
        Instr j;
        j.op = OpCode::JumpIfFalse;
        j.expr = pb.add(lower(*s.expr, self_width(*s.expr, sc), sc));
        j.loc = s.loc;
        uint32_t jf = pb.emit(std::move(j));
        compile_stmt(*s.then_stmt, sc, pb);
        if (s.else_stmt) {
          Instr jend;
          jend.op = OpCode::Jump;
          uint32_t je = pb.emit(std::move(jend));
          pb.prog.code[jf].target = pb.pc();
          compile_stmt(*s.else_stmt, sc, pb);
          pb.prog.code[je].target = pb.pc();
        } else {
          pb.prog.code[jf].target = pb.pc();
        }
        return;
      }
      case ast::StmtKind::Case: {
        uint32_t cw = self_width(*s.expr, sc);
        for (const auto& item : s.items)
          for (const auto& l : item.labels) cw = std::max(cw, self_width(*l, sc));
        uint32_t sel = pb.add(lower(*s.expr, cw, sc));
        std::vector<std::pair<uint32_t, size_t>> label_jumps;
        const ast::CaseItem* dflt = nullptr;
        for (size_t k = 0; k < s.items.size(); ++k) {
          const auto& item = s.items[k];
          if (item.labels.empty()) {
            if (dflt) fail(item.loc, "multiple default items in case statement");
            dflt = &item;
            continue;
          }
          for (const auto& l : item.labels) {
            Instr j;
            j.op = OpCode::JumpIfCaseEq;
            j.expr = sel;
            j.expr2 = pb.add(lower(*l, cw, sc));
            j.loc = l->loc;
            label_jumps.push_back({pb.emit(std::move(j)), k});
          }
        }
        std::vector<uint32_t> to_end;
        if (dflt) compile_stmt(*dflt->body, sc, pb);
        Instr jd;
        jd.op = OpCode::Jump;
        to_end.push_back(pb.emit(std::move(jd)));
        for (size_t k = 0; k < s.items.size(); ++k) {
          if (s.items[k].labels.empty()) continue;
          uint32_t start = pb.pc();
          for (auto& [pc, item] : label_jumps)
            if (item == k) pb.prog.code[pc].target = start;
          compile_stmt(*s.items[k].body, sc, pb);
          Instr je;
          je.op = OpCode::Jump;
          to_end.push_back(pb.emit(std::move(je)));
        }
        for (uint32_t pc : to_end) pb.prog.code[pc].target = pb.pc();
        return;
      }
    }
  }

  /// True when some path from the entry reaches End without a Delay.
  static bool has_zero_time_path(const Program& prog) {
    std::vector<bool> reach(prog.code.size() + 1, false);
    reach[0] = true;
    for (size_t pc = 0; pc < prog.code.size(); ++pc) {
      if (!reach[pc]) continue;
      const Instr& in = prog.code[pc];
      switch (in.op) {
        case OpCode::Delay: break;
        case OpCode::End: return true;
        case OpCode::Jump: reach[in.target] = true; break;
        case OpCode::JumpIfFalse:
        case OpCode::JumpIfCaseEq:
          reach[in.target] = true;
          reach[pc + 1] = true;
          break;
        default: reach[pc + 1] = true; break;
      }
    }
    return false;
  }

  void compile_process(const ast::ProcBlock& b, const Scope& sc) {
    Process p;
    p.id = static_cast<ProcessId>(d_.processes.size());
    p.kind = b.kind == ast::ProcKind::Initial ? ProcessKind::Initial : ProcessKind::Always;
    p.scope = sc.path;
    p.star = b.star;
    p.loc = b.loc;
    ProgBuilder pb;
    compile_stmt(*b.body, sc, pb);
    Instr end;
    end.op = OpCode::End;
    pb.emit(std::move(end));

    if (b.has_event_control && !b.star) {
      for (const auto& si : b.sensitivity) {
        if (si.signal->kind != ExprKind::Ident)
          fail(si.loc, "unsupported construct: sensitivity on an expression (use a plain net name)");
        Trigger t;
        t.net = net_sym(*si.signal, sc).id;
        t.kind = si.edge == ast::EdgeKind::Posedge   ? TriggerKind::Posedge
                 : si.edge == ast::EdgeKind::Negedge ? TriggerKind::Negedge
                                                     : TriggerKind::Level;
        p.triggers.push_back(t);
      }
    }
    p.read_set.assign(pb.reads.begin(), pb.reads.end());
    p.write_set.assign(pb.writes.begin(), pb.writes.end());
    if (b.star)
      for (NetId n : p.read_set) p.triggers.push_back({TriggerKind::Level, n});
    if (p.kind == ProcessKind::Always && !b.has_event_control && has_zero_time_path(pb.prog))
      fail(b.loc, "always block without timing control on every path");
    p.body = std::move(pb.prog);
    d_.processes.push_back(std::move(p));
  }

  void check_writers() const {
    std::map<NetId, ProcessId> owner;
    for (const auto& p : d_.processes)
      for (NetId n : p.write_set) {
        auto [it, fresh] = owner.emplace(n, p.id);
        if (!fresh) fail(p.loc, "reg '" + d_.nets[n].path + "' is written by multiple processes");
      }
  }

  // ---- netlist emission ---------------------------------------------------

  void add_node(PrimitiveKind kind, std::vector<NetId> inputs, NetId out, uint64_t delay, PrimitiveParams params,
                const SourceLoc& loc) {
    NetlistNode n;
    n.id = static_cast<NodeId>(d_.nodes.size());
    n.kind = kind;
    n.inputs = std::move(inputs);
    n.output = out;
    n.delay = delay;
    n.params = std::move(params);
    n.loc = loc;
    d_.nodes.push_back(std::move(n));
  }

  NetId emit_value(const TExpr& t, const std::string& scope, const SourceLoc& loc) {
    if (t.tag == TExpr::Tag::Net) return t.net;
    NetId tmp = new_tmp(scope, t.width);
    emit_into(t, tmp, 0, scope, loc);
    return tmp;
  }

  void emit_into(const TExpr& t, NetId target, uint64_t delay, const std::string& scope, const SourceLoc& loc) {
    switch (t.tag) {
      case TExpr::Tag::Net: add_node(PrimitiveKind::Buf, {t.net}, target, delay, {}, loc); return;
      case TExpr::Tag::Const: {
        PrimitiveParams p;
        p.value = t.value;
        add_node(PrimitiveKind::Const, {}, target, delay, std::move(p), loc);
        return;
      }
      case TExpr::Tag::Op: {
        std::vector<NetId> inputs;
        for (const auto& a : t.args) inputs.push_back(emit_value(a, scope, loc));
        add_node(t.op, std::move(inputs), target, delay, t.params, loc);
        return;
      }
    }
  }

  TExpr padded(const PendingDriver& d, uint32_t net_width) const {
    if (d.lsb == 0 && d.width == net_width) return d.expr;
    std::vector<TExpr> parts;
    uint32_t hi = net_width - d.lsb - d.width;
    if (hi) parts.push_back(t_const(LogicVector(hi, LogicBit::Z)));
    parts.push_back(d.expr);
    if (d.lsb) parts.push_back(t_const(LogicVector(d.lsb, LogicBit::Z)));
    return t_op(PrimitiveKind::Concat, std::move(parts));
  }

  void emit_drivers() {
    size_t declared = d_.nets.size();
    for (NetId n = 0; n < declared; ++n) {
      const Net net = d_.nets[n];
      auto ds = std::move(drivers_[n]);
      if (ds.empty()) {
        if (net.kind == NetKind::Wire && !top_inputs_.count(n)) {
          PrimitiveParams p;
          p.value = LogicVector(net.width, LogicBit::Z);
          add_node(PrimitiveKind::Const, {}, n, 0, std::move(p), {});
        }
        continue;
      }
      if (ds.size() == 1) {
        emit_into(padded(ds[0], net.width), n, ds[0].delay, ds[0].scope, ds[0].loc);
        continue;
      }
      std::vector<NetId> srcs;
      for (const auto& d : ds) {
        NetId tmp = new_tmp(d.scope, net.width);
        emit_into(padded(d, net.width), tmp, d.delay, d.scope, d.loc);
        srcs.push_back(tmp);
      }
      add_node(PrimitiveKind::Resolve, std::move(srcs), n, 0, {}, ds.front().loc);
    }
  }

  // Loops are checked per bit: a vector net fed back through a disjoint
  // slice of itself (ripple carries) is not a loop.
  void check_loops() const {
    std::vector<uint32_t> base(d_.nets.size() + 1, 0);
    for (size_t i = 0; i < d_.nets.size(); ++i) base[i + 1] = base[i] + d_.nets[i].width;
    uint32_t vertices = base.back();
    std::vector<std::vector<uint32_t>> adj(vertices);
    std::vector<NetId> vertex_net(vertices);
    for (size_t i = 0; i < d_.nets.size(); ++i)
      for (uint32_t b = base[i]; b < base[i + 1]; ++b) vertex_net[b] = static_cast<NetId>(i);

    auto hub = [&](NetId net) {
      adj.emplace_back();
      vertex_net.push_back(net);
      return static_cast<uint32_t>(adj.size() - 1);
    };
    auto all_to_all = [&](NetId in, uint32_t h) {
      for (uint32_t b = base[in]; b < base[in + 1]; ++b) adj[b].push_back(h);
    };
    for (const auto& nd : d_.nodes) {
      uint32_t out = base[nd.output];
      uint32_t ow = d_.nets[nd.output].width;
      auto fan_out = [&](uint32_t h) {
        for (uint32_t i = 0; i < ow; ++i) adj[h].push_back(out + i);
      };
      switch (nd.kind) {
        case PrimitiveKind::Const: break;
        case PrimitiveKind::And:
        case PrimitiveKind::Or:
        case PrimitiveKind::Xor:
        case PrimitiveKind::Nand:
        case PrimitiveKind::Nor:
        case PrimitiveKind::Xnor:
        case PrimitiveKind::Not:
        case PrimitiveKind::Buf:
        case PrimitiveKind::Resolve:
          for (NetId in : nd.inputs)
            for (uint32_t i = 0; i < ow; ++i) adj[base[in] + i].push_back(out + i);
          break;
        case PrimitiveKind::Mux2:
        case PrimitiveKind::Cond: {
          uint32_t h = hub(nd.output);
          all_to_all(nd.inputs[0], h);
          fan_out(h);
          for (size_t k = 1; k < nd.inputs.size(); ++k)
            for (uint32_t i = 0; i < ow; ++i) adj[base[nd.inputs[k]] + i].push_back(out + i);
          break;
        }
        case PrimitiveKind::Concat: {
          uint32_t off = ow;
          for (NetId in : nd.inputs) {
            uint32_t w = d_.nets[in].width;
            off -= w;
            for (uint32_t i = 0; i < w; ++i) adj[base[in] + i].push_back(out + off + i);
          }
          break;
        }
        case PrimitiveKind::Slice:
          for (uint32_t i = 0; i < ow; ++i) adj[base[nd.inputs[0]] + nd.params.lsb + i].push_back(out + i);
          break;
        default: {
          uint32_t h = hub(nd.output);
          for (NetId in : nd.inputs) all_to_all(in, h);
          fan_out(h);
          break;
        }
      }
    }

    size_t n = adj.size();
    std::vector<uint8_t> color(n, 0);
    std::vector<uint32_t> path;
    for (uint32_t root = 0; root < n; ++root) {
      if (color[root]) continue;
      std::vector<std::pair<uint32_t, size_t>> stack{{root, 0}};
      color[root] = 1;
      path.assign(1, root);
      while (!stack.empty()) {
        uint32_t v = stack.back().first;
        size_t& idx = stack.back().second;
        if (idx < adj[v].size()) {
          uint32_t s = adj[v][idx++];
          if (color[s] == 1) {
            auto it = std::find(path.begin(), path.end(), s);
            std::vector<NetId> nets;
            for (auto p = it; p != path.end(); ++p)
              if (nets.empty() || nets.back() != vertex_net[*p]) nets.push_back(vertex_net[*p]);
            std::string msg = "combinational loop through nets: ";
            for (NetId net : nets) msg += d_.nets[net].path + " -> ";
            msg += d_.nets[vertex_net[s]].path;
            NodeId drv = d_.driver[vertex_net[s]];
            fail(drv == kNoId ? SourceLoc{} : d_.nodes[drv].loc, msg);
          }
          if (color[s] == 0) {
            color[s] = 1;
            stack.push_back({s, 0});
            path.push_back(s);
          }
        } else {
          color[v] = 2;
          stack.pop_back();
          path.pop_back();
        }
      }
    }
  }

  const ast::Ast& ast_;
  Design d_;
  std::vector<std::vector<PendingDriver>> drivers_;
  std::map<std::string, uint32_t> tmp_counter_;
  std::vector<std::string> stack_;
  std::set<NetId> top_inputs_;
};

}  // namespace

Design elaborate(const ast::Ast& ast, const std::string& top) {
  try {
    return Elaborator(ast).run(top);
  } catch (const StructuralError& e) {
    throw CompileError({}, std::string("structural error: ") + e.what());
  }
}

Design build_design(const SourceUnit& source) { return elaborate(parse(source), source.top_module_name); }

}  // namespace rtlfsim
