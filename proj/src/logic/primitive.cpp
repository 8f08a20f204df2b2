#include "rtlfsim/logic/primitive.hpp"

#include <algorithm>
#include <string>
#include <vector>

#include "rtlfsim/diagnostic.hpp"

namespace rtlfsim {

std::string_view to_string(PrimitiveKind kind) {
  switch (kind) {
    case PrimitiveKind::And: return "AND";
    case PrimitiveKind::Or: return "OR";
    case PrimitiveKind::Xor: return "XOR";
    case PrimitiveKind::Not: return "NOT";
    case PrimitiveKind::Buf: return "BUF";
    case PrimitiveKind::Nand: return "NAND";
    case PrimitiveKind::Nor: return "NOR";
    case PrimitiveKind::Xnor: return "XNOR";
    case PrimitiveKind::Mux2: return "MUX2";
    case PrimitiveKind::Add: return "ADD";
    case PrimitiveKind::Sub: return "SUB";
    case PrimitiveKind::Mul: return "MUL";
    case PrimitiveKind::Eq: return "EQ";
    case PrimitiveKind::Neq: return "NEQ";
    case PrimitiveKind::LtUnsigned: return "LT_UNSIGNED";
    case PrimitiveKind::Shl: return "SHL";
    case PrimitiveKind::ShrLogical: return "SHR_LOGICAL";
    case PrimitiveKind::Concat: return "CONCAT";
    case PrimitiveKind::Slice: return "SLICE";
    case PrimitiveKind::ReduceAnd: return "REDUCE_AND";
    case PrimitiveKind::ReduceOr: return "REDUCE_OR";
    case PrimitiveKind::ReduceXor: return "REDUCE_XOR";
    case PrimitiveKind::Cond: return "COND";
    case PrimitiveKind::Const: return "CONST";
    case PrimitiveKind::Resolve: return "RESOLVE";
  }
  return "?";
}

namespace {

[[noreturn]] void structural(PrimitiveKind kind, const std::string& what) {
  throw StructuralError(std::string(to_string(kind)) + ": " + what);
}

void expect_arity(PrimitiveKind kind, size_t got, size_t want) {
  if (got != want)
    structural(kind, "expects " + std::to_string(want) + " inputs, got " + std::to_string(got));
}

void expect_same(PrimitiveKind kind, uint32_t a, uint32_t b) {
  if (a != b)
    structural(kind, "input widths differ (" + std::to_string(a) + " vs " + std::to_string(b) + ")");
}

// Z is read as X: after this, a plane pair is 0=(0,0), 1=(1,0), X=(1,1).
struct Planes {
  uint64_t a, b;
};
inline Planes norm(const LogicVector& v, uint32_t w) {
  uint64_t b = v.bval(w);
  return {v.aval(w) | b, b};
}

using Limbs = std::vector<uint64_t>;

Limbs limbs_of(const LogicVector& v, uint32_t words) {
  Limbs l(words, 0);
  for (uint32_t w = 0; w < std::min(words, v.word_count()); ++w) l[w] = v.aval(w);
  return l;
}

LogicVector from_limbs(uint32_t width, const Limbs& l) {
  LogicVector r(width, LogicBit::Zero);
  for (uint32_t w = 0; w < r.word_count(); ++w) r.set_word(w, w < l.size() ? l[w] : 0, 0);
  return r;
}

LogicVector bitwise(PrimitiveKind kind, const LogicVector& x, const LogicVector& y) {
  LogicVector r(x.width(), LogicBit::Zero);
  for (uint32_t w = 0; w < x.word_count(); ++w) {
    Planes p = norm(x, w), q = norm(y, w);
    uint64_t a = 0, b = 0;
    switch (kind) {
      case PrimitiveKind::And:
      case PrimitiveKind::Nand: {
        uint64_t r0 = ~p.a | ~q.a;
        uint64_t r1 = (p.a & ~p.b) & (q.a & ~q.b);
        a = ~r0;
        b = ~r0 & ~r1;
        break;
      }
      case PrimitiveKind::Or:
      case PrimitiveKind::Nor: {
        uint64_t r1 = (p.a & ~p.b) | (q.a & ~q.b);
        uint64_t r0 = ~p.a & ~q.a;
        a = ~r0;
        b = ~r0 & ~r1;
        break;
      }
      default: {  // Xor, Xnor
        uint64_t u = p.b | q.b;
        a = (p.a ^ q.a) | u;
        b = u;
        break;
      }
    }
    if (kind == PrimitiveKind::Nand || kind == PrimitiveKind::Nor || kind == PrimitiveKind::Xnor)
      a = ~a | b;
    r.set_word(w, a, b);
  }
  return r;
}

LogicVector invert(const LogicVector& x) {
  LogicVector r(x.width(), LogicBit::Zero);
  for (uint32_t w = 0; w < x.word_count(); ++w) {
    Planes p = norm(x, w);
    r.set_word(w, ~p.a | p.b, p.b);
  }
  return r;
}

LogicVector add_sub(bool subtract, const LogicVector& x, const LogicVector& y) {
  uint32_t width = std::max(x.width(), y.width());
  if (x.has_unknown() || y.has_unknown()) return LogicVector(width, LogicBit::X);
  uint32_t words = (width + 63) / 64;
  Limbs a = limbs_of(x, words), b = limbs_of(y, words), r(words);
  unsigned __int128 carry = subtract ? 1 : 0;
  for (uint32_t w = 0; w < words; ++w) {
    uint64_t bw = subtract ? ~b[w] : b[w];
    unsigned __int128 s = static_cast<unsigned __int128>(a[w]) + bw + carry;
    r[w] = static_cast<uint64_t>(s);
    carry = s >> 64;
  }
  return from_limbs(width, r);
}

LogicVector multiply(const LogicVector& x, const LogicVector& y) {
  uint32_t width = x.width() + y.width();
  if (x.has_unknown() || y.has_unknown()) return LogicVector(width, LogicBit::X);
  Limbs a = limbs_of(x, x.word_count()), b = limbs_of(y, y.word_count());
  Limbs r(a.size() + b.size(), 0);
  for (size_t i = 0; i < a.size(); ++i) {
    unsigned __int128 carry = 0;
    for (size_t j = 0; j < b.size(); ++j) {
      unsigned __int128 t = static_cast<unsigned __int128>(a[i]) * b[j] + r[i + j] + carry;
      r[i + j] = static_cast<uint64_t>(t);
      carry = t >> 64;
    }
    r[i + b.size()] = static_cast<uint64_t>(carry);
  }
  return from_limbs(width, r);
}

// -1, 0, 1 for known operands after zero extension.
int compare(const LogicVector& x, const LogicVector& y) {
  uint32_t words = std::max(x.word_count(), y.word_count());
  Limbs a = limbs_of(x, words), b = limbs_of(y, words);
  for (uint32_t w = words; w-- > 0;) {
    if (a[w] != b[w]) return a[w] < b[w] ? -1 : 1;
  }
  return 0;
}

LogicVector compare_op(PrimitiveKind kind, const LogicVector& x, const LogicVector& y) {
  if (x.has_unknown() || y.has_unknown()) return LogicVector(1, LogicBit::X);
  int c = compare(x, y);
  bool r = kind == PrimitiveKind::Eq ? c == 0 : kind == PrimitiveKind::Neq ? c != 0 : c < 0;
  return LogicVector::from_uint(1, r ? 1 : 0);
}

LogicVector shift(bool left, const LogicVector& x, const LogicVector& amount) {
  if (amount.has_unknown()) return LogicVector(x.width(), LogicBit::X);
  uint64_t n = amount.aval(0);
  for (uint32_t w = 1; w < amount.word_count(); ++w)
    if (amount.aval(w)) n = x.width();
  LogicVector r(x.width(), LogicBit::Zero);
  if (n >= x.width()) return r;
  uint32_t k = static_cast<uint32_t>(n);
  if (left) {
    r.assign_slice(k, x.slice(0, x.width() - k));
  } else {
    r.assign_slice(0, x.slice(k, x.width() - k));
  }
  return r;
}

LogicVector reduce(PrimitiveKind kind, const LogicVector& x) {
  bool any0 = false, any1 = false, anyx = false, parity = false;
  for (uint32_t w = 0; w < x.word_count(); ++w) {
    Planes p = norm(x, w);
    uint64_t m = x.word_mask(w);
    uint64_t k1 = p.a & ~p.b & m, k0 = ~p.a & m, ux = p.b & m;
    any0 |= k0 != 0;
    any1 |= k1 != 0;
    anyx |= ux != 0;
    parity ^= (__builtin_popcountll(k1) & 1) != 0;
  }
  LogicBit r;
  switch (kind) {
    case PrimitiveKind::ReduceAnd: r = any0 ? LogicBit::Zero : anyx ? LogicBit::X : LogicBit::One; break;
    case PrimitiveKind::ReduceOr: r = any1 ? LogicBit::One : anyx ? LogicBit::X : LogicBit::Zero; break;
    default: r = anyx ? LogicBit::X : parity ? LogicBit::One : LogicBit::Zero; break;
  }
  return LogicVector(1, r);
}

LogicVector resolve_pair(const LogicVector& x, const LogicVector& y) {
  LogicVector r(x.width(), LogicBit::Zero);
  for (uint32_t w = 0; w < x.word_count(); ++w) {
    uint64_t ax = x.aval(w), bx = x.bval(w), ay = y.aval(w), by = y.bval(w);
    uint64_t zx = bx & ~ax, zy = by & ~ay;
    uint64_t diff = (ax ^ ay) | (bx ^ by);
    uint64_t take_y = zx, take_x = ~zx & zy, other = ~zx & ~zy;
    uint64_t a = (take_y & ay) | (take_x & ax) | (other & (ax | diff));
    uint64_t b = (take_y & by) | (take_x & bx) | (other & (bx | diff));
    r.set_word(w, a, b);
  }
  return r;
}

LogicVector select(LogicBit sel, const LogicVector& when1, const LogicVector& when0) {
  if (sel == LogicBit::One) return when1;
  if (sel == LogicBit::Zero) return when0;
  return merge_unknown(when1, when0);
}

}  // namespace

LogicVector merge_unknown(const LogicVector& x, const LogicVector& y) {
  LogicVector r(x.width(), LogicBit::Zero);
  for (uint32_t w = 0; w < x.word_count(); ++w) {
    uint64_t diff = (x.aval(w) ^ y.aval(w)) | (x.bval(w) ^ y.bval(w));
    r.set_word(w, x.aval(w) | diff, x.bval(w) | diff);
  }
  return r;
}

LogicBit truth_value(const LogicVector& v) {
  return reduce(PrimitiveKind::ReduceOr, v).bit(0);
}

uint32_t result_width(PrimitiveKind kind, std::span<const uint32_t> in, const PrimitiveParams& params) {
  for (uint32_t w : in)
    if (w == 0) structural(kind, "zero-width input");
  switch (kind) {
    case PrimitiveKind::And:
    case PrimitiveKind::Or:
    case PrimitiveKind::Xor:
    case PrimitiveKind::Nand:
    case PrimitiveKind::Nor:
    case PrimitiveKind::Xnor:
      expect_arity(kind, in.size(), 2);
      expect_same(kind, in[0], in[1]);
      return in[0];
    case PrimitiveKind::Not:
    case PrimitiveKind::Buf:
      expect_arity(kind, in.size(), 1);
      return in[0];
    case PrimitiveKind::Mux2:
      expect_arity(kind, in.size(), 3);
      if (in[0] != 1) structural(kind, "select must be 1 bit wide");
      expect_same(kind, in[1], in[2]);
      return in[1];
    case PrimitiveKind::Cond:
      expect_arity(kind, in.size(), 3);
      expect_same(kind, in[1], in[2]);
      return in[1];
    case PrimitiveKind::Add:
    case PrimitiveKind::Sub:
      expect_arity(kind, in.size(), 2);
      return std::max(in[0], in[1]);
    case PrimitiveKind::Mul:
      expect_arity(kind, in.size(), 2);
      return in[0] + in[1];
    case PrimitiveKind::Eq:
    case PrimitiveKind::Neq:
    case PrimitiveKind::LtUnsigned:
      expect_arity(kind, in.size(), 2);
      return 1;
    case PrimitiveKind::Shl:
    case PrimitiveKind::ShrLogical:
      expect_arity(kind, in.size(), 2);
      return in[0];
    case PrimitiveKind::Concat: {
      if (in.empty()) structural(kind, "expects at least 1 input");
      uint32_t sum = 0;
      for (uint32_t w : in) sum += w;
      return sum;
    }
    case PrimitiveKind::Slice:
      expect_arity(kind, in.size(), 1);
      if (params.width == 0 || params.lsb + params.width > in[0])
        structural(kind, "slice [" + std::to_string(params.lsb) + " +: " + std::to_string(params.width) +
                             "] out of range for width " + std::to_string(in[0]));
      return params.width;
    case PrimitiveKind::ReduceAnd:
    case PrimitiveKind::ReduceOr:
    case PrimitiveKind::ReduceXor:
      expect_arity(kind, in.size(), 1);
      return 1;
    case PrimitiveKind::Const:
      expect_arity(kind, in.size(), 0);
      return params.value.width();
    case PrimitiveKind::Resolve:
      if (in.empty()) structural(kind, "expects at least 1 input");
      for (uint32_t w : in) expect_same(kind, in[0], w);
      return in[0];
  }
  structural(kind, "unknown kind");
}

LogicVector eval_primitive(PrimitiveKind kind, std::span<const LogicVector* const> in,
                           const PrimitiveParams& params) {
  switch (kind) {
    case PrimitiveKind::And:
    case PrimitiveKind::Or:
    case PrimitiveKind::Xor:
    case PrimitiveKind::Nand:
    case PrimitiveKind::Nor:
    case PrimitiveKind::Xnor:
      return bitwise(kind, *in[0], *in[1]);
    case PrimitiveKind::Not: return invert(*in[0]);
    case PrimitiveKind::Buf: return *in[0];
    case PrimitiveKind::Mux2: return select(in[0]->bit(0), *in[2], *in[1]);
    case PrimitiveKind::Cond: return select(truth_value(*in[0]), *in[1], *in[2]);
    case PrimitiveKind::Add: return add_sub(false, *in[0], *in[1]);
    case PrimitiveKind::Sub: return add_sub(true, *in[0], *in[1]);
    case PrimitiveKind::Mul: return multiply(*in[0], *in[1]);
    case PrimitiveKind::Eq:
    case PrimitiveKind::Neq:
    case PrimitiveKind::LtUnsigned:
      return compare_op(kind, *in[0], *in[1]);
    case PrimitiveKind::Shl: return shift(true, *in[0], *in[1]);
    case PrimitiveKind::ShrLogical: return shift(false, *in[0], *in[1]);
    case PrimitiveKind::Concat: {
      uint32_t width = 0;
      for (const LogicVector* v : in) width += v->width();
      LogicVector r(width, LogicBit::Zero);
      uint32_t pos = 0;
      for (size_t i = in.size(); i-- > 0;) {
        r.assign_slice(pos, *in[i]);
        pos += in[i]->width();
      }
      return r;
    }
    case PrimitiveKind::Slice: return in[0]->slice(params.lsb, params.width);
    case PrimitiveKind::ReduceAnd:
    case PrimitiveKind::ReduceOr:
    case PrimitiveKind::ReduceXor:
      return reduce(kind, *in[0]);
    case PrimitiveKind::Const: return params.value;
    case PrimitiveKind::Resolve: {
      LogicVector r = *in[0];
      for (size_t i = 1; i < in.size(); ++i) r = resolve_pair(r, *in[i]);
      return r;
    }
  }
  throw InternalError("eval_primitive: unknown kind");
}

LogicVector eval_primitive(PrimitiveKind kind, std::span<const LogicVector> inputs,
                           const PrimitiveParams& params) {
  std::vector<const LogicVector*> ptrs;
  std::vector<uint32_t> widths;
  ptrs.reserve(inputs.size());
  for (const LogicVector& v : inputs) {
    ptrs.push_back(&v);
    widths.push_back(v.width());
  }
  result_width(kind, widths, params);
  return eval_primitive(kind, std::span<const LogicVector* const>(ptrs), params);
}

LogicVector resolve_drivers(std::span<const LogicVector> drivers) {
  if (drivers.empty()) throw StructuralError("resolve_drivers: empty driver list");
  LogicVector r = drivers[0];
  for (size_t i = 1; i < drivers.size(); ++i) {
    if (drivers[i].width() != r.width())
      throw StructuralError("resolve_drivers: driver widths differ (" + std::to_string(r.width()) + " vs " +
                            std::to_string(drivers[i].width()) + ")");
    r = resolve_pair(r, drivers[i]);
  }
  return r;
}

}  // namespace rtlfsim
