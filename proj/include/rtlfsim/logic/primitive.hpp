// Primitive operators of the RTL netlist and their four-state semantics.
//
// Width rules (W = width, inputs in order):
//
//   AND OR XOR NAND NOR XNOR   (a[W], b[W])            -> W
//   NOT BUF                    (a[W])                  -> W
//   MUX2                       (sel[1], d0[W], d1[W])  -> W
//   COND                       (c[any], t[W], e[W])    -> W
//   ADD SUB                    (a[Wa], b[Wb])          -> max(Wa, Wb), carry dropped
//   MUL                        (a[Wa], b[Wb])          -> Wa + Wb
//   EQ NEQ LT_UNSIGNED         (a[Wa], b[Wb])          -> 1 (operands zero-extended)
//   SHL SHR_LOGICAL            (a[W], amount[any])     -> W
//   CONCAT                     (in0..inN, MSB first)   -> sum of widths
//   SLICE                      (a[W]), params lsb,width -> width
//   REDUCE_AND/OR/XOR          (a[W])                  -> 1
//   CONST                      (), params value        -> value width
//   RESOLVE                    (d0[W]..dN[W])          -> W
//
// CONST and RESOLVE are created by elaboration only (constant sources and
// multi-driver nets).
//
// X/Z handling: logic and arithmetic kinds read Z as X. Arithmetic and
// comparison kinds return all-X when any operand bit is X/Z; so do shifts
// with an unknown amount. BUF, CONCAT, SLICE, CONST and RESOLVE move bits
// unchanged (Z included); MUX2/COND pass the selected data input unchanged
// and merge both inputs bitwise under an unknown select.
#pragma once

#include <cstdint>
#include <span>
#include <string_view>

#include "rtlfsim/logic/logic_vector.hpp"

namespace rtlfsim {

enum class PrimitiveKind : uint8_t {
  And,
  Or,
  Xor,
  Not,
  Buf,
  Nand,
  Nor,
  Xnor,
  Mux2,
  Add,
  Sub,
  Mul,
  Eq,
  Neq,
  LtUnsigned,
  Shl,
  ShrLogical,
  Concat,
  Slice,
  ReduceAnd,
  ReduceOr,
  ReduceXor,
  Cond,
  Const,
  Resolve,
};

std::string_view to_string(PrimitiveKind kind);

struct PrimitiveParams {
  uint32_t lsb = 0;    // SLICE
  uint32_t width = 0;  // SLICE
  LogicVector value;   // CONST
};

/// Validates arity and widths; returns the result width.
/// Throws StructuralError on violation.
uint32_t result_width(PrimitiveKind kind, std::span<const uint32_t> input_widths,
                      const PrimitiveParams& params = {});

LogicVector eval_primitive(PrimitiveKind kind, std::span<const LogicVector* const> inputs,
                           const PrimitiveParams& params = {});
LogicVector eval_primitive(PrimitiveKind kind, std::span<const LogicVector> inputs,
                           const PrimitiveParams& params = {});

/// Per-bit wired resolution: all Z -> Z, one distinct non-Z value -> that
/// value, conflicting non-Z values -> X. Throws StructuralError on an empty
/// list or mixed widths.
LogicVector resolve_drivers(std::span<const LogicVector> drivers);

/// Bitwise merge of two candidates under an unknown select: equal bits are
/// kept, differing bits become X.
LogicVector merge_unknown(const LogicVector& a, const LogicVector& b);

/// Truthiness for `if` and `?:`: 1 when any bit is 1, 0 when all bits are 0,
/// X otherwise.
LogicBit truth_value(const LogicVector& v);

}  // namespace rtlfsim
