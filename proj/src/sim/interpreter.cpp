#include "rtlfsim/sim/interpreter.hpp"

namespace rtlfsim {

bool trigger_matches(TriggerKind kind, const LogicVector& old_value, const LogicVector& new_value) {
  if (kind == TriggerKind::Level) return old_value != new_value;
  LogicBit o = old_value.bit(0);
  LogicBit n = new_value.bit(0);
  if (o == n) return false;
  bool o_unknown = o == LogicBit::X || o == LogicBit::Z;
  if (kind == TriggerKind::Posedge) return o == LogicBit::Zero || (o_unknown && n == LogicBit::One);
  return o == LogicBit::One || (o_unknown && n == LogicBit::Zero);
}

}  // namespace rtlfsim
