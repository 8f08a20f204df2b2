// Stimulus programs: forced input values, free-running clocks, strobe times.
//
// Text format, one directive per line, `#` starts a comment:
//
//   clock <net> period <P> start <S>   rises at S + kP, falls at S + kP + P/2;
//                                      held at 0 from time 0 when S > 0
//   @<t> <net> = <value>               <value>: sized literal (4'b10x1, 8'hff),
//                                      unsigned decimal, or x / z
//   strobe every <P> from <S>          S, S+P, ... up to the end time
//   strobe at <t>[,<t>...]
//   end <t>
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rtlfsim/frontend/design.hpp"

namespace rtlfsim {

struct ForceSpec {
  uint64_t time = 0;
  NetId net = kNoId;
  LogicVector value;
};

struct ClockSpec {
  NetId net = kNoId;
  uint64_t period = 2;
  uint64_t start = 0;
};

struct StimulusProgram {
  std::vector<ForceSpec> forces;   // file order
  std::vector<ClockSpec> clocks;   // file order
  std::vector<uint64_t> strobes;   // sorted, unique
  uint64_t end_time = 0;
  std::vector<std::string> warnings;
};

/// Throws ConfigError with `path:line:` prefixed diagnostics.
StimulusProgram parse_stimulus(std::string_view text, const Design& design, const std::string& path = "<stimulus>");
StimulusProgram load_stimulus(const std::string& path, const Design& design);

struct StimulusWrite {
  NetId net;
  LogicVector value;
};

/// Walks a stimulus program in time order. At each time, clock edges come
/// first (clock declaration order), then forces (file order).
class StimulusCursor {
public:
  explicit StimulusCursor(const StimulusProgram& program);

  std::optional<uint64_t> next_time() const;
  /// Writes due at `time`; `time` must not be before next_time().
  std::vector<StimulusWrite> take(uint64_t time);

private:
  const StimulusProgram* program_;
  std::vector<uint64_t> clock_next_;   // next toggle time per clock
  std::vector<bool> clock_rise_;       // whether that toggle is a rising edge
  std::vector<size_t> force_order_;    // forces sorted by time, stable
  size_t force_pos_ = 0;
};

}  // namespace rtlfsim
