// Stuck-at faults, fault lists and batching.
//
// Fault list files are line oriented: `<net>[<bit>] sa0|sa1`, `#` starts a
// comment. The bit index counts from the least significant bit of the net.
// Without `[bit]` the net must be one bit wide.
#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "rtlfsim/frontend/design.hpp"
#include "rtlfsim/sim/simulator.hpp"

namespace rtlfsim {

enum class Polarity : uint8_t { SA0, SA1 };

std::string_view to_string(Polarity p);

struct Fault {
  uint32_t id = 0;  // index in the full fault list
  NetId net = kNoId;
  uint32_t bit = 0;
  Polarity polarity = Polarity::SA0;
};

/// A fault-list line that could not be mapped onto the design.
struct InvalidFault {
  std::string text;
  std::string reason;

  friend bool operator==(const InvalidFault&, const InvalidFault&) = default;
};

struct FaultList {
  std::vector<Fault> faults;
  std::vector<InvalidFault> invalid;
};

/// SA0 and SA1 on every bit of every wire from list_wires, in (path, bit,
/// polarity) order.
std::vector<Fault> generate_fault_list(const Design& design, bool include_internal = false);

/// Unknown nets and out-of-range bits become InvalidFault entries; malformed
/// lines throw ConfigError.
FaultList parse_fault_list(std::string_view text, const Design& design, const std::string& path = "<faults>");
FaultList load_fault_list(const std::string& path, const Design& design);

/// `net[bit] sa0` form, parseable by parse_fault_list.
std::string fault_name(const Design& design, const Fault& f);

LogicVector filter_through_fault(const Fault& f, LogicVector value);
SiteFilter site_filter(const Fault& f);

/// Largest accepted batch size.
inline constexpr uint32_t kMaxBatchSize = 4096;

struct FaultBatch {
  /// Batch-local fault id i refers to faults[i].
  std::vector<Fault> faults;
  uint32_t batch_size = 0;
};

/// Splits `faults` into consecutive batches of at most `w`. Throws
/// ConfigError when w is 0 or above kMaxBatchSize.
std::vector<FaultBatch> make_batches(const std::vector<Fault>& faults, uint32_t w);

enum class Detection : uint8_t { None, Potential, Hard };

/// Hard when some bit is binary in both and differs; Potential when some bit
/// is binary in exactly one of the two.
Detection classify(const LogicVector& good, const LogicVector& bad);

}  // namespace rtlfsim
