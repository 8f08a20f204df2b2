// Event-driven good-machine simulation kernel.
//
// Each time step runs as a sequence of delta cycles. A delta first applies
// every update due in it (FIFO order), then evaluates the netlist nodes fed
// by nets that changed and runs the processes that were triggered or woken.
// Everything evaluated in the second half reads the values as they stood
// after the first half. Node outputs are scheduled at now + delay (zero
// delay means the next delta); nonblocking writes commit, in order, once no
// updates remain for the current time.
//
// Time 0 starts with a delta that applies stimulus, evaluates every node and
// starts every initial block and every always block without an event
// control.
#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rtlfsim/frontend/design.hpp"
#include "rtlfsim/sim/interpreter.hpp"
#include "rtlfsim/sim/stimulus.hpp"

namespace rtlfsim {

/// Forces one bit of a net on every update, as a stuck-at fault does.
struct SiteFilter {
  NetId net = kNoId;
  uint32_t bit = 0;
  LogicBit value = LogicBit::Zero;

  LogicVector apply(LogicVector v) const {
    v.set_bit(bit, value);
    return v;
  }
};

struct SimCounters {
  uint64_t events_processed = 0;
  uint64_t node_evaluations = 0;
  uint64_t process_activations = 0;
  std::vector<uint64_t> per_node_evaluations;
};

struct StrobeSample {
  uint64_t time = 0;
  std::vector<LogicVector> outputs;  // Design::outputs order
};

struct SimTrace {
  std::vector<NetId> outputs;
  std::vector<StrobeSample> samples;
  SimCounters counters;
  std::vector<std::string> warnings;
  /// Set when a strobe hook stopped the run before end_time.
  bool stopped_early = false;
};

/// A time step did not settle within the delta limit.
class OscillationError : public std::runtime_error {
public:
  OscillationError(uint64_t time, std::vector<std::string> nets);
  uint64_t time() const { return time_; }
  const std::vector<std::string>& nets() const { return nets_; }

private:
  uint64_t time_;
  std::vector<std::string> nets_;
};

struct SimOptions {
  uint64_t delta_limit = 10000;
  std::optional<SiteFilter> filter;
  /// Called for each net a process reads or writes (testing aid).
  std::function<void(ProcessId, NetId, bool is_write)> access_monitor;
};

class Simulator {
public:
  /// Return false from the hook to stop the run after this strobe.
  using StrobeHook = std::function<bool(uint64_t time, const Simulator& sim)>;

  Simulator(const Design& design, const StimulusProgram& stimulus, SimOptions options = {});

  SimTrace run(const StrobeHook& hook = {});

  const LogicVector& value(NetId net) const { return values_[net]; }
  uint64_t now() const { return now_; }
  const Design& design() const { return design_; }

private:
  struct Event {
    enum class Kind : uint8_t { Write, Wake };
    Kind kind = Kind::Write;
    NetId net = kNoId;
    uint32_t lsb = 0;
    LogicVector value;
    ProcessId proc = kNoId;
  };

  void schedule(uint64_t time, Event ev);
  void run_time_step(std::vector<Event> first, bool initial);
  void run_process(ProcessId pid);

  const Design& design_;
  const StimulusProgram& stimulus_;
  SimOptions options_;

  std::vector<LogicVector> values_;
  std::vector<ProcState> procs_;
  std::map<uint64_t, std::vector<Event>> wheel_;
  std::vector<Event> nba_;
  uint64_t now_ = 0;
  SimCounters counters_;

  std::vector<uint64_t> touch_stamp_;
  std::vector<uint64_t> node_stamp_;
  std::vector<LogicVector> old_;
  uint64_t stamp_ = 0;
};

/// Trace rows `time,net,value`, one per strobed output.
std::string trace_to_csv(const Design& design, const SimTrace& trace);
/// Counter summary as a JSON object.
std::string counters_to_json(const SimCounters& counters);

}  // namespace rtlfsim
