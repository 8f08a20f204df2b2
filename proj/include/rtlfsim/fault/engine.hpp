// Fault simulation drivers: concurrent batches and the serial oracle.
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rtlfsim/fault/bad_gate_store.hpp"
#include "rtlfsim/fault/fault.hpp"
#include "rtlfsim/fault/report.hpp"
#include "rtlfsim/sim/simulator.hpp"

namespace rtlfsim {

/// Per-fault detection state accumulated over strobes.
struct FaultOutcome {
  FaultStatus status = FaultStatus::Undetected;
  std::optional<uint64_t> time;
  NetId output = kNoId;
  LogicVector good;
  LogicVector bad;
  uint64_t detect_count = 0;
  std::string reason;

  /// One output observation at a strobe: good and bad value of an output.
  struct Sample {
    NetId output;
    const LogicVector* good;
    const LogicVector* bad;
  };

  /// Applies the detection rule to one strobe, outputs in declaration order.
  /// Returns true when the strobe shows a hard difference.
  bool observe(uint64_t time, const std::vector<Sample>& samples);
};

struct FaultSimOptions {
  uint32_t batch_size = 256;
  bool drop = true;
  uint64_t delta_limit = 10000;
  unsigned workers = 1;
  /// Checks the store after every time step; violations are counted in
  /// FaultSimResult::audit_violations.
  bool audit = false;
};

struct FaultSimResult {
  DetectionReport report;
  std::vector<FaultOutcome> outcomes;  // fault list order
  uint64_t audit_violations = 0;
  std::vector<uint64_t> bad_evaluations_per_fault;  // fault list order
};

FaultSimResult run_concurrent(const Design& design, const std::vector<Fault>& faults, const StimulusProgram& stim,
                              const FaultSimOptions& options);

FaultSimResult run_serial(const Design& design, const std::vector<Fault>& faults, const StimulusProgram& stim,
                          const FaultSimOptions& options);

/// Builds the report rows from outcomes.
DetectionReport make_report(const Design& design, const std::vector<Fault>& faults,
                            const std::vector<FaultOutcome>& outcomes, const std::string& mode,
                            const FaultSimOptions& options);

/// Concurrent simulation of one batch: the good machine plus one sparse
/// machine per fault, advanced together.
class ConcurrentBatchSim {
public:
  struct Options {
    bool drop = true;
    uint64_t delta_limit = 10000;
    bool audit = false;
    bool record_events = false;
  };

  /// An applied event. fault = -1 for good events.
  struct EventRecord {
    uint64_t time;
    int64_t fault;
    NetId net;
    LogicVector value;
  };

  /// Called after every settled time step, before strobe detection.
  using StepHook = std::function<void(uint64_t time, const ConcurrentBatchSim& sim)>;

  ConcurrentBatchSim(const Design& design, const StimulusProgram& stim, const FaultBatch& batch, Options options);
  ~ConcurrentBatchSim();
  ConcurrentBatchSim(const ConcurrentBatchSim&) = delete;
  ConcurrentBatchSim& operator=(const ConcurrentBatchSim&) = delete;

  void set_step_hook(StepHook hook);

  /// Throws OscillationError when a time step does not settle.
  void run();

  const std::vector<FaultOutcome>& outcomes() const;
  const BadGateStore& store() const;
  const LogicVector& good_value(NetId net) const;
  const std::vector<StrobeSample>& good_samples() const;
  const SimCounters& counters() const;
  uint64_t bad_evaluations() const;
  const std::vector<uint64_t>& bad_evaluations_per_fault() const;
  uint64_t audit_violations() const;
  const std::vector<EventRecord>& events() const;
  /// Live per-fault instances of a process.
  size_t instance_count(ProcessId p) const;
  bool is_active(uint32_t fault) const;

private:
  struct Impl;
  Impl* impl_;
};

}  // namespace rtlfsim
