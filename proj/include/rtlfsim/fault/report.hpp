// Fault simulation results and their JSON / CSV forms.
//
// JSON schema `rtlfsim-report/1`:
//
//   {
//     "schema": "rtlfsim-report/1",
//     "design": "<top>", "mode": "concurrent|serial", "batch_size": W,
//     "drop": true,
//     "summary": { "total", "detected", "potential", "undetected",
//                  "hyperactive", "coverage" },
//     "counters": { "events_processed", "node_evaluations",
//                   "bad_evaluations", "process_activations", "batches",
//                   "wall_seconds" },
//     "faults": [ { "net", "bit", "polarity": "sa0|sa1",
//                   "status": "detected|potential|undetected|hyperactive",
//                   "time", "output", "good", "bad",    (detected/potential)
//                   "detect_count", "reason" } ],       (reason: hyperactive)
//     "invalid": [ { "fault", "reason" } ]
//   }
//
// `coverage` is detected / total. For potential faults, time/output/values
// record the first strobe with an X-versus-binary difference.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rtlfsim/fault/fault.hpp"

namespace rtlfsim {

enum class FaultStatus : uint8_t { Undetected, Detected, Potential, Hyperactive };

std::string_view to_string(FaultStatus s);

struct FaultRecord {
  std::string net;
  uint32_t bit = 0;
  Polarity polarity = Polarity::SA0;
  FaultStatus status = FaultStatus::Undetected;
  std::optional<uint64_t> time;
  std::string output;
  std::string good;
  std::string bad;
  uint64_t detect_count = 0;  // strobes with a hard difference
  std::string reason;

  friend bool operator==(const FaultRecord&, const FaultRecord&) = default;
};

struct ModeCounters {
  uint64_t events_processed = 0;
  uint64_t node_evaluations = 0;
  uint64_t bad_evaluations = 0;
  uint64_t process_activations = 0;
  uint64_t batches = 0;
  double wall_seconds = 0;

  friend bool operator==(const ModeCounters&, const ModeCounters&) = default;
};

struct DetectionReport {
  std::string design;
  std::string mode;
  uint32_t batch_size = 0;
  bool drop = true;
  std::vector<FaultRecord> faults;  // fault list order
  std::vector<InvalidFault> invalid;
  ModeCounters counters;

  size_t count(FaultStatus s) const;
  size_t total() const { return faults.size(); }
  double coverage() const;

  friend bool operator==(const DetectionReport&, const DetectionReport&) = default;
};

std::string report_to_json(const DetectionReport& report);
/// Throws ConfigError on a malformed document or unknown schema.
DetectionReport report_from_json(const std::string& text);

/// One row per fault: `net,bit,polarity,status,time,output,good,bad`.
std::string report_to_csv(const DetectionReport& report);

/// Detection outcome keyed by site: status, time and output only.
struct OutcomeKey {
  std::string net;
  uint32_t bit;
  Polarity polarity;

  friend auto operator<=>(const OutcomeKey&, const OutcomeKey&) = default;
};

/// Empty when both reports assign every fault the same status, first
/// detection time and detecting output; otherwise one line per difference.
std::vector<std::string> compare_outcomes(const DetectionReport& a, const DetectionReport& b);

/// One-screen human summary.
std::string summary_text(const DetectionReport& report);

}  // namespace rtlfsim
