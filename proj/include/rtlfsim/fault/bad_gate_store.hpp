// Sparse storage of fault-machine values ("bad gates").
//
// Each net keeps a list of (fault id, value) sorted by fault id. A fault with
// no entry on a net sees the good value there.
#pragma once

#include <cstdint>
#include <vector>

#include "rtlfsim/fault/fault.hpp"

namespace rtlfsim {

class BadGateStore {
public:
  struct Entry {
    uint32_t fault;
    LogicVector value;
  };

  BadGateStore() = default;
  BadGateStore(size_t net_count, uint32_t capacity) : nets_(net_count), capacity_(capacity) {}

  uint32_t capacity() const { return capacity_; }
  size_t net_count() const { return nets_.size(); }

  const std::vector<Entry>& entries(NetId net) const { return nets_[net]; }
  std::vector<Entry>& entries(NetId net) { return nets_[net]; }

  const LogicVector* find(NetId net, uint32_t fault) const;
  LogicVector* find(NetId net, uint32_t fault);

  /// The fault's view of a net: its entry, or `good` when there is none.
  const LogicVector& value_of(NetId net, uint32_t fault, const LogicVector& good) const {
    const LogicVector* v = find(net, fault);
    return v ? *v : good;
  }

  /// Returns the fault's entry, creating it as a copy of `good` if absent.
  LogicVector& materialize(NetId net, uint32_t fault, const LogicVector& good);

  bool erase(NetId net, uint32_t fault);

  /// Stores `value` when it differs from `good`, otherwise drops any entry.
  /// Returns true when the stored state changed.
  bool visibility_check(NetId net, uint32_t fault, const LogicVector& value, const LogicVector& good);

  /// Removes every entry equal to `good`.
  void converge(NetId net, const LogicVector& good);

  /// Removes every entry belonging to `fault`.
  void purge(uint32_t fault);

  size_t total_entries() const;
  size_t entries_for(uint32_t fault) const;

  /// Number of entries equal to the good value of their net.
  size_t audit(const std::vector<LogicVector>& good) const;

private:
  std::vector<std::vector<Entry>> nets_;
  uint32_t capacity_ = 0;
};

/// Empty store covering every net of the design for batch-local ids
/// 0..batch.batch_size-1. Throws ConfigError for an empty batch or a batch
/// size of 0 or above kMaxBatchSize.
BadGateStore allocate_bad_gates(const Design& design, const FaultBatch& batch);

/// Evaluates a node in one fault's machine: inputs come from the fault's
/// entries where present and from `good` otherwise.
LogicVector evaluate_bad(const BadGateStore& store, const NetlistNode& node, uint32_t fault,
                         const std::vector<LogicVector>& good);

}  // namespace rtlfsim
