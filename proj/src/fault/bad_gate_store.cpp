#include "rtlfsim/fault/bad_gate_store.hpp"

#include <algorithm>

namespace rtlfsim {
namespace {

template <class Vec>
auto lower(Vec& v, uint32_t fault) {
  return std::lower_bound(v.begin(), v.end(), fault,
                          [](const BadGateStore::Entry& e, uint32_t f) { return e.fault < f; });
}

}  // namespace

const LogicVector* BadGateStore::find(NetId net, uint32_t fault) const {
  const auto& v = nets_[net];
  auto it = lower(v, fault);
  return it != v.end() && it->fault == fault ? &it->value : nullptr;
}

LogicVector* BadGateStore::find(NetId net, uint32_t fault) {
  auto& v = nets_[net];
  auto it = lower(v, fault);
  return it != v.end() && it->fault == fault ? &it->value : nullptr;
}

LogicVector& BadGateStore::materialize(NetId net, uint32_t fault, const LogicVector& good) {
  auto& v = nets_[net];
  auto it = lower(v, fault);
  if (it != v.end() && it->fault == fault) return it->value;
  return v.insert(it, Entry{fault, good})->value;
}

bool BadGateStore::erase(NetId net, uint32_t fault) {
  auto& v = nets_[net];
  auto it = lower(v, fault);
  if (it == v.end() || it->fault != fault) return false;
  v.erase(it);
  return true;
}

bool BadGateStore::visibility_check(NetId net, uint32_t fault, const LogicVector& value, const LogicVector& good) {
  if (value == good) return erase(net, fault);
  LogicVector& e = materialize(net, fault, good);
  if (e == value) return false;
  e = value;
  return true;
}

void BadGateStore::converge(NetId net, const LogicVector& good) {
  auto& v = nets_[net];
  v.erase(std::remove_if(v.begin(), v.end(), [&](const Entry& e) { return e.value == good; }), v.end());
}

void BadGateStore::purge(uint32_t fault) {
  for (NetId n = 0; n < nets_.size(); ++n)
    if (!nets_[n].empty()) erase(n, fault);
}

size_t BadGateStore::total_entries() const {
  size_t n = 0;
  for (const auto& v : nets_) n += v.size();
  return n;
}

size_t BadGateStore::entries_for(uint32_t fault) const {
  size_t n = 0;
  for (NetId net = 0; net < nets_.size(); ++net) n += find(net, fault) != nullptr;
  return n;
}

size_t BadGateStore::audit(const std::vector<LogicVector>& good) const {
  size_t n = 0;
  for (NetId net = 0; net < nets_.size(); ++net)
    for (const auto& e : nets_[net]) n += e.value == good[net];
  return n;
}

BadGateStore allocate_bad_gates(const Design& design, const FaultBatch& batch) {
  if (batch.batch_size == 0) throw ConfigError("batch size must be at least 1");
  if (batch.batch_size > kMaxBatchSize)
    throw ConfigError("batch size " + std::to_string(batch.batch_size) + " exceeds the maximum of " +
                      std::to_string(kMaxBatchSize));
  if (batch.faults.empty()) throw ConfigError("fault batch is empty");
  if (batch.faults.size() > batch.batch_size) throw ConfigError("fault batch holds more faults than its batch size");
  return BadGateStore(design.nets.size(), batch.batch_size);
}

LogicVector evaluate_bad(const BadGateStore& store, const NetlistNode& node, uint32_t fault,
                         const std::vector<LogicVector>& good) {
  const LogicVector* in[8];
  std::vector<const LogicVector*> big;
  const LogicVector** ptrs = in;
  if (node.inputs.size() > 8) {
    big.resize(node.inputs.size());
    ptrs = big.data();
  }
  for (size_t i = 0; i < node.inputs.size(); ++i) {
    NetId n = node.inputs[i];
    ptrs[i] = &store.value_of(n, fault, good[n]);
  }
  return eval_primitive(node.kind, std::span<const LogicVector* const>(ptrs, node.inputs.size()), node.params);
}

}  // namespace rtlfsim
