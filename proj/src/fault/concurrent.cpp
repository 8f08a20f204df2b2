#include <algorithm>
#include <map>

#include "rtlfsim/fault/engine.hpp"

namespace rtlfsim {

bool FaultOutcome::observe(uint64_t t, const std::vector<Sample>& samples) {
  const Sample* hard = nullptr;
  const Sample* potential = nullptr;
  for (const auto& s : samples) {
    Detection d = classify(*s.good, *s.bad);
    if (d == Detection::Hard) {
      hard = &s;
      break;
    }
    if (d == Detection::Potential && !potential) potential = &s;
  }
  auto record = [&](FaultStatus st, const Sample& s) {
    status = st;
    time = t;
    output = s.output;
    good = *s.good;
    bad = *s.bad;
  };
  if (hard) {
    ++detect_count;
    if (status != FaultStatus::Detected) record(FaultStatus::Detected, *hard);
    return true;
  }
  if (potential && status == FaultStatus::Undetected) record(FaultStatus::Potential, *potential);
  return false;
}

namespace {

using Entry = BadGateStore::Entry;

struct Rec {
  uint32_t fault;
  bool changed;
};

struct Instance {
  uint32_t fault;
  ProcState state;
  uint64_t gen;
};

struct Event {
  enum class Kind : uint8_t { GoodWrite, BadWrite, GoodWake, BadWake };
  Kind kind = Kind::GoodWrite;
  NetId net = kNoId;
  uint32_t lsb = 0;
  LogicVector value;
  std::vector<uint32_t> detach;  // GoodWrite: faults that do not take this write
  ProcessId proc = kNoId;
  uint32_t fault = 0;
  uint64_t gen = 0;
};

template <class T>
bool sorted_contains(const std::vector<T>& v, uint32_t f) {
  return std::binary_search(v.begin(), v.end(), f);
}

const LogicVector* find_entry(const std::vector<Entry>& v, uint32_t f) {
  auto it = std::lower_bound(v.begin(), v.end(), f, [](const Entry& e, uint32_t x) { return e.fault < x; });
  return it != v.end() && it->fault == f ? &it->value : nullptr;
}

const Rec* find_rec(const std::vector<Rec>& v, uint32_t f) {
  auto it = std::lower_bound(v.begin(), v.end(), f, [](const Rec& r, uint32_t x) { return r.fault < x; });
  return it != v.end() && it->fault == f ? &*it : nullptr;
}

void sort_unique(std::vector<uint32_t>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

}  // namespace

struct ConcurrentBatchSim::Impl {
  const Design& design;
  const StimulusProgram& stim;
  const FaultBatch& batch;
  Options opt;
  StepHook hook;

  BadGateStore store;
  std::vector<LogicVector> good;
  std::vector<ProcState> procs;
  std::vector<std::vector<Instance>> inst;
  std::vector<char> active;
  size_t active_count = 0;
  std::vector<std::vector<uint32_t>> site_faults;  // net -> faults sited there
  std::vector<FaultOutcome> outcomes;

  std::map<uint64_t, std::vector<Event>> wheel;
  std::vector<Event> nba;
  uint64_t now = 0;
  uint64_t next_gen = 1;

  SimCounters counters;
  uint64_t bad_evals = 0;
  std::vector<uint64_t> bad_per_fault;
  uint64_t audit_violations = 0;
  std::vector<EventRecord> log;
  std::vector<StrobeSample> samples;

  // Per-delta bookkeeping, indexed by net and valid when stamp matches.
  uint64_t stamp = 0;
  std::vector<uint64_t> touch_stamp;
  std::vector<LogicVector> good_old;
  std::vector<std::vector<Entry>> old_entries;
  std::vector<char> good_changed;
  std::vector<char> any_changed;
  std::vector<std::vector<Rec>> records;
  std::vector<NetId> touched;
  std::vector<uint64_t> node_stamp;
  std::vector<uint64_t> proc_stamp;

  Impl(const Design& d, const StimulusProgram& s, const FaultBatch& b, Options o)
      : design(d), stim(s), batch(b), opt(o), store(allocate_bad_gates(d, b)) {}

  bool touched_now(NetId n) const { return touch_stamp[n] == stamp; }

  void schedule(uint64_t t, Event ev) {
    if (t < now) throw InternalError("event scheduled in the past");
    wheel[t].push_back(std::move(ev));
  }

  void count_bad(uint32_t f) {
    ++bad_evals;
    ++bad_per_fault[f];
  }

  void touch(NetId n) {
    if (touch_stamp[n] == stamp) return;
    touch_stamp[n] = stamp;
    good_old[n] = good[n];
    old_entries[n] = store.entries(n);
    touched.push_back(n);
  }

  static void write(LogicVector& dst, uint32_t lsb, const LogicVector& v) {
    if (lsb == 0 && v.width() == dst.width())
      dst = v;
    else
      dst.assign_slice(lsb, v);
  }

  void apply(Event& ev, std::vector<ProcessId>& good_wakes, std::vector<Event>& bad_wakes) {
    ++counters.events_processed;
    switch (ev.kind) {
      case Event::Kind::GoodWake: good_wakes.push_back(ev.proc); return;
      case Event::Kind::BadWake: bad_wakes.push_back(std::move(ev)); return;
      case Event::Kind::GoodWrite: {
        touch(ev.net);
        if (opt.record_events) log.push_back({now, -1, ev.net, ev.value});
        for (uint32_t f : ev.detach)
          if (active[f]) store.materialize(ev.net, f, good[ev.net]);
        write(good[ev.net], ev.lsb, ev.value);
        for (auto& e : store.entries(ev.net))
          if (!sorted_contains(ev.detach, e.fault)) write(e.value, ev.lsb, ev.value);
        return;
      }
      case Event::Kind::BadWrite: {
        if (!active[ev.fault]) return;
        touch(ev.net);
        if (opt.record_events) log.push_back({now, static_cast<int64_t>(ev.fault), ev.net, ev.value});
        write(store.materialize(ev.net, ev.fault, good[ev.net]), ev.lsb, ev.value);
        return;
      }
    }
  }

  // Site filters, convergence and change records for every touched net.
  // Returns true when any machine saw a change.
  bool settle_touched() {
    bool any = false;
    for (NetId n : touched) {
      for (uint32_t f : site_faults[n]) {
        if (!active[f]) continue;
        LogicVector v = filter_through_fault(batch.faults[f], store.value_of(n, f, good[n]));
        store.visibility_check(n, f, v, good[n]);
      }
      store.converge(n, good[n]);
      good_changed[n] = good[n] != good_old[n];
      auto& rec = records[n];
      rec.clear();
      const auto& olds = old_entries[n];
      const auto& news = store.entries(n);
      size_t i = 0, j = 0;
      bool ch = good_changed[n];
      while (i < olds.size() || j < news.size()) {
        if (j == news.size() || (i < olds.size() && olds[i].fault < news[j].fault)) {
          bool c = olds[i].value != good[n];
          rec.push_back({olds[i].fault, c});
          ch |= c;
          ++i;
        } else if (i == olds.size() || news[j].fault < olds[i].fault) {
          bool c = news[j].value != good_old[n];
          rec.push_back({news[j].fault, c});
          ch |= c;
          ++j;
        } else {
          bool c = olds[i].value != news[j].value;
          rec.push_back({olds[i].fault, c});
          ch |= c;
          ++i;
          ++j;
        }
      }
      any_changed[n] = ch;
      any |= ch;
    }
    return any;
  }

  // Did fault f's copy of net n change in this delta?
  bool changed_for(NetId n, uint32_t f) const {
    if (!touched_now(n)) return false;
    if (const Rec* r = find_rec(records[n], f)) return r->changed;
    return good_changed[n];
  }

  const LogicVector& old_for(NetId n, uint32_t f) const {
    const LogicVector* v = find_entry(old_entries[n], f);
    return v ? *v : good_old[n];
  }

  void eval_node(NodeId nd, bool initial) {
    const NetlistNode& node = design.nodes[nd];
    bool good_in = initial;
    for (NetId in : node.inputs) good_in |= touched_now(in) && good_changed[in];

    LogicVector g;
    if (good_in) {
      const LogicVector* ptrs[8];
      std::vector<const LogicVector*> big;
      const LogicVector** p = ptrs;
      if (node.inputs.size() > 8) {
        big.resize(node.inputs.size());
        p = big.data();
      }
      for (size_t i = 0; i < node.inputs.size(); ++i) p[i] = &good[node.inputs[i]];
      ++counters.node_evaluations;
      ++counters.per_node_evaluations[nd];
      g = eval_primitive(node.kind, std::span<const LogicVector* const>(p, node.inputs.size()), node.params);
    }

    std::vector<uint32_t> faults;
    for (NetId in : node.inputs) {
      if (touched_now(in))
        for (const Rec& r : records[in]) faults.push_back(r.fault);
      if (good_in)
        for (const Entry& e : store.entries(in)) faults.push_back(e.fault);
    }
    sort_unique(faults);

    std::vector<uint32_t> detach;
    std::vector<std::pair<uint32_t, LogicVector>> bad;
    for (uint32_t f : faults) {
      if (!active[f]) continue;
      bool ch = initial;
      for (size_t i = 0; i < node.inputs.size() && !ch; ++i) ch = changed_for(node.inputs[i], f);
      if (!ch) {
        if (good_in) detach.push_back(f);
        continue;
      }
      count_bad(f);
      LogicVector b = evaluate_bad(store, node, f, good);
      if (good_in && b == g) continue;
      if (good_in) detach.push_back(f);
      bad.emplace_back(f, std::move(b));
    }
    uint64_t t = now + node.delay;
    if (good_in) {
      Event ev;
      ev.kind = Event::Kind::GoodWrite;
      ev.net = node.output;
      ev.value = std::move(g);
      ev.detach = std::move(detach);
      schedule(t, std::move(ev));
    }
    for (auto& [f, v] : bad) {
      Event ev;
      ev.kind = Event::Kind::BadWrite;
      ev.net = node.output;
      ev.value = std::move(v);
      ev.fault = f;
      schedule(t, std::move(ev));
    }
  }

  bool triggered_good(const Process& proc) const {
    for (const auto& tr : proc.triggers)
      if (touched_now(tr.net) && good_changed[tr.net] &&
          trigger_matches(tr.kind, good_old[tr.net], good[tr.net]))
        return true;
    return false;
  }

  bool triggered_fault(const Process& proc, uint32_t f) const {
    for (const auto& tr : proc.triggers) {
      if (!touched_now(tr.net)) continue;
      const LogicVector& o = old_for(tr.net, f);
      const LogicVector& v = store.value_of(tr.net, f, good[tr.net]);
      if (o != v && trigger_matches(tr.kind, o, v)) return true;
    }
    return false;
  }

  bool reads_entries(const Process& proc, uint32_t f) const {
    for (NetId n : proc.read_set)
      if (store.find(n, f)) return true;
    return false;
  }

  // One activation of the good machine (fault < 0) or a fault instance.
  void execute(ProcessId pid, ProcState& st, int64_t fault, const std::vector<uint32_t>& detach, uint64_t gen) {
    const Process& proc = design.processes[pid];
    ++counters.process_activations;
    uint32_t f = fault < 0 ? 0 : static_cast<uint32_t>(fault);
    if (fault >= 0) count_bad(f);
    auto read = [&](NetId n) -> const LogicVector& {
      return fault < 0 ? good[n] : store.value_of(n, f, good[n]);
    };
    auto make = [&](NetId n, uint32_t lsb, LogicVector v) {
      Event ev;
      ev.net = n;
      ev.lsb = lsb;
      ev.value = std::move(v);
      if (fault < 0) {
        ev.kind = Event::Kind::GoodWrite;
        ev.detach = detach;
      } else {
        ev.kind = Event::Kind::BadWrite;
        ev.fault = f;
      }
      return ev;
    };
    auto blocking = [&](NetId n, uint32_t lsb, LogicVector v) { schedule(now, make(n, lsb, std::move(v))); };
    auto nonblocking = [&](NetId n, uint32_t lsb, LogicVector v) { nba.push_back(make(n, lsb, std::move(v))); };
    ExecResult r = execute_process(proc, st.pc, read, blocking, nonblocking);
    st.mode = r.mode;
    st.pc = r.pc;
    if (r.mode == ProcMode::Delayed) {
      st.wake_time = now + r.delay;
      Event ev;
      ev.kind = fault < 0 ? Event::Kind::GoodWake : Event::Kind::BadWake;
      ev.proc = pid;
      ev.fault = f;
      ev.gen = gen;
      schedule(st.wake_time, std::move(ev));
    }
  }

  void run_process(ProcessId pid, bool initial, bool good_woken, const std::vector<Event>& bad_wakes) {
    const Process& proc = design.processes[pid];
    ProcState& gs = procs[pid];
    auto& insts = inst[pid];

    bool runs_good = (initial && gs.mode == ProcMode::Ready) ||
                     (gs.mode == ProcMode::Waiting && triggered_good(proc)) ||
                     (good_woken && gs.mode == ProcMode::Delayed && gs.wake_time == now);

    std::vector<uint32_t> rel;
    for (const auto& tr : proc.triggers)
      if (touched_now(tr.net))
        for (const Rec& r : records[tr.net]) rel.push_back(r.fault);
    if (runs_good)
      for (NetId n : proc.read_set)
        for (const Entry& e : store.entries(n)) rel.push_back(e.fault);
    sort_unique(rel);

    auto find_inst = [&](uint32_t f) {
      return std::lower_bound(insts.begin(), insts.end(), f,
                              [](const Instance& i, uint32_t x) { return i.fault < x; });
    };

    // Instances that must run alongside (or instead of) the good machine.
    std::vector<uint32_t> to_run;
    for (uint32_t f : rel) {
      if (!active[f]) continue;
      auto it = find_inst(f);
      if (it != insts.end() && it->fault == f) continue;
      bool runs_f = (initial && gs.mode == ProcMode::Ready) ||
                    (gs.mode == ProcMode::Waiting && triggered_fault(proc, f)) ||
                    (good_woken && gs.mode == ProcMode::Delayed && gs.wake_time == now);
      if (runs_f == runs_good && !(runs_f && reads_entries(proc, f))) continue;
      Instance created{f, gs, next_gen++};
      if (!runs_f && created.state.mode == ProcMode::Delayed) {
        Event ev;
        ev.kind = Event::Kind::BadWake;
        ev.proc = pid;
        ev.fault = f;
        ev.gen = created.gen;
        schedule(created.state.wake_time, std::move(ev));
      }
      insts.insert(it, created);
      if (runs_f) to_run.push_back(f);
    }
    for (const auto& i : insts) {
      if (sorted_contains(to_run, i.fault)) continue;
      bool run = false;
      if (i.state.mode == ProcMode::Waiting) {
        run = triggered_fault(proc, i.fault);
      } else if (i.state.mode == ProcMode::Delayed && i.state.wake_time == now) {
        for (const auto& w : bad_wakes)
          if (w.proc == pid && w.fault == i.fault && w.gen == i.gen) run = true;
      }
      if (run) to_run.push_back(i.fault);
    }
    sort_unique(to_run);

    std::vector<uint32_t> detach;
    detach.reserve(insts.size());
    for (const auto& i : insts) detach.push_back(i.fault);

    if (runs_good) execute(pid, gs, -1, detach, 0);
    for (uint32_t f : to_run) {
      auto it = find_inst(f);
      execute(pid, it->state, f, {}, it->gen);
    }
    std::erase_if(insts, [&](const Instance& i) { return i.state == gs; });
  }

  void drop(uint32_t f) {
    active[f] = 0;
    --active_count;
    store.purge(f);
    for (auto& v : inst) std::erase_if(v, [&](const Instance& i) { return i.fault == f; });
  }

  void run_time_step(std::vector<Event> delta, bool initial) {
    uint64_t changed_deltas = 0;
    bool first = true;
    std::vector<ProcessId> good_wakes, runnable;
    std::vector<Event> bad_wakes;
    std::vector<NodeId> nodes;
    for (;;) {
      bool init_delta = initial && first;
      if (delta.empty() && !init_delta) {
        if (nba.empty()) break;
        delta.swap(nba);
      }
      ++stamp;
      touched.clear();
      good_wakes.clear();
      bad_wakes.clear();
      for (auto& ev : delta) apply(ev, good_wakes, bad_wakes);
      delta.clear();
      if (init_delta)
        for (NetId n = 0; n < design.nets.size(); ++n)
          if (!site_faults[n].empty()) touch(n);
      if (settle_touched() && ++changed_deltas > opt.delta_limit) {
        std::vector<std::string> names;
        for (NetId n : touched)
          if (any_changed[n] && names.size() < 8) names.push_back(design.nets[n].path);
        throw OscillationError(now, std::move(names));
      }

      nodes.clear();
      if (init_delta) {
        for (NodeId i = 0; i < design.nodes.size(); ++i) nodes.push_back(i);
      } else {
        for (NetId n : touched)
          if (any_changed[n])
            for (NodeId nd : design.fanout[n])
              if (node_stamp[nd] != stamp) {
                node_stamp[nd] = stamp;
                nodes.push_back(nd);
              }
        std::sort(nodes.begin(), nodes.end());
      }
      for (NodeId nd : nodes) eval_node(nd, init_delta);

      runnable.clear();
      auto add = [&](ProcessId p) {
        if (proc_stamp[p] != stamp) {
          proc_stamp[p] = stamp;
          runnable.push_back(p);
        }
      };
      if (init_delta)
        for (ProcessId p = 0; p < procs.size(); ++p) add(p);
      for (NetId n : touched)
        if (any_changed[n])
          for (ProcessId p : design.sensitive[n]) add(p);
      for (ProcessId p : good_wakes) add(p);
      for (const auto& w : bad_wakes) add(w.proc);
      std::sort(runnable.begin(), runnable.end());
      for (ProcessId p : runnable) {
        bool woken = std::find(good_wakes.begin(), good_wakes.end(), p) != good_wakes.end();
        run_process(p, init_delta, woken, bad_wakes);
      }

      first = false;
      if (auto it = wheel.find(now); it != wheel.end()) {
        delta = std::move(it->second);
        wheel.erase(it);
      }
    }
  }

  void strobe() {
    StrobeSample s;
    s.time = now;
    for (NetId o : design.outputs) s.outputs.push_back(good[o]);
    samples.push_back(std::move(s));

    std::vector<uint32_t> faults;
    for (NetId o : design.outputs)
      for (const Entry& e : store.entries(o)) faults.push_back(e.fault);
    sort_unique(faults);
    std::vector<FaultOutcome::Sample> obs;
    for (uint32_t f : faults) {
      obs.clear();
      for (NetId o : design.outputs) obs.push_back({o, &good[o], &store.value_of(o, f, good[o])});
      if (outcomes[f].observe(now, obs) && opt.drop) drop(f);
    }
  }

  void run() {
    const size_t nets = design.nets.size();
    good.clear();
    for (const auto& n : design.nets) good.emplace_back(n.width, LogicBit::X);
    procs.clear();
    for (const auto& p : design.processes) procs.push_back(initial_proc_state(p));
    inst.assign(design.processes.size(), {});
    active.assign(batch.batch_size, 0);
    for (size_t f = 0; f < batch.faults.size(); ++f) active[f] = 1;
    active_count = batch.faults.size();
    site_faults.assign(nets, {});
    for (uint32_t f = 0; f < batch.faults.size(); ++f) site_faults[batch.faults[f].net].push_back(f);
    outcomes.assign(batch.faults.size(), {});
    counters = {};
    counters.per_node_evaluations.assign(design.nodes.size(), 0);
    bad_evals = 0;
    bad_per_fault.assign(batch.faults.size(), 0);
    audit_violations = 0;
    log.clear();
    samples.clear();
    wheel.clear();
    nba.clear();
    stamp = 0;
    touch_stamp.assign(nets, 0);
    good_old.assign(nets, LogicVector(1));
    old_entries.assign(nets, {});
    good_changed.assign(nets, 0);
    any_changed.assign(nets, 0);
    records.assign(nets, {});
    node_stamp.assign(design.nodes.size(), 0);
    proc_stamp.assign(design.processes.size(), 0);

    StimulusCursor cursor(stim);
    size_t strobe_pos = 0;
    uint64_t t = 0;
    bool initial = true;
    for (;;) {
      now = t;
      std::vector<Event> first;
      if (cursor.next_time() == t)
        for (auto& w : cursor.take(t)) {
          Event ev;
          ev.kind = Event::Kind::GoodWrite;
          ev.net = w.net;
          ev.value = std::move(w.value);
          first.push_back(std::move(ev));
        }
      if (auto it = wheel.find(t); it != wheel.end()) {
        for (auto& ev : it->second) first.push_back(std::move(ev));
        wheel.erase(it);
      }
      run_time_step(std::move(first), initial);
      initial = false;
      if (opt.audit) audit_violations += store.audit(good);
      if (hook) hook(t, *owner);

      if (strobe_pos < stim.strobes.size() && stim.strobes[strobe_pos] == t) {
        ++strobe_pos;
        strobe();
        if (active_count == 0) break;
      }

      std::optional<uint64_t> next;
      auto consider = [&](uint64_t c) {
        if (!next || c < *next) next = c;
      };
      if (!wheel.empty()) consider(wheel.begin()->first);
      if (auto c = cursor.next_time()) consider(*c);
      if (strobe_pos < stim.strobes.size()) consider(stim.strobes[strobe_pos]);
      if (!next || *next > stim.end_time) break;
      t = *next;
    }
  }

  const ConcurrentBatchSim* owner = nullptr;
};

ConcurrentBatchSim::ConcurrentBatchSim(const Design& design, const StimulusProgram& stim, const FaultBatch& batch,
                                       Options options)
    : impl_(new Impl(design, stim, batch, options)) {
  impl_->owner = this;
}

ConcurrentBatchSim::~ConcurrentBatchSim() { delete impl_; }

void ConcurrentBatchSim::set_step_hook(StepHook hook) { impl_->hook = std::move(hook); }
void ConcurrentBatchSim::run() { impl_->run(); }
const std::vector<FaultOutcome>& ConcurrentBatchSim::outcomes() const { return impl_->outcomes; }
const BadGateStore& ConcurrentBatchSim::store() const { return impl_->store; }
const LogicVector& ConcurrentBatchSim::good_value(NetId net) const { return impl_->good[net]; }
const std::vector<StrobeSample>& ConcurrentBatchSim::good_samples() const { return impl_->samples; }
const SimCounters& ConcurrentBatchSim::counters() const { return impl_->counters; }
uint64_t ConcurrentBatchSim::bad_evaluations() const { return impl_->bad_evals; }
const std::vector<uint64_t>& ConcurrentBatchSim::bad_evaluations_per_fault() const { return impl_->bad_per_fault; }
uint64_t ConcurrentBatchSim::audit_violations() const { return impl_->audit_violations; }
const std::vector<ConcurrentBatchSim::EventRecord>& ConcurrentBatchSim::events() const { return impl_->log; }
size_t ConcurrentBatchSim::instance_count(ProcessId p) const { return impl_->inst[p].size(); }
bool ConcurrentBatchSim::is_active(uint32_t fault) const { return fault < impl_->active.size() && impl_->active[fault]; }

}  // namespace rtlfsim
