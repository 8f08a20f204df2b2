#include "rtlfsim/sim/simulator.hpp"

#include <algorithm>
#include <sstream>

#include "json.hpp"

namespace rtlfsim {
namespace {

std::string join_nets(const std::vector<std::string>& nets) {
  std::string s;
  for (const auto& n : nets) s += (s.empty() ? "" : ", ") + n;
  return s;
}

}  // namespace

OscillationError::OscillationError(uint64_t time, std::vector<std::string> nets)
    : std::runtime_error("delta limit exceeded at time " + std::to_string(time) + "; oscillating nets: " +
                         join_nets(nets)),
      time_(time),
      nets_(std::move(nets)) {}

Simulator::Simulator(const Design& design, const StimulusProgram& stimulus, SimOptions options)
    : design_(design), stimulus_(stimulus), options_(std::move(options)) {}

void Simulator::schedule(uint64_t time, Event ev) {
  if (time < now_) throw InternalError("event scheduled in the past");
  wheel_[time].push_back(std::move(ev));
}

SimTrace Simulator::run(const StrobeHook& hook) {
  values_.clear();
  for (const auto& n : design_.nets) values_.emplace_back(n.width, LogicBit::X);
  procs_.clear();
  for (const auto& p : design_.processes) procs_.push_back(initial_proc_state(p));
  wheel_.clear();
  nba_.clear();
  counters_ = {};
  counters_.per_node_evaluations.assign(design_.nodes.size(), 0);
  touch_stamp_.assign(design_.nets.size(), 0);
  node_stamp_.assign(design_.nodes.size(), 0);
  old_.assign(design_.nets.size(), LogicVector(1));
  stamp_ = 0;

  SimTrace trace;
  trace.outputs = design_.outputs;
  trace.warnings = stimulus_.warnings;

  StimulusCursor cursor(stimulus_);
  size_t strobe_pos = 0;
  uint64_t t = 0;
  bool initial = true;
  for (;;) {
    now_ = t;
    std::vector<Event> first;
    if (cursor.next_time() == t)
      for (auto& w : cursor.take(t)) first.push_back({Event::Kind::Write, w.net, 0, std::move(w.value), kNoId});
    if (auto it = wheel_.find(t); it != wheel_.end()) {
      for (auto& ev : it->second) first.push_back(std::move(ev));
      wheel_.erase(it);
    }
    run_time_step(std::move(first), initial);
    initial = false;

    if (strobe_pos < stimulus_.strobes.size() && stimulus_.strobes[strobe_pos] == t) {
      ++strobe_pos;
      StrobeSample s;
      s.time = t;
      for (NetId o : design_.outputs) s.outputs.push_back(values_[o]);
      trace.samples.push_back(std::move(s));
      if (hook && !hook(t, *this)) {
        trace.stopped_early = true;
        break;
      }
    }

    std::optional<uint64_t> next;
    auto consider = [&](uint64_t c) {
      if (!next || c < *next) next = c;
    };
    if (!wheel_.empty()) consider(wheel_.begin()->first);
    if (auto c = cursor.next_time()) consider(*c);
    if (strobe_pos < stimulus_.strobes.size()) consider(stimulus_.strobes[strobe_pos]);
    if (!next || *next > stimulus_.end_time) break;
    t = *next;
  }
  trace.counters = counters_;
  return trace;
}

void Simulator::run_time_step(std::vector<Event> delta, bool initial) {
  auto& touch_stamp = touch_stamp_;
  auto& node_stamp = node_stamp_;
  auto& old = old_;
  auto& stamp = stamp_;
  std::vector<NetId> touched, changed;
  std::vector<NodeId> nodes;
  std::vector<ProcessId> runnable, wakes;
  std::vector<const LogicVector*> inputs;
  uint64_t changed_deltas = 0;
  bool first_delta = true;

  auto touch = [&](NetId n) {
    if (touch_stamp[n] != stamp) {
      touch_stamp[n] = stamp;
      old[n] = values_[n];
      touched.push_back(n);
    }
  };

  for (;;) {
    if (delta.empty() && !(initial && first_delta)) {
      if (nba_.empty()) break;
      delta.swap(nba_);
    }
    ++stamp;
    touched.clear();
    changed.clear();
    wakes.clear();
    for (auto& ev : delta) {
      ++counters_.events_processed;
      if (ev.kind == Event::Kind::Wake) {
        wakes.push_back(ev.proc);
        continue;
      }
      touch(ev.net);
      if (ev.lsb == 0 && ev.value.width() == values_[ev.net].width())
        values_[ev.net] = std::move(ev.value);
      else
        values_[ev.net].assign_slice(ev.lsb, ev.value);
    }
    delta.clear();
    if (const auto& f = options_.filter) {
      if (initial && first_delta) touch(f->net);
      if (touch_stamp[f->net] == stamp) values_[f->net] = f->apply(values_[f->net]);
    }
    for (NetId n : touched)
      if (values_[n] != old[n]) changed.push_back(n);
    if (!changed.empty() && ++changed_deltas > options_.delta_limit) {
      std::vector<std::string> names;
      for (size_t i = 0; i < changed.size() && i < 8; ++i) names.push_back(design_.nets[changed[i]].path);
      throw OscillationError(now_, std::move(names));
    }

    nodes.clear();
    if (initial && first_delta) {
      for (NodeId i = 0; i < design_.nodes.size(); ++i) nodes.push_back(i);
    } else {
      for (NetId n : changed)
        for (NodeId nd : design_.fanout[n])
          if (node_stamp[nd] != stamp) {
            node_stamp[nd] = stamp;
            nodes.push_back(nd);
          }
      std::sort(nodes.begin(), nodes.end());
    }
    for (NodeId nd : nodes) {
      const NetlistNode& node = design_.nodes[nd];
      inputs.clear();
      for (NetId in : node.inputs) inputs.push_back(&values_[in]);
      ++counters_.node_evaluations;
      ++counters_.per_node_evaluations[nd];
      LogicVector v = eval_primitive(node.kind, std::span<const LogicVector* const>(inputs), node.params);
      schedule(now_ + node.delay, {Event::Kind::Write, node.output, 0, std::move(v), kNoId});
    }

    runnable.clear();
    if (initial && first_delta)
      for (ProcessId p = 0; p < procs_.size(); ++p)
        if (procs_[p].mode == ProcMode::Ready) runnable.push_back(p);
    for (NetId n : changed)
      for (ProcessId p : design_.sensitive[n]) {
        if (procs_[p].mode != ProcMode::Waiting) continue;
        for (const auto& tr : design_.processes[p].triggers)
          if (tr.net == n && trigger_matches(tr.kind, old[n], values_[n])) {
            runnable.push_back(p);
            break;
          }
      }
    for (ProcessId p : wakes)
      if (procs_[p].mode == ProcMode::Delayed && procs_[p].wake_time == now_) runnable.push_back(p);
    std::sort(runnable.begin(), runnable.end());
    runnable.erase(std::unique(runnable.begin(), runnable.end()), runnable.end());
    for (ProcessId p : runnable) run_process(p);

    first_delta = false;
    if (auto it = wheel_.find(now_); it != wheel_.end()) {
      delta = std::move(it->second);
      wheel_.erase(it);
    }
  }
}

void Simulator::run_process(ProcessId pid) {
  const Process& proc = design_.processes[pid];
  ++counters_.process_activations;
  const auto& monitor = options_.access_monitor;
  auto read = [&](NetId n) -> const LogicVector& {
    if (monitor) monitor(pid, n, false);
    return values_[n];
  };
  auto blocking = [&](NetId n, uint32_t lsb, LogicVector v) {
    if (monitor) monitor(pid, n, true);
    schedule(now_, {Event::Kind::Write, n, lsb, std::move(v), kNoId});
  };
  auto nonblocking = [&](NetId n, uint32_t lsb, LogicVector v) {
    if (monitor) monitor(pid, n, true);
    nba_.push_back({Event::Kind::Write, n, lsb, std::move(v), kNoId});
  };
  ExecResult r = execute_process(proc, procs_[pid].pc, read, blocking, nonblocking);
  ProcState& st = procs_[pid];
  st.mode = r.mode;
  st.pc = r.pc;
  if (r.mode == ProcMode::Delayed) {
    st.wake_time = now_ + r.delay;
    schedule(st.wake_time, {Event::Kind::Wake, kNoId, 0, LogicVector(1), pid});
  }
}

std::string trace_to_csv(const Design& design, const SimTrace& trace) {
  std::ostringstream os;
  os << "time,net,value\n";
  for (const auto& s : trace.samples)
    for (size_t i = 0; i < trace.outputs.size(); ++i)
      os << s.time << "," << design.nets[trace.outputs[i]].path << "," << s.outputs[i].to_string() << "\n";
  return os.str();
}

std::string counters_to_json(const SimCounters& c) {
  nlohmann::json j;
  j["events_processed"] = c.events_processed;
  j["node_evaluations"] = c.node_evaluations;
  j["process_activations"] = c.process_activations;
  return j.dump();
}

}  // namespace rtlfsim
