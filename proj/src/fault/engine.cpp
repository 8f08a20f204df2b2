#include "rtlfsim/fault/engine.hpp"

#include <atomic>
#include <chrono>
#include <exception>
#include <mutex>
#include <thread>

namespace rtlfsim {
namespace {

using Clock = std::chrono::steady_clock;

FaultOutcome hyperactive() {
  FaultOutcome o;
  o.status = FaultStatus::Hyperactive;
  o.reason = "oscillation";
  return o;
}

struct Work {
  std::vector<FaultOutcome> outcomes;
  std::vector<uint64_t> bad_per_fault;
  ModeCounters counters;
  uint64_t audit = 0;
};

void add(ModeCounters& a, const ModeCounters& b) {
  a.events_processed += b.events_processed;
  a.node_evaluations += b.node_evaluations;
  a.bad_evaluations += b.bad_evaluations;
  a.process_activations += b.process_activations;
  a.batches += b.batches;
}

void append(Work& dst, Work&& src) {
  for (auto& o : src.outcomes) dst.outcomes.push_back(std::move(o));
  dst.bad_per_fault.insert(dst.bad_per_fault.end(), src.bad_per_fault.begin(), src.bad_per_fault.end());
  add(dst.counters, src.counters);
  dst.audit += src.audit;
}

// Runs `jobs` on up to `workers` threads; results keep job order and the
// first exception is rethrown.
template <class Fn>
std::vector<Work> parallel(size_t jobs, unsigned workers, Fn&& fn) {
  std::vector<Work> out(jobs);
  std::atomic<size_t> next{0};
  std::exception_ptr error;
  std::mutex mu;
  auto worker = [&] {
    for (;;) {
      size_t i = next++;
      if (i >= jobs) return;
      try {
        out[i] = fn(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!error) error = std::current_exception();
        next = jobs;
      }
    }
  };
  unsigned n = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(jobs)));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (unsigned i = 0; i < n; ++i) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }
  if (error) std::rethrow_exception(error);
  return out;
}

class GoodOscillationCheck {
public:
  GoodOscillationCheck(const Design& d, const StimulusProgram& s, uint64_t limit) : d_(d), s_(s), limit_(limit) {}

  // Rethrows the good machine's own oscillation, if it has one.
  void check() {
    std::call_once(once_, [&] {
      try {
        SimOptions o;
        o.delta_limit = limit_;
        Simulator(d_, s_, o).run();
      } catch (const OscillationError&) {
        error_ = std::current_exception();
      }
    });
    if (error_) std::rethrow_exception(error_);
  }

private:
  const Design& d_;
  const StimulusProgram& s_;
  uint64_t limit_;
  std::once_flag once_;
  std::exception_ptr error_;
};

Work run_batch(const Design& design, const StimulusProgram& stim, const FaultBatch& batch,
               const FaultSimOptions& options, GoodOscillationCheck& good_check) {
  ConcurrentBatchSim::Options o;
  o.drop = options.drop;
  o.delta_limit = options.delta_limit;
  o.audit = options.audit;
  try {
    ConcurrentBatchSim sim(design, stim, batch, o);
    sim.run();
    Work w;
    w.outcomes = sim.outcomes();
    w.bad_per_fault = sim.bad_evaluations_per_fault();
    w.counters.events_processed = sim.counters().events_processed;
    w.counters.node_evaluations = sim.counters().node_evaluations;
    w.counters.bad_evaluations = sim.bad_evaluations();
    w.counters.process_activations = sim.counters().process_activations;
    w.counters.batches = 1;
    w.audit = sim.audit_violations();
    return w;
  } catch (const OscillationError&) {
    if (batch.faults.size() == 1) {
      good_check.check();
      Work w;
      w.outcomes.push_back(hyperactive());
      w.bad_per_fault.push_back(0);
      return w;
    }
  }
  size_t half = batch.faults.size() / 2;
  FaultBatch lo{{batch.faults.begin(), batch.faults.begin() + static_cast<std::ptrdiff_t>(half)}, batch.batch_size};
  FaultBatch hi{{batch.faults.begin() + static_cast<std::ptrdiff_t>(half), batch.faults.end()}, batch.batch_size};
  Work w = run_batch(design, stim, lo, options, good_check);
  append(w, run_batch(design, stim, hi, options, good_check));
  return w;
}

FaultSimResult finish(const Design& design, const std::vector<Fault>& faults, Work&& w, const std::string& mode,
                      const FaultSimOptions& options, double seconds) {
  FaultSimResult r;
  r.outcomes = std::move(w.outcomes);
  r.bad_evaluations_per_fault = std::move(w.bad_per_fault);
  r.audit_violations = w.audit;
  r.report = make_report(design, faults, r.outcomes, mode, options);
  r.report.counters = w.counters;
  r.report.counters.wall_seconds = seconds;
  return r;
}

}  // namespace

FaultSimResult run_concurrent(const Design& design, const std::vector<Fault>& faults, const StimulusProgram& stim,
                              const FaultSimOptions& options) {
  std::vector<FaultBatch> batches = make_batches(faults, options.batch_size);
  GoodOscillationCheck good_check(design, stim, options.delta_limit);
  auto t0 = Clock::now();
  std::vector<Work> parts = parallel(batches.size(), options.workers, [&](size_t i) {
    return run_batch(design, stim, batches[i], options, good_check);
  });
  double seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  Work all;
  for (auto& p : parts) append(all, std::move(p));
  return finish(design, faults, std::move(all), "concurrent", options, seconds);
}

FaultSimResult run_serial(const Design& design, const std::vector<Fault>& faults, const StimulusProgram& stim,
                          const FaultSimOptions& options) {
  auto t0 = Clock::now();
  SimOptions ref_opts;
  ref_opts.delta_limit = options.delta_limit;
  SimTrace ref = Simulator(design, stim, ref_opts).run();

  std::vector<Work> parts = parallel(faults.size(), options.workers, [&](size_t i) {
    const Fault& f = faults[i];
    SimOptions o;
    o.delta_limit = options.delta_limit;
    o.filter = site_filter(f);
    Work w;
    w.outcomes.resize(1);
    w.bad_per_fault.push_back(0);
    FaultOutcome& out = w.outcomes[0];
    size_t strobe = 0;
    std::vector<FaultOutcome::Sample> obs;
    Simulator sim(design, stim, o);
    try {
      SimTrace tr = sim.run([&](uint64_t t, const Simulator& s) {
        const StrobeSample& good = ref.samples.at(strobe++);
        obs.clear();
        for (size_t k = 0; k < design.outputs.size(); ++k)
          obs.push_back({design.outputs[k], &good.outputs[k], &s.value(design.outputs[k])});
        return !(out.observe(t, obs) && options.drop);
      });
      w.counters.events_processed = tr.counters.events_processed;
      w.counters.node_evaluations = tr.counters.node_evaluations;
      w.counters.process_activations = tr.counters.process_activations;
    } catch (const OscillationError&) {
      out = hyperactive();
    }
    return w;
  });
  Work all;
  all.counters.events_processed = ref.counters.events_processed;
  all.counters.node_evaluations = ref.counters.node_evaluations;
  all.counters.process_activations = ref.counters.process_activations;
  for (auto& p : parts) append(all, std::move(p));
  double seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  return finish(design, faults, std::move(all), "serial", options, seconds);
}

DetectionReport make_report(const Design& design, const std::vector<Fault>& faults,
                            const std::vector<FaultOutcome>& outcomes, const std::string& mode,
                            const FaultSimOptions& options) {
  DetectionReport r;
  r.design = design.top;
  r.mode = mode;
  r.batch_size = mode == "serial" ? 1 : options.batch_size;
  r.drop = options.drop;
  for (size_t i = 0; i < faults.size(); ++i) {
    const Fault& f = faults[i];
    const FaultOutcome& o = outcomes.at(i);
    FaultRecord rec;
    rec.net = design.nets[f.net].path;
    rec.bit = f.bit;
    rec.polarity = f.polarity;
    rec.status = o.status;
    if (o.time) {
      rec.time = o.time;
      rec.output = design.nets[o.output].path;
      rec.good = o.good.to_string();
      rec.bad = o.bad.to_string();
    }
    rec.detect_count = o.detect_count;
    rec.reason = o.reason;
    r.faults.push_back(std::move(rec));
  }
  return r;
}

}  // namespace rtlfsim
