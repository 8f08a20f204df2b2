// Acceptance checks. Prints one [PASS]/[FAIL] line per criterion and exits
// non-zero when any criterion fails.
#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "rtlfsim/fault/engine.hpp"
#include "test_support.hpp"

using namespace rtlfsim;
using namespace rtlfsim::test;

namespace {

struct Corpus {
  std::string name;
  Design d;
  StimulusProgram st;
  std::vector<Fault> faults;
};

Corpus load(const std::string& name) {
  Corpus c{name, corpus_design(name), {}, {}};
  c.st = corpus_stim(name, c.d);
  c.faults = generate_fault_list(c.d);
  return c;
}

struct Outcome {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void report(const std::string& id, const std::string& title, const std::function<Outcome()>& check) {
  Outcome o;
  try {
    o = check();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  if (!o.pass) ++failures;
  std::cout << (o.pass ? "[PASS] " : "[FAIL] ") << id << " " << title;
  if (!o.detail.empty()) std::cout << ": " << o.detail;
  std::cout << std::endl;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v.size() % 2 ? v[v.size() / 2] : (v[v.size() / 2 - 1] + v[v.size() / 2]) / 2;
}

std::map<OutcomeKey, FaultRecord> by_site(const DetectionReport& r) {
  std::map<OutcomeKey, FaultRecord> m;
  for (const auto& f : r.faults) m[{f.net, f.bit, f.polarity}] = f;
  return m;
}

uint64_t seed() {
  const char* s = std::getenv("RTLFSIM_SEED");
  return s && *s ? std::strtoull(s, nullptr, 10) : 20261014;
}

// ---- AC1 / AC6 -------------------------------------------------------------

uint64_t audit_total = 0;
size_t audit_runs = 0;

Outcome oracle_equivalence(const std::vector<Corpus>& corpus) {
  auto t0 = std::chrono::steady_clock::now();
  std::ostringstream bad;
  size_t faults = 0, runs = 0;
  for (const auto& c : corpus) {
    FaultSimOptions o;
    DetectionReport serial = run_serial(c.d, c.faults, c.st, o).report;
    faults += c.faults.size();
    for (uint32_t w : {1u, 7u, 32u, 256u}) {
      o.batch_size = w;
      o.audit = true;
      FaultSimResult k = run_concurrent(c.d, c.faults, c.st, o);
      audit_total += k.audit_violations;
      ++audit_runs;
      ++runs;
      auto diffs = compare_outcomes(serial, k.report);
      if (!diffs.empty()) bad << " " << c.name << "/W=" << w << " " << diffs.size() << " diffs (" << diffs[0] << ")";
    }
  }
  double t = seconds_since(t0);
  std::ostringstream d;
  d << corpus.size() << " designs, " << faults << " faults, " << runs << " concurrent runs, " << t << " s";
  if (t >= 60) bad << " took longer than 60 s";
  std::string b = bad.str();
  return {b.empty(), b.empty() ? d.str() : d.str() + ";" + b};
}

// ---- AC2 -------------------------------------------------------------------

Outcome figure1() {
  Design d = corpus_design("fig1");
  StimulusProgram st = corpus_stim("fig1", d);
  NetId a = *d.find_net("a"), b = *d.find_net("b"), dn = *d.find_net("d"), q = *d.find_net("q");
  FaultBatch batch;
  batch.batch_size = 2;
  batch.faults = {{0, a, 0, Polarity::SA1}, {1, b, 0, Polarity::SA1}};
  ConcurrentBatchSim::Options opt;
  opt.record_events = true;
  ConcurrentBatchSim sim(d, st, batch, opt);
  std::vector<std::string> errors;
  auto expect = [&](bool ok, const std::string& what) {
    if (!ok) errors.push_back(what);
  };
  auto entry = [&](const ConcurrentBatchSim& s, NetId n, uint32_t f) -> std::string {
    const LogicVector* v = s.store().find(n, f);
    return v ? v->to_string() : "none";
  };
  bool saw0 = false, saw5 = false;
  sim.set_step_hook([&](uint64_t t, const ConcurrentBatchSim& s) {
    expect(s.store().entries_for(1) == 0, "F2 has a store entry at t=" + std::to_string(t));
    if (t == 0) {
      saw0 = true;
      expect(s.good_value(a).to_string() == "1'b0" && entry(s, a, 0) == "1'b1", "F1 not diverged at a");
      expect(s.good_value(b).to_string() == "1'b1" && entry(s, b, 1) == "none", "F2 not masked at b");
      expect(s.good_value(dn).to_string() == "1'b0" && entry(s, dn, 0) == "1'b1", "F1 did not reach d");
      expect(entry(s, q, 0) == "none", "q entry before the clock edge");
    }
    if (t == 5) {
      saw5 = true;
      expect(s.good_value(q).to_string() == "1'b0", "good q is not 0 after the edge");
      expect(entry(s, q, 0) == "1'b1", "q store lacks F1's entry after the NBA commit");
    }
  });
  sim.run();
  expect(saw0 && saw5, "time steps 0 and 5 not observed");

  bool bad_d = false, bad_q = false;
  for (const auto& e : sim.events()) {
    if (e.fault == 0 && e.net == dn && e.time == 0 && e.value.to_string() == "1'b1") bad_d = true;
    if (e.fault == 0 && e.net == q && e.time == 5 && e.value.to_string() == "1'b1") bad_q = true;
    expect(e.fault != 1, "a bad event was generated for F2");
  }
  expect(bad_d, "no bad event for F1 on d");
  expect(bad_q, "no bad write of F1 on q");
  const auto& out = sim.outcomes();
  expect(out[0].status == FaultStatus::Detected && out[0].time == 7u && out[0].output == q, "F1 not detected at 7");
  expect(out[1].status == FaultStatus::Undetected, "F2 not undetected");
  expect(sim.bad_evaluations_per_fault()[1] == 0, "F2 was evaluated");
  if (errors.size() > 1) errors.erase(std::unique(errors.begin(), errors.end()), errors.end());
  std::string detail = errors.empty() ? "F1 a=1 vs 0, d=1 vs 0, q entry 1 after edge, detected at 7; F2 masked"
                                      : errors.front() + (errors.size() > 1 ? " (+" + std::to_string(errors.size() - 1) + " more)" : "");
  return {errors.empty(), detail};
}

// ---- AC3 -------------------------------------------------------------------

Outcome speedup() {
  Corpus c = load("fir");
  if (c.faults.size() < 500) return {false, "fir has only " + std::to_string(c.faults.size()) + " faults"};
  FaultSimOptions o;
  o.batch_size = 256;
  std::vector<double> ts, tc;
  uint64_t es = 0, ec = 0;
  bool same = true;
  for (int i = 0; i < 5; ++i) {
    FaultSimResult s = run_serial(c.d, c.faults, c.st, o);
    FaultSimResult k = run_concurrent(c.d, c.faults, c.st, o);
    ts.push_back(s.report.counters.wall_seconds);
    tc.push_back(k.report.counters.wall_seconds);
    es = s.report.counters.events_processed;
    ec = k.report.counters.events_processed;
    same &= compare_outcomes(s.report, k.report).empty();
  }
  double ms = median(ts), mc = median(tc);
  std::ostringstream d;
  d << c.faults.size() << " faults, serial " << ms << " s, concurrent " << mc << " s, speedup " << ms / mc
    << "x, events " << ec << " vs " << es;
  bool pass = same && mc <= 0.5 * ms && ec < es;
  if (!same) d << "; results differ";
  return {pass, d.str()};
}

// ---- AC4 -------------------------------------------------------------------

Outcome quiescence() {
  Design d = corpus_design("quiet");
  StimulusProgram st = corpus_stim("quiet", d);
  StimulusProgram settle = st;
  settle.end_time = 0;
  settle.strobes.clear();
  std::vector<NodeId> idle, busy;
  for (const auto& n : d.nodes) (d.nets[n.output].path.rfind("u_idle.", 0) == 0 ? idle : busy).push_back(n.id);
  if (idle.empty()) return {false, "no idle nodes found"};

  auto sum = [](const std::vector<uint64_t>& per, const std::vector<NodeId>& ids) {
    uint64_t s = 0;
    for (NodeId i : ids) s += per[i];
    return s;
  };
  SimTrace at0 = Simulator(d, settle).run();
  SimTrace full = Simulator(d, st).run();
  uint64_t idle_after = sum(full.counters.per_node_evaluations, idle) - sum(at0.counters.per_node_evaluations, idle);
  uint64_t busy_after = sum(full.counters.per_node_evaluations, busy) - sum(at0.counters.per_node_evaluations, busy) +
                        full.counters.process_activations - at0.counters.process_activations;

  FaultBatch batch{generate_fault_list(d), 64};
  ConcurrentBatchSim c0(d, settle, batch, {});
  c0.run();
  ConcurrentBatchSim c1(d, st, batch, {});
  c1.run();
  uint64_t idle_conc = sum(c1.counters().per_node_evaluations, idle) - sum(c0.counters().per_node_evaluations, idle);

  std::ostringstream s;
  s << idle.size() << " idle nodes: " << idle_after << " evaluations after settling (kernel), " << idle_conc
    << " (concurrent good machine); rest of the design: " << busy_after << " evaluations and activations";
  return {idle_after == 0 && idle_conc == 0 && busy_after > 0, s.str()};
}

// ---- AC5 -------------------------------------------------------------------

LogicBit bit_of(char c) {
  return c == '0' ? LogicBit::Zero : c == '1' ? LogicBit::One : c == 'x' ? LogicBit::X : LogicBit::Z;
}

LogicVector random_vec(std::mt19937_64& rng, uint32_t w, int unknown_pct) {
  LogicVector v(w, LogicBit::Zero);
  for (uint32_t i = 0; i < w; ++i) {
    int r = static_cast<int>(rng() % 100);
    v.set_bit(i, r < unknown_pct / 2 ? LogicBit::X
                 : r < unknown_pct   ? LogicBit::Z
                 : (rng() & 1)       ? LogicBit::One
                                     : LogicBit::Zero);
  }
  return v;
}

Outcome logic_algebra() {
  const char* v4 = "01xz";
  struct Table {
    PrimitiveKind k;
    const char* rows[4];
  };
  const Table binary[] = {
      {PrimitiveKind::And, {"0000", "01xx", "0xxx", "0xxx"}},  {PrimitiveKind::Or, {"01xx", "1111", "x1xx", "x1xx"}},
      {PrimitiveKind::Xor, {"01xx", "10xx", "xxxx", "xxxx"}},  {PrimitiveKind::Nand, {"1111", "10xx", "1xxx", "1xxx"}},
      {PrimitiveKind::Nor, {"10xx", "0000", "x0xx", "x0xx"}},  {PrimitiveKind::Xnor, {"10xx", "01xx", "xxxx", "xxxx"}},
  };
  size_t table_fail = 0, table_cases = 0;
  for (const auto& t : binary)
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        std::vector<LogicVector> in{LogicVector::from_bit(bit_of(v4[i])), LogicVector::from_bit(bit_of(v4[j]))};
        ++table_cases;
        table_fail += to_char(eval_primitive(t.k, std::span<const LogicVector>(in)).bit(0)) != t.rows[i][j];
      }
  const std::pair<PrimitiveKind, const char*> unary[] = {{PrimitiveKind::Not, "10xx"}, {PrimitiveKind::Buf, "01xz"}};
  for (const auto& [k, row] : unary)
    for (int i = 0; i < 4; ++i) {
      std::vector<LogicVector> in{LogicVector::from_bit(bit_of(v4[i]))};
      ++table_cases;
      table_fail += to_char(eval_primitive(k, std::span<const LogicVector>(in)).bit(0)) != row[i];
    }
  for (int s = 0; s < 4; ++s)
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) {
        char want = s == 0 ? v4[a] : s == 1 ? v4[b] : (a == b ? v4[a] : 'x');
        std::vector<LogicVector> in{LogicVector::from_bit(bit_of(v4[s])), LogicVector::from_bit(bit_of(v4[a])),
                                    LogicVector::from_bit(bit_of(v4[b]))};
        ++table_cases;
        table_fail += to_char(eval_primitive(PrimitiveKind::Mux2, std::span<const LogicVector>(in)).bit(0)) != want;
      }

  std::mt19937_64 rng(seed());
  const PrimitiveKind kinds[] = {PrimitiveKind::And,  PrimitiveKind::Or,   PrimitiveKind::Xor,  PrimitiveKind::Nand,
                                 PrimitiveKind::Nor,  PrimitiveKind::Xnor, PrimitiveKind::Not,  PrimitiveKind::Buf,
                                 PrimitiveKind::Mux2, PrimitiveKind::Add,  PrimitiveKind::Sub,  PrimitiveKind::Eq,
                                 PrimitiveKind::Neq,  PrimitiveKind::LtUnsigned, PrimitiveKind::ReduceAnd,
                                 PrimitiveKind::ReduceOr, PrimitiveKind::ReduceXor, PrimitiveKind::Shl,
                                 PrimitiveKind::ShrLogical, PrimitiveKind::Concat, PrimitiveKind::Mul};
  size_t mono_fail = 0;
  for (int it = 0; it < 10000; ++it) {
    PrimitiveKind k = kinds[rng() % std::size(kinds)];
    uint32_t w = 1 + static_cast<uint32_t>(rng() % 70);
    int unk = static_cast<int>(rng() % 3) * 5;
    std::vector<LogicVector> in;
    switch (k) {
      case PrimitiveKind::Not:
      case PrimitiveKind::Buf:
      case PrimitiveKind::ReduceAnd:
      case PrimitiveKind::ReduceOr:
      case PrimitiveKind::ReduceXor: in = {random_vec(rng, w, unk)}; break;
      case PrimitiveKind::Mux2: in = {random_vec(rng, 1, unk), random_vec(rng, w, unk), random_vec(rng, w, unk)}; break;
      case PrimitiveKind::Shl:
      case PrimitiveKind::ShrLogical: in = {random_vec(rng, w, unk), random_vec(rng, 3, unk)}; break;
      case PrimitiveKind::Mul: in = {random_vec(rng, w % 30 + 1, unk), random_vec(rng, w % 17 + 1, unk)}; break;
      default: in = {random_vec(rng, w, unk), random_vec(rng, w, unk)}; break;
    }
    LogicVector concrete = eval_primitive(k, std::span<const LogicVector>(in));
    for (auto& v : in)
      for (uint32_t i = 0; i < v.width(); ++i)
        if (rng() % 4 == 0) v.set_bit(i, LogicBit::X);
    LogicVector abstract = eval_primitive(k, std::span<const LogicVector>(in));
    for (uint32_t i = 0; i < abstract.width(); ++i) {
      LogicBit b = abstract.bit(i);
      if ((b == LogicBit::Zero || b == LogicBit::One) && concrete.bit(i) != b) {
        ++mono_fail;
        break;
      }
    }
  }

  size_t resolve_fail = 0;
  for (int it = 0; it < 10000; ++it) {
    uint32_t w = 1 + static_cast<uint32_t>(rng() % 100);
    int unk = 10 + static_cast<int>(rng() % 60);
    LogicVector a = random_vec(rng, w, unk), b = random_vec(rng, w, unk), c = random_vec(rng, w, unk);
    auto r = [](std::vector<LogicVector> v) { return resolve_drivers(v); };
    bool ok = r({a, b}) == r({b, a}) && r({r({a, b}), c}) == r({a, r({b, c})});
    resolve_fail += !ok;
  }
  std::ostringstream d;
  d << table_cases << " truth-table cases (" << table_fail << " failures), 10000 monotonicity cases (" << mono_fail
    << "), 10000 resolve cases (" << resolve_fail << ")";
  return {table_fail == 0 && mono_fail == 0 && resolve_fail == 0, d.str()};
}

// ---- AC6 -------------------------------------------------------------------

Outcome convergence_audit() {
  std::ostringstream d;
  d << audit_runs << " audited runs, " << audit_total << " entries equal to their good value";
  return {audit_runs > 0 && audit_total == 0, d.str()};
}

// ---- AC7 -------------------------------------------------------------------

Outcome determinism(const std::vector<Corpus>& corpus) {
  std::ostringstream bad;
  std::mt19937_64 rng(seed());
  for (const auto& c : corpus) {
    FaultSimOptions o;
    o.batch_size = 7;
    DetectionReport ref = run_concurrent(c.d, c.faults, c.st, o).report;
    for (int i = 0; i < 5; ++i) {
      DetectionReport again = run_concurrent(c.d, c.faults, c.st, o).report;
      again.counters.wall_seconds = ref.counters.wall_seconds;
      if (!(again == ref)) bad << " " << c.name << ": repeat " << i << " differs;";
    }
    auto want = by_site(ref);
    for (int i = 0; i < 5; ++i) {
      std::vector<Fault> perm = c.faults;
      std::shuffle(perm.begin(), perm.end(), rng);
      for (uint32_t j = 0; j < perm.size(); ++j) perm[j].id = j;
      DetectionReport got = run_concurrent(c.d, perm, c.st, o).report;
      if (by_site(got) != want) bad << " " << c.name << ": permutation " << i << " differs;";
    }
  }
  std::string b = bad.str();
  return {b.empty(), b.empty() ? std::to_string(corpus.size()) + " designs, 5 repeats and 5 permutations each" : b};
}

}  // namespace

int main() {
  std::vector<Corpus> corpus;
  for (const char* name : kCorpus) corpus.push_back(load(name));

  report("AC1", "oracle equivalence", [&] { return oracle_equivalence(corpus); });
  report("AC2", "figure 1 walkthrough", figure1);
  report("AC3", "self-relative speedup", speedup);
  report("AC4", "event-driven suppression", quiescence);
  report("AC5", "logic algebra", logic_algebra);
  report("AC6", "convergence audit", convergence_audit);
  report("AC7", "determinism and batch independence", [&] { return determinism(corpus); });
  return failures == 0 ? 0 : 1;
}
