#include <gtest/gtest.h>

#include "rtlfsim/fault/engine.hpp"
#include "test_support.hpp"

using namespace rtlfsim;
using namespace rtlfsim::test;

namespace {

struct Corpus {
  Design d;
  StimulusProgram st;
  std::vector<Fault> faults;
};

Corpus load(const std::string& name) {
  Corpus c{corpus_design(name), {}, {}};
  c.st = corpus_stim(name, c.d);
  c.faults = generate_fault_list(c.d);
  return c;
}

void expect_same_records(const DetectionReport& a, const DetectionReport& b) {
  ASSERT_EQ(a.faults.size(), b.faults.size());
  for (size_t i = 0; i < a.faults.size(); ++i) EXPECT_EQ(a.faults[i], b.faults[i]) << a.faults[i].net << " #" << i;
}

const FaultRecord& record(const DetectionReport& r, const std::string& net, uint32_t bit, Polarity p) {
  for (const auto& f : r.faults)
    if (f.net == net && f.bit == bit && f.polarity == p) return f;
  throw std::runtime_error("no record for " + net);
}

uint32_t fault_index(const Corpus& c, const std::string& net, uint32_t bit, Polarity p) {
  for (const auto& f : c.faults)
    if (c.d.nets[f.net].path == net && f.bit == bit && f.polarity == p) return f.id;
  throw std::runtime_error("no fault on " + net);
}

}  // namespace

class Equivalence : public ::testing::TestWithParam<const char*> {};

TEST_P(Equivalence, SmallBatchesMatchSerial) {
  Corpus c = load(GetParam());
  FaultSimOptions o;
  o.batch_size = 3;
  DetectionReport s = run_serial(c.d, c.faults, c.st, o).report;
  DetectionReport k = run_concurrent(c.d, c.faults, c.st, o).report;
  EXPECT_TRUE(compare_outcomes(s, k).empty());
  expect_same_records(s, k);
}

TEST_P(Equivalence, NoDropMatchesSerial) {
  Corpus c = load(GetParam());
  FaultSimOptions o;
  o.drop = false;
  o.batch_size = 64;
  DetectionReport s = run_serial(c.d, c.faults, c.st, o).report;
  DetectionReport k = run_concurrent(c.d, c.faults, c.st, o).report;
  expect_same_records(s, k);
}

TEST_P(Equivalence, MatchesGoldenReport) {
  Corpus c = load(GetParam());
  DetectionReport golden = report_from_json(slurp(design_path(std::string(GetParam()) + ".golden.json")));
  FaultSimOptions o;
  o.batch_size = 32;
  DetectionReport k = run_concurrent(c.d, c.faults, c.st, o).report;
  EXPECT_TRUE(compare_outcomes(golden, k).empty());
  expect_same_records(golden, k);
}

TEST_P(Equivalence, GoodMachineIsUntouched) {
  Corpus c = load(GetParam());
  SimTrace ref = Simulator(c.d, c.st).run();
  FaultBatch b{c.faults, static_cast<uint32_t>(c.faults.size())};
  ConcurrentBatchSim::Options o;
  o.drop = false;
  ConcurrentBatchSim sim(c.d, c.st, b, o);
  sim.run();
  ASSERT_EQ(sim.good_samples().size(), ref.samples.size());
  for (size_t i = 0; i < ref.samples.size(); ++i) {
    EXPECT_EQ(sim.good_samples()[i].time, ref.samples[i].time);
    EXPECT_EQ(sim.good_samples()[i].outputs, ref.samples[i].outputs) << "strobe " << i;
  }
  EXPECT_EQ(sim.counters().node_evaluations, ref.counters.node_evaluations);
}

TEST_P(Equivalence, FewerEventsThanSerial) {
  Corpus c = load(GetParam());
  FaultSimOptions o;
  o.batch_size = 256;
  uint64_t s = run_serial(c.d, c.faults, c.st, o).report.counters.events_processed;
  uint64_t k = run_concurrent(c.d, c.faults, c.st, o).report.counters.events_processed;
  EXPECT_LE(k, s);
}

INSTANTIATE_TEST_SUITE_P(Corpus, Equivalence,
                         ::testing::Values("fig1", "adder4", "counter8", "shift8", "fsm1011", "fir", "quiet"));

TEST(Engine, Fig1Outcomes) {
  Corpus c = load("fig1");
  DetectionReport r = run_concurrent(c.d, c.faults, c.st, {}).report;
  EXPECT_EQ(record(r, "a", 0, Polarity::SA1).status, FaultStatus::Detected);
  EXPECT_EQ(record(r, "a", 0, Polarity::SA1).time, 7u);
  EXPECT_EQ(record(r, "a", 0, Polarity::SA1).output, "q");
  EXPECT_EQ(record(r, "b", 0, Polarity::SA1).status, FaultStatus::Undetected);
  EXPECT_EQ(record(r, "q", 0, Polarity::SA1).status, FaultStatus::Detected);
  EXPECT_EQ(record(r, "clock", 0, Polarity::SA0).status, FaultStatus::Potential);
  EXPECT_EQ(record(r, "clock", 0, Polarity::SA0).bad, "1'bx");
  EXPECT_EQ(r.count(FaultStatus::Detected), 3u);
}

TEST(Engine, StuckClockNeverSeesAnEdge) {
  Corpus c = load("fig1");
  uint32_t f = fault_index(c, "clock", 0, Polarity::SA0);
  FaultBatch b{c.faults, 16};
  ConcurrentBatchSim sim(c.d, c.st, b, {});
  NetId q = *c.d.find_net("q");
  bool checked = false;
  sim.set_step_hook([&](uint64_t t, const ConcurrentBatchSim& s) {
    if (t != 5) return;
    checked = true;
    EXPECT_EQ(s.good_value(q).to_string(), "1'b0");
    const LogicVector* e = s.store().find(q, f);
    ASSERT_NE(e, nullptr);
    EXPECT_EQ(e->to_string(), "1'bx");
  });
  sim.run();
  EXPECT_TRUE(checked);
}

TEST(Engine, CounterLsbStuckHigh) {
  Corpus c = load("counter8");
  DetectionReport r = run_concurrent(c.d, c.faults, c.st, {}).report;
  const FaultRecord& f = record(r, "count", 0, Polarity::SA1);
  EXPECT_EQ(f.status, FaultStatus::Detected);
  EXPECT_EQ(f.time, 9u);
  EXPECT_EQ(f.good, "8'b00000000");
  EXPECT_EQ(f.bad, "8'b00000001");
}

TEST(Engine, MaskedFaultsCostNothing) {
  Corpus c = load("quiet");
  FaultBatch b{c.faults, static_cast<uint32_t>(c.faults.size())};
  ConcurrentBatchSim sim(c.d, c.st, b, {});
  sim.run();
  // k is held at 4'b0111 for the whole run.
  const char* cases[][2] = {{"0", "1"}, {"1", "1"}, {"2", "1"}, {"3", "0"}};
  for (auto& cs : cases) {
    uint32_t bit = static_cast<uint32_t>(std::stoi(cs[0]));
    Polarity p = cs[1][0] == '1' ? Polarity::SA1 : Polarity::SA0;
    EXPECT_EQ(sim.bad_evaluations_per_fault()[fault_index(c, "k", bit, p)], 0u) << "k[" << bit << "]";
  }
  EXPECT_GT(sim.bad_evaluations_per_fault()[fault_index(c, "k", 0, Polarity::SA0)], 0u);

  Corpus f = load("fig1");
  FaultBatch fb{f.faults, 16};
  ConcurrentBatchSim fsim(f.d, f.st, fb, {});
  fsim.run();
  EXPECT_EQ(fsim.bad_evaluations_per_fault()[fault_index(f, "b", 0, Polarity::SA1)], 0u);
}

TEST(Engine, DroppedFaultsLeaveNoEntries) {
  Corpus c = load("counter8");
  FaultBatch b{c.faults, 32};
  ConcurrentBatchSim sim(c.d, c.st, b, {});
  std::vector<char> seen_dropped(c.faults.size(), 0);
  size_t checks = 0;
  sim.set_step_hook([&](uint64_t, const ConcurrentBatchSim& s) {
    for (uint32_t f = 0; f < c.faults.size(); ++f) {
      if (seen_dropped[f]) {
        EXPECT_EQ(s.store().entries_for(f), 0u);
        ++checks;
      }
      if (!s.is_active(f)) seen_dropped[f] = 1;
    }
  });
  sim.run();
  EXPECT_GT(checks, 0u);
}

TEST(Engine, StoreAuditIsClean) {
  for (const char* name : kCorpus) {
    Corpus c = load(name);
    FaultSimOptions o;
    o.audit = true;
    o.batch_size = 16;
    EXPECT_EQ(run_concurrent(c.d, c.faults, c.st, o).audit_violations, 0u) << name;
  }
}

TEST(Engine, HyperactiveFaultIsIsolated) {
  const char* src =
      "module t(input a, input b, output y, output z);\n"
      "  reg r;\n"
      "  always @(r or a or b) if (a & b) r <= ~r; else r <= 1'b0;\n"
      "  assign y = r;\n"
      "  assign z = ~b;\n"
      "endmodule\n";
  Design d = design_from_text(src, "t");
  StimulusProgram st = parse_stimulus("@0 a = 1'b0\n@0 b = 1'b0\n@10 b = 1'b1\nstrobe every 5 from 1\nend 20\n", d);
  std::vector<Fault> faults = generate_fault_list(d);
  FaultSimOptions o;
  o.delta_limit = 100;
  DetectionReport s = run_serial(d, faults, st, o).report;
  EXPECT_EQ(record(s, "a", 0, Polarity::SA1).status, FaultStatus::Hyperactive);
  EXPECT_EQ(record(s, "a", 0, Polarity::SA1).reason, "oscillation");
  EXPECT_EQ(s.count(FaultStatus::Hyperactive), 1u);
  for (uint32_t w : {1u, 3u, 64u}) {
    o.batch_size = w;
    DetectionReport k = run_concurrent(d, faults, st, o).report;
    expect_same_records(s, k);
  }
}

TEST(Engine, GoodMachineOscillationIsAnError) {
  Design d = design_from_text(
      "module t(input a, output y); reg r; always @(r or a) if (a) r <= ~r; else r <= 1'b0; assign y = r; endmodule",
      "t");
  StimulusProgram st = parse_stimulus("@0 a = 1'b1\n@1 a = 1'b0\n@2 a = 1'b1\nend 5\n", d);
  FaultSimOptions o;
  o.delta_limit = 100;
  std::vector<Fault> faults = generate_fault_list(d);
  EXPECT_THROW(run_concurrent(d, faults, st, o), OscillationError);
  EXPECT_THROW(run_serial(d, faults, st, o), OscillationError);
}

TEST(Engine, WorkersDoNotChangeResults) {
  Corpus c = load("fir");
  FaultSimOptions o;
  o.batch_size = 32;
  DetectionReport one = run_concurrent(c.d, c.faults, c.st, o).report;
  o.workers = 4;
  DetectionReport four = run_concurrent(c.d, c.faults, c.st, o).report;
  expect_same_records(one, four);
  four.counters.wall_seconds = one.counters.wall_seconds;
  EXPECT_EQ(one.counters, four.counters);
}

TEST(Engine, EmptyFaultList) {
  Corpus c = load("fig1");
  DetectionReport r = run_concurrent(c.d, {}, c.st, {}).report;
  EXPECT_EQ(r.total(), 0u);
  EXPECT_EQ(r.coverage(), 0.0);
}
