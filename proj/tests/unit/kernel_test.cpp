#include <gtest/gtest.h>

#include <algorithm>

#include "rtlfsim/sim/simulator.hpp"
#include "test_support.hpp"

using namespace rtlfsim;
using namespace rtlfsim::test;

namespace {

struct SimRun {
  Design design;
  SimTrace trace;
};

SimRun run_text(const std::string& src, const std::string& stim) {
  SimRun r{design_from_text(src, "t"), {}};
  StimulusProgram st = parse_stimulus(stim, r.design);
  r.trace = Simulator(r.design, st).run();
  return r;
}

std::string sample(const SimRun& r, size_t strobe, size_t output) {
  return r.trace.samples.at(strobe).outputs.at(output).to_string();
}

}  // namespace

TEST(Kernel, NonblockingSwap) {
  SimRun r = run_text(
      "module t(input clk, input ld, output reg [3:0] a, output reg [3:0] b);\n"
      "  always @(posedge clk) if (ld) begin a <= 4'd1; b <= 4'd2; end else begin a <= b; b <= a; end\n"
      "endmodule\n",
      "clock clk period 10 start 5\n@0 ld = 1'b1\n@10 ld = 1'b0\nstrobe at 7,17,27\nend 30\n");
  EXPECT_EQ(sample(r, 0, 0), "4'b0001");
  EXPECT_EQ(sample(r, 1, 0), "4'b0010");
  EXPECT_EQ(sample(r, 1, 1), "4'b0001");
  EXPECT_EQ(sample(r, 2, 0), "4'b0001");
}

TEST(Kernel, BlockingSequence) {
  SimRun r = run_text(
      "module t(input clk, input ld, output reg [3:0] a, output reg [3:0] b);\n"
      "  always @(posedge clk) if (ld) begin a = 4'd1; b = 4'd2; end else begin a = b; b = a; end\n"
      "endmodule\n",
      "clock clk period 10 start 5\n@0 ld = 1'b1\n@10 ld = 1'b0\nstrobe at 17\nend 20\n");
  EXPECT_EQ(sample(r, 0, 0), "4'b0010");
  EXPECT_EQ(sample(r, 0, 1), "4'b0010");
}

TEST(Kernel, DelayStatements) {
  SimRun r = run_text(
      "module t(output reg y);\n"
      "  initial begin y = 1'b0; #2 y = 1'b1; #3 y = 1'b0; end\n"
      "endmodule\n",
      "strobe at 0,1,2,4,5,9\nend 9\n");
  std::vector<std::string> got;
  for (size_t i = 0; i < r.trace.samples.size(); ++i) got.push_back(sample(r, i, 0));
  EXPECT_EQ(got, (std::vector<std::string>{"1'b0", "1'b0", "1'b1", "1'b1", "1'b0", "1'b0"}));
}

TEST(Kernel, ContinuousAssignDelay) {
  SimRun r = run_text("module t(input a, output y); assign #3 y = ~a; endmodule",
                   "@0 a = 1'b0\n@10 a = 1'b1\nstrobe at 2,3,12,13\nend 20\n");
  EXPECT_EQ(sample(r, 0, 0), "1'bx");
  EXPECT_EQ(sample(r, 1, 0), "1'b1");
  EXPECT_EQ(sample(r, 2, 0), "1'b1");
  EXPECT_EQ(sample(r, 3, 0), "1'b0");
}

TEST(Kernel, ClockSchedule) {
  SimRun r = run_text("module t(input clk, output y); assign y = clk; endmodule",
                   "clock clk period 10 start 5\nstrobe at 0,4,5,9,10,15\nend 20\n");
  std::vector<std::string> got;
  for (size_t i = 0; i < r.trace.samples.size(); ++i) got.push_back(sample(r, i, 0));
  EXPECT_EQ(got, (std::vector<std::string>{"1'b0", "1'b0", "1'b1", "1'b1", "1'b0", "1'b1"}));
}

TEST(Kernel, CounterTrace) {
  Design d = corpus_design("counter8");
  StimulusProgram st = corpus_stim("counter8", d);
  SimTrace tr = Simulator(d, st).run();
  size_t count = 0;
  for (size_t i = 0; i < d.outputs.size(); ++i)
    if (d.nets[d.outputs[i]].path == "count") count = i;
  ASSERT_GE(tr.samples.size(), 5u);
  for (uint64_t k = 0; k < 5; ++k) EXPECT_EQ(tr.samples[k].outputs[count].to_uint(), k) << k;
}

TEST(Kernel, Oscillation) {
  Design d = design_from_text("module t(input a, output reg y); always @(y or a) y = ~y; endmodule", "t");
  StimulusProgram st = parse_stimulus("@0 a = 1'b0\nend 5\n", d);
  SimOptions o;
  o.delta_limit = 50;
  // y starts X, so the first toggle is X -> X and nothing oscillates.
  EXPECT_NO_THROW(Simulator(d, st, o).run());

  Design d2 = design_from_text(
      "module t(input a, output y); reg r; always @(r or a) if (a) r <= ~r; else r <= 1'b0; assign y = r; "
      "endmodule",
      "t");
  StimulusProgram st2 = parse_stimulus("@0 a = 1'b0\n@2 a = 1'b1\nend 5\n", d2);
  try {
    Simulator(d2, st2, o).run();
    FAIL() << "expected an oscillation";
  } catch (const OscillationError& e) {
    EXPECT_EQ(e.time(), 2u);
    ASSERT_FALSE(e.nets().empty());
    for (const auto& n : e.nets()) EXPECT_TRUE(n == "r" || n == "y") << n;
  }
}

TEST(Kernel, ProcessAccessesStayInsideDeclaredSets) {
  for (const char* name : kCorpus) {
    Design d = corpus_design(name);
    StimulusProgram st = corpus_stim(name, d);
    SimOptions o;
    size_t accesses = 0;
    o.access_monitor = [&](ProcessId p, NetId n, bool is_write) {
      const auto& set = is_write ? d.processes[p].write_set : d.processes[p].read_set;
      EXPECT_TRUE(std::binary_search(set.begin(), set.end(), n))
          << name << ": process " << p << (is_write ? " wrote " : " read ") << d.nets[n].path;
      ++accesses;
    };
    Simulator(d, st, o).run();
    if (!d.processes.empty()) EXPECT_GT(accesses, 0u) << name;
  }
}

TEST(Kernel, StrobeHookStopsEarly) {
  Design d = corpus_design("counter8");
  StimulusProgram st = corpus_stim("counter8", d);
  int calls = 0;
  SimTrace tr = Simulator(d, st).run([&](uint64_t, const Simulator&) { return ++calls < 3; });
  EXPECT_TRUE(tr.stopped_early);
  EXPECT_EQ(tr.samples.size(), 3u);
}

TEST(Stimulus, Errors) {
  Design d = corpus_design("fig1");
  EXPECT_THROW(parse_stimulus("@0 a = 1'b0\n", d), ConfigError);
  EXPECT_THROW(parse_stimulus("@0 nothere = 1'b0\nend 1\n", d), ConfigError);
  EXPECT_THROW(parse_stimulus("@0 a = 2'b00\nend 1\n", d), ConfigError);
  EXPECT_THROW(parse_stimulus("clock clock period 1 start 0\nend 1\n", d), ConfigError);
  try {
    parse_stimulus("end 5\nbogus line\n", d, "s.stim");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("s.stim:2:"), std::string::npos) << e.what();
  }
  StimulusProgram ok = parse_stimulus("@0 d = 1'b1\nend 1\n", d);
  EXPECT_EQ(ok.warnings.size(), 1u);
}
