// rtlfsim command-line driver.
#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "rtlfsim/fault/engine.hpp"
#include "rtlfsim/frontend/elaborate.hpp"
#include "rtlfsim/frontend/parser.hpp"

using namespace rtlfsim;

namespace {

struct RunConfig {
  std::vector<std::string> files;
  std::string top;
  std::string stim;
  std::string faults;
  bool gen_faults = false;
  std::string mode = "concurrent";
  uint32_t batch_size = 256;
  bool include_internal = false;
  bool no_drop = false;
  bool stats = false;
  std::string json;
  std::string csv;
  uint64_t delta_limit = 10000;
  unsigned workers = 1;
  bool audit = false;
};

void add_common(CLI::App& app, RunConfig& c) {
  app.add_option("files", c.files, "Verilog source files")->required()->check(CLI::ExistingFile);
  app.add_option("--top", c.top, "Top module name")->required();
  app.add_option("--stim", c.stim, "Stimulus file")->check(CLI::ExistingFile);
  auto* f = app.add_option("--faults", c.faults, "Fault list file")->check(CLI::ExistingFile);
  auto* g = app.add_flag("--gen-faults", c.gen_faults, "Stuck-at faults on every bit of every wire");
  f->excludes(g);
  app.add_option("-W,--batch-size", c.batch_size, "Faults per concurrent batch")
      ->check(CLI::Range(1u, kMaxBatchSize));
  app.add_flag("--include-internal", c.include_internal, "Also fault elaboration-created nets");
  app.add_flag("--no-drop", c.no_drop, "Keep simulating faults after detection");
  app.add_option("--delta-limit", c.delta_limit, "Delta cycles allowed per time step")->check(CLI::PositiveNumber);
  app.add_option("--workers", c.workers, "Parallel batch workers")->check(CLI::Range(1u, 1024u));
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw ConfigError("cannot write '" + path + "'");
}

FaultSimOptions sim_options(const RunConfig& c) {
  FaultSimOptions o;
  o.batch_size = c.batch_size;
  o.drop = !c.no_drop;
  o.delta_limit = c.delta_limit;
  o.workers = c.workers;
  o.audit = c.audit;
  return o;
}

struct Inputs {
  Design design;
  StimulusProgram stim;
  FaultList faults;
};

Inputs load_inputs(const RunConfig& c, bool need_faults) {
  Inputs in;
  in.design = build_design(load_sources(c.files, c.top));
  if (c.stim.empty()) throw ConfigError("--stim is required");
  in.stim = load_stimulus(c.stim, in.design);
  for (const auto& w : in.stim.warnings) std::cerr << "warning: " << w << "\n";
  if (need_faults) {
    if (c.gen_faults == !c.faults.empty()) throw ConfigError("give exactly one of --faults or --gen-faults");
    if (c.gen_faults)
      in.faults.faults = generate_fault_list(in.design, c.include_internal);
    else
      in.faults = load_fault_list(c.faults, in.design);
    for (const auto& i : in.faults.invalid) std::cerr << "warning: skipping fault '" << i.text << "': " << i.reason << "\n";
  }
  return in;
}

int run(const RunConfig& c) {
  if (c.mode == "good-only") {
    Inputs in = load_inputs(c, false);
    SimOptions o;
    o.delta_limit = c.delta_limit;
    SimTrace tr = Simulator(in.design, in.stim, o).run();
    std::string csv = trace_to_csv(in.design, tr);
    if (c.csv.empty())
      std::cout << csv;
    else
      write_file(c.csv, csv);
    if (c.stats) std::cout << counters_to_json(tr.counters) << "\n";
    return 0;
  }
  Inputs in = load_inputs(c, true);
  FaultSimOptions o = sim_options(c);
  FaultSimResult r = c.mode == "serial" ? run_serial(in.design, in.faults.faults, in.stim, o)
                                        : run_concurrent(in.design, in.faults.faults, in.stim, o);
  r.report.invalid = in.faults.invalid;
  if (!c.json.empty()) write_file(c.json, report_to_json(r.report));
  if (!c.csv.empty()) write_file(c.csv, report_to_csv(r.report));
  std::cout << summary_text(r.report);
  if (c.stats) {
    const ModeCounters& k = r.report.counters;
    std::cout << "  node evals   " << k.node_evaluations << "\n";
    std::cout << "  bad evals    " << k.bad_evaluations << "\n";
    std::cout << "  activations  " << k.process_activations << "\n";
    if (c.mode != "serial") std::cout << "  batches      " << k.batches << "\n";
    if (c.audit) std::cout << "  audit        " << r.audit_violations << " stale entries\n";
  }
  if (c.audit && r.audit_violations != 0) throw InternalError("store audit found entries equal to the good value");
  return 0;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  size_t n = v.size();
  return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2;
}

int bench(const RunConfig& c, unsigned repeat) {
  Inputs in = load_inputs(c, true);
  FaultSimOptions o = sim_options(c);
  std::vector<double> ts, tc;
  FaultSimResult first_s, first_c;
  for (unsigned i = 0; i < repeat; ++i) {
    FaultSimResult s = run_serial(in.design, in.faults.faults, in.stim, o);
    FaultSimResult k = run_concurrent(in.design, in.faults.faults, in.stim, o);
    ts.push_back(s.report.counters.wall_seconds);
    tc.push_back(k.report.counters.wall_seconds);
    auto diffs = compare_outcomes(s.report, k.report);
    if (!diffs.empty()) {
      std::cerr << "error: serial and concurrent results disagree on " << diffs.size() << " fault(s)\n";
      for (size_t d = 0; d < diffs.size() && d < 20; ++d) std::cerr << "  " << diffs[d] << "\n";
      return 2;
    }
    if (i == 0) {
      first_s = std::move(s);
      first_c = std::move(k);
    }
  }
  double ms = median(ts), mc = median(tc);
  double ev_s = static_cast<double>(first_s.report.counters.events_processed);
  double ev_c = static_cast<double>(first_c.report.counters.events_processed);
  std::cout << std::left << std::setw(12) << "design" << std::right << std::setw(8) << "faults" << std::setw(12)
            << "serial s" << std::setw(14) << "concurrent s" << std::setw(10) << "speedup" << std::setw(13)
            << "event ratio" << "\n";
  std::cout << std::left << std::setw(12) << in.design.top << std::right << std::setw(8) << in.faults.faults.size()
            << std::fixed << std::setprecision(4) << std::setw(12) << ms << std::setw(14) << mc
            << std::setprecision(2) << std::setw(10) << (mc > 0 ? ms / mc : 0.0) << std::setw(13)
            << (ev_c > 0 ? ev_s / ev_c : 0.0) << "\n";
  return 0;
}

uint64_t env_seed() {
  const char* s = std::getenv("RTLFSIM_SEED");
  if (!s || !*s) return 1;
  char* end = nullptr;
  uint64_t v = std::strtoull(s, &end, 10);
  if (*end) throw ConfigError("RTLFSIM_SEED must be an unsigned integer");
  return v;
}

// Random stimulus: every top input except the clock gets a fresh value each
// cycle, halfway between rising edges, and outputs are strobed just before
// each rising edge.
int gen_stim(const std::vector<std::string>& files, const std::string& top, const std::string& clock,
             uint64_t cycles, uint64_t period) {
  Design d = build_design(load_sources(files, top));
  std::mt19937_64 rng(env_seed());
  uint64_t start = period / 2;
  std::cout << "# random stimulus, seed " << env_seed() << "\n";
  if (!clock.empty()) {
    if (!d.find_net(clock)) throw ConfigError("no net named '" + clock + "'");
    std::cout << "clock " << clock << " period " << period << " start " << start << "\n";
  }
  for (uint64_t k = 0; k < cycles; ++k) {
    uint64_t t = k == 0 ? 0 : start + (k - 1) * period + period / 2 + 1;
    for (NetId n : d.inputs) {
      const Net& net = d.nets[n];
      if (net.path == clock) continue;
      std::string bits;
      for (uint32_t b = 0; b < net.width; ++b) bits += (rng() & 1) ? '1' : '0';
      std::cout << "@" << t << " " << net.path << " = " << net.width << "'b" << bits << "\n";
    }
  }
  std::cout << "strobe every " << period << " from " << start + period - 1 << "\n";
  std::cout << "end " << start + cycles * period << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rtlfsim: RTL stuck-at fault simulator"};
  app.require_subcommand(0, 1);
  RunConfig cfg;
  bool list_wires_flag = false, dump_ast_flag = false;
  add_common(app, cfg);
  app.add_option("--mode", cfg.mode, "concurrent, serial or good-only")
      ->check(CLI::IsMember({"concurrent", "serial", "good-only"}));
  app.add_option("--json", cfg.json, "Write the report as JSON");
  app.add_option("--csv", cfg.csv, "Write the report (or good-only trace) as CSV");
  app.add_flag("--stats", cfg.stats, "Print kernel counters");
  app.add_flag("--audit", cfg.audit, "Check store convergence after every time step");
  app.add_flag("--list-wires", list_wires_flag, "Print faultable nets and exit");
  app.add_flag("--dump-ast", dump_ast_flag, "Print the parsed syntax tree and exit");

  RunConfig bcfg;
  unsigned repeat = 3;
  CLI::App* bench_cmd = app.add_subcommand("bench", "Time serial against concurrent simulation");
  add_common(*bench_cmd, bcfg);
  bench_cmd->add_option("--repeat", repeat, "Runs per mode; the median is reported")->check(CLI::Range(1u, 1000u));

  std::vector<std::string> gfiles;
  std::string gtop, gclock;
  uint64_t cycles = 32, period = 10;
  CLI::App* gen_cmd = app.add_subcommand("gen-stim", "Write a random stimulus file (seed: RTLFSIM_SEED)");
  gen_cmd->add_option("files", gfiles, "Verilog source files")->required()->check(CLI::ExistingFile);
  gen_cmd->add_option("--top", gtop, "Top module name")->required();
  gen_cmd->add_option("--clock", gclock, "Clock input");
  gen_cmd->add_option("--cycles", cycles, "Input vectors")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--period", period, "Clock period")->check(CLI::Range(uint64_t{2}, uint64_t{1} << 40));

  // Subcommands bring their own positionals.
  for (int i = 1; i < argc; ++i)
    if (std::string(argv[i]) == "bench" || std::string(argv[i]) == "gen-stim") {
      app.get_option("files")->required(false);
      app.get_option("--top")->required(false);
      break;
    }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*bench_cmd) return bench(bcfg, repeat);
    if (*gen_cmd) return gen_stim(gfiles, gtop, gclock, cycles, period);
    if (dump_ast_flag) {
      std::cout << dump_ast(parse(load_sources(cfg.files, cfg.top)));
      return 0;
    }
    if (list_wires_flag) {
      Design d = build_design(load_sources(cfg.files, cfg.top));
      for (const auto& w : list_wires(d, cfg.include_internal)) std::cout << w.path << " " << w.width << "\n";
      return 0;
    }
    return run(cfg);
  } catch (const CompileError& e) {
    std::cerr << e.render() << "\n";
    return 1;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const StructuralError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const OscillationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const InternalError& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
}
