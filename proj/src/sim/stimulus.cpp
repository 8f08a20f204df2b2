#include "rtlfsim/sim/stimulus.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <numeric>
#include <sstream>

namespace rtlfsim {
namespace {

std::vector<std::string> tokenize(std::string_view line) {
  std::string spaced;
  for (char c : line) {
    if (c == '=' || c == ',') {
      spaced += ' ';
      spaced += c;
      spaced += ' ';
    } else {
      spaced += c;
    }
  }
  std::istringstream is(spaced);
  std::vector<std::string> out;
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

class StimParser {
public:
  StimParser(const Design& d, const std::string& path) : design_(d), path_(path) {}

  [[noreturn]] void error(const std::string& msg) const {
    throw ConfigError(path_ + ":" + std::to_string(line_) + ": error: " + msg);
  }

  uint64_t number(const std::string& tok) const {
    uint64_t v = 0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || p != tok.data() + tok.size()) error("expected a non-negative integer, got '" + tok + "'");
    return v;
  }

  NetId net(const std::string& name) const {
    auto id = design_.find_net(name);
    if (!id) error("unknown net '" + name + "'");
    return *id;
  }

  LogicVector value(const std::string& tok, uint32_t width) const {
    if (tok == "x" || tok == "X") return LogicVector(width, LogicBit::X);
    if (tok == "z" || tok == "Z") return LogicVector(width, LogicBit::Z);
    if (tok.find('\'') == std::string::npos) {
      if (!std::all_of(tok.begin(), tok.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)) || c == '_'; }))
        error("malformed value '" + tok + "'");
      LogicVector v = LogicVector::from_based(std::max<uint32_t>(width, 64), 'd', tok);
      for (uint32_t i = width; i < v.width(); ++i)
        if (v.bit(i) != LogicBit::Zero) error("value '" + tok + "' does not fit in " + std::to_string(width) + " bits");
      return v.resized(width);
    }
    LogicVector v;
    try {
      v = LogicVector::parse(tok);
    } catch (const std::invalid_argument& e) {
      error("malformed value '" + tok + "': " + e.what());
    }
    if (v.width() > width)
      error("value '" + tok + "' is " + std::to_string(v.width()) + " bits, net is " + std::to_string(width) + " bits");
    return v.resized(width);
  }

  StimulusProgram run(std::string_view text) {
    StimulusProgram prog;
    std::vector<std::pair<uint64_t, uint64_t>> every;
    std::vector<uint64_t> at;
    bool have_end = false;
    size_t pos = 0;
    while (pos <= text.size()) {
      size_t eol = text.find('\n', pos);
      if (eol == std::string_view::npos) eol = text.size();
      std::string_view line = text.substr(pos, eol - pos);
      pos = eol + 1;
      ++line_;
      if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
      auto t = tokenize(line);
      if (t.empty()) continue;
      const std::string& kw = t[0];
      if (kw == "clock") {
        if (t.size() != 6 || t[2] != "period" || t[4] != "start")
          error("expected 'clock <net> period <int> start <int>'");
        ClockSpec c;
        c.net = net(t[1]);
        if (design_.net(c.net).width != 1) error("clock net '" + t[1] + "' must be 1 bit wide");
        c.period = number(t[3]);
        c.start = number(t[5]);
        if (c.period < 2) error("clock period must be at least 2");
        for (const auto& other : prog.clocks)
          if (other.net == c.net) error("net '" + t[1] + "' already has a clock");
        prog.clocks.push_back(c);
      } else if (kw[0] == '@') {
        std::vector<std::string> rest(t.begin() + 1, t.end());
        std::string time_tok = kw.substr(1);
        if (time_tok.empty()) {
          if (rest.empty()) error("expected a time after '@'");
          time_tok = rest.front();
          rest.erase(rest.begin());
        }
        if (rest.size() != 3 || rest[1] != "=") error("expected '@<time> <net> = <value>'");
        ForceSpec f;
        f.time = number(time_tok);
        f.net = net(rest[0]);
        f.value = value(rest[2], design_.net(f.net).width);
        if (design_.driver[f.net] != kNoId || !design_.writers[f.net].empty())
          prog.warnings.push_back(path_ + ":" + std::to_string(line_) + ": warning: force on driven net '" + rest[0] +
                                  "'; later drives override it");
        prog.forces.push_back(std::move(f));
      } else if (kw == "strobe") {
        if (t.size() == 5 && t[1] == "every" && t[3] == "from") {
          uint64_t period = number(t[2]);
          if (period == 0) error("strobe period must be positive");
          every.push_back({number(t[4]), period});
        } else if (t.size() >= 3 && t[1] == "at") {
          for (size_t i = 2; i < t.size(); ++i) {
            if (t[i] == ",") continue;
            at.push_back(number(t[i]));
          }
        } else {
          error("expected 'strobe every <int> from <int>' or 'strobe at <t>[,<t>...]'");
        }
      } else if (kw == "end") {
        if (t.size() != 2) error("expected 'end <time>'");
        if (have_end) error("duplicate 'end'");
        prog.end_time = number(t[1]);
        have_end = true;
      } else {
        error("unknown directive '" + kw + "'");
      }
    }
    if (!have_end) error("missing 'end <time>'");
    for (uint64_t s : at) {
      if (s > prog.end_time) error("strobe time " + std::to_string(s) + " is after the end time");
      prog.strobes.push_back(s);
    }
    for (auto [from, period] : every)
      for (uint64_t s = from; s <= prog.end_time; s += period) prog.strobes.push_back(s);
    std::sort(prog.strobes.begin(), prog.strobes.end());
    prog.strobes.erase(std::unique(prog.strobes.begin(), prog.strobes.end()), prog.strobes.end());
    return prog;
  }

private:
  const Design& design_;
  std::string path_;
  size_t line_ = 0;
};

}  // namespace

StimulusProgram parse_stimulus(std::string_view text, const Design& design, const std::string& path) {
  return StimParser(design, path).run(text);
}

StimulusProgram load_stimulus(const std::string& path, const Design& design) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read stimulus file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_stimulus(ss.str(), design, path);
}

StimulusCursor::StimulusCursor(const StimulusProgram& program) : program_(&program) {
  for (const auto& c : program.clocks) {
    clock_next_.push_back(0);
    clock_rise_.push_back(c.start == 0);
  }
  force_order_.resize(program.forces.size());
  std::iota(force_order_.begin(), force_order_.end(), 0);
  std::stable_sort(force_order_.begin(), force_order_.end(),
                   [&](size_t a, size_t b) { return program.forces[a].time < program.forces[b].time; });
}

std::optional<uint64_t> StimulusCursor::next_time() const {
  std::optional<uint64_t> t;
  for (uint64_t c : clock_next_)
    if (!t || c < *t) t = c;
  if (force_pos_ < force_order_.size()) {
    uint64_t f = program_->forces[force_order_[force_pos_]].time;
    if (!t || f < *t) t = f;
  }
  return t;
}

std::vector<StimulusWrite> StimulusCursor::take(uint64_t time) {
  std::vector<StimulusWrite> out;
  for (size_t i = 0; i < clock_next_.size(); ++i) {
    if (clock_next_[i] != time) continue;
    const ClockSpec& c = program_->clocks[i];
    bool rise = clock_rise_[i];
    out.push_back({c.net, LogicVector(1, rise ? LogicBit::One : LogicBit::Zero)});
    if (rise) {
      clock_next_[i] = time + c.period / 2;
    } else {
      clock_next_[i] = time < c.start ? c.start : time + (c.period - c.period / 2);
    }
    clock_rise_[i] = !rise;
  }
  while (force_pos_ < force_order_.size() && program_->forces[force_order_[force_pos_]].time == time) {
    const ForceSpec& f = program_->forces[force_order_[force_pos_++]];
    out.push_back({f.net, f.value});
  }
  return out;
}

}  // namespace rtlfsim
