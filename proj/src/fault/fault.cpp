#include "rtlfsim/fault/fault.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace rtlfsim {

std::string_view to_string(Polarity p) { return p == Polarity::SA0 ? "sa0" : "sa1"; }

std::vector<Fault> generate_fault_list(const Design& design, bool include_internal) {
  std::vector<Fault> out;
  for (const auto& w : list_wires(design, include_internal)) {
    NetId net = *design.find_net(w.path);
    for (uint32_t b = 0; b < w.width; ++b)
      for (Polarity p : {Polarity::SA0, Polarity::SA1})
        out.push_back({static_cast<uint32_t>(out.size()), net, b, p});
  }
  return out;
}

FaultList parse_fault_list(std::string_view text, const Design& design, const std::string& path) {
  FaultList out;
  size_t pos = 0;
  size_t line_no = 0;
  while (pos <= text.size()) {
    size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string line(text.substr(pos, eol - pos));
    pos = eol + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream is(line);
    std::string site, pol, extra;
    if (!(is >> site)) continue;
    auto fail = [&](const std::string& msg) {
      throw ConfigError(path + ":" + std::to_string(line_no) + ": error: " + msg);
    };
    if (!(is >> pol) || (is >> extra)) fail("expected '<net>[<bit>] sa0|sa1'");
    for (auto& c : pol) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (pol != "sa0" && pol != "sa1") fail("unknown polarity '" + pol + "'");

    std::string name = site;
    bool has_bit = false;
    uint32_t bit = 0;
    if (auto lb = site.find('['); lb != std::string::npos) {
      if (site.back() != ']') fail("malformed fault site '" + site + "'");
      std::string digits = site.substr(lb + 1, site.size() - lb - 2);
      auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), bit);
      if (ec != std::errc() || p != digits.data() + digits.size() || digits.empty())
        fail("malformed bit index in '" + site + "'");
      name = site.substr(0, lb);
      has_bit = true;
    }
    std::string entry = site + " " + pol;
    auto net = design.find_net(name);
    if (!net) {
      out.invalid.push_back({entry, "unknown net '" + name + "'"});
      continue;
    }
    uint32_t width = design.net(*net).width;
    if (!has_bit && width != 1) {
      out.invalid.push_back({entry, "net '" + name + "' is " + std::to_string(width) + " bits; a bit index is required"});
      continue;
    }
    if (bit >= width) {
      out.invalid.push_back({entry, "bit " + std::to_string(bit) + " is out of range for '" + name + "'"});
      continue;
    }
    out.faults.push_back({static_cast<uint32_t>(out.faults.size()), *net, bit,
                          pol == "sa0" ? Polarity::SA0 : Polarity::SA1});
  }
  return out;
}

FaultList load_fault_list(const std::string& path, const Design& design) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read fault list '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_fault_list(ss.str(), design, path);
}

std::string fault_name(const Design& design, const Fault& f) {
  return design.net(f.net).path + "[" + std::to_string(f.bit) + "] " + std::string(to_string(f.polarity));
}

LogicVector filter_through_fault(const Fault& f, LogicVector value) {
  value.set_bit(f.bit, f.polarity == Polarity::SA0 ? LogicBit::Zero : LogicBit::One);
  return value;
}

SiteFilter site_filter(const Fault& f) {
  return {f.net, f.bit, f.polarity == Polarity::SA0 ? LogicBit::Zero : LogicBit::One};
}

std::vector<FaultBatch> make_batches(const std::vector<Fault>& faults, uint32_t w) {
  if (w == 0) throw ConfigError("batch size must be at least 1");
  if (w > kMaxBatchSize)
    throw ConfigError("batch size " + std::to_string(w) + " exceeds the maximum of " + std::to_string(kMaxBatchSize));
  std::vector<FaultBatch> out;
  for (size_t i = 0; i < faults.size(); i += w) {
    FaultBatch b;
    b.batch_size = w;
    b.faults.assign(faults.begin() + static_cast<std::ptrdiff_t>(i),
                    faults.begin() + static_cast<std::ptrdiff_t>(std::min(faults.size(), i + w)));
    out.push_back(std::move(b));
  }
  return out;
}

Detection classify(const LogicVector& good, const LogicVector& bad) {
  Detection d = Detection::None;
  for (uint32_t w = 0; w < good.word_count(); ++w) {
    uint64_t mask = good.word_mask(w);
    uint64_t gk = ~good.bval(w) & mask;
    uint64_t bk = ~bad.bval(w) & mask;
    if ((gk & bk & (good.aval(w) ^ bad.aval(w))) != 0) return Detection::Hard;
    if ((gk ^ bk) != 0) d = Detection::Potential;
  }
  return d;
}

}  // namespace rtlfsim
