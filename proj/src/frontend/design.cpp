#include "rtlfsim/frontend/design.hpp"

#include <algorithm>

namespace rtlfsim {

std::optional<NetId> Design::find_net(std::string_view path) const {
  auto it = name_table.find(std::string(path));
  if (it != name_table.end()) return it->second;
  std::string prefix = top + ".";
  if (path.size() > prefix.size() && path.substr(0, prefix.size()) == prefix) {
    it = name_table.find(std::string(path.substr(prefix.size())));
    if (it != name_table.end()) return it->second;
  }
  return std::nullopt;
}

void Design::finalize() {
  fanout.assign(nets.size(), {});
  sensitive.assign(nets.size(), {});
  driver.assign(nets.size(), kNoId);
  writers.assign(nets.size(), {});
  for (const auto& n : nodes) {
    for (NetId in : n.inputs) {
      auto& f = fanout[in];
      if (std::find(f.begin(), f.end(), n.id) == f.end()) f.push_back(n.id);
    }
    driver[n.output] = n.id;
  }
  for (const auto& p : processes) {
    for (const auto& t : p.triggers) {
      auto& s = sensitive[t.net];
      if (std::find(s.begin(), s.end(), p.id) == s.end()) s.push_back(p.id);
    }
    for (NetId w : p.write_set) writers[w].push_back(p.id);
  }
}

std::vector<WireInfo> list_wires(const Design& design, bool include_internal) {
  std::vector<WireInfo> out;
  for (const auto& n : design.nets)
    if (include_internal || !n.internal) out.push_back({n.path, n.width});
  std::sort(out.begin(), out.end(), [](const WireInfo& a, const WireInfo& b) { return a.path < b.path; });
  return out;
}

}  // namespace rtlfsim
