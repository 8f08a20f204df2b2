#include "rtlfsim/fault/report.hpp"

#include <iomanip>
#include <map>
#include <sstream>

#include "json.hpp"

namespace rtlfsim {

using nlohmann::json;

namespace {

constexpr const char* kSchema = "rtlfsim-report/1";

FaultStatus status_from(const std::string& s) {
  if (s == "undetected") return FaultStatus::Undetected;
  if (s == "detected") return FaultStatus::Detected;
  if (s == "potential") return FaultStatus::Potential;
  if (s == "hyperactive") return FaultStatus::Hyperactive;
  throw ConfigError("unknown fault status '" + s + "'");
}

Polarity polarity_from(const std::string& s) {
  if (s == "sa0") return Polarity::SA0;
  if (s == "sa1") return Polarity::SA1;
  throw ConfigError("unknown polarity '" + s + "'");
}

}  // namespace

std::string_view to_string(FaultStatus s) {
  switch (s) {
    case FaultStatus::Undetected: return "undetected";
    case FaultStatus::Detected: return "detected";
    case FaultStatus::Potential: return "potential";
    case FaultStatus::Hyperactive: return "hyperactive";
  }
  return "?";
}

size_t DetectionReport::count(FaultStatus s) const {
  size_t n = 0;
  for (const auto& f : faults) n += f.status == s;
  return n;
}

double DetectionReport::coverage() const {
  return faults.empty() ? 0.0 : static_cast<double>(count(FaultStatus::Detected)) / static_cast<double>(faults.size());
}

std::string report_to_json(const DetectionReport& r) {
  json j;
  j["schema"] = kSchema;
  j["design"] = r.design;
  j["mode"] = r.mode;
  j["batch_size"] = r.batch_size;
  j["drop"] = r.drop;
  j["summary"] = {
      {"total", r.total()},
      {"detected", r.count(FaultStatus::Detected)},
      {"potential", r.count(FaultStatus::Potential)},
      {"undetected", r.count(FaultStatus::Undetected)},
      {"hyperactive", r.count(FaultStatus::Hyperactive)},
      {"coverage", r.coverage()},
  };
  j["counters"] = {
      {"events_processed", r.counters.events_processed},
      {"node_evaluations", r.counters.node_evaluations},
      {"bad_evaluations", r.counters.bad_evaluations},
      {"process_activations", r.counters.process_activations},
      {"batches", r.counters.batches},
      {"wall_seconds", r.counters.wall_seconds},
  };
  json faults = json::array();
  for (const auto& f : r.faults) {
    json e;
    e["net"] = f.net;
    e["bit"] = f.bit;
    e["polarity"] = std::string(to_string(f.polarity));
    e["status"] = std::string(to_string(f.status));
    if (f.time) {
      e["time"] = *f.time;
      e["output"] = f.output;
      e["good"] = f.good;
      e["bad"] = f.bad;
    }
    e["detect_count"] = f.detect_count;
    if (!f.reason.empty()) e["reason"] = f.reason;
    faults.push_back(std::move(e));
  }
  j["faults"] = std::move(faults);
  json invalid = json::array();
  for (const auto& i : r.invalid) invalid.push_back({{"fault", i.text}, {"reason", i.reason}});
  j["invalid"] = std::move(invalid);
  return j.dump(2) + "\n";
}

DetectionReport report_from_json(const std::string& text) {
  DetectionReport r;
  try {
    json j = json::parse(text);
    if (j.at("schema").get<std::string>() != kSchema)
      throw ConfigError("unsupported report schema '" + j.at("schema").get<std::string>() + "'");
    r.design = j.at("design").get<std::string>();
    r.mode = j.at("mode").get<std::string>();
    r.batch_size = j.at("batch_size").get<uint32_t>();
    r.drop = j.at("drop").get<bool>();
    const json& c = j.at("counters");
    r.counters.events_processed = c.at("events_processed").get<uint64_t>();
    r.counters.node_evaluations = c.at("node_evaluations").get<uint64_t>();
    r.counters.bad_evaluations = c.at("bad_evaluations").get<uint64_t>();
    r.counters.process_activations = c.at("process_activations").get<uint64_t>();
    r.counters.batches = c.at("batches").get<uint64_t>();
    r.counters.wall_seconds = c.at("wall_seconds").get<double>();
    for (const json& e : j.at("faults")) {
      FaultRecord f;
      f.net = e.at("net").get<std::string>();
      f.bit = e.at("bit").get<uint32_t>();
      f.polarity = polarity_from(e.at("polarity").get<std::string>());
      f.status = status_from(e.at("status").get<std::string>());
      if (e.contains("time")) {
        f.time = e.at("time").get<uint64_t>();
        f.output = e.at("output").get<std::string>();
        f.good = e.at("good").get<std::string>();
        f.bad = e.at("bad").get<std::string>();
      }
      f.detect_count = e.at("detect_count").get<uint64_t>();
      if (e.contains("reason")) f.reason = e.at("reason").get<std::string>();
      r.faults.push_back(std::move(f));
    }
    for (const json& e : j.at("invalid"))
      r.invalid.push_back({e.at("fault").get<std::string>(), e.at("reason").get<std::string>()});
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed report: ") + e.what());
  }
  return r;
}

std::string report_to_csv(const DetectionReport& r) {
  std::ostringstream os;
  os << "net,bit,polarity,status,time,output,good,bad\n";
  for (const auto& f : r.faults) {
    os << f.net << "," << f.bit << "," << to_string(f.polarity) << "," << to_string(f.status) << ",";
    if (f.time) os << *f.time;
    os << "," << f.output << "," << f.good << "," << f.bad << "\n";
  }
  return os.str();
}

std::vector<std::string> compare_outcomes(const DetectionReport& a, const DetectionReport& b) {
  std::map<OutcomeKey, const FaultRecord*> index;
  for (const auto& f : b.faults) index[{f.net, f.bit, f.polarity}] = &f;
  std::vector<std::string> diffs;
  auto name = [](const FaultRecord& f) {
    return f.net + "[" + std::to_string(f.bit) + "] " + std::string(to_string(f.polarity));
  };
  auto describe = [](const FaultRecord& f) {
    std::string s(to_string(f.status));
    if (f.time) s += " at " + std::to_string(*f.time) + " on " + f.output;
    return s;
  };
  for (const auto& f : a.faults) {
    auto it = index.find({f.net, f.bit, f.polarity});
    if (it == index.end()) {
      diffs.push_back(name(f) + ": missing from " + b.mode + " report");
      continue;
    }
    const FaultRecord& g = *it->second;
    if (f.status != g.status || f.time != g.time || f.output != g.output)
      diffs.push_back(name(f) + ": " + a.mode + " " + describe(f) + ", " + b.mode + " " + describe(g));
    index.erase(it);
  }
  for (const auto& [key, f] : index) diffs.push_back(name(*f) + ": missing from " + a.mode + " report");
  return diffs;
}

std::string summary_text(const DetectionReport& r) {
  std::ostringstream os;
  os << "design " << r.design << ", mode " << r.mode;
  if (r.mode == "concurrent") os << ", W=" << r.batch_size;
  os << "\n";
  os << "  faults       " << r.total() << "\n";
  os << "  detected     " << r.count(FaultStatus::Detected) << "\n";
  os << "  potential    " << r.count(FaultStatus::Potential) << "\n";
  os << "  undetected   " << r.count(FaultStatus::Undetected) << "\n";
  os << "  hyperactive  " << r.count(FaultStatus::Hyperactive) << "\n";
  if (!r.invalid.empty()) os << "  invalid      " << r.invalid.size() << " (not simulated)\n";
  os << "  coverage     " << std::fixed << std::setprecision(2) << 100.0 * r.coverage() << "%\n";
  os << "  wall time    " << std::setprecision(3) << r.counters.wall_seconds << " s\n";
  os << "  events       " << r.counters.events_processed << "\n";
  return os.str();
}

}  // namespace rtlfsim
