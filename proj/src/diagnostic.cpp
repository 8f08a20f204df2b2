#include "rtlfsim/diagnostic.hpp"

namespace rtlfsim {

std::string format_diagnostic(const SourceLoc& loc, std::string_view severity, std::string_view message) {
  std::string out;
  if (loc.valid()) {
    out = loc.file + ":" + std::to_string(loc.line) + ":" + std::to_string(loc.col) + ": ";
  } else if (!loc.file.empty()) {
    out = loc.file + ": ";
  }
  out += severity;
  out += ": ";
  out += message;
  return out;
}

}  // namespace rtlfsim
