// Diagnostics and error types shared by every stage of the simulator.
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace rtlfsim {

struct SourceLoc {
  std::string file;
  uint32_t line = 0;
  uint32_t col = 0;

  bool valid() const { return line != 0; }
};

/// Renders `path:line:col: severity: message`.
std::string format_diagnostic(const SourceLoc& loc, std::string_view severity,
                              std::string_view message);

/// A user-facing error in the input (lexical, syntax, name resolution,
/// unsupported construct, elaboration). Maps to CLI exit code 1.
class CompileError : public std::runtime_error {
public:
  CompileError(SourceLoc loc, const std::string& message)
      : std::runtime_error(message), loc_(std::move(loc)) {}

  const SourceLoc& loc() const { return loc_; }
  std::string render() const { return format_diagnostic(loc_, "error", what()); }

private:
  SourceLoc loc_;
};

/// Arity or width rule violated for a primitive. Raised while building a
/// netlist, never while simulating one.
class StructuralError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Bad configuration (batch size, missing files, malformed stimulus or fault
/// list). Maps to CLI exit code 1.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Internal invariant violated. Maps to CLI exit code 2.
class InternalError : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

}  // namespace rtlfsim
