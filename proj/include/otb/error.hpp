#pragma once

#include <stdexcept>
#include <string>

namespace otb {

/// Broad failure categories. The CLI and the C API map these onto exit codes
/// and status values, so keep them coarse.
enum class ErrorKind {
  usage,       // invalid argument or configuration
  dimension,   // vector lengths disagree
  parse,       // malformed file content
  schema,      // well-formed content violating a format invariant
  unsupported, // operation not defined for the requested domain
  io,          // file could not be opened or written
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace otb
