#pragma once

#include <stdexcept>
#include <string>

namespace ctxkit {

/// Category of a failure raised by the library. The CLI maps these onto
/// process exit codes (see tools/ctxkit.cpp).
enum class ErrorKind {
  input,         // malformed file, unknown field, parse failure
  structural,    // dimension mismatch inside an otherwise well-formed value
  lookup,        // reference to an id that does not exist
  contract,      // caller violated a documented precondition
  precondition,  // a domain premise failed (e.g. model not Gleason-satisfying)
  too_large,     // configured resource cap exceeded
  degenerate,    // numerical construction impossible for this input
  incident,      // result contradicts a claim the construction relies on
  not_converged, // iterative solver ran out of budget
  internal       // invariant of the library itself broken
};

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::input: return "input";
    case ErrorKind::structural: return "structural";
    case ErrorKind::lookup: return "lookup";
    case ErrorKind::contract: return "contract";
    case ErrorKind::precondition: return "precondition";
    case ErrorKind::too_large: return "instance too large";
    case ErrorKind::degenerate: return "degenerate basis";
    case ErrorKind::incident: return "incident";
    case ErrorKind::not_converged: return "not converged";
    case ErrorKind::internal: return "internal";
  }
  return "unknown";
}

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

}  // namespace ctxkit
