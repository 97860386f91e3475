#pragma once

#include <stdexcept>
#include <string>

namespace homctl {

// Error categories. The CLI maps these onto its exit codes.
enum class ErrorKind {
  dimension,     // mismatched matrix/vector shapes
  domain,        // argument outside the operation's domain (h <= 0, x = 0, ...)
  config,        // invalid user configuration or file content
  singular,      // singular or inconsistent linear system
  convergence,   // iterative method hit its cap
  infeasible,    // synthesis cannot produce a controller
  verification,  // a produced object violates its invariants
  state,         // object used before it is ready
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::dimension: return "dimension";
    case ErrorKind::domain: return "domain";
    case ErrorKind::config: return "config";
    case ErrorKind::singular: return "singular";
    case ErrorKind::convergence: return "convergence";
    case ErrorKind::infeasible: return "infeasible";
    case ErrorKind::verification: return "verification";
    case ErrorKind::state: return "state";
  }
  return "unknown";
}

}  // namespace homctl
