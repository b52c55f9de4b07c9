#pragma once

#include <stdexcept>
#include <string>

namespace occ {

// Error categories map 1:1 onto CLI exit codes (see tools/occ_cli.cpp).
enum class ErrorKind {
  config,        // bad configuration / usage
  schema,        // malformed input file or column mapping
  coverage,      // missing dates or incomplete joins
  degenerate,    // data violates a model precondition (e.g. single-class response)
  convergence,   // solver failed to converge
  internal,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string msg) : std::runtime_error(std::move(msg)), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

inline const char* error_kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::config: return "config";
    case ErrorKind::schema: return "schema";
    case ErrorKind::coverage: return "coverage";
    case ErrorKind::degenerate: return "degenerate";
    case ErrorKind::convergence: return "convergence";
    case ErrorKind::internal: return "internal";
  }
  return "internal";
}

}  // namespace occ
