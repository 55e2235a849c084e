#pragma once

#include <stdexcept>
#include <string>

namespace bsl {

/// Failure categories. The CLI maps them onto process exit codes.
enum class ErrorKind {
    Domain,        ///< argument outside the mathematical domain (k = 0, mean vorticity, ...)
    Config,        ///< invalid configuration value
    Format,        ///< malformed input file or profile
    Integration,   ///< time integrator could not proceed
    Fit,           ///< least-squares fit undefined
    Truncation,    ///< spectral grid too small for the requested operation
    Divergence,    ///< weighted spectral sum does not converge
    Bracket,       ///< bisection endpoints do not bracket a transition
    Io,
};

class Error : public std::runtime_error {
  public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

  private:
    ErrorKind kind_;
};

inline const char* to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::Domain: return "domain";
    case ErrorKind::Config: return "config";
    case ErrorKind::Format: return "format";
    case ErrorKind::Integration: return "integration";
    case ErrorKind::Fit: return "fit";
    case ErrorKind::Truncation: return "truncation";
    case ErrorKind::Divergence: return "divergence";
    case ErrorKind::Bracket: return "bracket";
    case ErrorKind::Io: return "io";
    }
    return "unknown";
}

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool cond, ErrorKind kind, const std::string& what) {
    if (!cond) fail(kind, what);
}

} // namespace bsl
