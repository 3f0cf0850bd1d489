#pragma once

#include <stdexcept>
#include <string>

namespace thermoflux {

enum class ErrorKind {
  InvalidInput,      // malformed or out-of-range arguments
  SpectrumMismatch,  // state and context built on different spectra
  Infeasible,        // totals or work values that no protocol can realize
  ResourceLimit,     // oracle caps exceeded
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool condition, const std::string& what) {
  if (!condition) fail(ErrorKind::InvalidInput, what);
}

}  // namespace thermoflux
