#pragma once

#include <stdexcept>
#include <string>

namespace branchtail {

/// Coarse error category; the CLI maps each one onto an exit status.
enum class ErrorKind {
  InvalidParameter,    // bad constructor argument or config value
  InvalidInput,        // structurally wrong input (improper tail, empty sample)
  Stability,           // b >= 1, E(xi) + p >= 1, ...
  Degenerate,          // violates 0 < P(A=0) < 1 or P(B=0) < 1
  NoReferenceTail,     // c1 = c2 = 0
  Inconsistent,        // case (i)/(ii) with infinite immigration mean
  ShrinkGrid,          // tail underflows to zero on the requested grid
  NonConvergentSum,    // geometric tail sum does not settle
  NonConvergence,      // iteration budget exhausted
  TruncationOverflow,  // leaked mass above budget
  StateOverflow,       // integer state does not fit in 64 bits
  UnsupportedRegime,   // no known asymptotic covers the requested prediction
  InvalidDrift,        // random walk oracle with nonnegative drift
};

const char* to_string(ErrorKind kind) noexcept;

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

inline void require(bool condition, ErrorKind kind, const std::string& what) {
  if (!condition) fail(kind, what);
}

}  // namespace branchtail
