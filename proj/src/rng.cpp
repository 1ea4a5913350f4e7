#include "branchtail/rng.hpp"

#include "branchtail/errors.hpp"

namespace branchtail {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidParameter: return "invalid-parameter";
    case ErrorKind::InvalidInput: return "invalid-input";
    case ErrorKind::Stability: return "stability";
    case ErrorKind::Degenerate: return "degenerate";
    case ErrorKind::NoReferenceTail: return "no-reference-tail";
    case ErrorKind::Inconsistent: return "inconsistent";
    case ErrorKind::ShrinkGrid: return "shrink-grid";
    case ErrorKind::NonConvergentSum: return "non-convergent-sum";
    case ErrorKind::NonConvergence: return "non-convergence";
    case ErrorKind::TruncationOverflow: return "truncation-overflow";
    case ErrorKind::StateOverflow: return "state-overflow";
    case ErrorKind::UnsupportedRegime: return "unsupported-regime";
    case ErrorKind::InvalidDrift: return "invalid-drift";
  }
  return "unknown";
}

Rng::Rng(std::uint64_t seed) noexcept {
  std::uint64_t x = seed;
  for (auto& word : s_) {
    x = splitmix64(x);
    word = x;
  }
}

Rng Rng::stream(std::uint64_t seed, std::uint64_t index) noexcept {
  // Two rounds of mixing so that adjacent indices land far apart.
  return Rng(splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632be59bd9b4e019ULL)));
}

}  // namespace branchtail
