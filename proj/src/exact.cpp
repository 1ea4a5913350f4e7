#include "branchtail/exact.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "branchtail/errors.hpp"

namespace branchtail {

namespace {

constexpr double kMonotoneSlack = 1e-12;
constexpr double kNegligible = 1e-16;

void check_common(const PmfVector& p, std::size_t N, const char* name) {
  require(p.N == N && p.values.size() == N + 1, ErrorKind::InvalidInput,
          std::string(name) + " must share the truncation bound N");
}

double deficit(const std::vector<double>& v) {
  double s = 0.0;
  for (double p : v) s += p;
  return std::max(0.0, 1.0 - s);
}

}  // namespace

double PmfVector::tail(std::size_t n) const {
  if (n >= N) return leaked;
  double s = leaked;
  for (std::size_t j = n + 1; j <= N; ++j) s += values[j];
  return s;
}

std::vector<double> PmfVector::tails() const {
  std::vector<double> out(N + 1);
  double s = leaked;
  for (std::size_t j = N + 1; j-- > 0;) {
    out[j] = s;
    s += values[j];
  }
  return out;
}

double PmfVector::mean() const {
  double s = 0.0;
  for (std::size_t j = 1; j <= N; ++j) s += static_cast<double>(j) * values[j];
  return s;
}

PmfVector point_mass(std::size_t value, std::size_t N) {
  require(value <= N, ErrorKind::InvalidParameter, "point mass outside {0..N}");
  PmfVector p{std::vector<double>(N + 1, 0.0), N, 0.0};
  p.values[value] = 1.0;
  return p;
}

PmfVector to_pmf_vector(const DiscreteDist& d, std::size_t N) {
  PmfVector p{std::vector<double>(N + 1), N, 0.0};
  for (std::size_t n = 0; n <= N; ++n) p.values[n] = d.pmf(n);
  p.leaked = d.tail(N);
  return p;
}

PmfVector compound_step(const PmfVector& px, const PmfVector& pA, const PmfVector& pB,
                        double leak_budget) {
  const std::size_t N = px.N;
  check_common(px, N, "px");
  check_common(pA, N, "pA");
  check_common(pB, N, "pB");

  std::size_t top_b = N;
  while (top_b > 0 && pB.values[top_b] == 0.0) --top_b;

  // offspring(n) = sum_k px(k) pB^{*k}(n), powers built incrementally.
  std::vector<double> offspring(N + 1, 0.0);
  std::vector<double> power(N + 1, 0.0), next(N + 1, 0.0);
  power[0] = 1.0;
  std::size_t lo = 0, hi = 0;  // nonzero range of the current power
  double remaining = 1.0 - px.leaked;
  for (std::size_t k = 0; k <= N; ++k) {
    const double w = px.values[k];
    if (w > 0.0) {
      for (std::size_t n = lo; n <= hi; ++n) offspring[n] += w * power[n];
    }
    remaining -= w;
    if (remaining < kNegligible || k == N) break;
    // power <- power * pB, truncated at N.
    const std::size_t new_hi = std::min(N, hi + top_b);
    std::fill(next.begin() + lo, next.begin() + new_hi + 1, 0.0);
    for (std::size_t n = lo; n <= new_hi; ++n) {
      const std::size_t j_max = std::min(top_b, n - lo);
      const std::size_t j_min = n > hi ? n - hi : 0;
      double s = 0.0;
      for (std::size_t j = j_min; j <= j_max; ++j) s += pB.values[j] * power[n - j];
      next[n] = s;
    }
    std::swap(power, next);
    hi = new_hi;
    while (lo < hi && power[lo] == 0.0) ++lo;
    while (hi > lo && power[hi] == 0.0) --hi;
  }

  PmfVector out{std::vector<double>(N + 1, 0.0), N, 0.0};
  std::size_t top_a = N;
  while (top_a > 0 && pA.values[top_a] == 0.0) --top_a;
  for (std::size_t n = 0; n <= N; ++n) {
    double s = 0.0;
    const std::size_t j_max = std::min(n, top_a);
    for (std::size_t j = 0; j <= j_max; ++j) s += pA.values[j] * offspring[n - j];
    out.values[n] = s;
  }
  out.leaked = deficit(out.values);
  if (out.leaked > leak_budget) {
    std::ostringstream os;
    os << "mass " << out.leaked << " beyond N=" << N << " exceeds the leak budget "
       << leak_budget << "; increase N";
    fail(ErrorKind::TruncationOverflow, os.str());
  }
  return out;
}

StationarySolution solve_stationary(const FixedPointModel& m, std::size_t N, double eps,
                                    std::size_t max_iter, double leak_budget) {
  require(N >= 1, ErrorKind::InvalidParameter, "truncation bound N must be positive");
  require(eps > 0.0, ErrorKind::InvalidParameter, "eps must be positive");
  const PmfVector pA = to_pmf_vector(m.A, N);
  const PmfVector pB = to_pmf_vector(m.B, N);
  StationarySolution sol{point_mass(0, N), 0, 1.0};
  std::vector<double> tails = sol.pmf.tails();
  while (sol.iterations < max_iter) {
    PmfVector next = compound_step(sol.pmf, pA, pB, leak_budget);
    const std::vector<double> next_tails = next.tails();
    double change = 0.0;
    for (std::size_t n = 0; n <= N; ++n) {
      if (next_tails[n] < tails[n] - kMonotoneSlack) {
        std::ostringstream os;
        os << "tail decreased at n=" << n << " in iteration " << sol.iterations + 1
           << ": the iteration is not stochastically monotone";
        fail(ErrorKind::Inconsistent, os.str());
      }
      change = std::max(change, std::abs(next_tails[n] - tails[n]));
    }
    sol.pmf = std::move(next);
    tails = next_tails;
    sol.last_change = change;
    ++sol.iterations;
    if (change < eps) return sol;
  }
  std::ostringstream os;
  os << "no convergence after " << max_iter << " iterations (last change " << sol.last_change
     << ", b = " << m.b << ")";
  fail(ErrorKind::NonConvergence, os.str());
}

double stationary_mean(const FixedPointModel& m) {
  if (!std::isfinite(m.a)) return std::numeric_limits<double>::infinity();
  return m.a / (1.0 - m.b);
}

}  // namespace branchtail
