#pragma once

#include <cstddef>
#include <vector>

#include "branchtail/discrete.hpp"
#include "branchtail/model.hpp"

namespace branchtail {

/// Distribution on {0, ..., N} plus the mass `leaked` that fell beyond N.
struct PmfVector {
  std::vector<double> values;
  std::size_t N = 0;
  double leaked = 0.0;

  /// P(X > n) counting leaked mass as lying above N.
  double tail(std::size_t n) const;
  std::vector<double> tails() const;
  double mean() const;  // of the retained part
};

PmfVector point_mass(std::size_t value, std::size_t N);
PmfVector to_pmf_vector(const DiscreteDist& d, std::size_t N);

constexpr double kDefaultLeakBudget = 1e-8;

/// One step of the chain in distribution: the law of A + sum_{i <= X} B_i
/// for X ~ px. Throws TruncationOverflow once more than `leak_budget` of
/// the mass sits beyond N.
PmfVector compound_step(const PmfVector& px, const PmfVector& pA, const PmfVector& pB,
                        double leak_budget = kDefaultLeakBudget);

struct StationarySolution {
  PmfVector pmf;
  std::size_t iterations = 0;
  double last_change = 0.0;  // sup-norm change of the tail in the final step
};

/// Iterates compound_step from X_0 = 0 until the tail moves by less than
/// `eps` in sup norm.
StationarySolution solve_stationary(const FixedPointModel& m, std::size_t N, double eps = 1e-13,
                                    std::size_t max_iter = 100000,
                                    double leak_budget = kDefaultLeakBudget);

/// a / (1 - b); +inf when E(A) is infinite.
double stationary_mean(const FixedPointModel& m);

}  // namespace branchtail
