#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "branchtail/asymptotics.hpp"
#include "branchtail/discrete.hpp"
#include "branchtail/model.hpp"
#include "branchtail/rng.hpp"

namespace branchtail {

struct SimConfig {
  std::optional<std::uint64_t> burn_in;  // defaults to default_burn_in(b)
  std::uint64_t replications = 1;
  std::uint64_t chain_length = 1;  // steps after burn-in
  std::uint64_t seed = 1;
  unsigned workers = 1;
  /// Record every post-burn-in state instead of the final one. Samples are
  /// then autocorrelated and the reported intervals are too narrow.
  bool record_trajectory = false;
  /// Biased, diagnostics only: offspring sums over more than this many
  /// parents draw only this many exactly and a moment-matched normal for
  /// the rest. 0 disables.
  std::uint64_t hybrid_threshold = 0;
};

/// ceil(log(eps) / log(b)): steps until b^n drops below eps.
std::uint64_t default_burn_in(double b, double eps = 1e-6);

/// Replications are split into fixed blocks, so results depend on the seed
/// and the config but never on `workers`.
inline constexpr std::uint64_t kBlockSize = 1 << 14;

struct TailEstimate {
  std::vector<double> grid;
  std::vector<double> p_hat;
  std::vector<double> ci_low;
  std::vector<double> ci_high;
  std::vector<std::uint64_t> counts;
  std::uint64_t n_effective = 0;
  std::optional<std::vector<double>> predicted;
  std::vector<std::string> warnings;
};

/// 95% Wilson score interval for k successes out of n.
std::pair<double, double> wilson_interval(std::uint64_t k, std::uint64_t n, double z = 1.959963984540054);

/// Tail estimate from exceedance counts at each grid point.
TailEstimate tail_from_counts(std::span<const double> grid, std::span<const std::uint64_t> counts,
                              std::uint64_t n);
TailEstimate estimate_tail(std::span<const std::uint64_t> samples, std::span<const double> grid);
TailEstimate estimate_tail(std::span<const double> samples, std::span<const double> grid);

/// Streaming summary: moments plus exceedance counts at fixed thresholds.
struct StreamSummary {
  std::uint64_t n = 0;
  double sum = 0.0;
  double sum_sq = 0.0;
  std::vector<double> thresholds;     // ascending
  std::vector<std::uint64_t> exceed;  // samples > thresholds[i]

  double mean() const;
  double variance() const;
  double std_error() const;
  std::uint64_t count_above(double threshold) const;  // threshold must be listed
  TailEstimate tail(std::span<const double> grid) const;
};

// Base chain X_n = A_n + sum_{i <= X_{n-1}} B_{i,n}, X_0 = 0.
std::vector<std::uint64_t> simulate_chain(const FixedPointModel& m, const SimConfig& cfg);
StreamSummary stream_chain(const FixedPointModel& m, const SimConfig& cfg,
                           std::span<const double> thresholds);

/// Real-valued sampler with a known mean.
struct RealSampler {
  std::function<double(Rng&)> draw;
  double mean = 0.0;
  std::string name;
};

RealSampler real_point(double value);
RealSampler real_exponential(double mean);
RealSampler real_pareto(double alpha, double floor = 1.0);

// X_n = A_n + sum_{i <= N_n} B_i with N_n ~ Poisson(lambda X_{n-1}).
std::vector<double> simulate_continuous(const RealSampler& a_dist, double lambda,
                                        const RealSampler& b_dist, const SimConfig& cfg);

struct SecondOrderSamples {
  std::vector<std::uint64_t> X;  // X_n
  std::vector<std::uint64_t> Y;  // X_{n-1}
  std::vector<double> combination;  // X + delta Y
};

std::uint64_t default_second_order_burn_in(const SecondOrderModel& m2, double eps = 1e-6);
SecondOrderSamples simulate_second_order(const SecondOrderModel& m2, const SimConfig& cfg);
/// Streams X + delta Y.
StreamSummary stream_second_order(const SecondOrderModel& m2, const SimConfig& cfg,
                                  std::span<const double> thresholds);

enum class QueueMode { Reduced, Direct };

/// Samples of the observed population Y of the feedback queue. A queue
/// without arrivals (xi = 0) is not mapped; Y = k throughout.
std::vector<std::uint64_t> simulate_queue(const QueueModel& q, const SimConfig& cfg,
                                          QueueMode mode);

struct SigmaRule {
  enum class Kind { Fixed, FirstPassage } kind = Kind::Fixed;
  std::uint64_t n = 1;        // Fixed: sigma = n
  double K = 0.0;             // FirstPassage: first k with S_k < -K ...
  std::uint64_t n_max = 1000; // ... capped at n_max
};

struct WalkMaxResult {
  std::vector<double> grid;
  std::vector<double> p_hat;     // P(M_sigma > x)
  std::vector<std::uint64_t> counts;
  std::vector<double> G_tail;    // P(xi - shift > x)
  std::vector<double> ratio;     // p_hat / G_tail
  std::vector<double> ratio_ci_low;
  std::vector<double> ratio_ci_high;
  double mean_sigma = 0.0;
  std::uint64_t truncated = 0;   // first-passage runs stopped at n_max
  std::uint64_t n = 0;
  double far_ratio = 0.0;        // mean ratio over the last quarter of the grid
  double far_ratio_over_mean_sigma = 0.0;
};

/// M_sigma = max_{0 <= k <= sigma} S_k for S_k a sum of i.i.d. xi - shift.
WalkMaxResult random_walk_max_oracle(const DiscreteDist& xi, double drift_shift,
                                     const SigmaRule& rule, std::span<const double> grid,
                                     const SimConfig& cfg);

/// Empirical pmf on {0, ..., max}.
std::vector<double> empirical_pmf(std::span<const std::uint64_t> samples);
/// Total variation distance between two pmfs on the nonnegative integers.
double total_variation(std::span<const double> p, std::span<const double> q);
/// Two-sample Kolmogorov-Smirnov statistic.
double ks_statistic(std::vector<double> a, std::vector<double> b);
/// Asymptotic critical value c(alpha) sqrt((n + m) / (n m)).
double ks_critical_value(std::size_t n, std::size_t m, double alpha = 0.01);

}  // namespace branchtail
