#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "branchtail/rng.hpp"
#include "branchtail/tail.hpp"

namespace branchtail {

enum class Finiteness { Finite, Infinite, Unknown };

const char* to_string(Finiteness f) noexcept;

namespace detail {

class DiscreteModel {
 public:
  virtual ~DiscreteModel() = default;

  virtual double pmf(std::uint64_t n) const = 0;
  /// P(Z > n).
  virtual double tail(std::uint64_t n) const = 0;
  /// Sum over k >= m of P(Z > k); +inf when the mean is infinite.
  virtual double upper_tail_sum(std::uint64_t m) const;
  virtual std::uint64_t sample(Rng& rng) const = 0;
  virtual std::uint64_t sample_sum(std::uint64_t count, Rng& rng) const;
  virtual std::optional<double> ratio_constant(const TailFunction& reference) const = 0;

  std::string family;
  std::string description;
  double mean = 0.0;
  double variance = 0.0;
  Finiteness log_moment = Finiteness::Finite;
  std::optional<std::uint64_t> max_support;
  std::optional<TailFunction> source_tail;
  std::optional<double> declared_alpha;  // tail index when known
};

}  // namespace detail

/// A distribution on the nonnegative integers. Immutable and cheap to copy;
/// sampling only touches the caller's generator.
class DiscreteDist {
 public:
  explicit DiscreteDist(std::shared_ptr<const detail::DiscreteModel> model);

  double pmf(std::uint64_t n) const { return model_->pmf(n); }
  double tail(std::uint64_t n) const { return model_->tail(n); }
  /// P(Z > x) for real x.
  double tail_at(double x) const;
  double upper_tail_sum(std::uint64_t m) const { return model_->upper_tail_sum(m); }

  /// +inf when infinite.
  double mean() const;
  double variance() const;
  Finiteness log_moment() const { return model_->log_moment; }
  std::optional<std::uint64_t> max_support() const { return model_->max_support; }
  std::optional<double> declared_alpha() const { return model_->declared_alpha; }

  /// Exact draw by tail inversion; throws StateOverflow if the value does
  /// not fit in 63 bits.
  std::uint64_t sample(Rng& rng) const { return model_->sample(rng); }
  /// Sum of `count` i.i.d. draws, drawn one by one.
  std::uint64_t sample_sum(std::uint64_t count, Rng& rng) const {
    return model_->sample_sum(count, rng);
  }

  /// lim P(Z > x) / G(x) when it follows from how the distribution was
  /// constructed; nullopt when only a numerical estimate can tell.
  std::optional<double> ratio_constant(const TailFunction& reference) const {
    return model_->ratio_constant(reference);
  }

  /// The real-valued tail this distribution was discretized from, if any.
  const std::optional<TailFunction>& source_tail() const { return model_->source_tail; }
  const std::string& family() const { return model_->family; }
  const std::string& describe() const { return model_->description; }

 private:
  std::shared_ptr<const detail::DiscreteModel> model_;
};

DiscreteDist make_point(std::uint64_t value);
DiscreteDist make_bernoulli(double p);
/// P(Z > n) = q^(n+1), i.e. pmf(n) = (1 - q) q^n.
DiscreteDist make_geometric(double q);
/// Explicit pmf on {0, ..., size-1}; must sum to one within 1e-9.
DiscreteDist make_table(std::vector<double> pmf);

/// Integer distribution with P(Z > n) = min(cap, scale * t(n)) for n >= 0.
/// With the defaults this is the plain discretization P(Z > n) = t(n), so
/// integer tails agree with t exactly.
DiscreteDist discretize(const TailFunction& t, double scale = 1.0, double cap = 1.0);

/// Distribution of X + Y for independent X, Y.
DiscreteDist convolve(const DiscreteDist& x, const DiscreteDist& y);
/// k-fold convolution, k >= 1.
DiscreteDist convolution_power(const DiscreteDist& d, unsigned k);

/// Real-valued view x -> P(Z > x).
TailFunction as_tail(const DiscreteDist& d);

struct IntegratedTail {
  TailFunction tail;    // x -> min(1, sum_{n >= ceil(x)} P(B > n))
  bool proper = true;   // false when the tail sum diverges
  double total = 0.0;   // sum_{n >= 0} P(B > n) = E B
};

/// Lattice version of the integrated tail distribution H_I.
IntegratedTail integrated_tail(const DiscreteDist& d);

/// Smallest N such that P(Z > N) <= mass (linear scan, capped at `limit`).
std::uint64_t tail_quantile_index(const DiscreteDist& d, double mass,
                                  std::uint64_t limit = (1ULL << 32));

}  // namespace branchtail
