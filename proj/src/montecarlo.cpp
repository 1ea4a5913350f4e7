#include "branchtail/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>

#include "branchtail/errors.hpp"

namespace branchtail {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::uint64_t add_checked(std::uint64_t a, std::uint64_t b) {
  std::uint64_t out = 0;
  if (__builtin_add_overflow(a, b, &out)) {
    fail(ErrorKind::StateOverflow, "chain state overflows 64 bits");
  }
  return out;
}

void check_config(const SimConfig& cfg) {
  require(cfg.replications >= 1, ErrorKind::InvalidParameter, "replications must be >= 1");
  require(cfg.chain_length >= 1, ErrorKind::InvalidParameter, "chain_length must be >= 1");
  require(cfg.workers >= 1, ErrorKind::InvalidParameter, "workers must be >= 1");
}

// Runs fn(block, begin, end) over fixed-size replication blocks. When
// several blocks throw, the one with the lowest index wins so the reported
// error does not depend on scheduling.
template <class Fn>
void for_blocks(std::uint64_t n, unsigned workers, Fn&& fn) {
  const std::uint64_t blocks = (n + kBlockSize - 1) / kBlockSize;
  const unsigned threads =
      static_cast<unsigned>(std::max<std::uint64_t>(1, std::min<std::uint64_t>(workers, blocks)));
  std::atomic<std::uint64_t> next{0};
  std::mutex mu;
  std::exception_ptr error;
  std::uint64_t error_block = std::numeric_limits<std::uint64_t>::max();
  auto body = [&] {
    for (;;) {
      const std::uint64_t b = next.fetch_add(1);
      if (b >= blocks) return;
      try {
        fn(b, b * kBlockSize, std::min(n, (b + 1) * kBlockSize));
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (b < error_block) {
          error_block = b;
          error = std::current_exception();
        }
      }
    }
  };
  if (threads == 1) {
    body();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(body);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
}

struct Draw {
  double value = 0.0;
  double aux = 0.0;
  bool flag = false;
};

struct BlockTally {
  double sum = 0.0, sum_sq = 0.0, aux = 0.0;
  std::uint64_t n = 0, flags = 0;
  std::vector<std::uint64_t> buckets;
};

struct StreamResult {
  StreamSummary summary;
  double aux_sum = 0.0;
  std::uint64_t flags = 0;
};

// fn(rng, emit) runs one replication and calls emit(Draw) per sample.
template <class Fn>
StreamResult stream_replications(const SimConfig& cfg, std::span<const double> thresholds,
                                 Fn&& fn) {
  check_config(cfg);
  std::vector<double> th(thresholds.begin(), thresholds.end());
  require(std::is_sorted(th.begin(), th.end()), ErrorKind::InvalidParameter,
          "thresholds must be ascending");
  const std::uint64_t blocks = (cfg.replications + kBlockSize - 1) / kBlockSize;
  std::vector<BlockTally> tallies(blocks);
  for_blocks(cfg.replications, cfg.workers, [&](std::uint64_t b, std::uint64_t lo, std::uint64_t hi) {
    BlockTally t;
    t.buckets.assign(th.size() + 1, 0);
    auto emit = [&](const Draw& d) {
      t.sum += d.value;
      t.sum_sq += d.value * d.value;
      t.aux += d.aux;
      t.flags += d.flag ? 1 : 0;
      ++t.n;
      ++t.buckets[std::lower_bound(th.begin(), th.end(), d.value) - th.begin()];
    };
    for (std::uint64_t r = lo; r < hi; ++r) {
      Rng rng = Rng::stream(cfg.seed, r);
      fn(rng, emit);
    }
    tallies[b] = std::move(t);
  });

  StreamResult out;
  StreamSummary& s = out.summary;
  s.thresholds = th;
  std::vector<std::uint64_t> buckets(th.size() + 1, 0);
  for (const BlockTally& t : tallies) {
    s.n += t.n;
    s.sum += t.sum;
    s.sum_sq += t.sum_sq;
    out.aux_sum += t.aux;
    out.flags += t.flags;
    for (std::size_t i = 0; i < buckets.size(); ++i) buckets[i] += t.buckets[i];
  }
  // Bucket j holds samples with exactly j thresholds strictly below them.
  s.exceed.assign(th.size(), 0);
  std::uint64_t above = 0;
  for (std::size_t i = th.size(); i-- > 0;) {
    above += buckets[i + 1];
    s.exceed[i] = above;
  }
  return out;
}

// Per-replication sample collection in replication order.
template <class T, class Fn>
std::vector<T> collect_replications(const SimConfig& cfg, std::uint64_t per_replication,
                                    Fn&& fn) {
  check_config(cfg);
  std::vector<T> out(cfg.replications * per_replication);
  for_blocks(cfg.replications, cfg.workers, [&](std::uint64_t, std::uint64_t lo, std::uint64_t hi) {
    for (std::uint64_t r = lo; r < hi; ++r) {
      Rng rng = Rng::stream(cfg.seed, r);
      fn(rng, out.data() + r * per_replication);
    }
  });
  return out;
}

double standard_normal(Rng& rng) {
  const double u1 = rng.uniform_open0(), u2 = rng.uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

class OffspringSampler {
 public:
  OffspringSampler(const DiscreteDist& B, std::uint64_t hybrid_threshold)
      : B_(B), threshold_(hybrid_threshold) {
    if (threshold_ > 0) {
      mean_ = B_.mean();
      sd_ = std::sqrt(B_.variance());
      require(std::isfinite(mean_) && std::isfinite(sd_), ErrorKind::InvalidParameter,
              "hybrid offspring sums need finite mean and variance");
    }
  }

  std::uint64_t operator()(std::uint64_t count, Rng& rng) const {
    if (threshold_ == 0 || count <= threshold_) return B_.sample_sum(count, rng);
    const std::uint64_t exact = B_.sample_sum(threshold_, rng);
    const double bulk_n = static_cast<double>(count - threshold_);
    const double bulk =
        std::max(0.0, std::round(bulk_n * mean_ + std::sqrt(bulk_n) * sd_ * standard_normal(rng)));
    require(bulk < 9.2e18, ErrorKind::StateOverflow, "hybrid bulk overflows 64 bits");
    return add_checked(exact, static_cast<std::uint64_t>(bulk));
  }

 private:
  DiscreteDist B_;
  std::uint64_t threshold_;
  double mean_ = 0.0, sd_ = 0.0;
};

std::uint64_t steps_before_record(const SimConfig& cfg, double b) {
  return cfg.burn_in.value_or(default_burn_in(b));
}

}  // namespace

std::uint64_t default_burn_in(double b, double eps) {
  require(eps > 0.0 && eps < 1.0, ErrorKind::InvalidParameter, "eps must lie in (0, 1)");
  require(b >= 0.0 && b < 1.0, ErrorKind::Stability, "burn-in needs 0 <= b < 1");
  if (b == 0.0) return 1;
  return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::ceil(std::log(eps) / std::log(b))));
}

std::pair<double, double> wilson_interval(std::uint64_t k, std::uint64_t n, double z) {
  require(n > 0, ErrorKind::InvalidInput, "interval needs a nonempty sample");
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(k) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double centre = (p + z2 / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
  return {std::max(0.0, std::min(p, centre - half)), std::min(1.0, std::max(p, centre + half))};
}

TailEstimate tail_from_counts(std::span<const double> grid, std::span<const std::uint64_t> counts,
                              std::uint64_t n) {
  require(n > 0, ErrorKind::InvalidInput, "tail estimate needs a nonempty sample");
  require(grid.size() == counts.size(), ErrorKind::InvalidParameter, "grid/count size mismatch");
  TailEstimate est;
  est.grid.assign(grid.begin(), grid.end());
  est.counts.assign(counts.begin(), counts.end());
  est.n_effective = n;
  std::size_t shallow = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (i > 0) {
      require(grid[i] > grid[i - 1], ErrorKind::InvalidParameter, "grid must be increasing");
    }
    const auto [lo, hi] = wilson_interval(counts[i], n);
    est.p_hat.push_back(static_cast<double>(counts[i]) / static_cast<double>(n));
    est.ci_low.push_back(lo);
    est.ci_high.push_back(hi);
    if (counts[i] < 50) ++shallow;
  }
  if (shallow > 0) {
    est.warnings.push_back(std::to_string(shallow) +
                           " grid point(s) have fewer than 50 exceedances; the tail is too deep "
                           "for the sample size");
  }
  return est;
}

TailEstimate estimate_tail(std::span<const std::uint64_t> samples, std::span<const double> grid) {
  require(!samples.empty(), ErrorKind::InvalidInput, "empty sample");
  std::vector<std::uint64_t> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::uint64_t> counts;
  for (double x : grid) {
    auto it = std::upper_bound(sorted.begin(), sorted.end(), x,
                               [](double v, std::uint64_t s) { return v < static_cast<double>(s); });
    counts.push_back(static_cast<std::uint64_t>(sorted.end() - it));
  }
  return tail_from_counts(grid, counts, samples.size());
}

TailEstimate estimate_tail(std::span<const double> samples, std::span<const double> grid) {
  require(!samples.empty(), ErrorKind::InvalidInput, "empty sample");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::uint64_t> counts;
  for (double x : grid) {
    auto it = std::upper_bound(sorted.begin(), sorted.end(), x);
    counts.push_back(static_cast<std::uint64_t>(sorted.end() - it));
  }
  return tail_from_counts(grid, counts, samples.size());
}

double StreamSummary::mean() const {
  require(n > 0, ErrorKind::InvalidInput, "empty stream");
  return sum / static_cast<double>(n);
}

double StreamSummary::variance() const {
  require(n > 1, ErrorKind::InvalidInput, "variance needs two samples");
  const double m = mean();
  const double nn = static_cast<double>(n);
  return std::max(0.0, (sum_sq - nn * m * m) / (nn - 1.0));
}

double StreamSummary::std_error() const { return std::sqrt(variance() / static_cast<double>(n)); }

std::uint64_t StreamSummary::count_above(double threshold) const {
  auto it = std::lower_bound(thresholds.begin(), thresholds.end(), threshold);
  require(it != thresholds.end() && *it == threshold, ErrorKind::InvalidParameter,
          "threshold was not tallied");
  return exceed[static_cast<std::size_t>(it - thresholds.begin())];
}

TailEstimate StreamSummary::tail(std::span<const double> grid) const {
  std::vector<std::uint64_t> counts;
  for (double x : grid) counts.push_back(count_above(x));
  return tail_from_counts(grid, counts, n);
}

// --- base chain ------------------------------------------------------------

namespace {

template <class Emit>
void run_chain(const FixedPointModel& m, const OffspringSampler& offspring, std::uint64_t burn,
               const SimConfig& cfg, Rng& rng, Emit&& emit) {
  std::uint64_t x = 0;
  const std::uint64_t total = burn + cfg.chain_length;
  for (std::uint64_t step = 1; step <= total; ++step) {
    const std::uint64_t kids = x == 0 ? 0 : offspring(x, rng);
    x = add_checked(m.A.sample(rng), kids);
    if (step > burn && (cfg.record_trajectory || step == total)) emit(x);
  }
}

}  // namespace

std::vector<std::uint64_t> simulate_chain(const FixedPointModel& m, const SimConfig& cfg) {
  const std::uint64_t burn = steps_before_record(cfg, m.b);
  const OffspringSampler offspring(m.B, cfg.hybrid_threshold);
  const std::uint64_t per = cfg.record_trajectory ? cfg.chain_length : 1;
  return collect_replications<std::uint64_t>(cfg, per, [&](Rng& rng, std::uint64_t* out) {
    std::size_t i = 0;
    run_chain(m, offspring, burn, cfg, rng, [&](std::uint64_t x) { out[i++] = x; });
  });
}

StreamSummary stream_chain(const FixedPointModel& m, const SimConfig& cfg,
                           std::span<const double> thresholds) {
  const std::uint64_t burn = steps_before_record(cfg, m.b);
  const OffspringSampler offspring(m.B, cfg.hybrid_threshold);
  return stream_replications(cfg, thresholds, [&](Rng& rng, auto& emit) {
           run_chain(m, offspring, burn, cfg, rng,
                     [&](std::uint64_t x) { emit(Draw{static_cast<double>(x)}); });
         }).summary;
}

// --- continuous model ------------------------------------------------------

RealSampler real_point(double value) {
  require(value >= 0.0 && std::isfinite(value), ErrorKind::InvalidParameter,
          "point value must be finite and nonnegative");
  std::ostringstream os;
  os << "point(" << value << ")";
  return {[value](Rng&) { return value; }, value, os.str()};
}

RealSampler real_exponential(double mean) {
  require(mean > 0.0 && std::isfinite(mean), ErrorKind::InvalidParameter,
          "exponential mean must be positive");
  std::ostringstream os;
  os << "exponential(mean=" << mean << ")";
  return {[mean](Rng& rng) { return -mean * std::log(rng.uniform_open0()); }, mean, os.str()};
}

RealSampler real_pareto(double alpha, double floor) {
  require(alpha > 0.0 && floor > 0.0, ErrorKind::InvalidParameter,
          "pareto needs alpha > 0 and floor > 0");
  std::ostringstream os;
  os << "pareto(alpha=" << alpha << ", floor=" << floor << ")";
  const double mean = alpha > 1.0 ? floor * alpha / (alpha - 1.0) : kInf;
  return {[alpha, floor](Rng& rng) { return floor * std::pow(rng.uniform_open0(), -1.0 / alpha); },
          mean, os.str()};
}

std::vector<double> simulate_continuous(const RealSampler& a_dist, double lambda,
                                        const RealSampler& b_dist, const SimConfig& cfg) {
  require(lambda > 0.0, ErrorKind::InvalidParameter, "lambda must be positive");
  require(std::isfinite(a_dist.mean), ErrorKind::InvalidParameter,
          "continuous model needs a finite immigration mean");
  const double b = lambda * b_dist.mean;
  if (!(b < 1.0)) {
    std::ostringstream os;
    os << "lambda * E(B) = " << b << " >= 1: the continuous model is not subcritical";
    fail(ErrorKind::Stability, os.str());
  }
  const std::uint64_t burn = steps_before_record(cfg, b);
  const std::uint64_t per = cfg.record_trajectory ? cfg.chain_length : 1;
  const std::uint64_t total = burn + cfg.chain_length;
  return collect_replications<double>(cfg, per, [&](Rng& rng, double* out) {
    double x = 0.0;
    std::size_t i = 0;
    for (std::uint64_t step = 1; step <= total; ++step) {
      double jumps = 0.0;
      if (x > 0.0) {
        std::poisson_distribution<std::uint64_t> count(lambda * x);
        const std::uint64_t k = count(rng);
        for (std::uint64_t j = 0; j < k; ++j) jumps += b_dist.draw(rng);
      }
      x = a_dist.draw(rng) + jumps;
      if (step > burn && (cfg.record_trajectory || step == total)) out[i++] = x;
    }
  });
}

// --- second-order process --------------------------------------------------

std::uint64_t default_second_order_burn_in(const SecondOrderModel& m2, double eps) {
  return default_burn_in(m2.b1 + m2.delta, eps);
}

namespace {

template <class Emit>
void run_second_order(const SecondOrderModel& m2, std::uint64_t burn, const SimConfig& cfg,
                      Rng& rng, Emit&& emit) {
  std::uint64_t x1 = 0, x2 = 0;  // X_{n-1}, X_{n-2}
  const std::uint64_t total = burn + cfg.chain_length;
  for (std::uint64_t step = 1; step <= total; ++step) {
    std::uint64_t x = m2.A.sample(rng);
    if (x1 > 0) x = add_checked(x, m2.B1.sample_sum(x1, rng));
    if (x2 > 0) x = add_checked(x, m2.B2.sample_sum(x2, rng));
    x2 = x1;
    x1 = x;
    if (step > burn && (cfg.record_trajectory || step == total)) emit(x1, x2);
  }
}

}  // namespace

SecondOrderSamples simulate_second_order(const SecondOrderModel& m2, const SimConfig& cfg) {
  const std::uint64_t burn = cfg.burn_in.value_or(default_second_order_burn_in(m2));
  const std::uint64_t per = cfg.record_trajectory ? cfg.chain_length : 1;
  const auto pairs = collect_replications<std::pair<std::uint64_t, std::uint64_t>>(
      cfg, per, [&](Rng& rng, std::pair<std::uint64_t, std::uint64_t>* out) {
        std::size_t i = 0;
        run_second_order(m2, burn, cfg, rng,
                         [&](std::uint64_t x, std::uint64_t y) { out[i++] = {x, y}; });
      });
  SecondOrderSamples s;
  s.X.reserve(pairs.size());
  s.Y.reserve(pairs.size());
  s.combination.reserve(pairs.size());
  for (const auto& [x, y] : pairs) {
    s.X.push_back(x);
    s.Y.push_back(y);
    s.combination.push_back(static_cast<double>(x) + m2.delta * static_cast<double>(y));
  }
  return s;
}

StreamSummary stream_second_order(const SecondOrderModel& m2, const SimConfig& cfg,
                                  std::span<const double> thresholds) {
  const std::uint64_t burn = cfg.burn_in.value_or(default_second_order_burn_in(m2));
  return stream_replications(cfg, thresholds, [&](Rng& rng, auto& emit) {
           run_second_order(m2, burn, cfg, rng, [&](std::uint64_t x, std::uint64_t y) {
             emit(Draw{static_cast<double>(x) + m2.delta * static_cast<double>(y)});
           });
         }).summary;
}

// --- feedback queue --------------------------------------------------------

std::vector<std::uint64_t> simulate_queue(const QueueModel& q, const SimConfig& cfg,
                                          QueueMode mode) {
  if (q.xi.pmf(0) == 1.0) {
    // No arrivals ever: only the k permanent customers are present.
    require(q.k >= 1, ErrorKind::InvalidParameter, "queue needs k >= 1 permanent customers");
    require(q.p >= 0.0 && q.p < 1.0, ErrorKind::InvalidParameter,
            "feedback probability must lie in [0, 1)");
    const std::uint64_t per = cfg.record_trajectory ? cfg.chain_length : 1;
    return std::vector<std::uint64_t>(cfg.replications * per, q.k);
  }
  const FixedPointModel m = queue_to_model(q);
  if (mode == QueueMode::Reduced) {
    std::vector<std::uint64_t> x = simulate_chain(m, cfg);
    for (auto& v : x) v = add_checked(v, q.k);
    return x;
  }
  const std::uint64_t burn = steps_before_record(cfg, m.b);
  const std::uint64_t per = cfg.record_trajectory ? cfg.chain_length : 1;
  const std::uint64_t total = burn + cfg.chain_length;
  const DiscreteDist alpha = make_bernoulli(q.p);
  return collect_replications<std::uint64_t>(cfg, per, [&](Rng& rng, std::uint64_t* out) {
    std::uint64_t y = q.k;
    std::size_t i = 0;
    for (std::uint64_t step = 1; step <= total; ++step) {
      // Every present customer spawns xi arrivals; the y - k non-permanent
      // ones return with probability p.
      const std::uint64_t arrivals = q.xi.sample_sum(y, rng);
      const std::uint64_t returning = alpha.sample_sum(y - q.k, rng);
      y = add_checked(add_checked(q.k, returning), arrivals);
      if (step > burn && (cfg.record_trajectory || step == total)) out[i++] = y;
    }
  });
}

// --- random walk maximum ---------------------------------------------------

WalkMaxResult random_walk_max_oracle(const DiscreteDist& xi, double drift_shift,
                                     const SigmaRule& rule, std::span<const double> grid,
                                     const SimConfig& cfg) {
  const double drift = xi.mean() - drift_shift;
  if (!(drift < 0.0)) {
    std::ostringstream os;
    os << "increment mean E(xi) - shift = " << drift << " must be negative";
    fail(ErrorKind::InvalidDrift, os.str());
  }
  if (rule.kind == SigmaRule::Kind::Fixed) {
    require(rule.n >= 1, ErrorKind::InvalidParameter, "fixed sigma needs n >= 1");
  } else {
    require(rule.K >= 0.0 && rule.n_max >= 1, ErrorKind::InvalidParameter,
            "first passage needs K >= 0 and n_max >= 1");
  }
  const StreamResult res = stream_replications(cfg, grid, [&](Rng& rng, auto& emit) {
    double s = 0.0, mx = 0.0;
    std::uint64_t sigma = 0;
    bool truncated = false;
    if (rule.kind == SigmaRule::Kind::Fixed) {
      for (std::uint64_t k = 0; k < rule.n; ++k) {
        s += static_cast<double>(xi.sample(rng)) - drift_shift;
        mx = std::max(mx, s);
      }
      sigma = rule.n;
    } else {
      truncated = true;
      while (sigma < rule.n_max) {
        s += static_cast<double>(xi.sample(rng)) - drift_shift;
        ++sigma;
        mx = std::max(mx, s);
        if (s < -rule.K) {
          truncated = false;
          break;
        }
      }
    }
    emit(Draw{mx, static_cast<double>(sigma), truncated});
  });

  WalkMaxResult out;
  out.grid.assign(grid.begin(), grid.end());
  out.counts = res.summary.exceed;
  out.n = res.summary.n;
  out.mean_sigma = res.aux_sum / static_cast<double>(out.n);
  out.truncated = res.flags;
  const std::size_t far_begin = grid.size() - std::max<std::size_t>(1, grid.size() / 4);
  double far_sum = 0.0;
  std::size_t far_n = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double g = xi.tail_at(grid[i] + drift_shift);
    const auto [lo, hi] = wilson_interval(out.counts[i], out.n);
    const double p = static_cast<double>(out.counts[i]) / static_cast<double>(out.n);
    out.p_hat.push_back(p);
    out.G_tail.push_back(g);
    out.ratio.push_back(g > 0.0 ? p / g : kInf);
    out.ratio_ci_low.push_back(g > 0.0 ? lo / g : kInf);
    out.ratio_ci_high.push_back(g > 0.0 ? hi / g : kInf);
    if (i >= far_begin && out.counts[i] > 0 && g > 0.0) {
      far_sum += p / g;
      ++far_n;
    }
  }
  out.far_ratio = far_n > 0 ? far_sum / static_cast<double>(far_n) : 0.0;
  out.far_ratio_over_mean_sigma = out.far_ratio / out.mean_sigma;
  return out;
}

// --- distances -------------------------------------------------------------

std::vector<double> empirical_pmf(std::span<const std::uint64_t> samples) {
  require(!samples.empty(), ErrorKind::InvalidInput, "empty sample");
  const std::uint64_t top = *std::max_element(samples.begin(), samples.end());
  require(top < (1ULL << 28), ErrorKind::InvalidInput, "sample range too wide for a pmf table");
  std::vector<std::uint64_t> counts(top + 1, 0);
  for (auto s : samples) ++counts[s];
  std::vector<double> pmf(top + 1);
  const double n = static_cast<double>(samples.size());
  for (std::size_t i = 0; i <= top; ++i) pmf[i] = static_cast<double>(counts[i]) / n;
  return pmf;
}

double total_variation(std::span<const double> p, std::span<const double> q) {
  const std::size_t n = std::max(p.size(), q.size());
  double s = 0.0, rest_p = 0.0, rest_q = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = i < p.size() ? p[i] : 0.0;
    const double b = i < q.size() ? q[i] : 0.0;
    s += std::abs(a - b);
    rest_p += a;
    rest_q += b;
  }
  // Mass missing from either vector (e.g. leaked beyond a truncation) is
  // counted as disagreement.
  s += std::abs((1.0 - rest_p) - (1.0 - rest_q));
  return 0.5 * s;
}

double ks_statistic(std::vector<double> a, std::vector<double> b) {
  require(!a.empty() && !b.empty(), ErrorKind::InvalidInput, "KS needs two nonempty samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

double ks_critical_value(std::size_t n, std::size_t m, double alpha) {
  require(n > 0 && m > 0, ErrorKind::InvalidParameter, "KS needs nonempty samples");
  require(alpha > 0.0 && alpha < 1.0, ErrorKind::InvalidParameter, "alpha must lie in (0, 1)");
  const double c = std::sqrt(-0.5 * std::log(alpha / 2.0));
  const double nn = static_cast<double>(n), mm = static_cast<double>(m);
  return c * std::sqrt((nn + mm) / (nn * mm));
}

}  // namespace branchtail
