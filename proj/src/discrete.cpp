#include "branchtail/discrete.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "branchtail/errors.hpp"

namespace branchtail {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Largest value a sample may take; leaves headroom for sums of a few draws.
constexpr double kMaxSample = 9.2e18;
// Bernoulli sums over more parents than this use an exact binomial draw.
constexpr std::uint64_t kDirectBernoulliSum = 64;

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::uint64_t checked_add(std::uint64_t a, std::uint64_t b) {
  std::uint64_t out = 0;
  if (__builtin_add_overflow(a, b, &out)) {
    fail(ErrorKind::StateOverflow, "integer state overflow while summing draws");
  }
  return out;
}

bool heavy_reference(const TailFunction& g) {
  const auto c = g.declared_class();
  return c && *c != TailClass::LightTail;
}

bool subexponential_reference(const TailFunction& g) {
  const auto c = g.declared_class();
  if (!c) return false;
  switch (*c) {
    case TailClass::RV:
    case TailClass::ERV:
    case TailClass::IRV:
    case TailClass::Sstar:
    case TailClass::S:
      return true;
    default:
      return false;
  }
}

}  // namespace

const char* to_string(Finiteness f) noexcept {
  switch (f) {
    case Finiteness::Finite: return "finite";
    case Finiteness::Infinite: return "infinite";
    case Finiteness::Unknown: return "unknown";
  }
  return "?";
}

namespace detail {

double DiscreteModel::upper_tail_sum(std::uint64_t m) const {
  if (!std::isfinite(mean)) return kInf;
  // mean - sum_{n < m} tail(n), compensated.
  double head = 0.0, comp = 0.0;
  for (std::uint64_t n = 0; n < m; ++n) {
    const double y = tail(n) - comp;
    const double t = head + y;
    comp = (t - head) - y;
    head = t;
  }
  return std::max(0.0, mean - head);
}

std::uint64_t DiscreteModel::sample_sum(std::uint64_t count, Rng& rng) const {
  std::uint64_t total = 0;
  for (std::uint64_t i = 0; i < count; ++i) total = checked_add(total, sample(rng));
  return total;
}

}  // namespace detail

DiscreteDist::DiscreteDist(std::shared_ptr<const detail::DiscreteModel> model)
    : model_(std::move(model)) {
  require(model_ != nullptr, ErrorKind::InvalidInput, "null discrete model");
}

double DiscreteDist::tail_at(double x) const {
  if (x < 0.0) return 1.0;
  if (x >= kMaxSample) return tail(static_cast<std::uint64_t>(kMaxSample));
  return tail(static_cast<std::uint64_t>(std::floor(x)));
}

double DiscreteDist::mean() const {
  require(!std::isnan(model_->mean), ErrorKind::InvalidInput,
          "mean of " + model_->description + " cannot be determined without tail metadata");
  return model_->mean;
}

double DiscreteDist::variance() const {
  require(!std::isnan(model_->variance), ErrorKind::InvalidInput,
          "variance of " + model_->description + " cannot be determined");
  return model_->variance;
}

// ---------------------------------------------------------------------------

namespace {

class PointModel final : public detail::DiscreteModel {
 public:
  explicit PointModel(std::uint64_t v) : v_(v) {
    family = "point";
    description = "point(" + std::to_string(v) + ")";
    mean = static_cast<double>(v);
    variance = 0.0;
    max_support = v;
  }
  double pmf(std::uint64_t n) const override { return n == v_ ? 1.0 : 0.0; }
  double tail(std::uint64_t n) const override { return n < v_ ? 1.0 : 0.0; }
  double upper_tail_sum(std::uint64_t m) const override {
    return m < v_ ? static_cast<double>(v_ - m) : 0.0;
  }
  std::uint64_t sample(Rng&) const override { return v_; }
  std::uint64_t sample_sum(std::uint64_t count, Rng&) const override {
    std::uint64_t out = 0;
    if (v_ != 0 && __builtin_mul_overflow(count, v_, &out)) {
      fail(ErrorKind::StateOverflow, "integer state overflow while summing draws");
    }
    return v_ == 0 ? 0 : out;
  }
  std::optional<double> ratio_constant(const TailFunction& g) const override {
    if (heavy_reference(g)) return 0.0;
    return std::nullopt;
  }

 private:
  std::uint64_t v_;
};

class BernoulliModel final : public detail::DiscreteModel {
 public:
  explicit BernoulliModel(double p) : p_(p) {
    family = "bernoulli";
    description = "bernoulli(" + format_double(p) + ")";
    mean = p;
    variance = p * (1.0 - p);
    max_support = p > 0.0 ? 1 : 0;
  }
  double pmf(std::uint64_t n) const override {
    return n == 0 ? 1.0 - p_ : (n == 1 ? p_ : 0.0);
  }
  double tail(std::uint64_t n) const override { return n == 0 ? p_ : 0.0; }
  double upper_tail_sum(std::uint64_t m) const override { return m == 0 ? p_ : 0.0; }
  std::uint64_t sample(Rng& rng) const override { return rng.uniform() < p_ ? 1 : 0; }
  std::uint64_t sample_sum(std::uint64_t count, Rng& rng) const override {
    if (count > kDirectBernoulliSum && p_ > 0.0 && p_ < 1.0) {
      return std::binomial_distribution<std::uint64_t>(count, p_)(rng);
    }
    std::uint64_t s = 0;
    for (std::uint64_t i = 0; i < count; ++i) s += rng.uniform() < p_ ? 1 : 0;
    return s;
  }
  std::optional<double> ratio_constant(const TailFunction& g) const override {
    if (heavy_reference(g)) return 0.0;
    return std::nullopt;
  }

 private:
  double p_;
};

class GeometricModel final : public detail::DiscreteModel {
 public:
  explicit GeometricModel(double q) : q_(q), log_q_(std::log(q)) {
    family = "geometric";
    description = "geometric(" + format_double(q) + ")";
    mean = q / (1.0 - q);
    variance = q / ((1.0 - q) * (1.0 - q));
    if (q == 0.0) max_support = 0;
  }
  double pmf(std::uint64_t n) const override {
    return (1.0 - q_) * std::pow(q_, static_cast<double>(n));
  }
  double tail(std::uint64_t n) const override {
    return std::pow(q_, static_cast<double>(n) + 1.0);
  }
  double upper_tail_sum(std::uint64_t m) const override { return tail(m) / (1.0 - q_); }
  std::uint64_t sample(Rng& rng) const override {
    if (q_ == 0.0) return 0;
    const double v = std::floor(std::log(rng.uniform_open0()) / log_q_);
    require(v < kMaxSample, ErrorKind::StateOverflow, "geometric draw overflow");
    return static_cast<std::uint64_t>(v);
  }
  std::optional<double> ratio_constant(const TailFunction& g) const override {
    if (heavy_reference(g)) return 0.0;
    return std::nullopt;
  }

 private:
  double q_, log_q_;
};

class TableModel final : public detail::DiscreteModel {
 public:
  explicit TableModel(std::vector<double> pmf) : pmf_(std::move(pmf)) {
    family = "table";
    std::ostringstream os;
    os << "table[" << pmf_.size() << "]";
    description = os.str();
    // Suffix sums from the top: tail_[n] = sum_{k > n} pmf(k), no cancellation.
    tail_.assign(pmf_.size(), 0.0);
    double acc = 0.0;
    for (std::size_t i = pmf_.size(); i-- > 0;) {
      tail_[i] = acc;
      acc += pmf_[i];
    }
    cdf_.resize(pmf_.size());
    std::partial_sum(pmf_.begin(), pmf_.end(), cdf_.begin());
    double m = 0.0, m2 = 0.0;
    for (std::size_t i = 0; i < pmf_.size(); ++i) {
      m += static_cast<double>(i) * pmf_[i];
      m2 += static_cast<double>(i) * static_cast<double>(i) * pmf_[i];
    }
    mean = m;
    variance = std::max(0.0, m2 - m * m);
    std::size_t top = pmf_.size();
    while (top > 0 && pmf_[top - 1] == 0.0) --top;
    max_support = top == 0 ? 0 : top - 1;
  }
  double pmf(std::uint64_t n) const override { return n < pmf_.size() ? pmf_[n] : 0.0; }
  double tail(std::uint64_t n) const override { return n < tail_.size() ? tail_[n] : 0.0; }
  double upper_tail_sum(std::uint64_t m) const override {
    double s = 0.0;
    for (std::size_t n = m; n < tail_.size(); ++n) s += tail_[n];
    return s;
  }
  std::uint64_t sample(Rng& rng) const override {
    const double u = rng.uniform() * cdf_.back();
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    if (it == cdf_.end()) --it;
    auto idx = static_cast<std::uint64_t>(it - cdf_.begin());
    while (pmf_[idx] == 0.0 && idx + 1 < pmf_.size()) ++idx;
    return idx;
  }
  std::optional<double> ratio_constant(const TailFunction& g) const override {
    if (heavy_reference(g)) return 0.0;
    return std::nullopt;
  }

 private:
  std::vector<double> pmf_, tail_, cdf_;
};

/// P(Z > n) = min(cap, scale * t(n)).
class DiscretizedModel final : public detail::DiscreteModel {
 public:
  DiscretizedModel(TailFunction t, double scale, double cap)
      : t_(std::move(t)), scale_(scale), cap_(cap) {
    family = "discretized";
    description = "discretize(" + t_.describe() +
                  (scale != 1.0 || cap != 1.0
                       ? ", scale=" + format_double(scale) + ", cap=" + format_double(cap)
                       : std::string()) +
                  ")";
    source_tail = t_;
    declared_alpha = t_.declared_alpha();
    if (!declared_alpha && t_.erv_indices()) declared_alpha = t_.erv_indices()->first;

    // Beyond `cross_` the cap is inactive and the tail is scale * t(n).
    cross_ = scale_ > cap_ ? t_.quantile(cap_ / scale_) : 0.0;
    require(std::isfinite(cross_), ErrorKind::InvalidInput,
            "discretize: improper tail (does not vanish)");
    compute_moments();

    if (std::isfinite(mean) || t_.power_bounded() || declared_alpha ||
        t_.declared_class() == TailClass::LightTail) {
      log_moment = Finiteness::Finite;
    } else {
      log_moment = Finiteness::Unknown;
    }
  }

  double pmf(std::uint64_t n) const override {
    if (n == 0) return 1.0 - tail(0);
    return tail(n - 1) - tail(n);
  }

  double tail(std::uint64_t n) const override {
    return std::min(cap_, scale_ * t_.evaluate(static_cast<double>(n)));
  }

  double upper_tail_sum(std::uint64_t m) const override {
    if (!std::isfinite(mean)) return kInf;
    const std::uint64_t cut = std::max<std::uint64_t>(cut_, m);
    double s = 0.0;
    for (std::uint64_t n = m; n < cut; ++n) s += tail(n);
    return s + remainder(cut);
  }

  std::uint64_t sample(Rng& rng) const override {
    const double u = rng.uniform_open0();
    // Z = min{n : tail(n) < u}, which has P(Z > n) = P(u <= tail(n)) = tail(n).
    if (tail(0) < u) return 0;
    const double q = t_.quantile(u / scale_);
    require(q < kMaxSample, ErrorKind::StateOverflow,
            "discretized draw exceeds 63-bit range");
    auto n = static_cast<std::uint64_t>(std::floor(q)) + 1;
    // The continuous quantile pins n up to rounding; settle it on the lattice.
    while (n > 0 && tail(n - 1) < u) --n;
    while (tail(n) >= u) ++n;
    return n;
  }

  std::optional<double> ratio_constant(const TailFunction& g) const override {
    if (t_.same_as(g)) return scale_;
    if (t_.declared_class() == TailClass::LightTail && heavy_reference(g)) return 0.0;
    return std::nullopt;
  }

 private:
  // Approximation of sum_{n >= m} scale * t(n) for m past the cap, by the
  // trapezoidal Euler-Maclaurin correction to the integral.
  double remainder(std::uint64_t m) const {
    const double x = static_cast<double>(m);
    const double integral = t_.upper_moment_integral(x, 0);
    if (std::isnan(integral)) return power_remainder(m, 0);
    if (!std::isfinite(integral)) return kInf;
    const double slope = t_.evaluate(x + 0.5) - t_.evaluate(x - 0.5);
    return scale_ * (integral + 0.5 * t_.evaluate(x) - slope / 12.0);
  }

  // Same for sum_{n >= m} (2n + 1) scale * t(n).
  double second_remainder(std::uint64_t m) const {
    const double x = static_cast<double>(m);
    const double i0 = t_.upper_moment_integral(x, 0);
    const double i1 = t_.upper_moment_integral(x, 1);
    if (std::isnan(i0) || std::isnan(i1)) return power_remainder(m, 1);
    if (!std::isfinite(i0) || !std::isfinite(i1)) return kInf;
    return scale_ * (2.0 * i1 + i0 + 0.5 * (2.0 * x + 1.0) * t_.evaluate(x));
  }

  // Fallback for custom tails: assume a pure power law beyond m.
  double power_remainder(std::uint64_t m, int power) const {
    const double x = static_cast<double>(m);
    const double tm = t_.evaluate(x);
    if (tm == 0.0) return 0.0;
    if (!declared_alpha) return std::numeric_limits<double>::quiet_NaN();
    const double k1 = power + 1.0;
    if (*declared_alpha <= k1) return kInf;
    const double mult = power == 0 ? 1.0 : 2.0;
    return scale_ * mult * tm * std::pow(x, k1) / (*declared_alpha - k1);
  }

  void compute_moments() {
    cut_ = std::max<std::uint64_t>(
        1ULL << 16, static_cast<std::uint64_t>(std::ceil(std::max(cross_, t_.support_floor()))) + 2);
    double s0 = 0.0, s1 = 0.0;
    for (std::uint64_t n = 0; n < cut_; ++n) {
      const double tn = tail(n);
      s0 += tn;
      s1 += (2.0 * static_cast<double>(n) + 1.0) * tn;
    }
    mean = s0 + remainder(cut_);
    const double second = s1 + second_remainder(cut_);
    if (std::isnan(mean)) {
      variance = std::numeric_limits<double>::quiet_NaN();
    } else if (!std::isfinite(mean) || !std::isfinite(second)) {
      variance = kInf;
    } else {
      variance = std::max(0.0, second - mean * mean);
    }
  }

  TailFunction t_;
  double scale_, cap_;
  double cross_ = 0.0;
  std::uint64_t cut_ = 0;
};

class SumModel final : public detail::DiscreteModel {
 public:
  SumModel(DiscreteDist x, DiscreteDist y) : x_(std::move(x)), y_(std::move(y)) {
    family = "sum";
    description = x_.describe() + " + " + y_.describe();
    auto mx = x_.max_support(), my = y_.max_support();
    if (mx && my) max_support = *mx + *my;
    mean = x_.mean() + y_.mean();
    variance = x_.variance() + y_.variance();
    const auto lx = x_.log_moment(), ly = y_.log_moment();
    if (lx == Finiteness::Finite && ly == Finiteness::Finite) {
      log_moment = Finiteness::Finite;
    } else if (lx == Finiteness::Infinite || ly == Finiteness::Infinite) {
      log_moment = Finiteness::Infinite;
    } else {
      log_moment = Finiteness::Unknown;
    }
    if (x_.declared_alpha() && y_.declared_alpha()) {
      declared_alpha = std::min(*x_.declared_alpha(), *y_.declared_alpha());
    } else {
      declared_alpha = x_.declared_alpha() ? x_.declared_alpha() : y_.declared_alpha();
    }
  }

  double pmf(std::uint64_t n) const override {
    double s = 0.0;
    const std::uint64_t top = x_.max_support() ? std::min(n, *x_.max_support()) : n;
    for (std::uint64_t j = 0; j <= top; ++j) s += x_.pmf(j) * y_.pmf(n - j);
    return s;
  }

  double tail(std::uint64_t n) const override {
    // P(X + Y > n) = P(X > n) + sum_{j <= n} P(X = j) P(Y > n - j).
    double s = x_.tail(n);
    const std::uint64_t top = x_.max_support() ? std::min(n, *x_.max_support()) : n;
    for (std::uint64_t j = 0; j <= top; ++j) {
      const double pj = x_.pmf(j);
      if (pj != 0.0) s += pj * y_.tail(n - j);
    }
    return std::min(1.0, s);
  }

  std::uint64_t sample(Rng& rng) const override {
    return checked_add(x_.sample(rng), y_.sample(rng));
  }

  std::optional<double> ratio_constant(const TailFunction& g) const override {
    const auto cx = x_.ratio_constant(g), cy = y_.ratio_constant(g);
    if (!cx || !cy) return std::nullopt;
    if (*cx == 0.0 && *cy == 0.0) return 0.0;
    // Constants add under convolution only for subexponential G.
    if (!subexponential_reference(g)) return std::nullopt;
    return *cx + *cy;
  }

 private:
  DiscreteDist x_, y_;
};

class DiscreteTailModel final : public detail::TailModel {
 public:
  explicit DiscreteTailModel(DiscreteDist d) : d_(std::move(d)) {
    family = "custom";
    if (d_.source_tail()) {
      declared_class = d_.source_tail()->declared_class();
      declared_alpha = d_.source_tail()->declared_alpha();
      erv_indices = d_.source_tail()->erv_indices();
    } else if (d_.max_support() || d_.family() == "geometric") {
      declared_class = TailClass::LightTail;
    }
  }
  double evaluate(double x) const override { return d_.tail_at(x); }

 private:
  DiscreteDist d_;
};

class IntegratedTailModel final : public detail::TailModel {
 public:
  explicit IntegratedTailModel(DiscreteDist d) : d_(std::move(d)) { family = "custom"; }
  double evaluate(double x) const override {
    if (x <= 0.0) return std::min(1.0, d_.upper_tail_sum(0));
    const auto m = static_cast<std::uint64_t>(std::ceil(x));
    return std::min(1.0, d_.upper_tail_sum(m));
  }

 private:
  DiscreteDist d_;
};

}  // namespace

DiscreteDist make_point(std::uint64_t value) {
  return DiscreteDist(std::make_shared<PointModel>(value));
}

DiscreteDist make_bernoulli(double p) {
  require(p >= 0.0 && p <= 1.0, ErrorKind::InvalidParameter, "bernoulli: p must lie in [0, 1]");
  return DiscreteDist(std::make_shared<BernoulliModel>(p));
}

DiscreteDist make_geometric(double q) {
  require(q >= 0.0 && q < 1.0, ErrorKind::InvalidParameter, "geometric: q must lie in [0, 1)");
  return DiscreteDist(std::make_shared<GeometricModel>(q));
}

DiscreteDist make_table(std::vector<double> pmf) {
  require(!pmf.empty(), ErrorKind::InvalidParameter, "table: empty pmf");
  double total = 0.0;
  for (double p : pmf) {
    require(p >= 0.0 && std::isfinite(p), ErrorKind::InvalidParameter,
            "table: probabilities must be finite and nonnegative");
    total += p;
  }
  require(std::abs(total - 1.0) <= 1e-9, ErrorKind::InvalidParameter,
          "table: probabilities must sum to 1 (got " + format_double(total) + ")");
  for (double& p : pmf) p /= total;
  return DiscreteDist(std::make_shared<TableModel>(std::move(pmf)));
}

DiscreteDist discretize(const TailFunction& t, double scale, double cap) {
  require(scale > 0.0 && std::isfinite(scale), ErrorKind::InvalidParameter,
          "discretize: scale must be positive");
  require(cap > 0.0 && cap <= 1.0, ErrorKind::InvalidParameter,
          "discretize: cap must lie in (0, 1]");
  // Properness: the tail must vanish at infinity.
  const double far = t.log_evaluate(1e300);
  require(far < std::log(1e-12), ErrorKind::InvalidInput,
          "discretize: improper tail (evaluate does not vanish)");
  return DiscreteDist(std::make_shared<DiscretizedModel>(t, scale, cap));
}

DiscreteDist convolve(const DiscreteDist& x, const DiscreteDist& y) {
  return DiscreteDist(std::make_shared<SumModel>(x, y));
}

DiscreteDist convolution_power(const DiscreteDist& d, unsigned k) {
  require(k >= 1, ErrorKind::InvalidParameter, "convolution power needs k >= 1");
  DiscreteDist out = d;
  for (unsigned i = 1; i < k; ++i) out = convolve(out, d);
  return out;
}

TailFunction as_tail(const DiscreteDist& d) {
  return TailFunction(std::make_shared<DiscreteTailModel>(d));
}

IntegratedTail integrated_tail(const DiscreteDist& d) {
  IntegratedTail out{TailFunction(std::make_shared<IntegratedTailModel>(d)), true, 0.0};
  out.total = d.upper_tail_sum(0);
  out.proper = std::isfinite(out.total);
  return out;
}

std::uint64_t tail_quantile_index(const DiscreteDist& d, double mass, std::uint64_t limit) {
  if (d.tail(0) <= mass) return 0;
  std::uint64_t hi = 1;
  while (d.tail(hi) > mass) {
    if (hi >= limit) return limit;
    hi *= 2;
  }
  std::uint64_t lo = hi / 2;  // tail(lo) > mass >= tail(hi)
  while (hi - lo > 1) {
    const std::uint64_t mid = lo + (hi - lo) / 2;
    if (d.tail(mid) > mass) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi;
}

}  // namespace branchtail
