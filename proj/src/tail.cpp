#include "branchtail/tail.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "branchtail/errors.hpp"

namespace branchtail {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

const char* to_string(TailClass c) noexcept {
  switch (c) {
    case TailClass::L: return "L";
    case TailClass::S: return "S";
    case TailClass::Sstar: return "Sstar";
    case TailClass::D: return "D";
    case TailClass::IRV: return "IRV";
    case TailClass::ERV: return "ERV";
    case TailClass::RV: return "RV";
    case TailClass::LightTail: return "lighttail";
  }
  return "?";
}

std::optional<TailClass> tail_class_from_string(std::string_view name) {
  for (auto c : {TailClass::L, TailClass::S, TailClass::Sstar, TailClass::D,
                 TailClass::IRV, TailClass::ERV, TailClass::RV, TailClass::LightTail}) {
    if (name == to_string(c)) return c;
  }
  return std::nullopt;
}

namespace detail {

double TailModel::log_evaluate(double x) const { return std::log(evaluate(x)); }

double TailModel::quantile(double u) const {
  if (u >= 1.0) return 0.0;
  if (!(u > 0.0)) return kInf;
  if (evaluate(0.0) <= u) return 0.0;
  double hi = std::max(1.0, support_floor);
  while (evaluate(hi) > u) {
    hi *= 2.0;
    if (!std::isfinite(hi)) return kInf;
  }
  double lo = hi / 2.0;
  if (evaluate(lo) <= u) lo = 0.0;
  // Invariant: G(lo) > u >= G(hi).
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (evaluate(mid) <= u) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

double TailModel::upper_moment_integral(double, int) const { return kNaN; }

}  // namespace detail

TailFunction::TailFunction(std::shared_ptr<const detail::TailModel> model)
    : model_(std::move(model)) {
  require(model_ != nullptr, ErrorKind::InvalidInput, "null tail model");
}

std::string TailFunction::describe() const {
  std::ostringstream os;
  os.precision(17);
  os << model_->family << '(';
  for (std::size_t i = 0; i < model_->params.size(); ++i) {
    if (i) os << ", ";
    os << model_->params[i];
  }
  os << ')';
  return os.str();
}

bool TailFunction::same_as(const TailFunction& other) const {
  if (model_ == other.model_) return true;
  if (model_->family == "custom" || other.model_->family == "custom") return false;
  return model_->family == other.model_->family && model_->params == other.model_->params;
}

bool TailFunction::power_bounded() const {
  const auto c = declared_class();
  return c && (*c == TailClass::RV || *c == TailClass::ERV);
}

// ---------------------------------------------------------------------------
// Pareto

namespace {

class ParetoModel final : public detail::TailModel {
 public:
  ParetoModel(double alpha, double floor) : alpha_(alpha), floor_(floor) {
    family = "pareto";
    params = {alpha, floor};
    support_floor = floor;
    declared_class = TailClass::RV;
    declared_alpha = alpha;
    erv_indices = std::pair{alpha, alpha};
  }

  double evaluate(double x) const override {
    if (x <= floor_) return 1.0;
    return std::pow(x / floor_, -alpha_);
  }

  double log_evaluate(double x) const override {
    if (x <= floor_) return 0.0;
    return -alpha_ * std::log(x / floor_);
  }

  double quantile(double u) const override {
    if (u >= 1.0) return 0.0;
    if (!(u > 0.0)) return kInf;
    return floor_ * std::exp(-std::log(u) / alpha_);
  }

  double upper_moment_integral(double x, int power) const override {
    const double k1 = power + 1.0;
    if (alpha_ <= k1) return kInf;
    double total = 0.0;
    double from = x;
    if (x < floor_) {
      total += (std::pow(floor_, k1) - std::pow(std::max(x, 0.0), k1)) / k1;
      from = floor_;
    }
    // f^alpha * from^(k1 - alpha) / (alpha - k1)
    total += std::pow(from, k1) * std::pow(from / floor_, -alpha_) / (alpha_ - k1);
    return total;
  }

 private:
  double alpha_, floor_;
};

class ExponentialModel final : public detail::TailModel {
 public:
  explicit ExponentialModel(double rate) : rate_(rate) {
    family = "exponential";
    params = {rate};
    declared_class = TailClass::LightTail;
  }

  double evaluate(double x) const override { return x <= 0 ? 1.0 : std::exp(-rate_ * x); }
  double log_evaluate(double x) const override { return x <= 0 ? 0.0 : -rate_ * x; }
  double quantile(double u) const override {
    if (u >= 1.0) return 0.0;
    if (!(u > 0.0)) return kInf;
    return -std::log(u) / rate_;
  }
  double upper_moment_integral(double x, int power) const override {
    const double from = std::max(x, 0.0);
    const double head = x < 0 ? (power == 0 ? -x : -x * x / 2.0) : 0.0;
    const double e = std::exp(-rate_ * from);
    if (power == 0) return head + e / rate_;
    return head + e * (from / rate_ + 1.0 / (rate_ * rate_));
  }

 private:
  double rate_;
};

class ErvModel final : public detail::TailModel {
 public:
  explicit ErvModel(ErvCycleTail tail) : tail_(tail) {
    family = "erv_cycle";
    params = {tail.c(), tail.a1(), tail.a2()};
    support_floor = 1.0;
    declared_class = TailClass::ERV;
    erv_indices = std::pair{tail.a1(), tail.a2()};
  }

  double evaluate(double x) const override { return tail_.evaluate(x); }
  double log_evaluate(double x) const override { return tail_.log_evaluate(x); }
  double quantile(double u) const override { return tail_.quantile(u); }
  double upper_moment_integral(double x, int power) const override {
    return tail_.upper_moment_integral(x, power);
  }

 private:
  ErvCycleTail tail_;
};

class ScaledModel final : public detail::TailModel {
 public:
  ScaledModel(TailFunction base, double scale, double cap)
      : base_(std::move(base)), scale_(scale), cap_(cap) {
    family = "scaled[" + base_.family() + "]";
    params = base_.params();
    params.push_back(scale);
    params.push_back(cap);
    support_floor = base_.support_floor();
    declared_class = base_.declared_class();
    declared_alpha = base_.declared_alpha();
    erv_indices = base_.erv_indices();
  }

  double evaluate(double x) const override {
    return std::min(cap_, scale_ * base_.evaluate(x));
  }
  double log_evaluate(double x) const override {
    return std::min(std::log(cap_), std::log(scale_) + base_.log_evaluate(x));
  }
  double quantile(double u) const override {
    if (u >= cap_) return 0.0;
    return base_.quantile(u / scale_);
  }
  double upper_moment_integral(double x, int power) const override {
    // Point beyond which scale * G <= cap.
    const double cross = scale_ > cap_ ? base_.quantile(cap_ / scale_) : 0.0;
    if (x >= cross) return scale_ * base_.upper_moment_integral(x, power);
    const double k1 = power + 1.0;
    const double lo = std::max(x, 0.0);
    const double head = cap_ * (std::pow(cross, k1) - std::pow(lo, k1)) / k1;
    return head + scale_ * base_.upper_moment_integral(cross, power);
  }

 private:
  TailFunction base_;
  double scale_, cap_;
};

class CustomModel final : public detail::TailModel {
 public:
  explicit CustomModel(CustomTail spec) : spec_(std::move(spec)) {
    family = "custom";
    params = {};
    support_floor = spec_.support_floor;
    declared_class = spec_.declared_class;
    declared_alpha = spec_.declared_alpha;
  }

  double evaluate(double x) const override { return spec_.evaluate(x); }
  double quantile(double u) const override {
    if (spec_.quantile) return spec_.quantile(u);
    return detail::TailModel::quantile(u);
  }
  double upper_moment_integral(double x, int power) const override {
    if (spec_.upper_moment_integral) return spec_.upper_moment_integral(x, power);
    return kNaN;
  }

 private:
  CustomTail spec_;
};

}  // namespace

TailFunction make_pareto(double alpha, double floor) {
  require(alpha > 0.0 && std::isfinite(alpha), ErrorKind::InvalidParameter,
          "pareto: alpha must be positive");
  require(floor >= 1.0 && std::isfinite(floor), ErrorKind::InvalidParameter,
          "pareto: floor must be >= 1");
  return TailFunction(std::make_shared<ParetoModel>(alpha, floor));
}

TailFunction make_exponential(double rate) {
  require(rate > 0.0 && std::isfinite(rate), ErrorKind::InvalidParameter,
          "exponential: rate must be positive");
  return TailFunction(std::make_shared<ExponentialModel>(rate));
}

TailFunction make_erv_cycle(double c, double a1, double a2) {
  return TailFunction(std::make_shared<ErvModel>(ErvCycleTail(c, a1, a2)));
}

TailFunction make_scaled(const TailFunction& base, double scale, double cap) {
  require(scale > 0.0 && std::isfinite(scale), ErrorKind::InvalidParameter,
          "scaled tail: scale must be positive");
  require(cap > 0.0 && cap <= 1.0, ErrorKind::InvalidParameter,
          "scaled tail: cap must lie in (0, 1]");
  return TailFunction(std::make_shared<ScaledModel>(base, scale, cap));
}

TailFunction make_custom(CustomTail spec) {
  require(static_cast<bool>(spec.evaluate), ErrorKind::InvalidParameter,
          "custom tail: evaluate is required");
  require(spec.support_floor >= 0.0, ErrorKind::InvalidParameter,
          "custom tail: support_floor must be >= 0");
  return TailFunction(std::make_shared<CustomModel>(std::move(spec)));
}

// ---------------------------------------------------------------------------
// ERV cycle

ErvCycleTail::ErvCycleTail(double c, double a1, double a2) : c_(c), a1_(a1), a2_(a2) {
  require(c > 1.0 && std::isfinite(c), ErrorKind::InvalidParameter,
          "erv_cycle: c must exceed 1");
  require(a1 > 1.0, ErrorKind::InvalidParameter, "erv_cycle: a1 must exceed 1");
  require(a2 > a1 && std::isfinite(a2), ErrorKind::InvalidParameter,
          "erv_cycle: a2 must exceed a1");
  log_c_ = std::log(c);
}

double ErvCycleTail::anchor_t(int n) const { return std::pow(c_, 2.0 * (n - 1)); }
double ErvCycleTail::anchor_u(int n) const { return std::pow(c_, 2.0 * n - 1.0); }

double ErvCycleTail::log_evaluate(double x) const {
  if (x <= 1.0) return 0.0;
  const double period = 2.0 * log_c_;
  const double lx = std::log(x);
  double k = std::floor(lx / period);
  double s = lx - k * period;
  if (s < 0.0) {
    k -= 1.0;
    s += period;
  } else if (s >= period) {
    k += 1.0;
    s -= period;
  }
  const double base = -k * (a1_ + a2_) * log_c_;
  if (s <= log_c_) return base - a1_ * s;
  return base - a1_ * log_c_ - a2_ * (s - log_c_);
}

double ErvCycleTail::evaluate(double x) const { return std::exp(log_evaluate(x)); }

double ErvCycleTail::quantile(double u) const {
  if (u >= 1.0) return 0.0;
  if (!(u > 0.0)) return kInf;
  const double drop = -std::log(u);
  const double per_cycle = (a1_ + a2_) * log_c_;
  double k = std::floor(drop / per_cycle);
  double r = drop - k * per_cycle;
  if (r < 0.0) {
    k -= 1.0;
    r += per_cycle;
  }
  const double s = r <= a1_ * log_c_ ? r / a1_ : log_c_ + (r - a1_ * log_c_) / a2_;
  return std::exp(k * 2.0 * log_c_ + s);
}

double ErvCycleTail::segment_integral(double start, double log_g_start, double a, double lo,
                                      double hi, int power) const {
  // int_lo^hi u^p g(start) (u/start)^-a du, expressed relative to `start`.
  const double e = power - a + 1.0;
  const double scale = std::exp(log_g_start) * std::pow(start, power + 1.0);
  const double rl = lo / start, rh = hi / start;
  if (std::abs(e) < 1e-12) return scale * std::log(rh / rl);
  return scale * (std::pow(rh, e) - std::pow(rl, e)) / e;
}

double ErvCycleTail::upper_moment_integral(double x, int power) const {
  const double k1 = power + 1.0;
  if (a1_ + a2_ <= 2.0 * k1) return kInf;
  double total = 0.0;
  double from = x;
  if (x < 1.0) {
    const double lo = std::max(x, 0.0);
    total += (1.0 - std::pow(lo, k1)) / k1;
    from = 1.0;
  }
  // Locate the cycle containing `from`: t_n <= from < t_{n+1}.
  const double period = 2.0 * log_c_;
  int n = 1 + static_cast<int>(std::floor(std::log(from) / period));
  if (anchor_t(n) > from) --n;
  if (anchor_t(n + 1) <= from) ++n;

  auto cycle_integral = [&](int m, double lo) {
    const double t = anchor_t(m), u = anchor_u(m), t_next = anchor_t(m + 1);
    const double lg_t = log_evaluate(t), lg_u = lg_t - a1_ * log_c_;
    double acc = 0.0;
    if (lo < u) {
      acc += segment_integral(t, lg_t, a1_, std::max(lo, t), u, power);
      acc += segment_integral(u, lg_u, a2_, u, t_next, power);
    } else {
      acc += segment_integral(u, lg_u, a2_, lo, t_next, power);
    }
    return acc;
  };

  total += cycle_integral(n, from);
  const double full = cycle_integral(n + 1, anchor_t(n + 1));
  const double rho = std::exp((2.0 * k1 - a1_ - a2_) * log_c_);
  total += full / (1.0 - rho);
  return total;
}

// ---------------------------------------------------------------------------

std::vector<double> log_grid(double min, double max, std::size_t count) {
  require(count >= 2, ErrorKind::InvalidParameter, "grid count must be >= 2");
  require(min > 0.0 && max > min, ErrorKind::InvalidParameter,
          "grid requires 0 < min < max");
  std::vector<double> grid(count);
  const double lmin = std::log(min), lmax = std::log(max);
  for (std::size_t i = 0; i < count; ++i) {
    const double f = static_cast<double>(i) / static_cast<double>(count - 1);
    grid[i] = std::exp(lmin + f * (lmax - lmin));
  }
  grid.front() = min;
  grid.back() = max;
  return grid;
}

}  // namespace branchtail
