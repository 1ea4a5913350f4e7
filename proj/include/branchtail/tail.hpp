#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace branchtail {

/// Heavy-tail classes, ordered RV < ERV < IRV < (L and D) < S* < S < L.
enum class TailClass { L, S, Sstar, D, IRV, ERV, RV, LightTail };

const char* to_string(TailClass c) noexcept;
std::optional<TailClass> tail_class_from_string(std::string_view name);

namespace detail {

class TailModel {
 public:
  virtual ~TailModel() = default;

  virtual double evaluate(double x) const = 0;
  virtual double log_evaluate(double x) const;
  virtual double quantile(double u) const;
  /// Integral over [x, inf) of u^power * G(u); +inf if divergent, NaN if
  /// the family cannot say.
  virtual double upper_moment_integral(double x, int power) const;

  std::string family;
  std::vector<double> params;
  double support_floor = 0.0;
  std::optional<TailClass> declared_class;
  std::optional<double> declared_alpha;
  /// Envelope exponents (alpha_plus, alpha_minus) for ERV-type tails.
  std::optional<std::pair<double, double>> erv_indices;
};

}  // namespace detail

/// A non-increasing survival function G(x) = P(Z > x) on [0, inf) with
/// metadata. Cheap to copy; the underlying model is immutable and shared.
class TailFunction {
 public:
  explicit TailFunction(std::shared_ptr<const detail::TailModel> model);

  double evaluate(double x) const { return model_->evaluate(x); }
  double operator()(double x) const { return model_->evaluate(x); }
  /// log G(x); -inf where G vanishes. Exact in deep tails where G(x)
  /// itself would underflow.
  double log_evaluate(double x) const { return model_->log_evaluate(x); }
  /// inf{x >= 0 : G(x) <= u}.
  double quantile(double u) const { return model_->quantile(u); }
  double upper_moment_integral(double x, int power) const {
    return model_->upper_moment_integral(x, power);
  }

  double support_floor() const { return model_->support_floor; }
  std::optional<TailClass> declared_class() const { return model_->declared_class; }
  std::optional<double> declared_alpha() const { return model_->declared_alpha; }
  std::optional<std::pair<double, double>> erv_indices() const {
    return model_->erv_indices;
  }
  const std::string& family() const { return model_->family; }
  const std::vector<double>& params() const { return model_->params; }
  std::string describe() const;

  /// Same family and parameters (custom tails: same instance).
  bool same_as(const TailFunction& other) const;

  /// True if the declared class is one of the power-law-bounded classes
  /// (RV or ERV), in which every log moment is finite.
  bool power_bounded() const;

 private:
  std::shared_ptr<const detail::TailModel> model_;
};

/// G(x) = min(1, (x / floor)^-alpha); declared RV with index alpha.
TailFunction make_pareto(double alpha, double floor = 1.0);

/// Cyclic extended-regularly-varying tail: starting from g(1) = 1 it decays
/// like x^-a1 over (t_n, c t_n] and like x^-a2 over (c t_n, c^2 t_n].
class ErvCycleTail {
 public:
  ErvCycleTail(double c, double a1, double a2);

  double c() const { return c_; }
  double a1() const { return a1_; }
  double a2() const { return a2_; }

  /// Cycle anchors, n >= 1: t_1 = 1, u_n = c t_n, t_{n+1} = c u_n.
  double anchor_t(int n) const;
  double anchor_u(int n) const;

  double evaluate(double x) const;
  double log_evaluate(double x) const;
  double quantile(double u) const;
  double upper_moment_integral(double x, int power) const;

 private:
  // Integral of u^power g(u) over [lo, hi] inside one power segment that
  // starts at `start` with value exp(log_g_start) and exponent `a`.
  double segment_integral(double start, double log_g_start, double a,
                          double lo, double hi, int power) const;

  double c_, a1_, a2_;
  double log_c_;
};

TailFunction make_erv_cycle(double c, double a1, double a2);

/// G(x) = exp(-rate * x); declared light-tailed.
TailFunction make_exponential(double rate);

/// min(cap, scale * G(x)). Metadata is inherited from `base`.
TailFunction make_scaled(const TailFunction& base, double scale, double cap = 1.0);

/// A user-supplied tail. Only `evaluate` is mandatory; the quantile falls
/// back to bisection. No class is assumed unless declared.
struct CustomTail {
  std::function<double(double)> evaluate;
  std::function<double(double)> quantile;
  std::function<double(double, int)> upper_moment_integral;
  double support_floor = 0.0;
  std::optional<TailClass> declared_class;
  std::optional<double> declared_alpha;
  std::string name = "custom";
};

TailFunction make_custom(CustomTail spec);

/// `count` log-spaced points from `min` to `max` inclusive, count >= 2.
std::vector<double> log_grid(double min, double max, std::size_t count);

}  // namespace branchtail
