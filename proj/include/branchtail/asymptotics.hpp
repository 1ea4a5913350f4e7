#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "branchtail/discrete.hpp"
#include "branchtail/model.hpp"
#include "branchtail/tail.hpp"

namespace branchtail {

struct TailSum {
  double value = 0.0;
  double remainder_bound = 0.0;  // bound on the omitted terms
  std::size_t terms = 0;
};

/// T_c(x) = sum_{n >= 0} G(c^n x), truncated once the geometric bound on
/// the remainder drops below `tol` relative to the partial sum.
TailSum tail_sum_T(const TailFunction& t, double c, double x, double tol = 1e-12);

struct G22Report {
  std::vector<double> deltas;
  std::vector<double> upper_by_delta;  // limsup of T_c / T_c0 at c = c0 (1 - delta)
  std::vector<double> lower_by_delta;  // liminf at c = c0 (1 + delta)
  double upper_limit = 0.0;            // extrapolated to delta = 0
  double lower_limit = 0.0;
  bool numeric_pass = false;
  bool analytic = false;  // declared ERV (or RV) tail
  bool pass = false;
};

/// Continuity of c -> T_c / T_c0 at c0 = 1/b.
G22Report check_G22(const TailFunction& t, double b, std::span<const double> delta_seq,
                    std::span<const double> x_grid, double tol = 0.02,
                    double window_fraction = 0.25);

struct KaramataReport {
  double c_plus = 0.0;
  bool pass = false;  // c_plus < 0
};

KaramataReport check_karamata(const TailFunction& t, std::span<const double> x_grid,
                              double window_fraction = 0.25);

struct Thm22Report {
  bool applicable = false;  // case (iii) with a = inf

  // (I): liminf x G(x) in (0, inf] and Var B < inf.
  double liminf_xG = 0.0;
  bool C_infinite = false;
  double var_B = 0.0;
  bool var_finite = false;
  bool pass_I = false;

  // (II): H_I subexponential and limsup H_I(x) / G(x) < inf.
  std::vector<double> HI_window_max;  // oldest window first
  double HI_ratio_limsup = 0.0;
  double HI_selfconv_ratio = 0.0;     // P(H1 + H2 > n) / P(H > n) at the far point
  bool HI_subexponential = false;
  bool pass_II = false;
};

Thm22Report thm22_condition_check(const FixedPointModel& m, std::span<const double> x_grid,
                                  double window_fraction = 0.25);

struct ConditionReport {
  G22Report g22;
  KaramataReport karamata;
  Thm22Report thm22;
};

ConditionReport check_conditions(const FixedPointModel& m, std::span<const double> x_grid);

enum class Justification { FiniteMean, InfiniteMeanVariance, InfiniteMeanIntegratedTail, SecondOrder };

const char* to_string(Justification j) noexcept;

struct PredictionPoint {
  double x = 0.0;
  double curve = 0.0;
  double lower_bound = 0.0;  // D T_d2(x), d2 > c
  double upper_bound = 0.0;  // D T_d1(x), d1 < c
  double G_tail = 0.0;
  double remainder_bound = 0.0;
};

struct PredictedTail {
  double D = 0.0;
  double b = 0.0;
  double c = 0.0;  // geometric ratio of the tail sum, 1/b for the base model
  double d1 = 0.0;
  double d2 = 0.0;
  std::optional<double> rv_coefficient;  // D / (1 - b^alpha) for RV references
  Justification justification = Justification::FiniteMean;
  std::vector<PredictionPoint> points;
};

struct PredictConfig {
  double tol = 1e-12;
  double bound_fraction = 0.1;  // d1, d2 = c (1 -/+ fraction) unless given
  std::optional<double> d1;
  std::optional<double> d2;
  /// Used when a = inf; computed on the default grid when absent.
  std::optional<Thm22Report> thm22;
};

PredictedTail predict_tail(const FixedPointModel& m, std::span<const double> x_grid,
                           const PredictConfig& cfg = {});

/// Coefficient of G(x) in the regularly varying case: D / (1 - b^alpha).
double predict_tail_rv(const FixedPointModel& m, double alpha);

/// Predicted P(x < X <= x/b) / G(x), which is D.
double window_ratio_prediction(const FixedPointModel& m);

/// X_n = A_n + sum_{i <= X_{n-1}} B1 + sum_{i <= X_{n-2}} B2.
struct SecondOrderModel {
  DiscreteDist A;
  DiscreteDist B1;
  DiscreteDist B2;
  std::optional<TailFunction> G;
  double c1 = 0.0, c2 = 0.0, c3 = 0.0;
  double a = 0.0;
  double b1 = 0.0, b2 = 0.0;
  double delta = 0.0;
  double m = 0.0;  // a / (1 - b1 - b2)
  std::vector<std::string> warnings;
};

/// Positive root of delta (b1 + delta) = b2.
double second_order_delta(double b1, double b2);

SecondOrderModel build_second_order(const DiscreteDist& A, const DiscreteDist& B1,
                                    const DiscreteDist& B2,
                                    const std::optional<TailFunction>& G,
                                    std::span<const double> x_grid = {},
                                    const RatioConfig& cfg = {});

/// c1 + m (c2 + c3), with m (c2 + c3) = 0 when c2 + c3 = 0.
double second_order_coefficient(const SecondOrderModel& m2);

/// Tail of X + delta Y: coefficient times T_{1/(b1 + delta)}.
PredictedTail predict_second_order(const SecondOrderModel& m2, std::span<const double> x_grid,
                                   const PredictConfig& cfg = {});

}  // namespace branchtail
