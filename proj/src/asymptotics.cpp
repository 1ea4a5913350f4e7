#include "branchtail/asymptotics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include "branchtail/classify.hpp"
#include "branchtail/errors.hpp"

namespace branchtail {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kMaxTerms = 10'000'000;

struct Window {
  std::size_t begin, end;
};

// Window `back` counted from the end of the grid (0 = last window).
Window window_from_end(std::size_t size, double fraction, std::size_t back) {
  require(size >= 2, ErrorKind::InvalidParameter, "grid needs at least two points");
  const auto len = std::max<std::size_t>(
      2, static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(size))));
  const std::size_t end = size - std::min(size, len * back);
  return {end > len ? end - len : 0, end};
}

std::string format(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

}  // namespace

TailSum tail_sum_T(const TailFunction& t, double c, double x, double tol) {
  require(c > 1.0, ErrorKind::InvalidParameter, "tail sum needs c > 1");
  require(x > 0.0, ErrorKind::InvalidParameter, "tail sum needs x > 0");
  require(tol > 0.0, ErrorKind::InvalidParameter, "tail sum needs tol > 0");
  TailSum out;
  double prev = t.evaluate(x);
  out.terms = 1;
  if (prev == 0.0) return out;
  out.value = prev;
  std::array<double, 4> recent{};
  std::size_t seen = 0;
  double xn = x;
  for (std::size_t n = 1; n < kMaxTerms; ++n) {
    xn *= c;
    if (!std::isfinite(xn)) {
      if (prev > tol * out.value) {
        fail(ErrorKind::NonConvergentSum,
             "T_c(" + format(x) + ") does not settle before overflow at c=" + format(c) +
                 "; the tail may violate the log-moment condition");
      }
      return out;
    }
    const double term = t.evaluate(xn);
    out.terms = n + 1;
    if (term == 0.0) return out;
    recent[n % recent.size()] = term / prev;
    ++seen;
    out.value += term;
    prev = term;
    if (seen >= recent.size()) {
      const double r = *std::max_element(recent.begin(), recent.end());
      if (r < 1.0) {
        out.remainder_bound = term * r / (1.0 - r);
        if (out.remainder_bound <= tol * out.value) return out;
      }
    }
  }
  fail(ErrorKind::NonConvergentSum,
       "T_c(" + format(x) + ") at c=" + format(c) + " needs more than " +
           std::to_string(kMaxTerms) + " terms; the tail may violate the log-moment condition");
}

G22Report check_G22(const TailFunction& t, double b, std::span<const double> delta_seq,
                    std::span<const double> x_grid, double tol, double window_fraction) {
  require(b > 0.0 && b < 1.0, ErrorKind::InvalidParameter, "G22 check needs 0 < b < 1");
  require(!delta_seq.empty(), ErrorKind::InvalidParameter, "empty delta sequence");
  const double c0 = 1.0 / b;
  const Window w = window_from_end(x_grid.size(), window_fraction, 0);
  std::vector<double> base(w.end - w.begin);
  for (std::size_t i = w.begin; i < w.end; ++i) {
    base[i - w.begin] = tail_sum_T(t, c0, x_grid[i]).value;
    if (!(base[i - w.begin] > 0.0)) {
      fail(ErrorKind::ShrinkGrid,
           "reference tail underflows at x=" + format(x_grid[i]) + "; shrink the grid");
    }
  }

  G22Report rep;
  for (double delta : delta_seq) {
    require(delta > 0.0 && c0 * (1.0 - delta) > 1.0, ErrorKind::InvalidParameter,
            "delta must keep c0 (1 - delta) above 1");
    double up = 0.0, lo = kInf;
    for (std::size_t i = w.begin; i < w.end; ++i) {
      const double ref = base[i - w.begin];
      up = std::max(up, tail_sum_T(t, c0 * (1.0 - delta), x_grid[i]).value / ref);
      lo = std::min(lo, tail_sum_T(t, c0 * (1.0 + delta), x_grid[i]).value / ref);
    }
    rep.deltas.push_back(delta);
    rep.upper_by_delta.push_back(up);
    rep.lower_by_delta.push_back(lo);
  }

  // Linear extrapolation to delta = 0 through the two smallest deltas.
  std::vector<std::size_t> order(rep.deltas.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t i, std::size_t j) { return rep.deltas[i] < rep.deltas[j]; });
  auto extrapolate = [&](const std::vector<double>& v) {
    const std::size_t i = order[0];
    if (order.size() < 2) return v[i];
    const std::size_t j = order[1];
    const double slope = (v[j] - v[i]) / (rep.deltas[j] - rep.deltas[i]);
    return v[i] - slope * rep.deltas[i];
  };
  rep.upper_limit = extrapolate(rep.upper_by_delta);
  rep.lower_limit = extrapolate(rep.lower_by_delta);
  rep.numeric_pass =
      std::abs(rep.upper_limit - 1.0) <= tol && std::abs(rep.lower_limit - 1.0) <= tol;
  const auto cls = t.declared_class();
  rep.analytic = cls == TailClass::ERV || cls == TailClass::RV;
  rep.pass = rep.numeric_pass || rep.analytic;
  return rep;
}

KaramataReport check_karamata(const TailFunction& t, std::span<const double> x_grid,
                              double window_fraction) {
  static const double lambdas[] = {1.1, 1.25, 1.5, 2.0};
  KaramataReport rep;
  rep.c_plus = karamata_upper_index(t, lambdas, x_grid, window_fraction);
  rep.pass = rep.c_plus < 0.0;
  return rep;
}

namespace {

// Self-convolution spot check of the lattice distribution H with tail
// Hbar(n) = min(1, sum_{k >= n} P(B > k)), evaluated at n = top.
double integrated_selfconv_ratio(const DiscreteDist& B, std::uint64_t top) {
  std::vector<double> hbar(top + 1);
  double s = B.upper_tail_sum(top + 1);
  for (std::uint64_t n = top + 1; n-- > 0;) {
    s += B.tail(n);
    hbar[n] = std::min(1.0, s);
  }
  if (!(hbar[top] > 0.0)) return kInf;
  double twofold = hbar[top];
  double prev = 1.0;
  for (std::uint64_t j = 0; j <= top; ++j) {
    const double p = prev - hbar[j];
    prev = hbar[j];
    twofold += p * hbar[top - j];
  }
  return twofold / hbar[top];
}

}  // namespace

Thm22Report thm22_condition_check(const FixedPointModel& m, std::span<const double> x_grid,
                                  double window_fraction) {
  const TailRegime& reg = m.reference();
  const TailFunction& G = reg.G;
  Thm22Report rep;
  rep.applicable = reg.case_label == TailCase::III && !std::isfinite(m.a);

  // (I)
  const Window last = window_from_end(x_grid.size(), window_fraction, 0);
  const Window prev = window_from_end(x_grid.size(), window_fraction, 1);
  auto min_xG = [&](Window w) {
    double v = kInf;
    for (std::size_t i = w.begin; i < w.end; ++i) v = std::min(v, x_grid[i] * G(x_grid[i]));
    return v;
  };
  rep.liminf_xG = min_xG(last);
  const double before = prev.end > prev.begin ? min_xG(prev) : rep.liminf_xG;
  rep.C_infinite = rep.liminf_xG > 1.05 * before;
  const bool decaying = rep.liminf_xG < 0.95 * before;
  try {
    rep.var_B = m.B.variance();
  } catch (const Error&) {
    rep.var_B = std::numeric_limits<double>::quiet_NaN();
  }
  rep.var_finite = std::isfinite(rep.var_B);
  rep.pass_I = rep.liminf_xG > 0.0 && !decaying && rep.var_finite;

  // (II)
  const IntegratedTail hi = integrated_tail(m.B);
  if (hi.proper) {
    for (std::size_t back = 3; back-- > 0;) {
      const Window w = window_from_end(x_grid.size(), window_fraction, back);
      if (w.end <= w.begin) continue;
      double top = 0.0;
      for (std::size_t i = w.begin; i < w.end; ++i) {
        const double g = G(x_grid[i]);
        top = std::max(top, g > 0.0 ? hi.tail(x_grid[i]) / g : kInf);
      }
      rep.HI_window_max.push_back(top);
    }
    rep.HI_ratio_limsup = rep.HI_window_max.back();
    bool bounded = std::isfinite(rep.HI_ratio_limsup);
    for (std::size_t i = 1; i < rep.HI_window_max.size(); ++i) {
      if (rep.HI_window_max[i] > rep.HI_window_max[i - 1] * (1.0 + 1e-2)) bounded = false;
    }
    rep.HI_selfconv_ratio = integrated_selfconv_ratio(m.B, 1 << 14);
    rep.HI_subexponential = std::abs(rep.HI_selfconv_ratio - 2.0) <= 0.15;
    rep.pass_II = bounded && rep.HI_subexponential;
  } else {
    rep.HI_ratio_limsup = kInf;
    rep.HI_selfconv_ratio = kInf;
  }
  return rep;
}

ConditionReport check_conditions(const FixedPointModel& m, std::span<const double> x_grid) {
  static const double deltas[] = {0.04, 0.02, 0.01};
  ConditionReport rep;
  const TailFunction& G = m.reference().G;
  rep.g22 = check_G22(G, m.b, deltas, x_grid);
  rep.karamata = check_karamata(G, x_grid);
  rep.thm22 = thm22_condition_check(m, x_grid);
  return rep;
}

const char* to_string(Justification j) noexcept {
  switch (j) {
    case Justification::FiniteMean: return "finite_mean";
    case Justification::InfiniteMeanVariance: return "infinite_mean_variance";
    case Justification::InfiniteMeanIntegratedTail: return "infinite_mean_integrated_tail";
    case Justification::SecondOrder: return "second_order";
  }
  return "?";
}

namespace {

PredictedTail tail_curve(const TailFunction& G, double coefficient, double c,
                         std::span<const double> x_grid, const PredictConfig& cfg) {
  PredictedTail out;
  out.D = coefficient;
  out.c = c;
  out.d1 = cfg.d1.value_or(c * (1.0 - cfg.bound_fraction));
  out.d2 = cfg.d2.value_or(c * (1.0 + cfg.bound_fraction));
  require(out.d1 > 1.0 && out.d1 < c, ErrorKind::InvalidParameter,
          "bound ratio d1 must lie in (1, " + format(c) + ")");
  require(out.d2 > c, ErrorKind::InvalidParameter,
          "bound ratio d2 must exceed " + format(c));
  if (G.declared_class() == TailClass::RV && G.declared_alpha()) {
    out.rv_coefficient = coefficient / (1.0 - std::pow(c, -*G.declared_alpha()));
  }
  out.points.reserve(x_grid.size());
  for (double x : x_grid) {
    const TailSum t = tail_sum_T(G, c, x, cfg.tol);
    PredictionPoint p;
    p.x = x;
    p.curve = coefficient * t.value;
    p.lower_bound = coefficient * tail_sum_T(G, out.d2, x, cfg.tol).value;
    p.upper_bound = coefficient * tail_sum_T(G, out.d1, x, cfg.tol).value;
    p.G_tail = G(x);
    p.remainder_bound = coefficient * t.remainder_bound;
    out.points.push_back(p);
  }
  return out;
}

}  // namespace

PredictedTail predict_tail(const FixedPointModel& m, std::span<const double> x_grid,
                           const PredictConfig& cfg) {
  const TailRegime& reg = m.reference();
  Justification why = Justification::FiniteMean;
  if (!std::isfinite(m.a)) {
    const Thm22Report thm =
        cfg.thm22 ? *cfg.thm22 : thm22_condition_check(m, default_ratio_grid());
    if (thm.pass_I) {
      why = Justification::InfiniteMeanVariance;
    } else if (thm.pass_II) {
      why = Justification::InfiniteMeanIntegratedTail;
    } else {
      fail(ErrorKind::UnsupportedRegime,
           "E(A) = inf and neither condition (I) nor (II) holds: no asymptotic is available");
    }
  }
  PredictedTail out = tail_curve(reg.G, reg.D, 1.0 / m.b, x_grid, cfg);
  out.b = m.b;
  out.justification = why;
  return out;
}

double predict_tail_rv(const FixedPointModel& m, double alpha) {
  require(alpha > 0.0, ErrorKind::InvalidParameter, "tail index alpha must be positive");
  return m.reference().D / (1.0 - std::pow(m.b, alpha));
}

double window_ratio_prediction(const FixedPointModel& m) { return m.reference().D; }

double second_order_delta(double b1, double b2) {
  require(b1 >= 0.0 && b2 >= 0.0, ErrorKind::InvalidParameter,
          "offspring means must be nonnegative");
  require(b1 + b2 < 1.0, ErrorKind::Stability, "second-order process needs b1 + b2 < 1");
  // 2 b2 / (sqrt(b1^2 + 4 b2) + b1) is the root without cancellation.
  const double root = std::sqrt(b1 * b1 + 4.0 * b2);
  const double delta = root + b1 > 0.0 ? 2.0 * b2 / (root + b1) : 0.0;
  require(std::abs(delta * (b1 + delta) - b2) <= 1e-12, ErrorKind::NonConvergence,
          "delta fixed point residual above 1e-12");
  require(b1 + delta < 1.0, ErrorKind::Stability, "b1 + delta must stay below 1");
  return delta;
}

SecondOrderModel build_second_order(const DiscreteDist& A, const DiscreteDist& B1,
                                    const DiscreteDist& B2,
                                    const std::optional<TailFunction>& G,
                                    std::span<const double> x_grid, const RatioConfig& cfg) {
  require(A.pmf(0) < 1.0, ErrorKind::Degenerate, "degenerate immigration: P(A = 0) = 1");
  SecondOrderModel m2{A, B1, B2, G, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, {}};
  m2.b1 = B1.mean();
  m2.b2 = B2.mean();
  m2.a = A.mean();
  m2.delta = second_order_delta(m2.b1, m2.b2);
  require(A.log_moment() == Finiteness::Finite, ErrorKind::Stability,
          "E log max(A, 1) must be finite");
  m2.m = std::isfinite(m2.a) ? m2.a / (1.0 - m2.b1 - m2.b2) : kInf;
  if (m2.b1 + m2.b2 > 0.95) {
    m2.warnings.emplace_back("near-critical offspring means b1 + b2 = " +
                             format(m2.b1 + m2.b2));
  }
  if (G) {
    const RatioEstimate e1 = ratio_constant_for(A, *G, x_grid, cfg);
    const RatioEstimate e2 = ratio_constant_for(B1, *G, x_grid, cfg);
    const RatioEstimate e3 = ratio_constant_for(B2, *G, x_grid, cfg);
    for (const RatioEstimate* e : {&e1, &e2, &e3}) {
      if (!e->converged) m2.warnings.emplace_back("a ratio constant does not settle on the grid");
    }
    m2.c1 = e1.value;
    m2.c2 = e2.value;
    m2.c3 = e3.value;
    require(m2.c1 + m2.c2 + m2.c3 > 0.0, ErrorKind::NoReferenceTail,
            "c1 = c2 = c3 = 0: no component has a tail comparable to " + G->describe());
    require(m2.c2 + m2.c3 == 0.0 || std::isfinite(m2.a), ErrorKind::Inconsistent,
            "heavy offspring tails with E(A) = inf contradict finite offspring means");
  }
  return m2;
}

double second_order_coefficient(const SecondOrderModel& m2) {
  const double c23 = m2.c2 + m2.c3;
  return m2.c1 + (c23 == 0.0 ? 0.0 : m2.m * c23);
}

PredictedTail predict_second_order(const SecondOrderModel& m2, std::span<const double> x_grid,
                                   const PredictConfig& cfg) {
  require(m2.G.has_value(), ErrorKind::NoReferenceTail,
          "second-order model has no reference tail");
  PredictedTail out =
      tail_curve(*m2.G, second_order_coefficient(m2), 1.0 / (m2.b1 + m2.delta), x_grid, cfg);
  out.b = m2.b1 + m2.delta;
  out.justification = Justification::SecondOrder;
  return out;
}

}  // namespace branchtail
