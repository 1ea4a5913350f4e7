#include "branchtail/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "branchtail/errors.hpp"

namespace branchtail {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNearCritical = 0.95;

}  // namespace

const char* to_string(TailCase c) noexcept {
  switch (c) {
    case TailCase::I: return "i";
    case TailCase::II: return "ii";
    case TailCase::III: return "iii";
  }
  return "?";
}

const char* to_string(StabilityVerdict v) noexcept {
  switch (v) {
    case StabilityVerdict::Stable: return "stable";
    case StabilityVerdict::UnstableBGe1: return "unstable_b_ge_1";
    case StabilityVerdict::CriticalExcluded: return "critical_excluded";
    case StabilityVerdict::LogMomentInfinite: return "log_moment_infinite";
    case StabilityVerdict::LogMomentUnknown: return "log_moment_unknown";
  }
  return "?";
}

const TailRegime& FixedPointModel::reference() const {
  require(regime.has_value(), ErrorKind::NoReferenceTail,
          "model has no reference tail (light-tailed inputs)");
  return *regime;
}

RatioEstimate estimate_ratio_constants(const TailFunction& tail_num, const TailFunction& G,
                                       std::span<const double> x_grid, const RatioConfig& cfg) {
  require(x_grid.size() >= 2, ErrorKind::InvalidParameter, "ratio grid needs two points");
  const auto len = std::max<std::size_t>(
      2, static_cast<std::size_t>(std::ceil(cfg.window_fraction * x_grid.size())));
  const std::size_t begin = x_grid.size() > len ? x_grid.size() - len : 0;
  double lo = kInf, hi = 0.0, last = 0.0;
  for (std::size_t i = begin; i < x_grid.size(); ++i) {
    const double lg = G.log_evaluate(x_grid[i]);
    if (!std::isfinite(lg)) {
      std::ostringstream os;
      os << "reference tail underflows at x=" << x_grid[i] << "; shrink the grid";
      fail(ErrorKind::ShrinkGrid, os.str());
    }
    const double ln = tail_num.log_evaluate(x_grid[i]);
    const double r = std::isfinite(ln) ? std::exp(ln - lg) : 0.0;
    lo = std::min(lo, r);
    hi = std::max(hi, r);
    last = r;
  }
  RatioEstimate out;
  if (hi <= cfg.zero_floor) {
    out.value = 0.0;
    out.spread = 1.0;
    out.converged = true;
    return out;
  }
  out.value = last;
  out.spread = lo > 0.0 ? hi / lo : kInf;
  out.converged = out.spread <= 1.0 + cfg.max_spread;
  return out;
}

double regime_constant(double a, double b, double c1, double c2) {
  const double ac2 = c2 == 0.0 ? 0.0 : a * c2;
  return ((1.0 - b) * c1 + ac2) / (1.0 - b);
}

StabilityReport check_stability(const DiscreteDist& A, const DiscreteDist& B) {
  StabilityReport rep;
  rep.b_value = B.mean();
  rep.b_ok = rep.b_value < 1.0;
  rep.near_critical = rep.b_value > kNearCritical;
  rep.log_moment = std::isfinite(A.mean()) ? Finiteness::Finite : A.log_moment();
  if (rep.b_value > 1.0) {
    rep.verdict = StabilityVerdict::UnstableBGe1;
  } else if (rep.b_value == 1.0) {
    rep.verdict = StabilityVerdict::CriticalExcluded;
  } else if (rep.log_moment == Finiteness::Finite) {
    rep.verdict = StabilityVerdict::Stable;
  } else if (rep.log_moment == Finiteness::Infinite) {
    rep.verdict = StabilityVerdict::LogMomentInfinite;
  } else {
    rep.verdict = StabilityVerdict::LogMomentUnknown;
  }
  return rep;
}

std::vector<double> default_ratio_grid() { return log_grid(1e2, 1e8, 61); }

namespace {

FixedPointModel validated(const DiscreteDist& A, const DiscreteDist& B) {
  const double pa0 = A.pmf(0), pb0 = B.pmf(0);
  require(pa0 < 1.0, ErrorKind::Degenerate,
          "degenerate immigration: P(A = 0) = 1 makes X = 0 the trivial solution");
  require(pb0 < 1.0, ErrorKind::Degenerate, "degenerate offspring: P(B = 0) = 1");

  const StabilityReport st = check_stability(A, B);
  std::ostringstream os;
  os.precision(17);
  switch (st.verdict) {
    case StabilityVerdict::Stable:
      break;
    case StabilityVerdict::UnstableBGe1:
      os << "b = E(B) = " << st.b_value << " > 1: the fixed-point equation has no solution";
      fail(ErrorKind::Stability, os.str());
    case StabilityVerdict::CriticalExcluded:
      fail(ErrorKind::Stability, "b = 1 is the critical case, which is not supported");
    case StabilityVerdict::LogMomentInfinite:
      fail(ErrorKind::Stability, "E log max(A, 1) is infinite: no proper solution");
    case StabilityVerdict::LogMomentUnknown:
      fail(ErrorKind::Stability,
           "cannot decide E log max(A, 1) < inf for " + A.describe() +
               "; declare a tail class or index");
  }

  FixedPointModel m{A, B, A.mean(), st.b_value, std::nullopt, {}};
  if (pa0 == 0.0) m.warnings.emplace_back("P(A = 0) = 0: the chain never returns to 0");
  if (st.near_critical) {
    os << "near-critical offspring mean b = " << st.b_value
       << "; burn-in and truncation grow like 1/log(1/b)";
    m.warnings.push_back(os.str());
  }
  return m;
}

}  // namespace

RatioEstimate ratio_constant_for(const DiscreteDist& d, const TailFunction& G,
                                 std::span<const double> grid, const RatioConfig& cfg) {
  if (auto exact = d.ratio_constant(G)) {
    RatioEstimate e;
    e.value = *exact;
    e.analytic = true;
    return e;
  }
  if (grid.empty()) {
    const std::vector<double> fallback = default_ratio_grid();
    return estimate_ratio_constants(as_tail(d), G, fallback, cfg);
  }
  return estimate_ratio_constants(as_tail(d), G, grid, cfg);
}

FixedPointModel build_model(const DiscreteDist& A, const DiscreteDist& B, const TailFunction& G,
                            std::span<const double> x_grid, const RatioConfig& cfg) {
  FixedPointModel m = validated(A, B);
  TailRegime reg{G, ratio_constant_for(A, G, x_grid, cfg), ratio_constant_for(B, G, x_grid, cfg)};
  reg.c1 = reg.c1_estimate.value;
  reg.c2 = reg.c2_estimate.value;
  if (!reg.c1_estimate.converged) {
    m.warnings.emplace_back("P(A > x) / G(x) does not settle on the grid; c1 is unreliable");
  }
  if (!reg.c2_estimate.converged) {
    m.warnings.emplace_back("P(B > x) / G(x) does not settle on the grid; c2 is unreliable");
  }
  require(reg.c1 + reg.c2 > 0.0, ErrorKind::NoReferenceTail,
          "c1 = c2 = 0: neither A nor B has a tail comparable to " + G.describe());
  if (reg.c1 > 0.0 && reg.c2 > 0.0) {
    reg.case_label = TailCase::I;
  } else if (reg.c2 > 0.0) {
    reg.case_label = TailCase::II;
  } else {
    reg.case_label = TailCase::III;
  }
  if (reg.case_label != TailCase::III) {
    require(std::isfinite(m.a), ErrorKind::Inconsistent,
            std::string("case (") + to_string(reg.case_label) +
                ") with E(A) = inf contradicts finite E(B)");
  }
  reg.D = regime_constant(m.a, m.b, reg.c1, reg.c2);
  m.regime = std::move(reg);
  return m;
}

FixedPointModel build_light_model(const DiscreteDist& A, const DiscreteDist& B) {
  return validated(A, B);
}

FixedPointModel queue_to_model(const QueueModel& q, std::span<const double> x_grid) {
  require(q.k >= 1, ErrorKind::InvalidParameter, "queue needs k >= 1 permanent customers");
  require(q.p >= 0.0 && q.p < 1.0, ErrorKind::InvalidParameter,
          "feedback probability must lie in [0, 1)");
  const double exi = q.xi.mean();
  if (!(exi + q.p < 1.0)) {
    std::ostringstream os;
    os << "E(xi) + p = " << exi + q.p << " >= 1: queue is not subcritical";
    fail(ErrorKind::Stability, os.str());
  }
  const DiscreteDist A = convolution_power(q.xi, q.k);
  const DiscreteDist B = convolve(make_bernoulli(q.p), q.xi);
  std::optional<TailFunction> ref = q.reference ? q.reference : q.xi.source_tail();
  if (ref && ref->declared_class() != TailClass::LightTail) {
    return build_model(A, B, *ref, x_grid);
  }
  return build_light_model(A, B);
}

}  // namespace branchtail
