#include "branchtail/classify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "branchtail/errors.hpp"

namespace branchtail {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Window {
  std::size_t begin, end;
};

Window last_window(std::size_t size, double fraction, std::size_t offset_windows = 0) {
  require(size >= 2, ErrorKind::InvalidParameter, "grid needs at least two points");
  require(fraction > 0.0 && fraction <= 1.0, ErrorKind::InvalidParameter,
          "window fraction must lie in (0, 1]");
  const auto len = std::max<std::size_t>(
      2, static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(size))));
  const std::size_t end = size - std::min(size, len * offset_windows);
  const std::size_t begin = end > len ? end - len : 0;
  return {begin, end};
}

void check_grid(std::span<const double> grid) {
  require(grid.size() >= 2, ErrorKind::InvalidParameter, "grid needs at least two points");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    require(grid[i] > grid[i - 1], ErrorKind::InvalidParameter, "grid must be increasing");
  }
}

double log_ratio(const TailFunction& t, double num_x, double den_x) {
  const double ln = t.log_evaluate(num_x), ld = t.log_evaluate(den_x);
  if (!std::isfinite(ln) || !std::isfinite(ld)) {
    std::ostringstream os;
    os << "tail underflows to zero at x=" << (std::isfinite(ld) ? num_x : den_x)
       << "; shrink the grid";
    fail(ErrorKind::ShrinkGrid, os.str());
  }
  return ln - ld;
}

template <class ArgFn>
RatioLimits window_limits(const TailFunction& t, std::span<const double> grid, Window w,
                          ArgFn numerator_arg) {
  RatioLimits out{kInf, -kInf};
  for (std::size_t i = w.begin; i < w.end; ++i) {
    const double r = std::exp(log_ratio(t, numerator_arg(grid[i]), grid[i]));
    out.lower = std::min(out.lower, r);
    out.upper = std::max(out.upper, r);
  }
  return out;
}

}  // namespace

RatioLimits classify_ratio_limits(const TailFunction& t, double y,
                                  std::span<const double> x_grid, double window_fraction) {
  require(y > 1.0, ErrorKind::InvalidParameter, "ratio test needs y > 1");
  check_grid(x_grid);
  return window_limits(t, x_grid, last_window(x_grid.size(), window_fraction),
                       [y](double x) { return y * x; });
}

RatioLimits shift_ratio_limits(const TailFunction& t, double y,
                               std::span<const double> x_grid, double window_fraction) {
  require(y > 0.0, ErrorKind::InvalidParameter, "shift test needs y > 0");
  check_grid(x_grid);
  return window_limits(t, x_grid, last_window(x_grid.size(), window_fraction),
                       [y](double x) { return x + y; });
}

double karamata_upper_index(const TailFunction& t, std::span<const double> lambda_grid,
                            std::span<const double> x_grid, double window_fraction) {
  require(!lambda_grid.empty(), ErrorKind::InvalidParameter, "empty lambda grid");
  check_grid(x_grid);
  constexpr double kDriftTol = 0.25;
  const Window last = last_window(x_grid.size(), window_fraction);
  const Window prev = last_window(x_grid.size(), window_fraction, 1);
  double best = -kInf;
  for (double lambda : lambda_grid) {
    require(lambda > 1.0, ErrorKind::InvalidParameter, "lambda grid must lie in (1, L]");
    const double log_l = std::log(lambda);
    auto index_over = [&](Window w) {
      double top = -kInf;
      for (std::size_t i = w.begin; i < w.end; ++i) {
        top = std::max(top, log_ratio(t, lambda * x_grid[i], x_grid[i]));
      }
      return top / log_l;
    };
    const double now = index_over(last);
    if (prev.end > prev.begin && prev.begin < last.begin) {
      const double before = index_over(prev);
      if (now < before - kDriftTol) return -kInf;
    }
    best = std::max(best, now);
  }
  return best;
}

ClassReport classify(const TailFunction& t, std::span<const double> x_grid,
                     const ClassifyConfig& cfg) {
  check_grid(x_grid);
  ClassReport rep;
  rep.alpha_plus = kInf;
  rep.alpha_minus = 0.0;
  bool single_limit = true;
  bool decaying = false;
  const Window prev = last_window(x_grid.size(), cfg.window_fraction, 1);
  for (double y : cfg.ratio_ys) {
    const RatioLimits lim = classify_ratio_limits(t, y, x_grid, cfg.window_fraction);
    rep.envelopes.push_back({y, lim});
    const double log_y = std::log(y);
    rep.alpha_plus = std::min(rep.alpha_plus, -std::log(lim.upper) / log_y);
    rep.alpha_minus = std::max(rep.alpha_minus, -std::log(lim.lower) / log_y);
    if (lim.upper - lim.lower > cfg.rv_tol * lim.upper) single_limit = false;
    // A liminf that keeps shrinking from one window to the next is a tail
    // lighter than any power (e.g. exponential).
    if (prev.end > prev.begin) {
      const RatioLimits before =
          window_limits(t, x_grid, prev, [y](double x) { return y * x; });
      const double idx_now = -std::log(lim.lower) / log_y;
      const double idx_before = -std::log(before.lower) / log_y;
      if (idx_now > idx_before + cfg.drift_tol) decaying = true;
    }
  }
  rep.long_tail_limits = shift_ratio_limits(t, cfg.long_tail_shift, x_grid, cfg.window_fraction);
  rep.long_tailed = rep.long_tail_limits.lower >= 1.0 - cfg.long_tail_tol;
  rep.irv_lower = classify_ratio_limits(t, cfg.irv_y, x_grid, cfg.window_fraction).lower;

  const double tiny = std::min_element(rep.envelopes.begin(), rep.envelopes.end(),
                                       [](const auto& a, const auto& b) {
                                         return a.limits.lower < b.limits.lower;
                                       })->limits.lower;
  rep.dominated = tiny > cfg.dominated_floor && !decaying;
  rep.irv = rep.dominated && rep.irv_lower >= 1.0 - cfg.irv_tol;
  rep.erv = rep.irv && rep.alpha_plus > 0.0 && std::isfinite(rep.alpha_minus);
  rep.rv = rep.erv && single_limit;

  static const double lambdas[] = {1.1, 1.25, 1.5, 2.0};
  rep.karamata = karamata_upper_index(t, lambdas, x_grid, cfg.window_fraction);
  return rep;
}

namespace {

std::vector<std::uint64_t> integer_points(std::span<const double> grid) {
  std::vector<std::uint64_t> out;
  for (double x : grid) {
    require(x >= 0.0, ErrorKind::InvalidParameter, "grid must be nonnegative");
    const auto n = static_cast<std::uint64_t>(std::floor(x));
    if (out.empty() || n > out.back()) out.push_back(n);
  }
  require(!out.empty(), ErrorKind::InvalidParameter, "empty grid");
  return out;
}

}  // namespace

ConvolutionCheck subexponential_check(const DiscreteDist& d, std::span<const double> n_grid,
                                      double tol) {
  const auto points = integer_points(n_grid);
  const std::uint64_t top = points.back();
  std::vector<double> pmf(top + 1), tail(top + 1);
  for (std::uint64_t k = 0; k <= top; ++k) {
    pmf[k] = d.pmf(k);
    tail[k] = d.tail(k);
  }
  ConvolutionCheck out;
  for (std::uint64_t n : points) {
    // P(Z1 + Z2 > n) = P(Z1 > n) + sum_{j <= n} P(Z1 = j) P(Z2 > n - j).
    double twofold = tail[n];
    for (std::uint64_t j = 0; j <= n; ++j) twofold += pmf[j] * tail[n - j];
    out.n.push_back(static_cast<double>(n));
    out.ratio.push_back(tail[n] > 0.0 ? twofold / tail[n] : kInf);
  }
  out.final_ratio = out.ratio.back();
  out.pass = std::abs(out.final_ratio - 2.0) <= tol;
  return out;
}

ConvolutionCheck strong_subexponential_check(const DiscreteDist& d,
                                             std::span<const double> n_grid, double tol) {
  const auto points = integer_points(n_grid);
  const std::uint64_t top = points.back();
  std::vector<double> tail(top + 1);
  for (std::uint64_t k = 0; k <= top; ++k) tail[k] = d.tail(k);
  const double m = d.upper_tail_sum(0);
  ConvolutionCheck out;
  for (std::uint64_t n : points) {
    double s = 0.0;
    for (std::uint64_t k = 0; k <= n; ++k) s += tail[k] * tail[n - k];
    out.n.push_back(static_cast<double>(n));
    out.ratio.push_back(tail[n] > 0.0 && std::isfinite(m) ? s / (2.0 * m * tail[n]) : kInf);
  }
  out.final_ratio = out.ratio.back();
  out.pass = std::abs(out.final_ratio - 1.0) <= tol;
  return out;
}

}  // namespace branchtail
