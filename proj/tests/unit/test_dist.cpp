#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "branchtail/classify.hpp"
#include "branchtail/discrete.hpp"
#include "branchtail/errors.hpp"
#include "branchtail/rng.hpp"
#include "branchtail/tail.hpp"

using namespace branchtail;

namespace {

template <class F>
ErrorKind error_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::InvalidInput;
}

// Brute-force ERV cycle tail, built from the segment recursion alone.
double erv_reference(double c, double a1, double a2, double x) {
  if (x <= 1.0) return 1.0;
  double t = 1.0, g = 1.0;
  for (;;) {
    const double u = c * t;
    if (x <= u) return g * std::pow(x / t, -a1);
    const double gu = g * std::pow(c, -a1);
    const double next = c * u;
    if (x <= next) return gu * std::pow(x / u, -a2);
    g = gu * std::pow(c, -a2);
    t = next;
  }
}

double binomial_se(double p, double n) { return std::sqrt(p * (1.0 - p) / n); }

}  // namespace

TEST_SUITE("dist") {

TEST_CASE("pareto evaluates the power tail") {
  const TailFunction g = make_pareto(2.0, 1.0);
  CHECK(g(1.0) == 1.0);
  CHECK(g(0.5) == 1.0);
  CHECK(g(10.0) == doctest::Approx(0.01).epsilon(1e-15));
  CHECK(g.declared_class() == TailClass::RV);
  CHECK(*g.declared_alpha() == 2.0);
  CHECK(make_pareto(2.0, 3.0)(6.0) == doctest::Approx(0.25));
}

TEST_CASE("pareto rejects bad parameters") {
  CHECK(error_of([] { make_pareto(0.0); }) == ErrorKind::InvalidParameter);
  CHECK(error_of([] { make_pareto(-1.0); }) == ErrorKind::InvalidParameter);
  CHECK(error_of([] { make_pareto(2.0, -1.0); }) == ErrorKind::InvalidParameter);
}

TEST_CASE("discretized harmonic tail has infinite mean") {
  const DiscreteDist d = discretize(make_pareto(1.0));
  CHECK(std::isinf(d.mean()));
  CHECK(std::isfinite(discretize(make_pareto(2.5)).mean()));
}

TEST_CASE("erv cycle anchors and values") {
  const ErvCycleTail e(2.0, 1.5, 2.5);
  CHECK(e.evaluate(1.0) == 1.0);
  CHECK(e.evaluate(2.0) == doctest::Approx(std::pow(2.0, -1.5)).epsilon(1e-14));
  CHECK(e.evaluate(2.0) == doctest::Approx(0.35355).epsilon(1e-5));
  CHECK(e.evaluate(4.0) == doctest::Approx(0.0625).epsilon(1e-14));
  CHECK(e.anchor_t(2) == doctest::Approx(4.0));
  CHECK(e.anchor_u(1) == doctest::Approx(2.0));
  const TailFunction g = make_erv_cycle(2.0, 1.5, 2.5);
  for (double x : log_grid(1.0, 1e12, 997)) {
    CHECK(g(x) == doctest::Approx(erv_reference(2.0, 1.5, 2.5, x)).epsilon(1e-12));
  }
  CHECK(g.declared_class() == TailClass::ERV);
  REQUIRE(g.erv_indices().has_value());
  CHECK(g.erv_indices()->first == 1.5);
  CHECK(g.erv_indices()->second == 2.5);
}

TEST_CASE("erv cycle rejects bad parameters") {
  CHECK(error_of([] { make_erv_cycle(2.0, 2.5, 1.5); }) == ErrorKind::InvalidParameter);
  CHECK(error_of([] { make_erv_cycle(2.0, 1.5, 1.5); }) == ErrorKind::InvalidParameter);
  CHECK(error_of([] { make_erv_cycle(2.0, 1.0, 2.5); }) == ErrorKind::InvalidParameter);
  CHECK(error_of([] { make_erv_cycle(1.0, 1.5, 2.5); }) == ErrorKind::InvalidParameter);
}

TEST_CASE("evaluate is non-increasing for every constructor") {
  const std::vector<TailFunction> tails = {
      make_pareto(2.5), make_pareto(0.8, 2.0), make_erv_cycle(2.0, 1.5, 2.5),
      make_erv_cycle(3.0, 1.2, 4.0), make_exponential(0.7),
      make_scaled(make_pareto(2.5), 3.0)};
  std::vector<double> grid(10000);
  for (std::size_t i = 0; i < grid.size(); ++i) grid[i] = 0.01 * static_cast<double>(i) * i / 100.0;
  for (const auto& t : tails) {
    double prev = t(grid[0]);
    CHECK(prev <= 1.0);
    for (double x : grid) {
      const double v = t(x);
      REQUIRE(v <= prev);
      prev = v;
    }
  }
}

TEST_CASE("quantile is inverse-consistent") {
  const std::vector<TailFunction> tails = {make_pareto(2.5), make_erv_cycle(2.0, 1.5, 2.5),
                                           make_exponential(1.3)};
  for (const auto& t : tails) {
    for (double x : log_grid(1.5, 400.0, 50)) {
      const double q = t.quantile(t(x));
      CHECK(q <= x * (1.0 + 1e-12));
      CHECK(t(q * (1.0 + 1e-9)) <= t(x) * (1.0 + 1e-9));
    }
  }
}

TEST_CASE("discretize follows the integer tail convention") {
  const DiscreteDist d = discretize(make_pareto(2.0, 1.0));
  // P(Z > n) = n^-2 capped at 1, so Z = 0 and Z = 1 carry no mass.
  CHECK(d.pmf(0) == 0.0);
  CHECK(d.pmf(1) == 0.0);
  CHECK(d.pmf(2) == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(d.pmf(3) == doctest::Approx(0.25 - 1.0 / 9.0).epsilon(1e-14));
  for (std::uint64_t n = 0; n < 50; ++n) {
    CHECK(d.tail(n) == doctest::Approx(std::min(1.0, 1.0 / double(n * n))).epsilon(1e-15));
  }
}

TEST_CASE("discretize of a vanishing tail is a point mass at zero") {
  CustomTail spec;
  spec.evaluate = [](double) { return 0.0; };
  const DiscreteDist d = discretize(make_custom(spec));
  CHECK(d.pmf(0) == 1.0);
  CHECK(d.tail(0) == 0.0);
  CHECK(d.mean() == 0.0);
}

TEST_CASE("discretize rejects improper tails") {
  CustomTail spec;
  spec.evaluate = [](double) { return 0.5; };
  CHECK(error_of([&] { discretize(make_custom(spec)); }) == ErrorKind::InvalidInput);
}

TEST_CASE("discretize then re-accumulate telescopes to one") {
  const std::vector<DiscreteDist> dists = {
      discretize(make_pareto(2.5)), discretize(make_pareto(0.8)),
      discretize(make_erv_cycle(2.0, 1.5, 2.5)), discretize(make_pareto(2.5), 0.3),
      discretize(make_exponential(0.2))};
  for (const auto& d : dists) {
    double cum = 0.0;
    for (std::uint64_t n = 0; n <= 2000; ++n) {
      cum += d.pmf(n);
      REQUIRE(std::abs(cum + d.tail(n) - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("samplers") {
  Rng rng(12345);
  const DiscreteDist point = make_point(3);
  for (int i = 0; i < 1000; ++i) REQUIRE(point.sample(rng) == 3);

  const DiscreteDist bern = make_bernoulli(0.3);
  const int n = 1000000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += static_cast<double>(bern.sample(rng));
  CHECK(std::abs(sum / n - 0.3) <= 0.002);

  const DiscreteDist par = discretize(make_pareto(2.5));
  std::vector<std::uint64_t> draws(n);
  for (auto& v : draws) v = par.sample(rng);
  const std::vector<std::uint64_t> points = {1, 2, 3, 5, 7, 10, 15, 20, 30, 50};
  for (std::uint64_t x : points) {
    double hits = 0.0;
    for (auto v : draws) hits += v > x ? 1.0 : 0.0;
    const double p = par.tail(x);
    const double se = binomial_se(p, n);
    CHECK(std::abs(hits / n - p) <= (x == 10 ? 3.0 : 4.0) * se);
  }
}

TEST_CASE("sample_sum matches repeated draws in distribution") {
  const DiscreteDist g = make_geometric(0.5);
  Rng rng(7);
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) sum += static_cast<double>(g.sample_sum(4, rng));
  CHECK(std::abs(sum / n - 4.0) <= 4.0 * std::sqrt(4.0 * 2.0 / n));
}

TEST_CASE("large Bernoulli sums are binomial") {
  const DiscreteDist b = make_bernoulli(0.4);
  Rng rng(17);
  for (std::uint64_t count : {65ull, 1000ull, 1000000000000ull}) {
    const double mean = 0.4 * static_cast<double>(count);
    const double sd = std::sqrt(mean * 0.6);
    double s = 0.0, s2 = 0.0;
    const int reps = 20000;
    for (int i = 0; i < reps; ++i) {
      const double v = static_cast<double>(b.sample_sum(count, rng));
      REQUIRE(v <= static_cast<double>(count));
      s += v;
      s2 += v * v;
    }
    const double m = s / reps;
    CHECK(std::abs(m - mean) <= 4.0 * sd / std::sqrt(reps));
    CHECK(std::sqrt(s2 / reps - m * m) == doctest::Approx(sd).epsilon(0.05));
  }
}

TEST_CASE("rng streams are a pure function of seed and index") {
  Rng a = Rng::stream(5, 17), b = Rng::stream(5, 17), c = Rng::stream(5, 18);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto va = a(), vb = b(), vc = c();
    REQUIRE(va == vb);
    differs |= va != vc;
  }
  CHECK(differs);
  Rng u(3);
  for (int i = 0; i < 10000; ++i) {
    const double x = u.uniform_open0();
    REQUIRE(x > 0.0);
    REQUIRE(x <= 1.0);
  }
}

TEST_CASE("integrated tail") {
  const IntegratedTail zero = integrated_tail(make_point(0));
  for (double x : {0.0, 0.5, 3.0, 100.0}) CHECK(zero.tail(x) == 0.0);
  CHECK(zero.proper);

  const double q = 0.6;
  const IntegratedTail geo = integrated_tail(make_geometric(q));
  for (double x : {0.0, 0.3, 1.0, 2.5, 7.0, 20.0}) {
    const double expect = std::min(1.0, std::pow(q, std::ceil(x) + 1.0) / (1.0 - q));
    CHECK(geo.tail(x) == doctest::Approx(expect).epsilon(1e-12));
  }

  // Brute-force partial sum to a cutoff of 10^7 plus the integral bound
  // on the rest, which is below 10^-11 for tail n^-2.5.
  const DiscreteDist par = discretize(make_pareto(2.5));
  const IntegratedTail h = integrated_tail(par);
  double brute = 0.0;
  const std::uint64_t cutoff = 10000000;
  for (std::uint64_t n = cutoff; n >= 10; --n) brute += par.tail(n);
  const double rest = std::pow(double(cutoff), -1.5) / 1.5;
  CHECK(rest < 1e-10);
  CHECK(std::abs(h.tail(10.0) - (brute + rest)) <= 1e-10);

  const IntegratedTail heavy = integrated_tail(discretize(make_pareto(0.8)));
  CHECK_FALSE(heavy.proper);
}

TEST_CASE("ratio limits") {
  const auto grid = log_grid(10.0, 1e8, 200);
  const RatioLimits p = classify_ratio_limits(make_pareto(2.0), 2.0, grid);
  CHECK(p.lower == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(p.upper == doctest::Approx(0.25).epsilon(1e-12));

  // Step 2^0.1 hits every cycle anchor; the last quarter spans 20 cycles.
  const auto erv_grid = log_grid(1.0, std::pow(2.0, 160.0), 1601);
  const RatioLimits e = classify_ratio_limits(make_erv_cycle(2.0, 1.5, 2.5), 2.0, erv_grid);
  CHECK(e.lower == doctest::Approx(std::pow(2.0, -2.5)).epsilon(1e-6));
  CHECK(e.upper == doctest::Approx(std::pow(2.0, -1.5)).epsilon(1e-6));

  const RatioLimits lt = shift_ratio_limits(make_pareto(2.0), 5.0, grid);
  CHECK(lt.lower > 1.0 - 1e-4);
  CHECK(lt.upper <= 1.0);

  CustomTail finite;
  finite.evaluate = [](double x) { return x < 1000.0 ? 1.0 - x / 1000.0 : 0.0; };
  CHECK(error_of([&] {
          classify_ratio_limits(make_custom(finite), 2.0, log_grid(10.0, 1e5, 30));
        }) == ErrorKind::ShrinkGrid);
  CHECK(error_of([&] { classify_ratio_limits(make_pareto(2.0), 1.0, grid); }) ==
        ErrorKind::InvalidParameter);
}

TEST_CASE("erv envelope holds on the whole grid") {
  const TailFunction g = make_erv_cycle(2.0, 1.5, 2.5);
  const double eps = 1e-9;
  for (double y : {1.25, 2.0, 4.0}) {
    for (double x : log_grid(1.0, 1e30, 3000)) {
      const double r = g(y * x) / g(x);
      REQUIRE(r >= std::pow(y, -2.5) - eps);
      REQUIRE(r <= std::pow(y, -1.5) + eps);
    }
  }
}

TEST_CASE("karamata upper index") {
  const std::vector<double> lambdas = {1.1, 1.25, 1.5, 2.0, 4.0};
  const auto grid = log_grid(10.0, 1e8, 200);
  CHECK(std::abs(karamata_upper_index(make_pareto(2.5), lambdas, grid) + 2.5) <= 0.05);

  const auto erv_grid = log_grid(1.0, std::pow(2.0, 160.0), 1601);
  const double k = karamata_upper_index(make_erv_cycle(2.0, 1.5, 2.5), lambdas, erv_grid);
  CHECK(k >= -1.6);
  CHECK(k <= -1.4);

  const auto light_grid = log_grid(1.0, 600.0, 100);
  const double e = karamata_upper_index(make_exponential(1.0), lambdas, light_grid);
  CHECK(std::isinf(e));
  CHECK(e < 0.0);
}

TEST_CASE("class order consistency") {
  const auto grid = log_grid(10.0, 1e8, 200);
  for (const TailFunction& t : {make_pareto(2.5), make_pareto(0.8), make_pareto(1.5, 4.0)}) {
    const ClassReport r = classify(t, grid);
    CHECK(r.dominated);
    CHECK(r.long_tailed);
    CHECK(r.irv);
    CHECK(r.erv);
    CHECK(r.rv);
  }
  const ClassReport e = classify(make_erv_cycle(2.0, 1.5, 2.5), log_grid(1.0, std::pow(2.0, 160.0), 1601));
  CHECK(e.dominated);
  CHECK(e.long_tailed);
  CHECK(e.erv);
  CHECK_FALSE(e.rv);
  CHECK(e.alpha_plus == doctest::Approx(1.5).epsilon(1e-3));
  CHECK(e.alpha_minus == doctest::Approx(2.5).epsilon(1e-3));

  const ClassReport x = classify(make_exponential(0.5), log_grid(1.0, 600.0, 100));
  CHECK_FALSE(x.dominated);
  CHECK_FALSE(x.long_tailed);
}

TEST_CASE("subexponential convolution checks") {
  const auto grid = log_grid(100.0, 20000.0, 10);
  const ConvolutionCheck s = subexponential_check(discretize(make_pareto(2.5)), grid);
  CHECK(s.pass);
  CHECK(std::abs(s.final_ratio - 2.0) < 0.15);
  const ConvolutionCheck g = subexponential_check(make_geometric(0.5), log_grid(5.0, 200.0, 10));
  CHECK_FALSE(g.pass);
  const ConvolutionCheck ss = strong_subexponential_check(discretize(make_pareto(2.5)), grid);
  CHECK(ss.pass);
}

TEST_CASE("convolution and tables") {
  const DiscreteDist t = make_table({0.2, 0.5, 0.3});
  CHECK(t.mean() == doctest::Approx(1.1));
  CHECK(t.tail(0) == doctest::Approx(0.8));
  const DiscreteDist s = convolve(t, make_bernoulli(0.5));
  CHECK(s.pmf(0) == doctest::Approx(0.1));
  CHECK(s.pmf(3) == doctest::Approx(0.15));
  CHECK(s.mean() == doctest::Approx(1.6));
  const DiscreteDist p = convolution_power(make_bernoulli(0.5), 3);
  CHECK(p.pmf(2) == doctest::Approx(0.375));
  CHECK(error_of([] { make_table({0.5, 0.4}); }) == ErrorKind::InvalidParameter);
  CHECK(error_of([] { make_bernoulli(1.5); }) == ErrorKind::InvalidParameter);
}

}  // TEST_SUITE
