#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "branchtail/asymptotics.hpp"
#include "branchtail/discrete.hpp"
#include "branchtail/errors.hpp"
#include "branchtail/model.hpp"
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

const std::vector<double> kGrid = log_grid(100.0, 1e7, 41);

// Coefficient of G in the regularly varying case, from the closed-form
// geometric series sum_n (b^alpha)^n.
double rv_oracle(double D, double b, double alpha) {
  double s = 0.0, term = 1.0;
  for (int n = 0; n < 2000; ++n, term *= std::pow(b, alpha)) s += term;
  return D * s;
}

FixedPointModel case_iii_pareto() {
  const TailFunction G = make_pareto(2.5);
  return build_model(discretize(G), make_bernoulli(0.5), G, kGrid);
}

}  // namespace

TEST_SUITE("asymptotics") {

TEST_CASE("tail sum closed forms") {
  const TailFunction p2 = make_pareto(2.0);
  const TailSum s = tail_sum_T(p2, 2.0, 10.0);
  CHECK(s.value == doctest::Approx(0.01 / 0.75).epsilon(1e-12));
  CHECK(s.value == doctest::Approx(0.0133333333333).epsilon(1e-10));
  CHECK(s.remainder_bound <= 1e-12 * s.value);

  const TailSum big = tail_sum_T(p2, 1e6, 10.0);
  CHECK(std::abs(big.value - 0.01) <= 1e-12 + 1e-14);

  for (double alpha : {0.8, 1.5, 2.5, 4.0}) {
    for (double c : {1.2, 2.0, 3.5}) {
      for (double x : {1.0, 7.0, 1e3}) {
        const double expect = std::pow(x, -alpha) / (1.0 - std::pow(c, -alpha));
        CHECK(tail_sum_T(make_pareto(alpha), c, x).value ==
              doctest::Approx(expect).epsilon(1e-11));
      }
    }
  }
}

TEST_CASE("tail sum of the erv cycle matches brute-force summation") {
  const TailFunction g = make_erv_cycle(2.0, 1.5, 2.5);
  double brute = 0.0;
  for (int n = 0; n < 200; ++n) brute += g(std::ldexp(1.0, n));
  CHECK(std::abs(tail_sum_T(g, 2.0, 1.0).value - brute) <= 1e-10);
}

TEST_CASE("tail sum errors") {
  CHECK(error_of([] { tail_sum_T(make_pareto(2.0), 1.0, 10.0); }) == ErrorKind::InvalidParameter);
  CHECK(error_of([] { tail_sum_T(make_pareto(2.0), 2.0, 0.0); }) == ErrorKind::InvalidParameter);
  CustomTail slow;
  slow.evaluate = [](double x) { return 1.0 / std::log(std::exp(1.0) + x); };
  CHECK(error_of([&] { tail_sum_T(make_custom(slow), 2.0, 10.0); }) ==
        ErrorKind::NonConvergentSum);
}

TEST_CASE("window identity T(x) - T(x/b) = G(x)") {
  const double b = 0.5;
  for (const TailFunction& g : {make_pareto(2.5), make_erv_cycle(2.0, 1.5, 2.5),
                                make_pareto(0.8, 3.0)}) {
    for (double x : log_grid(1.0, 1e6, 60)) {
      const double lhs = tail_sum_T(g, 1.0 / b, x, 1e-16).value -
                         tail_sum_T(g, 1.0 / b, x / b, 1e-16).value;
      REQUIRE(std::abs(lhs - g(x)) <= 1e-12 * g(x));
    }
  }
}

TEST_CASE("tail sum is strictly decreasing in c") {
  for (const TailFunction& g : {make_pareto(2.5), make_erv_cycle(2.0, 1.5, 2.5)}) {
    for (double x : {5.0, 50.0, 5000.0}) {
      double prev = INFINITY;
      for (double c = 1.3; c < 6.0; c += 0.1) {
        const double v = tail_sum_T(g, c, x).value;
        REQUIRE(v < prev);
        prev = v;
      }
    }
  }
}

TEST_CASE("continuity condition in c") {
  const double deltas[] = {0.04, 0.02, 0.01};
  const G22Report p = check_G22(make_pareto(2.0), 0.5, deltas, kGrid);
  // Closed form: (1 - c0^-alpha) / (1 - c^-alpha), independent of x.
  const double c0 = 2.0, c = c0 * 0.99;
  const double closed = (1.0 - std::pow(c0, -2.0)) / (1.0 - std::pow(c, -2.0));
  CHECK(p.upper_by_delta[2] == doctest::Approx(closed).epsilon(1e-10));
  CHECK(std::abs(p.upper_by_delta[2] - 1.0) < 0.01);
  CHECK(std::abs(p.lower_by_delta[2] - 1.0) < 0.01);
  CHECK(std::abs(p.upper_limit - 1.0) < 1e-3);
  CHECK(p.numeric_pass);
  CHECK(p.pass);

  const G22Report e = check_G22(make_exponential(1.0), 0.5, deltas, log_grid(10.0, 500.0, 30));
  CHECK(e.numeric_pass);
  CHECK(std::abs(e.upper_limit - 1.0) < 1e-6);

  const G22Report erv =
      check_G22(make_erv_cycle(2.0, 1.5, 2.5), 0.5, deltas, log_grid(1.0, 1e12, 200));
  CHECK(erv.analytic);
  CHECK(erv.pass);
}

TEST_CASE("karamata condition") {
  const KaramataReport k = check_karamata(make_pareto(2.5), kGrid);
  CHECK(k.c_plus == doctest::Approx(-2.5).epsilon(1e-3));
  CHECK(k.pass);
}

TEST_CASE("regularly varying coefficient") {
  const FixedPointModel m = case_iii_pareto();
  const double coef = predict_tail_rv(m, 2.5);
  CHECK(coef == doctest::Approx(1.0 / (1.0 - std::pow(0.5, 2.5))).epsilon(1e-14));
  CHECK(coef == doctest::Approx(rv_oracle(1.0, 0.5, 2.5)).epsilon(1e-13));
  CHECK(coef == doctest::Approx(1.21474).epsilon(1e-5));
  CHECK(error_of([&] { predict_tail_rv(m, 0.0); }) == ErrorKind::InvalidParameter);

  // Large alpha: b^alpha vanishes and the coefficient is D.
  CHECK(predict_tail_rv(m, 200.0) == doctest::Approx(m.reference().D).epsilon(1e-15));
}

TEST_CASE("prediction on the case (iii) Pareto model") {
  const FixedPointModel m = case_iii_pareto();
  const auto grid = log_grid(1.0, 1e6, 40);
  const PredictedTail p = predict_tail(m, grid);
  CHECK(p.justification == Justification::FiniteMean);
  CHECK(p.D == 1.0);
  CHECK(p.c == 2.0);
  CHECK(p.d1 == doctest::Approx(1.8));
  CHECK(p.d2 == doctest::Approx(2.2));
  REQUIRE(p.rv_coefficient.has_value());
  const double coef = *p.rv_coefficient;
  for (const auto& pt : p.points) {
    CHECK(pt.curve == doctest::Approx(coef * pt.G_tail).epsilon(1e-11));
    CHECK(std::abs(pt.curve - coef * pt.G_tail) <= pt.remainder_bound + 1e-14 * pt.curve);
    CHECK(pt.lower_bound <= pt.curve);
    CHECK(pt.curve <= pt.upper_bound);
    const double lo = std::pow(pt.x, -2.5) / (1.0 - std::pow(2.2, -2.5));
    CHECK(pt.lower_bound == doctest::Approx(lo).epsilon(1e-11));
  }
}

TEST_CASE("prediction with tiny b is the reference tail") {
  const TailFunction G = make_pareto(2.5);
  const FixedPointModel m = build_model(discretize(G), make_bernoulli(0.01), G, kGrid);
  const PredictedTail p = predict_tail(m, kGrid);
  for (const auto& pt : p.points) {
    CHECK(pt.curve == doctest::Approx(pt.G_tail).epsilon(2e-5));
  }
}

TEST_CASE("prediction constants for a case (ii) model") {
  const TailFunction G = make_pareto(2.5);
  TailRegime reg{G, {}, {}, 0.0, 1.0, TailCase::II, regime_constant(1.0, 0.5, 0.0, 1.0)};
  const FixedPointModel m{make_geometric(0.5), discretize(G), 1.0, 0.5, reg, {}};
  CHECK(reg.D == doctest::Approx(2.0));
  CHECK(window_ratio_prediction(m) == doctest::Approx(2.0));
  const PredictedTail p = predict_tail(m, kGrid);
  CHECK(p.D == doctest::Approx(2.0));
  CHECK(predict_tail_rv(m, 2.5) == doctest::Approx(2.0 / (1.0 - std::pow(0.5, 2.5))));

  // b = 0: the coefficient is c1 + a c2.
  TailRegime r0{G, {}, {}, 0.5, 1.0, TailCase::I, regime_constant(3.0, 0.0, 0.5, 1.0)};
  const FixedPointModel m0{make_geometric(0.75), discretize(G), 3.0, 0.0, r0, {}};
  CHECK(predict_tail_rv(m0, 2.5) == doctest::Approx(0.5 + 3.0));
}

TEST_CASE("window ratio equals the curve difference") {
  const FixedPointModel m = case_iii_pareto();
  const double D = window_ratio_prediction(m);
  CHECK(D == 1.0);
  const TailFunction& G = m.reference().G;
  for (double x : kGrid) {
    const double diff = D * (tail_sum_T(G, 2.0, x, 1e-16).value -
                             tail_sum_T(G, 2.0, 2.0 * x, 1e-16).value);
    CHECK(diff == doctest::Approx(D * G(x)).epsilon(1e-12));
  }
}

TEST_CASE("infinite-mean regime conditions") {
  const TailFunction G = make_pareto(0.8);
  const FixedPointModel m = build_model(discretize(G), make_bernoulli(0.4), G, kGrid);
  const Thm22Report r = thm22_condition_check(m, default_ratio_grid());
  CHECK(r.applicable);
  CHECK(r.C_infinite);
  CHECK(r.liminf_xG > 0.0);
  CHECK(r.var_B == doctest::Approx(0.24).epsilon(1e-14));
  CHECK(r.var_finite);
  CHECK(r.pass_I);
  const PredictedTail p = predict_tail(m, kGrid);
  CHECK(p.justification == Justification::InfiniteMeanVariance);
  for (const auto& pt : p.points) {
    const double expect = std::pow(pt.x, -0.8) / (1.0 - std::pow(2.5, -0.8));
    CHECK(pt.curve == doctest::Approx(expect).epsilon(1e-11));
  }
}

TEST_CASE("integrated-tail condition fails for a heavier offspring tail") {
  const TailFunction G = make_pareto(1.5);
  const FixedPointModel m = build_model(discretize(G), discretize(G, 0.2), G, kGrid);
  const Thm22Report r = thm22_condition_check(m, default_ratio_grid());
  CHECK_FALSE(r.applicable);
  CHECK_FALSE(r.var_finite);
  REQUIRE(r.HI_window_max.size() == 3);
  // H_I decays like x^-0.5 against G ~ x^-1.5: the windowed maxima grow.
  CHECK(r.HI_window_max[2] > 10.0 * r.HI_window_max[0]);
  CHECK_FALSE(r.pass_II);
}

TEST_CASE("unsupported regime") {
  const TailFunction G = make_pareto(0.8);
  RatioConfig cfg;
  cfg.zero_floor = 1e-3;
  const FixedPointModel m =
      build_model(discretize(G), discretize(make_pareto(1.5), 0.2), G, kGrid, cfg);
  REQUIRE(m.reference().case_label == TailCase::III);
  const Thm22Report r = thm22_condition_check(m, default_ratio_grid());
  CHECK_FALSE(r.pass_I);
  CHECK_FALSE(r.pass_II);
  CHECK(error_of([&] { predict_tail(m, kGrid); }) == ErrorKind::UnsupportedRegime);
}

TEST_CASE("second-order delta") {
  const double d = second_order_delta(0.3, 0.3);
  CHECK(d == doctest::Approx((std::sqrt(1.29) - 0.3) / 2.0).epsilon(1e-14));
  CHECK(d == doctest::Approx(0.417890).epsilon(1e-6));
  CHECK(std::abs(d * (0.3 + d) - 0.3) <= 1e-12);
  CHECK(second_order_delta(0.4, 0.0) == 0.0);
  CHECK(second_order_delta(0.0, 0.36) == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(error_of([] { second_order_delta(0.6, 0.5); }) == ErrorKind::Stability);

  std::mt19937_64 gen(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const double b1 = u(gen), b2 = u(gen) * (1.0 - b1);
    const double delta = second_order_delta(b1, b2);
    REQUIRE(std::abs(delta * (b1 + delta) - b2) <= 1e-12);
    REQUIRE(b1 + delta < 1.0);
  }
}

TEST_CASE("second-order model constants") {
  const TailFunction G = make_pareto(2.5);
  const SecondOrderModel m2 = build_second_order(make_geometric(0.5), make_bernoulli(0.3),
                                                 make_bernoulli(0.3), std::nullopt);
  CHECK(m2.a == doctest::Approx(1.0));
  CHECK(m2.m == doctest::Approx(2.5).epsilon(1e-14));
  CHECK(error_of([&] { predict_second_order(m2, kGrid); }) == ErrorKind::NoReferenceTail);
  CHECK(error_of([&] {
          build_second_order(make_geometric(0.5), make_bernoulli(0.3), make_bernoulli(0.3), G,
                             kGrid);
        }) == ErrorKind::NoReferenceTail);

  const SecondOrderModel h = build_second_order(discretize(G), make_bernoulli(0.3),
                                                make_bernoulli(0.3), G, kGrid);
  CHECK(h.c1 == 1.0);
  CHECK(second_order_coefficient(h) == 1.0);
  const PredictedTail p = predict_second_order(h, kGrid);
  CHECK(p.justification == Justification::SecondOrder);
  CHECK(p.c == doctest::Approx(1.0 / (0.3 + h.delta)).epsilon(1e-14));
  for (const auto& pt : p.points) {
    CHECK(pt.curve == doctest::Approx(tail_sum_T(G, p.c, pt.x).value).epsilon(1e-12));
  }
}

TEST_CASE("second-order prediction degenerates to first order") {
  const TailFunction G = make_pareto(2.5);
  const DiscreteDist A = make_geometric(0.5), B = discretize(G, 0.2);
  const SecondOrderModel m2 = build_second_order(A, B, make_point(0), G, kGrid);
  CHECK(m2.delta == 0.0);
  const FixedPointModel m1 = build_model(A, B, G, kGrid);
  const PredictedTail p2 = predict_second_order(m2, kGrid);
  const PredictedTail p1 = predict_tail(m1, kGrid);
  CHECK(second_order_coefficient(m2) == doctest::Approx(m1.reference().D).epsilon(1e-12));
  REQUIRE(p1.points.size() == p2.points.size());
  for (std::size_t i = 0; i < p1.points.size(); ++i) {
    CHECK(p2.points[i].curve == doctest::Approx(p1.points[i].curve).epsilon(1e-10));
  }
}

}  // TEST_SUITE
