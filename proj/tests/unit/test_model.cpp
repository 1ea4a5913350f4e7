#include <doctest.h>

#include <cmath>
#include <cstring>
#include <vector>

#include "branchtail/discrete.hpp"
#include "branchtail/errors.hpp"
#include "branchtail/exact.hpp"
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

}  // namespace

TEST_SUITE("model") {

TEST_CASE("case (i): identical tails") {
  const TailFunction G = make_pareto(2.5);
  const double s = 0.3;
  const DiscreteDist A = discretize(G, s), B = discretize(G, s);
  // Against the unscaled reference the constants are the scale.
  const FixedPointModel m = build_model(A, B, G, kGrid);
  CHECK(m.reference().case_label == TailCase::I);
  CHECK(m.reference().c1 == s);
  CHECK(m.reference().c2 == s);
  CHECK(m.reference().c1_estimate.analytic);
  CHECK(m.b < 1.0);

  // Against the scaled tail itself both ratios are one, found numerically.
  const FixedPointModel m2 = build_model(A, B, make_scaled(G, s), kGrid);
  CHECK(m2.reference().case_label == TailCase::I);
  CHECK(m2.reference().c1 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(m2.reference().c2 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_FALSE(m2.reference().c1_estimate.analytic);
  CHECK(m2.reference().c1_estimate.converged);
  const double expectD = ((1.0 - m2.b) + m2.a) / (1.0 - m2.b);
  CHECK(m2.reference().D == doctest::Approx(expectD).epsilon(1e-10));
}

TEST_CASE("case (ii): light immigration") {
  const TailFunction G = make_pareto(2.5);
  const DiscreteDist B = discretize(G, 0.2);
  const FixedPointModel m = build_model(make_geometric(0.5), B, make_scaled(G, 0.2), kGrid);
  CHECK(m.reference().case_label == TailCase::II);
  CHECK(m.reference().c1 == 0.0);
  CHECK(m.reference().c2 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(m.reference().D == doctest::Approx(m.a * 1.0 / (1.0 - m.b)).epsilon(1e-10));
}

TEST_CASE("case (iii): infinite immigration mean") {
  const TailFunction G = make_pareto(0.8);
  const FixedPointModel m = build_model(discretize(G), make_bernoulli(0.4), G, kGrid);
  CHECK(std::isinf(m.a));
  CHECK(m.reference().case_label == TailCase::III);
  CHECK(m.reference().c1 == 1.0);
  CHECK(m.reference().c2 == 0.0);
  CHECK(m.reference().D == 1.0);
}

TEST_CASE("infinite immigration mean with heavy offspring is inconsistent") {
  const TailFunction G = make_pareto(2.5);
  CHECK(error_of([&] {
          build_model(discretize(make_pareto(0.9)), discretize(G, 0.2), G, kGrid);
        }) == ErrorKind::Inconsistent);
}

TEST_CASE("no reference tail") {
  CHECK(error_of([] {
          build_model(make_geometric(0.5), make_bernoulli(0.3), make_pareto(2.5), kGrid);
        }) == ErrorKind::NoReferenceTail);
  const FixedPointModel light = build_light_model(make_bernoulli(0.5), make_bernoulli(0.4));
  CHECK_FALSE(light.regime.has_value());
  CHECK(error_of([&] { light.reference(); }) == ErrorKind::NoReferenceTail);
}

TEST_CASE("degenerate and unstable inputs") {
  CHECK(error_of([] { build_light_model(make_point(0), make_bernoulli(0.3)); }) ==
        ErrorKind::Degenerate);
  CHECK(error_of([] { build_light_model(make_bernoulli(0.5), make_point(0)); }) ==
        ErrorKind::Degenerate);
  CHECK(error_of([] { build_light_model(make_bernoulli(0.5), make_table({0.3, 0.2, 0.5})); }) ==
        ErrorKind::Stability);
  CHECK(error_of([] { build_light_model(make_bernoulli(0.5), make_point(1)); }) ==
        ErrorKind::Stability);
}

TEST_CASE("P(A = 0) = 0 is a warning, not an error") {
  const FixedPointModel m =
      build_model(discretize(make_pareto(2.5)), make_bernoulli(0.5), make_pareto(2.5), kGrid);
  REQUIRE_FALSE(m.warnings.empty());
  CHECK(m.warnings.front().find("P(A = 0) = 0") != std::string::npos);
}

TEST_CASE("near-critical warning") {
  const FixedPointModel m = build_light_model(make_bernoulli(0.5), make_bernoulli(0.97));
  bool found = false;
  for (const auto& w : m.warnings) found |= w.find("near-critical") != std::string::npos;
  CHECK(found);
}

TEST_CASE("stability verdicts") {
  const StabilityReport unstable = check_stability(make_bernoulli(0.5), make_table({0.3, 0.2, 0.5}));
  CHECK(unstable.b_value == doctest::Approx(1.2));
  CHECK_FALSE(unstable.b_ok);
  CHECK(unstable.verdict == StabilityVerdict::UnstableBGe1);

  // Power tail: sum_n G(e^n) = sum_n e^{-0.5 n} converges.
  const StabilityReport heavy = check_stability(discretize(make_pareto(0.5)), make_bernoulli(0.4));
  CHECK(heavy.b_value == doctest::Approx(0.4));
  CHECK(heavy.b_ok);
  CHECK(heavy.log_moment == Finiteness::Finite);
  CHECK(heavy.verdict == StabilityVerdict::Stable);

  const StabilityReport critical = check_stability(make_bernoulli(0.5), make_point(1));
  CHECK(critical.verdict == StabilityVerdict::CriticalExcluded);

  const StabilityReport light = check_stability(make_geometric(0.3), make_bernoulli(0.2));
  CHECK(light.verdict == StabilityVerdict::Stable);
  for (const auto& r : {unstable, heavy, critical, light}) {
    CHECK((r.verdict == StabilityVerdict::Stable) ==
          (r.b_ok && r.log_moment == Finiteness::Finite));
  }
}

TEST_CASE("ratio constant estimation") {
  const TailFunction G = make_pareto(2.5);
  const RatioEstimate same = estimate_ratio_constants(G, G, kGrid);
  CHECK(same.value == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(same.converged);

  const RatioEstimate triple = estimate_ratio_constants(make_scaled(G, 3.0), G, kGrid);
  CHECK(triple.value == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(triple.converged);

  const RatioEstimate geo = estimate_ratio_constants(as_tail(make_geometric(0.5)), G, kGrid);
  CHECK(geo.value == 0.0);
  CHECK(geo.converged);

  // An ERV cycle tail against a Pareto reference oscillates.
  const RatioEstimate osc =
      estimate_ratio_constants(make_erv_cycle(2.0, 2.4, 2.6), make_pareto(2.5), kGrid);
  CHECK_FALSE(osc.converged);
}

TEST_CASE("regime constant conventions") {
  CHECK(regime_constant(1.0, 0.5, 0.0, 1.0) == doctest::Approx(2.0));
  CHECK(regime_constant(INFINITY, 0.4, 1.0, 0.0) == 1.0);
  CHECK(regime_constant(2.0, 0.5, 1.0, 0.0) == 1.0);
  CHECK(regime_constant(1.0, 0.5, 1.0, 1.0) == doctest::Approx(3.0));
}

TEST_CASE("queue mapping") {
  CHECK(error_of([] { queue_to_model(QueueModel{1, 0.0, make_point(0), std::nullopt}); }) ==
        ErrorKind::Degenerate);

  const QueueModel q{2, 0.3, make_bernoulli(0.2), std::nullopt};
  const FixedPointModel m = queue_to_model(q);
  CHECK(m.a == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(m.b == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(stationary_mean(m) == doctest::Approx(0.8).epsilon(1e-14));
  CHECK(m.A.pmf(2) == doctest::Approx(0.04));

  CHECK(error_of([] { queue_to_model(QueueModel{1, 0.5, make_bernoulli(0.6), std::nullopt}); }) ==
        ErrorKind::Stability);
}

TEST_CASE("queue with heavy arrivals keeps the arrival tail in B") {
  const TailFunction G = make_pareto(2.5);
  const double p = 0.2;
  const DiscreteDist xi = discretize(G, 0.2);
  const FixedPointModel m = queue_to_model(QueueModel{1, p, xi, std::nullopt}, kGrid);
  CHECK(m.reference().c2 == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(m.reference().c1 == doctest::Approx(0.2).epsilon(1e-12));
  // Convolution oracle: P(alpha + xi > n) = (1 - p) P(xi > n) + p P(xi > n - 1).
  for (std::uint64_t n : {5, 20, 100, 1000, 10000}) {
    const double expect = (1.0 - p) * xi.tail(n) + p * xi.tail(n - 1);
    CHECK(m.B.tail(n) == doctest::Approx(expect).epsilon(1e-12));
    CHECK(m.B.tail(n) / xi.tail(n) == doctest::Approx(1.0).epsilon(3.0 / double(n)));
  }
}

TEST_CASE("queue mean identity against the exact solver") {
  for (const auto& [k, p, r] : std::vector<std::tuple<unsigned, double, double>>{
           {1, 0.2, 0.3}, {2, 0.3, 0.2}, {3, 0.1, 0.5}}) {
    const QueueModel q{k, p, make_bernoulli(r), std::nullopt};
    const FixedPointModel m = queue_to_model(q);
    const StationarySolution s = solve_stationary(m, 200);
    CHECK(s.pmf.mean() == doctest::Approx(k * r / (1.0 - p - r)).epsilon(1e-9));
  }
}

TEST_CASE("build_model is deterministic") {
  const TailFunction G = make_pareto(2.5);
  const DiscreteDist A = make_geometric(0.4), B = discretize(make_scaled(G, 2.0), 0.15);
  const FixedPointModel m1 = build_model(A, B, G, kGrid), m2 = build_model(A, B, G, kGrid);
  const auto bits = [](double v) {
    std::uint64_t u;
    std::memcpy(&u, &v, sizeof u);
    return u;
  };
  CHECK(bits(m1.reference().c2) == bits(m2.reference().c2));
  CHECK(bits(m1.reference().D) == bits(m2.reference().D));
  CHECK(bits(m1.a) == bits(m2.a));
  CHECK(bits(m1.b) == bits(m2.b));
  CHECK(m1.reference().case_label == m2.reference().case_label);
}

}  // TEST_SUITE
