#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "branchtail/discrete.hpp"
#include "branchtail/tail.hpp"

namespace branchtail {

enum class TailCase { I, II, III };

const char* to_string(TailCase c) noexcept;

/// Windowed estimate of lim num(x) / G(x).
struct RatioEstimate {
  double value = 0.0;
  double spread = 1.0;     // max/min of the ratio over the last window
  bool converged = true;
  bool analytic = false;   // value follows from construction, not the grid
};

struct RatioConfig {
  double window_fraction = 0.25;
  double max_spread = 0.05;  // allowed (max/min - 1) over the window
  double zero_floor = 1e-9;  // window max below this reads as a zero limit
};

RatioEstimate estimate_ratio_constants(const TailFunction& tail_num, const TailFunction& G,
                                       std::span<const double> x_grid,
                                       const RatioConfig& cfg = {});

/// lim P(d > x) / G(x): analytic when d was built from G, windowed otherwise.
RatioEstimate ratio_constant_for(const DiscreteDist& d, const TailFunction& G,
                                 std::span<const double> x_grid, const RatioConfig& cfg = {});

/// Reference-tail part of the model: constants c1, c2 of
/// P(A > x) ~ c1 G(x), P(B > x) ~ c2 G(x) and the derived regime.
struct TailRegime {
  TailFunction G;
  RatioEstimate c1_estimate;
  RatioEstimate c2_estimate;
  double c1 = 0.0;
  double c2 = 0.0;
  TailCase case_label = TailCase::III;
  /// ((1 - b) c1 + a c2) / (1 - b), with a c2 = 0 whenever c2 = 0.
  double D = 0.0;
};

struct FixedPointModel {
  DiscreteDist A;  // immigration
  DiscreteDist B;  // offspring
  double a = 0.0;  // E A, may be +inf
  double b = 0.0;  // E B in (0, 1)
  std::optional<TailRegime> regime;
  std::vector<std::string> warnings;

  /// Throws NoReferenceTail for models built without a reference tail.
  const TailRegime& reference() const;
};

/// D for given moments and constants (a = inf allowed when c2 = 0).
double regime_constant(double a, double b, double c1, double c2);

enum class StabilityVerdict {
  Stable,
  UnstableBGe1,
  CriticalExcluded,
  LogMomentInfinite,
  LogMomentUnknown,
};

const char* to_string(StabilityVerdict v) noexcept;

struct StabilityReport {
  double b_value = 0.0;
  bool b_ok = false;
  Finiteness log_moment = Finiteness::Unknown;
  StabilityVerdict verdict = StabilityVerdict::LogMomentUnknown;
  bool near_critical = false;  // b > 0.95
};

StabilityReport check_stability(const DiscreteDist& A, const DiscreteDist& B);

/// Default grid used to stabilize ratio constants when none is supplied.
std::vector<double> default_ratio_grid();

/// Assembles X = A + sum_{i <= X} B_i against reference tail G. Constants
/// c1, c2 are exact when A or B was built from G, windowed otherwise.
FixedPointModel build_model(const DiscreteDist& A, const DiscreteDist& B, const TailFunction& G,
                            std::span<const double> x_grid, const RatioConfig& cfg = {});

/// Same validation without a reference tail (light-tailed inputs for the
/// exact solver and the simulator).
FixedPointModel build_light_model(const DiscreteDist& A, const DiscreteDist& B);

/// Feedback queue with k permanent customers:
/// Y = k + sum_{i <= Y - k} alpha_i + sum_{i <= Y} xi_i.
struct QueueModel {
  unsigned k = 1;
  double p = 0.0;
  DiscreteDist xi;
  std::optional<TailFunction> reference;  // defaults to xi's source tail
};

/// X = Y - k solves the canonical equation with A = xi_1 + ... + xi_k and
/// B = alpha + xi.
FixedPointModel queue_to_model(const QueueModel& q, std::span<const double> x_grid = {});

}  // namespace branchtail
