#pragma once

#include <span>
#include <vector>

#include "branchtail/discrete.hpp"
#include "branchtail/tail.hpp"

namespace branchtail {

/// Finite-grid stand-ins for liminf / limsup of a tail ratio.
struct RatioLimits {
  double lower = 0.0;
  double upper = 0.0;
};

/// Min and max of G(y x) / G(x) over the last `window_fraction` of
/// `x_grid`. Throws ShrinkGrid if G underflows anywhere in that window.
RatioLimits classify_ratio_limits(const TailFunction& t, double y,
                                  std::span<const double> x_grid,
                                  double window_fraction = 0.25);

/// Same for the additive shift G(x + y) / G(x) (long-tail test).
RatioLimits shift_ratio_limits(const TailFunction& t, double y,
                               std::span<const double> x_grid,
                               double window_fraction = 0.25);

/// Estimate of the Karamata upper index: the sup over lambda of
/// log(limsup G(lambda x)/G(x)) / log(lambda). Returns -inf when the
/// per-window estimates keep dropping (tail lighter than any power).
double karamata_upper_index(const TailFunction& t, std::span<const double> lambda_grid,
                            std::span<const double> x_grid,
                            double window_fraction = 0.25);

struct ClassifyConfig {
  double window_fraction = 0.25;
  std::vector<double> ratio_ys{1.25, 2.0, 4.0};
  double long_tail_shift = 5.0;
  double long_tail_tol = 0.01;
  double dominated_floor = 1e-6;
  double irv_y = 1.001;
  double irv_tol = 0.01;
  double rv_tol = 1e-3;         // relative spread allowed for a single limit
  double drift_tol = 0.25;      // index drift between windows that flags decay
};

struct ClassReport {
  struct Envelope {
    double y;
    RatioLimits limits;
  };
  std::vector<Envelope> envelopes;
  RatioLimits long_tail_limits;
  double irv_lower = 0.0;
  double alpha_plus = 0.0;   // from limsup: upper <= y^-alpha_plus
  double alpha_minus = 0.0;  // from liminf: lower >= y^-alpha_minus
  double karamata = 0.0;

  bool long_tailed = false;   // L
  bool dominated = false;     // D
  bool irv = false;
  bool erv = false;
  bool rv = false;
};

/// Numerical class membership on a finite grid. Verdicts read "consistent
/// with membership", never proof.
ClassReport classify(const TailFunction& t, std::span<const double> x_grid,
                     const ClassifyConfig& cfg = {});

struct ConvolutionCheck {
  std::vector<double> n;
  std::vector<double> ratio;
  double final_ratio = 0.0;
  bool pass = false;
};

/// P(Z1 + Z2 > n) / P(Z > n) on integer grid points; subexponential
/// distributions approach 2. Pass if the last point is within `tol` of 2.
ConvolutionCheck subexponential_check(const DiscreteDist& d, std::span<const double> n_grid,
                                      double tol = 0.15);

/// Lattice analogue of the strong-subexponential condition:
/// sum_{k <= n} P(Z > k) P(Z > n - k) / (2 m P(Z > n)) -> 1, m = sum_k P(Z > k).
ConvolutionCheck strong_subexponential_check(const DiscreteDist& d,
                                             std::span<const double> n_grid,
                                             double tol = 0.15);

}  // namespace branchtail
