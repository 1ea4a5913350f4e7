#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "branchtail/asymptotics.hpp"
#include "branchtail/discrete.hpp"
#include "branchtail/model.hpp"
#include "branchtail/montecarlo.hpp"
#include "branchtail/tail.hpp"

namespace branchtail {

using Json = nlohmann::ordered_json;

/// Validates a tail spec and fills in defaults. Kinds: pareto, erv_cycle,
/// exponential, scaled.
Json canonical_tail(const Json& spec);
TailFunction parse_tail(const Json& spec);

/// Validates a distribution spec. Kinds: point, bernoulli, geometric,
/// table, discretize, convolve, convolution_power; a bare tail kind
/// (pareto, erv_cycle, exponential) means its discretization.
Json canonical_dist(const Json& spec);
DiscreteDist parse_dist(const Json& spec);

/// Kinds: point, exponential, pareto.
Json canonical_real(const Json& spec);
RealSampler parse_real(const Json& spec);

struct GridSpec {
  double min = 10.0;
  double max = 1000.0;
  std::size_t count = 21;

  std::vector<double> values() const { return log_grid(min, max, count); }
};

/// Parses "min,max,count".
GridSpec parse_grid_flag(const std::string& text);

enum class ModelKind { None, Base, Queue, SecondOrder, Continuous };

const char* to_string(ModelKind k) noexcept;

struct SolveSpec {
  std::size_t N = 0;  // 0 picks a bound from the stationary mean
  double eps = 1e-13;
  std::size_t max_iter = 100000;
  double leak_budget = 1e-8;
};

struct PredictSpec {
  double tol = 1e-12;
  double bound_fraction = 0.1;
};

struct WalkSpec {
  Json xi;
  double shift = 0.0;
  SigmaRule sigma;
};

struct ExperimentSpec {
  ModelKind kind = ModelKind::None;
  Json model;  // canonical section for `kind`
  GridSpec grid;
  std::optional<GridSpec> ratio_grid;  // for windowed ratio constants
  SimConfig sim;
  SolveSpec solve;
  PredictSpec predict;
  std::optional<Json> tail;  // classify input
  std::optional<WalkSpec> walk;
  std::string out_dir = "out";
};

/// Throws InvalidInput on unknown keys, wrong types or a model count other
/// than one (zero is allowed for tail-only and walk-only specs).
ExperimentSpec parse_experiment(const Json& j);

/// Fully resolved config; parse_experiment(to_json(s)) reproduces s.
Json to_json(const ExperimentSpec& s);

FixedPointModel build_base_model(const ExperimentSpec& s);
QueueModel build_queue(const ExperimentSpec& s);
SecondOrderModel build_second_order_model(const ExperimentSpec& s);

}  // namespace branchtail
