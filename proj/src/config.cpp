#include "branchtail/config.hpp"

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <sstream>

#include "branchtail/errors.hpp"

namespace branchtail {

namespace {

[[noreturn]] void bad(const std::string& where, const std::string& what) {
  fail(ErrorKind::InvalidInput, where + ": " + what);
}

void require_object(const Json& j, const std::string& where) {
  if (!j.is_object()) bad(where, "expected an object");
}

void check_keys(const Json& j, std::initializer_list<const char*> allowed,
                const std::string& where) {
  require_object(j, where);
  for (const auto& [key, value] : j.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
      bad(where, "unknown key '" + key + "'");
    }
  }
}

double number(const Json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) bad(where, std::string("missing '") + key + "'");
  const Json& v = j.at(key);
  if (!v.is_number()) bad(where, std::string("'") + key + "' must be a number");
  return v.get<double>();
}

double number_or(const Json& j, const char* key, double fallback, const std::string& where) {
  return j.contains(key) ? number(j, key, where) : fallback;
}

std::uint64_t unsigned_or(const Json& j, const char* key, std::uint64_t fallback,
                          const std::string& where) {
  if (!j.contains(key)) return fallback;
  const Json& v = j.at(key);
  if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
    bad(where, std::string("'") + key + "' must be a nonnegative integer");
  }
  return v.get<std::uint64_t>();
}

std::string kind_of(const Json& j, const std::string& where) {
  require_object(j, where);
  if (!j.contains("kind") || !j.at("kind").is_string()) bad(where, "missing string 'kind'");
  return j.at("kind").get<std::string>();
}

}  // namespace

Json canonical_tail(const Json& spec) {
  const std::string where = "tail spec";
  const std::string kind = kind_of(spec, where);
  Json out;
  out["kind"] = kind;
  if (kind == "pareto") {
    check_keys(spec, {"kind", "alpha", "floor"}, where);
    out["alpha"] = number(spec, "alpha", where);
    out["floor"] = number_or(spec, "floor", 1.0, where);
  } else if (kind == "erv_cycle") {
    check_keys(spec, {"kind", "c", "a1", "a2"}, where);
    out["c"] = number(spec, "c", where);
    out["a1"] = number(spec, "a1", where);
    out["a2"] = number(spec, "a2", where);
  } else if (kind == "exponential") {
    check_keys(spec, {"kind", "rate"}, where);
    out["rate"] = number(spec, "rate", where);
  } else if (kind == "scaled") {
    check_keys(spec, {"kind", "base", "scale", "cap"}, where);
    if (!spec.contains("base")) bad(where, "missing 'base'");
    out["base"] = canonical_tail(spec.at("base"));
    out["scale"] = number(spec, "scale", where);
    out["cap"] = number_or(spec, "cap", 1.0, where);
  } else {
    bad(where, "unknown kind '" + kind + "'");
  }
  return out;
}

TailFunction parse_tail(const Json& spec) {
  const Json c = canonical_tail(spec);
  const std::string kind = c.at("kind").get<std::string>();
  if (kind == "pareto") return make_pareto(c["alpha"].get<double>(), c["floor"].get<double>());
  if (kind == "erv_cycle") {
    return make_erv_cycle(c["c"].get<double>(), c["a1"].get<double>(), c["a2"].get<double>());
  }
  if (kind == "exponential") return make_exponential(c["rate"].get<double>());
  return make_scaled(parse_tail(c["base"]), c["scale"].get<double>(), c["cap"].get<double>());
}

Json canonical_dist(const Json& spec) {
  const std::string where = "distribution spec";
  const std::string kind = kind_of(spec, where);
  Json out;
  if (kind == "pareto" || kind == "erv_cycle" || kind == "exponential") {
    Json tail = spec;
    const double scale = number_or(spec, "scale", 1.0, where);
    const double cap = number_or(spec, "cap", 1.0, where);
    tail.erase("scale");
    tail.erase("cap");
    out["kind"] = "discretize";
    out["tail"] = canonical_tail(tail);
    out["scale"] = scale;
    out["cap"] = cap;
    return out;
  }
  out["kind"] = kind;
  if (kind == "point") {
    check_keys(spec, {"kind", "value"}, where);
    out["value"] = unsigned_or(spec, "value", 0, where);
  } else if (kind == "bernoulli") {
    check_keys(spec, {"kind", "p"}, where);
    out["p"] = number(spec, "p", where);
  } else if (kind == "geometric") {
    check_keys(spec, {"kind", "q"}, where);
    out["q"] = number(spec, "q", where);
  } else if (kind == "table") {
    check_keys(spec, {"kind", "pmf"}, where);
    if (!spec.contains("pmf") || !spec.at("pmf").is_array()) bad(where, "'pmf' must be an array");
    Json pmf = Json::array();
    for (const auto& v : spec.at("pmf")) {
      if (!v.is_number()) bad(where, "'pmf' entries must be numbers");
      pmf.push_back(v.get<double>());
    }
    out["pmf"] = pmf;
  } else if (kind == "discretize") {
    check_keys(spec, {"kind", "tail", "scale", "cap"}, where);
    if (!spec.contains("tail")) bad(where, "missing 'tail'");
    out["tail"] = canonical_tail(spec.at("tail"));
    out["scale"] = number_or(spec, "scale", 1.0, where);
    out["cap"] = number_or(spec, "cap", 1.0, where);
  } else if (kind == "convolve") {
    check_keys(spec, {"kind", "parts"}, where);
    if (!spec.contains("parts") || !spec.at("parts").is_array() || spec.at("parts").empty()) {
      bad(where, "'parts' must be a nonempty array");
    }
    Json parts = Json::array();
    for (const auto& p : spec.at("parts")) parts.push_back(canonical_dist(p));
    out["parts"] = parts;
  } else if (kind == "convolution_power") {
    check_keys(spec, {"kind", "dist", "k"}, where);
    if (!spec.contains("dist")) bad(where, "missing 'dist'");
    out["dist"] = canonical_dist(spec.at("dist"));
    out["k"] = unsigned_or(spec, "k", 1, where);
  } else {
    bad(where, "unknown kind '" + kind + "'");
  }
  return out;
}

DiscreteDist parse_dist(const Json& spec) {
  const Json c = canonical_dist(spec);
  const std::string kind = c.at("kind").get<std::string>();
  if (kind == "point") return make_point(c["value"].get<std::uint64_t>());
  if (kind == "bernoulli") return make_bernoulli(c["p"].get<double>());
  if (kind == "geometric") return make_geometric(c["q"].get<double>());
  if (kind == "table") return make_table(c["pmf"].get<std::vector<double>>());
  if (kind == "discretize") {
    return discretize(parse_tail(c["tail"]), c["scale"].get<double>(), c["cap"].get<double>());
  }
  if (kind == "convolve") {
    DiscreteDist out = parse_dist(c["parts"][0]);
    for (std::size_t i = 1; i < c["parts"].size(); ++i) out = convolve(out, parse_dist(c["parts"][i]));
    return out;
  }
  return convolution_power(parse_dist(c["dist"]), static_cast<unsigned>(c["k"].get<std::uint64_t>()));
}

Json canonical_real(const Json& spec) {
  const std::string where = "real sampler spec";
  const std::string kind = kind_of(spec, where);
  Json out;
  out["kind"] = kind;
  if (kind == "point") {
    check_keys(spec, {"kind", "value"}, where);
    out["value"] = number(spec, "value", where);
  } else if (kind == "exponential") {
    check_keys(spec, {"kind", "mean"}, where);
    out["mean"] = number(spec, "mean", where);
  } else if (kind == "pareto") {
    check_keys(spec, {"kind", "alpha", "floor"}, where);
    out["alpha"] = number(spec, "alpha", where);
    out["floor"] = number_or(spec, "floor", 1.0, where);
  } else {
    bad(where, "unknown kind '" + kind + "'");
  }
  return out;
}

RealSampler parse_real(const Json& spec) {
  const Json c = canonical_real(spec);
  const std::string kind = c.at("kind").get<std::string>();
  if (kind == "point") return real_point(c["value"].get<double>());
  if (kind == "exponential") return real_exponential(c["mean"].get<double>());
  return real_pareto(c["alpha"].get<double>(), c["floor"].get<double>());
}

GridSpec parse_grid_flag(const std::string& text) {
  std::istringstream in(text);
  GridSpec g;
  char c1 = 0, c2 = 0;
  double count = 0.0;
  if (!(in >> g.min >> c1 >> g.max >> c2 >> count) || c1 != ',' || c2 != ',' ||
      count != std::floor(count)) {
    fail(ErrorKind::InvalidInput, "--grid expects min,max,count");
  }
  in >> std::ws;
  if (!in.eof()) fail(ErrorKind::InvalidInput, "--grid expects min,max,count");
  require(count >= 2, ErrorKind::InvalidInput, "grid count must be >= 2");
  require(g.min > 0.0 && g.max > g.min, ErrorKind::InvalidInput,
          "grid needs 0 < min < max");
  g.count = static_cast<std::size_t>(count);
  return g;
}

const char* to_string(ModelKind k) noexcept {
  switch (k) {
    case ModelKind::None: return "none";
    case ModelKind::Base: return "model";
    case ModelKind::Queue: return "queue";
    case ModelKind::SecondOrder: return "second_order";
    case ModelKind::Continuous: return "continuous";
  }
  return "?";
}

namespace {

GridSpec parse_grid(const Json& j, const std::string& where) {
  check_keys(j, {"min", "max", "count"}, where);
  GridSpec g;
  g.min = number(j, "min", where);
  g.max = number(j, "max", where);
  g.count = unsigned_or(j, "count", 21, where);
  if (!(g.count >= 2)) bad(where, "count must be >= 2");
  if (!(g.min > 0.0 && g.max > g.min)) bad(where, "needs 0 < min < max");
  return g;
}

Json grid_json(const GridSpec& g) { return Json{{"min", g.min}, {"max", g.max}, {"count", g.count}}; }

Json canonical_model(ModelKind kind, const Json& j) {
  Json out;
  if (kind == ModelKind::Base) {
    check_keys(j, {"A", "B", "G", "grid"}, "model");
    if (!j.contains("A") || !j.contains("B")) bad("model", "needs 'A' and 'B'");
    out["A"] = canonical_dist(j["A"]);
    out["B"] = canonical_dist(j["B"]);
    if (j.contains("G")) out["G"] = canonical_tail(j["G"]);
  } else if (kind == ModelKind::Queue) {
    check_keys(j, {"k", "p", "xi", "G", "grid"}, "queue");
    if (!j.contains("xi")) bad("queue", "needs 'xi'");
    out["k"] = unsigned_or(j, "k", 1, "queue");
    out["p"] = number(j, "p", "queue");
    out["xi"] = canonical_dist(j["xi"]);
    if (j.contains("G")) out["G"] = canonical_tail(j["G"]);
  } else if (kind == ModelKind::SecondOrder) {
    check_keys(j, {"A", "B1", "B2", "G", "grid"}, "second_order");
    if (!j.contains("A") || !j.contains("B1") || !j.contains("B2")) {
      bad("second_order", "needs 'A', 'B1' and 'B2'");
    }
    out["A"] = canonical_dist(j["A"]);
    out["B1"] = canonical_dist(j["B1"]);
    out["B2"] = canonical_dist(j["B2"]);
    if (j.contains("G")) out["G"] = canonical_tail(j["G"]);
  } else if (kind == ModelKind::Continuous) {
    check_keys(j, {"A", "lambda", "B"}, "continuous");
    if (!j.contains("A") || !j.contains("B")) bad("continuous", "needs 'A' and 'B'");
    out["A"] = canonical_real(j["A"]);
    out["lambda"] = number(j, "lambda", "continuous");
    out["B"] = canonical_real(j["B"]);
  }
  return out;
}

}  // namespace

ExperimentSpec parse_experiment(const Json& j) {
  check_keys(j, {"model", "queue", "second_order", "continuous", "grid", "sim", "solve",
                 "predict", "tail", "walkmax", "output"},
             "experiment");
  ExperimentSpec s;
  int models = 0;
  const std::pair<const char*, ModelKind> kinds[] = {{"model", ModelKind::Base},
                                                     {"queue", ModelKind::Queue},
                                                     {"second_order", ModelKind::SecondOrder},
                                                     {"continuous", ModelKind::Continuous}};
  for (const auto& [key, kind] : kinds) {
    if (!j.contains(key)) continue;
    ++models;
    s.kind = kind;
    s.model = canonical_model(kind, j.at(key));
    if (j.at(key).contains("grid")) s.ratio_grid = parse_grid(j.at(key).at("grid"), std::string(key) + ".grid");
  }
  if (models > 1) bad("experiment", "exactly one of model, queue, second_order, continuous");

  if (j.contains("grid")) s.grid = parse_grid(j["grid"], "grid");

  if (j.contains("sim")) {
    const Json& q = j["sim"];
    check_keys(q, {"burn_in", "replications", "chain_length", "seed", "workers",
                   "record_trajectory", "hybrid_threshold"},
               "sim");
    if (q.contains("burn_in") && !q["burn_in"].is_null()) {
      s.sim.burn_in = unsigned_or(q, "burn_in", 0, "sim");
    }
    s.sim.replications = unsigned_or(q, "replications", s.sim.replications, "sim");
    s.sim.chain_length = unsigned_or(q, "chain_length", s.sim.chain_length, "sim");
    s.sim.seed = unsigned_or(q, "seed", s.sim.seed, "sim");
    s.sim.workers = static_cast<unsigned>(unsigned_or(q, "workers", s.sim.workers, "sim"));
    s.sim.hybrid_threshold = unsigned_or(q, "hybrid_threshold", 0, "sim");
    if (q.contains("record_trajectory")) {
      if (!q["record_trajectory"].is_boolean()) bad("sim", "'record_trajectory' must be a boolean");
      s.sim.record_trajectory = q["record_trajectory"].get<bool>();
    }
    if (s.sim.replications < 1) bad("sim", "replications must be >= 1");
    if (s.sim.chain_length < 1) bad("sim", "chain_length must be >= 1");
    if (s.sim.workers < 1) bad("sim", "workers must be >= 1");
  }

  if (j.contains("solve")) {
    const Json& q = j["solve"];
    check_keys(q, {"N", "eps", "max_iter", "leak_budget"}, "solve");
    s.solve.N = unsigned_or(q, "N", 0, "solve");
    s.solve.eps = number_or(q, "eps", s.solve.eps, "solve");
    s.solve.max_iter = unsigned_or(q, "max_iter", s.solve.max_iter, "solve");
    s.solve.leak_budget = number_or(q, "leak_budget", s.solve.leak_budget, "solve");
  }

  if (j.contains("predict")) {
    const Json& q = j["predict"];
    check_keys(q, {"tol", "bound_fraction"}, "predict");
    s.predict.tol = number_or(q, "tol", s.predict.tol, "predict");
    s.predict.bound_fraction = number_or(q, "bound_fraction", s.predict.bound_fraction, "predict");
  }

  if (j.contains("tail")) s.tail = canonical_tail(j["tail"]);

  if (j.contains("walkmax")) {
    const Json& q = j["walkmax"];
    check_keys(q, {"xi", "shift", "sigma"}, "walkmax");
    WalkSpec w;
    if (!q.contains("xi")) bad("walkmax", "needs 'xi'");
    w.xi = canonical_dist(q["xi"]);
    w.shift = number(q, "shift", "walkmax");
    if (q.contains("sigma")) {
      const Json& sg = q["sigma"];
      const std::string kind = kind_of(sg, "walkmax.sigma");
      if (kind == "fixed") {
        check_keys(sg, {"kind", "n"}, "walkmax.sigma");
        w.sigma.kind = SigmaRule::Kind::Fixed;
        w.sigma.n = unsigned_or(sg, "n", 1, "walkmax.sigma");
      } else if (kind == "first_passage") {
        check_keys(sg, {"kind", "K", "n_max"}, "walkmax.sigma");
        w.sigma.kind = SigmaRule::Kind::FirstPassage;
        w.sigma.K = number(sg, "K", "walkmax.sigma");
        w.sigma.n_max = unsigned_or(sg, "n_max", 1000, "walkmax.sigma");
      } else {
        bad("walkmax.sigma", "kind must be 'fixed' or 'first_passage'");
      }
    }
    s.walk = w;
  }

  if (j.contains("output")) {
    check_keys(j["output"], {"dir"}, "output");
    if (j["output"].contains("dir")) {
      if (!j["output"]["dir"].is_string()) bad("output", "'dir' must be a string");
      s.out_dir = j["output"]["dir"].get<std::string>();
    }
  }
  return s;
}

Json to_json(const ExperimentSpec& s) {
  Json j;
  if (s.kind != ModelKind::None) {
    Json m = s.model;
    if (s.ratio_grid) m["grid"] = grid_json(*s.ratio_grid);
    j[to_string(s.kind)] = m;
  }
  j["grid"] = grid_json(s.grid);
  Json sim;
  if (s.sim.burn_in) {
    sim["burn_in"] = *s.sim.burn_in;
  } else {
    sim["burn_in"] = nullptr;
  }
  sim["replications"] = s.sim.replications;
  sim["chain_length"] = s.sim.chain_length;
  sim["seed"] = s.sim.seed;
  sim["workers"] = s.sim.workers;
  sim["record_trajectory"] = s.sim.record_trajectory;
  sim["hybrid_threshold"] = s.sim.hybrid_threshold;
  j["sim"] = sim;
  j["solve"] = Json{{"N", s.solve.N},
                    {"eps", s.solve.eps},
                    {"max_iter", s.solve.max_iter},
                    {"leak_budget", s.solve.leak_budget}};
  j["predict"] = Json{{"tol", s.predict.tol}, {"bound_fraction", s.predict.bound_fraction}};
  if (s.tail) j["tail"] = *s.tail;
  if (s.walk) {
    Json sigma;
    if (s.walk->sigma.kind == SigmaRule::Kind::Fixed) {
      sigma = Json{{"kind", "fixed"}, {"n", s.walk->sigma.n}};
    } else {
      sigma = Json{{"kind", "first_passage"}, {"K", s.walk->sigma.K}, {"n_max", s.walk->sigma.n_max}};
    }
    j["walkmax"] = Json{{"xi", s.walk->xi}, {"shift", s.walk->shift}, {"sigma", sigma}};
  }
  j["output"] = Json{{"dir", s.out_dir}};
  return j;
}

namespace {

std::vector<double> ratio_grid_of(const ExperimentSpec& s) {
  return s.ratio_grid ? s.ratio_grid->values() : default_ratio_grid();
}

void require_kind(const ExperimentSpec& s, ModelKind kind) {
  require(s.kind == kind, ErrorKind::InvalidInput,
          std::string("config needs a '") + to_string(kind) + "' section (found " +
              to_string(s.kind) + ")");
}

}  // namespace

FixedPointModel build_base_model(const ExperimentSpec& s) {
  require_kind(s, ModelKind::Base);
  const DiscreteDist A = parse_dist(s.model["A"]);
  const DiscreteDist B = parse_dist(s.model["B"]);
  if (!s.model.contains("G")) return build_light_model(A, B);
  const std::vector<double> grid = ratio_grid_of(s);
  return build_model(A, B, parse_tail(s.model["G"]), grid);
}

QueueModel build_queue(const ExperimentSpec& s) {
  require_kind(s, ModelKind::Queue);
  std::optional<TailFunction> ref;
  if (s.model.contains("G")) ref = parse_tail(s.model["G"]);
  return QueueModel{static_cast<unsigned>(s.model["k"].get<std::uint64_t>()),
                    s.model["p"].get<double>(), parse_dist(s.model["xi"]), ref};
}

SecondOrderModel build_second_order_model(const ExperimentSpec& s) {
  require_kind(s, ModelKind::SecondOrder);
  std::optional<TailFunction> G;
  if (s.model.contains("G")) G = parse_tail(s.model["G"]);
  const std::vector<double> grid = ratio_grid_of(s);
  return build_second_order(parse_dist(s.model["A"]), parse_dist(s.model["B1"]),
                            parse_dist(s.model["B2"]), G, grid);
}

}  // namespace branchtail
