#include "branchtail/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "branchtail/asymptotics.hpp"
#include "branchtail/classify.hpp"
#include "branchtail/exact.hpp"
#include "branchtail/montecarlo.hpp"

namespace branchtail {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Json jnum(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

class Csv {
 public:
  explicit Csv(std::vector<std::string> header) : header_(std::move(header)) {}

  void comment(const std::string& line) { comments_.push_back(line); }
  void row(std::initializer_list<double> values) { rows_.emplace_back(values); }

  std::string str() const {
    std::string s;
    for (const auto& c : comments_) s += "# " + c + "\n";
    for (std::size_t i = 0; i < header_.size(); ++i) s += (i ? "," : "") + header_[i];
    s += "\n";
    for (const auto& r : rows_) {
      for (std::size_t i = 0; i < r.size(); ++i) s += (i ? "," : "") + format_number(r[i]);
      s += "\n";
    }
    return s;
  }

 private:
  std::vector<std::string> header_;
  std::vector<std::string> comments_;
  std::vector<std::vector<double>> rows_;
};

void write_json(const Artifacts& out, const std::string& name, const Json& j) {
  out.write(name, j.dump(2) + "\n");
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::vector<double> ratio_grid(const ExperimentSpec& s) {
  return s.ratio_grid ? s.ratio_grid->values() : default_ratio_grid();
}

FixedPointModel model_for(const ExperimentSpec& s) {
  if (s.kind == ModelKind::Base) return build_base_model(s);
  if (s.kind == ModelKind::Queue) {
    const std::vector<double> grid = ratio_grid(s);
    return queue_to_model(build_queue(s), grid);
  }
  fail(ErrorKind::InvalidInput, std::string("this command needs a 'model' or 'queue' section (found ") +
                                    to_string(s.kind) + ")");
}

Json model_json(const FixedPointModel& m) {
  Json j;
  j["A"] = m.A.describe();
  j["B"] = m.B.describe();
  j["a"] = jnum(m.a);
  j["b"] = jnum(m.b);
  if (m.regime) {
    const TailRegime& r = *m.regime;
    j["G"] = r.G.describe();
    j["c1"] = jnum(r.c1);
    j["c2"] = jnum(r.c2);
    j["c1_analytic"] = r.c1_estimate.analytic;
    j["c2_analytic"] = r.c2_estimate.analytic;
    j["c1_converged"] = r.c1_estimate.converged;
    j["c2_converged"] = r.c2_estimate.converged;
    j["case"] = to_string(r.case_label);
    j["D"] = jnum(r.D);
  }
  j["warnings"] = m.warnings;
  return j;
}

Json second_order_json(const SecondOrderModel& m2) {
  Json j;
  j["A"] = m2.A.describe();
  j["B1"] = m2.B1.describe();
  j["B2"] = m2.B2.describe();
  j["a"] = jnum(m2.a);
  j["b1"] = jnum(m2.b1);
  j["b2"] = jnum(m2.b2);
  j["delta"] = jnum(m2.delta);
  j["m"] = jnum(m2.m);
  if (m2.G) {
    j["G"] = m2.G->describe();
    j["c1"] = jnum(m2.c1);
    j["c2"] = jnum(m2.c2);
    j["c3"] = jnum(m2.c3);
    j["coefficient"] = jnum(second_order_coefficient(m2));
  }
  j["warnings"] = m2.warnings;
  return j;
}

Json prediction_json(const PredictedTail& p) {
  Json j;
  j["justification"] = to_string(p.justification);
  j["D"] = jnum(p.D);
  j["c"] = jnum(p.c);
  j["d1"] = jnum(p.d1);
  j["d2"] = jnum(p.d2);
  j["rv_coefficient"] = p.rv_coefficient ? jnum(*p.rv_coefficient) : Json(nullptr);
  return j;
}

void write_prediction(const Artifacts& out, const PredictedTail& p) {
  Csv csv({"x", "curve", "lower_bound", "upper_bound", "G_tail", "remainder_bound"});
  csv.comment("justification=" + std::string(to_string(p.justification)));
  csv.comment("D=" + format_number(p.D) + " c=" + format_number(p.c) + " d1=" +
              format_number(p.d1) + " d2=" + format_number(p.d2));
  if (p.rv_coefficient) csv.comment("rv_coefficient=" + format_number(*p.rv_coefficient));
  for (const auto& pt : p.points) {
    csv.row({pt.x, pt.curve, pt.lower_bound, pt.upper_bound, pt.G_tail, pt.remainder_bound});
  }
  out.write("prediction.csv", csv.str());
}

void write_tail_estimate(const Artifacts& out, const TailEstimate& est,
                         const std::vector<double>& predicted) {
  Csv csv({"x", "p_hat", "ci_low", "ci_high", "predicted", "ratio"});
  for (std::size_t i = 0; i < est.grid.size(); ++i) {
    const double pr = i < predicted.size() ? predicted[i] : kNaN;
    csv.row({est.grid[i], est.p_hat[i], est.ci_low[i], est.ci_high[i], pr,
             pr > 0.0 ? est.p_hat[i] / pr : kNaN});
  }
  out.write("tail_estimate.csv", csv.str());
}

Json sim_json(const SimConfig& cfg, std::uint64_t burn_in) {
  return Json{{"seed", cfg.seed},
              {"replications", cfg.replications},
              {"chain_length", cfg.chain_length},
              {"burn_in", burn_in},
              {"workers", cfg.workers},
              {"record_trajectory", cfg.record_trajectory},
              {"hybrid_threshold", cfg.hybrid_threshold}};
}

std::vector<std::string> sim_warnings(const SimConfig& cfg, const std::vector<std::string>& extra) {
  std::vector<std::string> w = extra;
  if (cfg.record_trajectory) {
    w.emplace_back("trajectory mode: samples are autocorrelated and intervals are too narrow");
  }
  if (cfg.hybrid_threshold > 0) {
    w.emplace_back("hybrid offspring sums are biased; diagnostics only");
  }
  return w;
}

PredictConfig predict_config(const ExperimentSpec& s) {
  PredictConfig cfg;
  cfg.tol = s.predict.tol;
  cfg.bound_fraction = s.predict.bound_fraction;
  return cfg;
}

std::optional<PredictedTail> try_predict(const FixedPointModel& m, std::span<const double> grid,
                                         const PredictConfig& cfg,
                                         std::vector<std::string>& warnings) {
  if (!m.regime) return std::nullopt;
  try {
    return predict_tail(m, grid, cfg);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::UnsupportedRegime) throw;
    warnings.emplace_back(std::string("no prediction: ") + e.what());
    return std::nullopt;
  }
}

std::vector<double> curve_of(const std::optional<PredictedTail>& p) {
  std::vector<double> v;
  if (p) {
    for (const auto& pt : p->points) v.push_back(pt.curve);
  }
  return v;
}

std::size_t auto_truncation(const FixedPointModel& m, const SolveSpec& spec) {
  if (spec.N > 0) return spec.N;
  const double mean = stationary_mean(m);
  if (!std::isfinite(mean)) return 20000;
  return static_cast<std::size_t>(std::clamp(std::ceil(64.0 * (mean + 1.0)), 64.0, 20000.0));
}

StationarySolution solve_for(const FixedPointModel& m, const SolveSpec& spec) {
  return solve_stationary(m, auto_truncation(m, spec), spec.eps, spec.max_iter, spec.leak_budget);
}

void write_pmf(const Artifacts& out, const StationarySolution& sol) {
  Csv csv({"n", "p", "tail"});
  const std::vector<double> tails = sol.pmf.tails();
  for (std::size_t n = 0; n <= sol.pmf.N; ++n) {
    csv.row({static_cast<double>(n), sol.pmf.values[n], tails[n]});
  }
  out.write("pmf.csv", csv.str());
}

Json solve_json(const FixedPointModel& m, const StationarySolution& sol) {
  return Json{{"N", sol.pmf.N},
              {"mean", jnum(sol.pmf.mean())},
              {"stationary_mean", jnum(stationary_mean(m))},
              {"iterations", sol.iterations},
              {"last_change", jnum(sol.last_change)},
              {"leaked", jnum(sol.pmf.leaked)}};
}

std::vector<double> sorted_union(std::vector<double> a, const std::vector<double>& b) {
  a.insert(a.end(), b.begin(), b.end());
  std::sort(a.begin(), a.end());
  a.erase(std::unique(a.begin(), a.end()), a.end());
  return a;
}

Json stability_json(double b, Finiteness log_moment, const std::string& what) {
  StabilityVerdict v;
  if (b > 1.0) {
    v = StabilityVerdict::UnstableBGe1;
  } else if (b == 1.0) {
    v = StabilityVerdict::CriticalExcluded;
  } else if (log_moment == Finiteness::Finite) {
    v = StabilityVerdict::Stable;
  } else if (log_moment == Finiteness::Infinite) {
    v = StabilityVerdict::LogMomentInfinite;
  } else {
    v = StabilityVerdict::LogMomentUnknown;
  }
  return Json{{"quantity", what},
              {"b_value", jnum(b)},
              {"b_ok", b < 1.0},
              {"log_moment", to_string(log_moment)},
              {"log_moment_finite", log_moment == Finiteness::Finite},
              {"near_critical", b > 0.95},
              {"verdict", to_string(v)}};
}

}  // namespace

void Artifacts::write(const std::string& name, const std::string& content) const {
  std::filesystem::create_directories(dir_);
  const auto path = dir_ / name;
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(f), ErrorKind::InvalidInput, "cannot write " + path.string());
  f << content;
  require(static_cast<bool>(f), ErrorKind::InvalidInput, "failed writing " + path.string());
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

int exit_code_for(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::NonConvergentSum:
    case ErrorKind::NonConvergence:
    case ErrorKind::TruncationOverflow:
    case ErrorKind::StateOverflow:
      return 3;
    case ErrorKind::UnsupportedRegime:
      return 4;
    default:
      return 2;
  }
}

Json diagnostic(const Error& e) {
  return Json{{"error", to_string(e.kind())},
              {"message", e.what()},
              {"exit_code", exit_code_for(e.kind())}};
}

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"classify", "stability", "conditions", "predict",
                                              "solve",    "simulate",  "verify",     "walkmax"};
  return names;
}

Json run_classify(const ExperimentSpec& s, const Artifacts& out) {
  std::optional<TailFunction> t;
  if (s.tail) {
    t = parse_tail(*s.tail);
  } else if (s.model.is_object() && s.model.contains("G")) {
    t = parse_tail(s.model["G"]);
  }
  require(t.has_value(), ErrorKind::InvalidInput, "classify needs a 'tail' section");
  const std::vector<double> grid = s.grid.values();
  const ClassReport rep = classify(*t, grid);
  Json j;
  j["tail"] = t->describe();
  j["grid"] = Json{{"min", s.grid.min}, {"max", s.grid.max}, {"count", s.grid.count}};
  Json env = Json::array();
  for (const auto& e : rep.envelopes) {
    env.push_back(Json{{"y", e.y}, {"liminf", jnum(e.limits.lower)}, {"limsup", jnum(e.limits.upper)}});
  }
  j["envelopes"] = env;
  j["long_tail"] = Json{{"liminf", jnum(rep.long_tail_limits.lower)},
                        {"limsup", jnum(rep.long_tail_limits.upper)}};
  j["irv_liminf"] = jnum(rep.irv_lower);
  j["alpha_plus"] = jnum(rep.alpha_plus);
  j["alpha_minus"] = jnum(rep.alpha_minus);
  j["karamata_upper_index"] = jnum(rep.karamata);
  j["classes"] = Json{{"L", rep.long_tailed}, {"D", rep.dominated}, {"IRV", rep.irv},
                      {"ERV", rep.erv},       {"RV", rep.rv}};
  j["note"] = "finite-grid verdicts: consistent with membership, not proof";
  write_json(out, "classify.json", j);
  return j;
}

Json run_stability(const ExperimentSpec& s, const Artifacts& out) {
  Json j;
  j["kind"] = to_string(s.kind);
  switch (s.kind) {
    case ModelKind::Base: {
      const StabilityReport st =
          check_stability(parse_dist(s.model["A"]), parse_dist(s.model["B"]));
      j["report"] = stability_json(st.b_value, st.log_moment, "E(B)");
      break;
    }
    case ModelKind::Queue: {
      const QueueModel q = build_queue(s);
      const StabilityReport st =
          check_stability(convolution_power(q.xi, q.k), convolve(make_bernoulli(q.p), q.xi));
      j["report"] = stability_json(st.b_value, st.log_moment, "E(xi) + p");
      break;
    }
    case ModelKind::SecondOrder: {
      const DiscreteDist A = parse_dist(s.model["A"]);
      const double b = parse_dist(s.model["B1"]).mean() + parse_dist(s.model["B2"]).mean();
      j["report"] = stability_json(b, A.log_moment(), "E(B1) + E(B2)");
      break;
    }
    case ModelKind::Continuous: {
      const RealSampler a = parse_real(s.model["A"]);
      const RealSampler bs = parse_real(s.model["B"]);
      const double b = s.model["lambda"].get<double>() * bs.mean;
      j["report"] = stability_json(b, std::isfinite(a.mean) ? Finiteness::Finite : Finiteness::Unknown,
                                   "lambda E(B)");
      break;
    }
    case ModelKind::None:
      fail(ErrorKind::InvalidInput, "stability needs a model section");
  }
  write_json(out, "stability.json", j);
  const Json& r = j["report"];
  if (r["verdict"] != "stable") {
    std::ostringstream os;
    os << "stability check failed: " << r["quantity"].get<std::string>() << " = "
       << r["b_value"].dump() << ", verdict " << r["verdict"].get<std::string>();
    if (r["verdict"] == "unstable_b_ge_1") os << " (the fixed-point equation has no solution)";
    fail(ErrorKind::Stability, os.str());
  }
  return j;
}

Json run_conditions(const ExperimentSpec& s, const Artifacts& out) {
  const std::vector<double> grid = ratio_grid(s);
  static const double deltas[] = {0.04, 0.02, 0.01};
  Json j;
  auto g22_json = [](const G22Report& g) {
    Json d = Json::array();
    for (std::size_t i = 0; i < g.deltas.size(); ++i) {
      d.push_back(Json{{"delta", g.deltas[i]},
                       {"upper", jnum(g.upper_by_delta[i])},
                       {"lower", jnum(g.lower_by_delta[i])}});
    }
    return Json{{"by_delta", d},
                {"upper_limit", jnum(g.upper_limit)},
                {"lower_limit", jnum(g.lower_limit)},
                {"numeric_pass", g.numeric_pass},
                {"analytic", g.analytic},
                {"pass", g.pass}};
  };
  if (s.kind == ModelKind::SecondOrder) {
    const SecondOrderModel m2 = build_second_order_model(s);
    require(m2.G.has_value(), ErrorKind::NoReferenceTail, "conditions need a reference tail 'G'");
    j["model"] = second_order_json(m2);
    j["g22"] = g22_json(check_G22(*m2.G, m2.b1 + m2.delta, deltas, grid));
    const KaramataReport k = check_karamata(*m2.G, grid);
    j["karamata"] = Json{{"c_plus", jnum(k.c_plus)}, {"pass", k.pass}};
  } else {
    const FixedPointModel m = model_for(s);
    const ConditionReport rep = check_conditions(m, grid);
    j["model"] = model_json(m);
    j["g22"] = g22_json(rep.g22);
    j["karamata"] = Json{{"c_plus", jnum(rep.karamata.c_plus)}, {"pass", rep.karamata.pass}};
    const Thm22Report& t = rep.thm22;
    j["thm22"] = Json{{"applicable", t.applicable},
                      {"I", Json{{"liminf_xG", jnum(t.liminf_xG)},
                                 {"C_infinite", t.C_infinite},
                                 {"var_B", jnum(t.var_B)},
                                 {"var_finite", t.var_finite},
                                 {"pass", t.pass_I}}},
                      {"II", Json{{"HI_window_max", t.HI_window_max},
                                  {"HI_ratio_limsup", jnum(t.HI_ratio_limsup)},
                                  {"HI_selfconv_ratio", jnum(t.HI_selfconv_ratio)},
                                  {"HI_subexponential", t.HI_subexponential},
                                  {"pass", t.pass_II}}}};
  }
  j["note"] = "finite-grid checks: consistent with the condition, not proof";
  write_json(out, "conditions.json", j);
  return j;
}

Json run_predict(const ExperimentSpec& s, const Artifacts& out) {
  const std::vector<double> grid = s.grid.values();
  const PredictConfig cfg = predict_config(s);
  Json j;
  PredictedTail p;
  if (s.kind == ModelKind::SecondOrder) {
    const SecondOrderModel m2 = build_second_order_model(s);
    p = predict_second_order(m2, grid, cfg);
    j["model"] = second_order_json(m2);
  } else {
    const FixedPointModel m = model_for(s);
    p = predict_tail(m, grid, cfg);
    j["model"] = model_json(m);
    j["window_ratio"] = jnum(window_ratio_prediction(m));
  }
  j["prediction"] = prediction_json(p);
  write_prediction(out, p);
  write_json(out, "prediction.json", j);
  return j;
}

Json run_solve(const ExperimentSpec& s, const Artifacts& out) {
  const FixedPointModel m = model_for(s);
  const StationarySolution sol = solve_for(m, s.solve);
  write_pmf(out, sol);
  Json j = Json{{"model", model_json(m)}, {"solution", solve_json(m, sol)}};
  write_json(out, "solve_summary.json", j);
  return j;
}

Json run_simulate(const ExperimentSpec& s, const Artifacts& out) {
  const std::vector<double> grid = s.grid.values();
  const Stopwatch clock;
  Json j;
  j["kind"] = to_string(s.kind);
  std::vector<std::string> warnings;
  TailEstimate est;
  std::vector<double> predicted;
  std::uint64_t burn = 0;
  switch (s.kind) {
    case ModelKind::Base: {
      const FixedPointModel m = model_for(s);
      burn = s.sim.burn_in.value_or(default_burn_in(m.b));
      const StreamSummary ss = stream_chain(m, s.sim, grid);
      est = ss.tail(grid);
      predicted = curve_of(try_predict(m, grid, predict_config(s), warnings));
      j["model"] = model_json(m);
      j["mean"] = jnum(ss.mean());
      j["std_error"] = jnum(ss.std_error());
      j["expected_mean"] = jnum(stationary_mean(m));
      break;
    }
    case ModelKind::Queue: {
      const QueueModel q = build_queue(s);
      const FixedPointModel m = model_for(s);
      burn = s.sim.burn_in.value_or(default_burn_in(m.b));
      const auto reduced = simulate_queue(q, s.sim, QueueMode::Reduced);
      const auto direct = simulate_queue(q, s.sim, QueueMode::Direct);
      est = estimate_tail(reduced, grid);
      // P(Y > y) = P(X > y - k).
      std::vector<double> shifted;
      for (double y : grid) shifted.push_back(y - q.k);
      if (shifted.front() > 0.0) {
        predicted = curve_of(try_predict(m, shifted, predict_config(s), warnings));
      }
      double mean_r = 0.0, mean_d = 0.0;
      for (auto v : reduced) mean_r += static_cast<double>(v);
      for (auto v : direct) mean_d += static_cast<double>(v);
      j["model"] = model_json(m);
      j["mean_reduced"] = jnum(mean_r / static_cast<double>(reduced.size()));
      j["mean_direct"] = jnum(mean_d / static_cast<double>(direct.size()));
      j["expected_mean"] = jnum(q.k + stationary_mean(m));
      j["tv_reduced_vs_direct"] = jnum(total_variation(empirical_pmf(reduced), empirical_pmf(direct)));
      break;
    }
    case ModelKind::SecondOrder: {
      const SecondOrderModel m2 = build_second_order_model(s);
      burn = s.sim.burn_in.value_or(default_second_order_burn_in(m2));
      const StreamSummary ss = stream_second_order(m2, s.sim, grid);
      est = ss.tail(grid);
      if (m2.G) {
        for (const auto& pt : predict_second_order(m2, grid, predict_config(s)).points) {
          predicted.push_back(pt.curve);
        }
      }
      j["model"] = second_order_json(m2);
      j["mean_combination"] = jnum(ss.mean());
      j["std_error"] = jnum(ss.std_error());
      j["expected_mean_combination"] = jnum(m2.m * (1.0 + m2.delta));
      warnings.insert(warnings.end(), m2.warnings.begin(), m2.warnings.end());
      break;
    }
    case ModelKind::Continuous: {
      const RealSampler a = parse_real(s.model["A"]);
      const RealSampler b = parse_real(s.model["B"]);
      const double lambda = s.model["lambda"].get<double>();
      burn = s.sim.burn_in.value_or(default_burn_in(lambda * b.mean));
      const std::vector<double> x = simulate_continuous(a, lambda, b, s.sim);
      est = estimate_tail(x, grid);
      double sum = 0.0, sq = 0.0;
      for (double v : x) {
        sum += v;
        sq += v * v;
      }
      const double n = static_cast<double>(x.size());
      const double mean = sum / n;
      j["mean"] = jnum(mean);
      j["std_error"] = jnum(std::sqrt(std::max(0.0, sq / n - mean * mean) / n));
      j["expected_mean"] = jnum(a.mean / (1.0 - lambda * b.mean));
      break;
    }
    case ModelKind::None:
      fail(ErrorKind::InvalidInput, "simulate needs a model section");
  }
  write_tail_estimate(out, est, predicted);
  warnings.insert(warnings.end(), est.warnings.begin(), est.warnings.end());
  j["samples"] = est.n_effective;
  j["sim"] = sim_json(s.sim, burn);
  j["warnings"] = sim_warnings(s.sim, warnings);
  j["runtime_seconds"] = clock.seconds();
  write_json(out, "simulate_summary.json", j);
  return j;
}

Json run_verify(const ExperimentSpec& s, const Artifacts& out) {
  const std::vector<double> grid = s.grid.values();
  const Stopwatch clock;
  Json j;
  j["kind"] = to_string(s.kind);
  if (s.kind == ModelKind::SecondOrder) {
    const SecondOrderModel m2 = build_second_order_model(s);
    require(m2.G.has_value(), ErrorKind::NoReferenceTail, "verify needs a reference tail 'G'");
    const PredictedTail p = predict_second_order(m2, grid, predict_config(s));
    const StreamSummary ss = stream_second_order(m2, s.sim, grid);
    const TailEstimate est = ss.tail(grid);
    write_prediction(out, p);
    write_tail_estimate(out, est, curve_of(p));
    Csv csv({"x", "p_hat", "ci_low", "ci_high", "predicted", "ratio"});
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double pr = p.points[i].curve;
      csv.row({grid[i], est.p_hat[i], est.ci_low[i], est.ci_high[i], pr, est.p_hat[i] / pr});
    }
    out.write("verify.csv", csv.str());
    j["model"] = second_order_json(m2);
    j["prediction"] = prediction_json(p);
    j["samples"] = ss.n;
    j["sim"] = sim_json(s.sim, s.sim.burn_in.value_or(default_second_order_burn_in(m2)));
  } else if (s.kind == ModelKind::Base || s.kind == ModelKind::Queue) {
    const FixedPointModel m = model_for(s);
    j["model"] = model_json(m);
    j["sim"] = sim_json(s.sim, s.sim.burn_in.value_or(default_burn_in(m.b)));
    if (m.regime) {
      const PredictedTail p = predict_tail(m, grid, predict_config(s));
      std::vector<double> upper;
      for (double x : grid) upper.push_back(x / m.b);
      const StreamSummary ss = stream_chain(m, s.sim, sorted_union(grid, upper));
      const TailEstimate est = ss.tail(grid);
      write_prediction(out, p);
      write_tail_estimate(out, est, curve_of(p));
      Csv csv({"x", "p_hat", "ci_low", "ci_high", "predicted", "ratio", "lower_bound",
               "upper_bound", "window_hat", "window_ratio"});
      for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto& pt = p.points[i];
        const double window =
            static_cast<double>(ss.count_above(grid[i]) - ss.count_above(upper[i])) /
            static_cast<double>(ss.n);
        csv.row({grid[i], est.p_hat[i], est.ci_low[i], est.ci_high[i], pt.curve,
                 est.p_hat[i] / pt.curve, pt.lower_bound, pt.upper_bound, window,
                 window / pt.G_tail});
      }
      out.write("verify.csv", csv.str());
      j["prediction"] = prediction_json(p);
      j["window_ratio_prediction"] = jnum(window_ratio_prediction(m));
      j["samples"] = ss.n;
      j["mean"] = jnum(ss.mean());
    } else {
      // Light-tailed model: compare simulation with the exact solver.
      const StationarySolution sol = solve_for(m, s.solve);
      const std::vector<std::uint64_t> x = simulate_chain(m, s.sim);
      const std::vector<double> emp = empirical_pmf(x);
      write_pmf(out, sol);
      Csv csv({"n", "exact_p", "empirical_p"});
      const std::size_t top = std::max(sol.pmf.N, emp.size() - 1);
      for (std::size_t n = 0; n <= top; ++n) {
        csv.row({static_cast<double>(n), n <= sol.pmf.N ? sol.pmf.values[n] : 0.0,
                 n < emp.size() ? emp[n] : 0.0});
      }
      out.write("verify.csv", csv.str());
      double mean = 0.0;
      for (auto v : x) mean += static_cast<double>(v);
      mean /= static_cast<double>(x.size());
      j["solution"] = solve_json(m, sol);
      j["samples"] = x.size();
      j["mean"] = jnum(mean);
      j["tv_distance"] = jnum(total_variation(emp, sol.pmf.values));
    }
  } else {
    fail(ErrorKind::InvalidInput, "verify needs a model, queue or second_order section");
  }
  j["runtime_seconds"] = clock.seconds();
  write_json(out, "verify.json", j);
  return j;
}

Json run_walkmax(const ExperimentSpec& s, const Artifacts& out) {
  require(s.walk.has_value(), ErrorKind::InvalidInput, "walkmax needs a 'walkmax' section");
  const DiscreteDist xi = parse_dist(s.walk->xi);
  const std::vector<double> grid = s.grid.values();
  const Stopwatch clock;
  const WalkMaxResult r = random_walk_max_oracle(xi, s.walk->shift, s.walk->sigma, grid, s.sim);
  Csv csv({"x", "p_hat", "G_tail", "ratio", "ratio_ci_low", "ratio_ci_high"});
  for (std::size_t i = 0; i < grid.size(); ++i) {
    csv.row({grid[i], r.p_hat[i], r.G_tail[i], r.ratio[i], r.ratio_ci_low[i], r.ratio_ci_high[i]});
  }
  out.write("walkmax.csv", csv.str());
  Json j{{"xi", xi.describe()},
         {"shift", s.walk->shift},
         {"sigma", s.walk->sigma.kind == SigmaRule::Kind::Fixed ? "fixed" : "first_passage"},
         {"samples", r.n},
         {"mean_sigma", jnum(r.mean_sigma)},
         {"truncated", r.truncated},
         {"far_ratio", jnum(r.far_ratio)},
         {"far_ratio_over_mean_sigma", jnum(r.far_ratio_over_mean_sigma)},
         {"runtime_seconds", clock.seconds()}};
  write_json(out, "walkmax.json", j);
  return j;
}

Json run_command(const std::string& command, const ExperimentSpec& s, const Artifacts& out) {
  write_json(out, "config.resolved.json", to_json(s));
  if (command == "classify") return run_classify(s, out);
  if (command == "stability") return run_stability(s, out);
  if (command == "conditions") return run_conditions(s, out);
  if (command == "predict") return run_predict(s, out);
  if (command == "solve") return run_solve(s, out);
  if (command == "simulate") return run_simulate(s, out);
  if (command == "verify") return run_verify(s, out);
  if (command == "walkmax") return run_walkmax(s, out);
  fail(ErrorKind::InvalidInput, "unknown command '" + command + "'");
}

}  // namespace branchtail
