// branchtail command-line driver.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "branchtail/config.hpp"
#include "branchtail/errors.hpp"
#include "branchtail/pipeline.hpp"

namespace bt = branchtail;

namespace {

struct Overrides {
  std::string positional;
  std::string config;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
  std::optional<std::string> grid;
  std::optional<std::uint64_t> replications;
  std::optional<std::uint64_t> burn_in;
  std::optional<double> tol;
};

void add_options(CLI::App* sub, Overrides& o) {
  sub->add_option("spec", o.positional, "JSON config file");
  sub->add_option("--config", o.config, "JSON config file")->envname("BRANCHTAIL_CONFIG");
  sub->add_option("--out-dir", o.out_dir, "output directory")->envname("BRANCHTAIL_OUT_DIR");
  sub->add_option("--seed", o.seed, "master seed")->envname("BRANCHTAIL_SEED");
  sub->add_option("--workers", o.workers, "worker threads")->envname("BRANCHTAIL_WORKERS");
  sub->add_option("--grid", o.grid, "evaluation grid min,max,count")->envname("BRANCHTAIL_GRID");
  sub->add_option("--replications", o.replications, "Monte Carlo replications")
      ->envname("BRANCHTAIL_REPLICATIONS");
  sub->add_option("--burn-in", o.burn_in, "chain steps discarded per replication")
      ->envname("BRANCHTAIL_BURN_IN");
  sub->add_option("--tol", o.tol, "tail-sum tolerance and solver eps")->envname("BRANCHTAIL_TOL");
}

bt::ExperimentSpec load(const Overrides& o) {
  const std::string path = !o.positional.empty() ? o.positional : o.config;
  bt::require(!path.empty(), bt::ErrorKind::InvalidInput, "no config given (positional or --config)");
  std::ifstream in(path);
  bt::require(static_cast<bool>(in), bt::ErrorKind::InvalidInput, "cannot read " + path);
  bt::Json j;
  try {
    j = bt::Json::parse(in);
  } catch (const bt::Json::exception& e) {
    bt::fail(bt::ErrorKind::InvalidInput, path + ": " + e.what());
  }
  bt::ExperimentSpec s = bt::parse_experiment(j);
  if (o.out_dir) s.out_dir = *o.out_dir;
  if (o.seed) s.sim.seed = *o.seed;
  if (o.workers) {
    bt::require(*o.workers >= 1, bt::ErrorKind::InvalidInput, "--workers must be >= 1");
    s.sim.workers = *o.workers;
  }
  if (o.grid) s.grid = bt::parse_grid_flag(*o.grid);
  if (o.replications) {
    bt::require(*o.replications >= 1, bt::ErrorKind::InvalidInput, "--replications must be >= 1");
    s.sim.replications = *o.replications;
  }
  if (o.burn_in) s.sim.burn_in = *o.burn_in;
  if (o.tol) {
    bt::require(*o.tol > 0.0, bt::ErrorKind::InvalidInput, "--tol must be positive");
    s.predict.tol = *o.tol;
    s.solve.eps = *o.tol;
  }
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tail asymptotics of branching fixed-point equations"};
  app.require_subcommand(1);
  Overrides o;
  const char* help[] = {"numerical tail-class membership of a tail spec",
                        "offspring mean and log-moment verdict",
                        "structural conditions behind the asymptotics",
                        "predicted tail curve and bounds",
                        "exact truncated stationary distribution",
                        "Monte Carlo tail estimate",
                        "prediction vs simulation report",
                        "random-walk maximum oracle"};
  std::size_t i = 0;
  for (const auto& name : bt::command_names()) add_options(app.add_subcommand(name, help[i++]), o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  std::string out_dir = o.out_dir.value_or("out");
  try {
    const bt::ExperimentSpec s = load(o);
    out_dir = s.out_dir;
    const bt::Json report = bt::run_command(command, s, bt::Artifacts(out_dir));
    std::cout << report.dump(2) << "\n";
    return 0;
  } catch (const bt::Error& e) {
    const bt::Json d = bt::diagnostic(e);
    std::cerr << d.dump() << "\n";
    try {
      bt::Artifacts(out_dir).write("diagnostics.json", d.dump(2) + "\n");
    } catch (const std::exception&) {
    }
    return bt::exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << bt::Json{{"error", "internal"}, {"message", e.what()}, {"exit_code", 1}}.dump()
              << "\n";
    return 1;
  }
}
