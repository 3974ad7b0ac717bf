// Command-line front end: `epso bench ...`, `epso select ...`, `epso list`.

#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "epso/benchmarks.hpp"
#include "epso/harness.hpp"

namespace {

using nlohmann::json;

struct SwarmFlags {
  std::size_t runs{}, jobs{}, population{}, iterations{}, m_min{}, m_max{};
  std::uint64_t seed{};
  double inertia_start{}, inertia_end{}, c1{}, c2{}, g_pini{}, g_pfine{}, velocity_clamp{};
  std::string algo, out, config, format = "both";
  bool trace = false;
};

// Options bound to a subcommand; only flags the user actually passed are
// copied into the config object, so file values survive unless overridden.
struct Binding {
  CLI::Option* option;
  std::function<void(json&)> apply;
};

template <typename T>
CLI::Option* bind_flag(CLI::App* app, std::vector<Binding>& out, const std::string& flag, const std::string& key,
                  T& target, const std::string& help) {
  auto* opt = app->add_option(flag, target, help);
  out.push_back({opt, [key, &target](json& j) { j[key] = target; }});
  return opt;
}

void add_common(CLI::App* app, SwarmFlags& f, std::vector<Binding>& b) {
  app->add_option("--config", f.config, "JSON config file; flags override its values");
  bind_flag(app, b, "--runs", "runs", f.runs, "independent runs (default 30)");
  bind_flag(app, b, "--algo", "algorithm", f.algo, "pso | epso | both")->check(CLI::IsMember({"pso", "epso", "both"}));
  bind_flag(app, b, "--seed", "seed", f.seed, "base seed; run i uses seed + i");
  bind_flag(app, b, "--out", "out", f.out, "output directory");
  bind_flag(app, b, "--jobs", "jobs", f.jobs, "runs executed concurrently");
  bind_flag(app, b, "--population", "population", f.population, "swarm size");
  bind_flag(app, b, "--iterations", "iterations", f.iterations, "iterations per run");
  bind_flag(app, b, "--inertia-start", "inertia_start", f.inertia_start, "inertia weight at the first iteration");
  bind_flag(app, b, "--inertia-end", "inertia_end", f.inertia_end, "inertia weight at the last iteration");
  bind_flag(app, b, "--c1", "c1", f.c1, "cognitive coefficient");
  bind_flag(app, b, "--c2", "c2", f.c2, "social coefficient");
  bind_flag(app, b, "--g-pini", "g_pini", f.g_pini, "initial share of the classic-PSO group");
  bind_flag(app, b, "--g-pfine", "g_pfine", f.g_pfine, "final share of the classic-PSO group");
  bind_flag(app, b, "--m-min", "m_min", f.m_min, "mutated genes per particle at the start");
  bind_flag(app, b, "--m-max", "m_max", f.m_max, "mutated genes per particle at the end");
  bind_flag(app, b, "--velocity-clamp", "velocity_clamp", f.velocity_clamp, "velocity limit as a fraction of the range");
  auto* trace = app->add_flag("--trace", f.trace, "also write per-run convergence traces");
  b.push_back({trace, [&f](json& j) { j["trace"] = f.trace; }});
  app->add_option("--format", f.format, "csv | json | both")->check(CLI::IsMember({"csv", "json", "both"}));
}

int run(const std::string& task, const SwarmFlags& f, const std::vector<Binding>& bindings) {
  json j = json::object();
  if (!f.config.empty()) {
    std::ifstream in(f.config);
    if (!in) throw epso::ConfigError("config", "cannot read '" + f.config + "'");
    try {
      j = json::parse(in);
    } catch (const json::parse_error& e) {
      throw epso::ConfigError("config", std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw epso::ConfigError("config", "expected a JSON object");
  }
  j["task"] = task;
  for (const auto& b : bindings)
    if (b.option->count() > 0) b.apply(j);

  const auto cfg = epso::harness::parse_config(j);
  const auto report = epso::harness::run_experiment(cfg);

  std::vector<epso::harness::ReportFormat> formats;
  if (f.format != "json") formats.push_back(epso::harness::ReportFormat::csv);
  if (f.format != "csv") formats.push_back(epso::harness::ReportFormat::json);
  for (const auto& p : epso::harness::emit_report(report, cfg.out, formats)) std::cout << p.string() << '\n';
  if (cfg.trace) {
    const auto traces = epso::harness::emit_traces(report, cfg.out);
    std::cout << traces.size() << " trace file(s) in " << cfg.out.string() << '\n';
  }
  std::cout << epso::harness::report_csv(report);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Particle swarm experiments: benchmark functions and wrapper feature selection"};
  app.require_subcommand(1);

  SwarmFlags bench_flags, select_flags;
  std::vector<Binding> bench_bindings, select_bindings;

  auto* bench = app.add_subcommand("bench", "optimize a registry function");
  add_common(bench, bench_flags, bench_bindings);
  std::string function;
  std::size_t dim = 0;
  bind_flag(bench, bench_bindings, "--function", "function", function, "registry function name (see `epso list`)");
  bind_flag(bench, bench_bindings, "--dim", "dim", dim, "problem dimension");

  auto* select = app.add_subcommand("select", "wrapper feature selection on a CSV dataset");
  add_common(select, select_flags, select_bindings);
  std::string data, label_col, protocol;
  double threshold = 0.5;
  std::size_t folds = 10, k = 1;
  bool no_normalize = false;
  bind_flag(select, select_bindings, "--data", "data", data, "CSV file");
  bind_flag(select, select_bindings, "--label-col", "label_col", label_col, "first | last | <column name>");
  bind_flag(select, select_bindings, "--threshold", "threshold", threshold, "selection threshold in [-1, 1)");
  bind_flag(select, select_bindings, "--folds", "folds", folds, "stratified folds");
  bind_flag(select, select_bindings, "--k", "k_neighbors", k, "neighbors in the classifier");
  bind_flag(select, select_bindings, "--protocol", "protocol", protocol, "kfold | loo")
      ->check(CLI::IsMember({"kfold", "loo"}));
  auto* nn = select->add_flag("--no-normalize", no_normalize, "skip min-max scaling");
  select_bindings.push_back({nn, [&](json& j) { j["normalize"] = !no_normalize; }});

  auto* list = app.add_subcommand("list", "print registry function names");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*list) {
      for (const auto& name : epso::bench::benchmark_names()) std::cout << name << '\n';
      return 0;
    }
    if (*bench) return run("benchmark", bench_flags, bench_bindings);
    return run("feature-selection", select_flags, select_bindings);
  } catch (const std::exception& e) {
    std::cerr << "epso: " << e.what() << '\n';
    return 1;
  }
}
