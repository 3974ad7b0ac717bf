#include "epso/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <mutex>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

#include "epso/benchmarks.hpp"
#include "epso/dataset.hpp"

namespace epso::harness {

using nlohmann::json;

std::size_t default_m_max(std::size_t dimension) {
  return std::max<std::size_t>(1, dimension / 2);
}

EpsoConfig ExperimentConfig::swarm_config(std::size_t dimension, std::size_t run) const {
  EpsoConfig c;
  c.population_size = population;
  c.max_iterations = iterations;
  c.dimension = dimension;
  c.bounds = Bounds<double>::uniform(static_cast<Index>(dimension), -1.0, 1.0);
  c.inertia_start = inertia_start;
  c.inertia_end = inertia_end;
  c.c1 = c1;
  c.c2 = c2;
  c.g_pini = g_pini;
  c.g_pfine = g_pfine;
  c.m_min = m_min;
  c.m_max = m_max.value_or(std::max(m_min, default_m_max(dimension)));
  c.velocity_clamp_fraction = velocity_clamp;
  c.seed = seed_for_run(run);
  return c;
}

namespace {

std::string algorithms_name(const std::vector<Algorithm>& algorithms) {
  if (algorithms.size() == 2) return "both";
  return std::string(to_string(algorithms.front()));
}

}  // namespace

json ExperimentConfig::resolved() const {
  json j;
  j["task"] = task == Task::benchmark ? "benchmark" : "feature-selection";
  j["algorithm"] = algorithms_name(algorithms);
  j["runs"] = runs;
  j["seed"] = base_seed;
  j["out"] = out.string();
  j["trace"] = trace;
  j["jobs"] = jobs;
  j["population"] = population;
  j["iterations"] = iterations;
  j["inertia_start"] = inertia_start;
  j["inertia_end"] = inertia_end;
  j["c1"] = c1;
  j["c2"] = c2;
  j["g_pini"] = g_pini;
  j["g_pfine"] = g_pfine;
  j["m_min"] = m_min;
  j["m_max"] = m_max ? json(*m_max) : json(nullptr);
  j["velocity_clamp"] = velocity_clamp;
  if (task == Task::benchmark) {
    j["function"] = function;
    j["dim"] = dim;
  } else {
    j["data"] = data.string();
    j["label_col"] = label_col;
    j["normalize"] = normalize;
    j["threshold"] = wrapper.threshold;
    j["k_neighbors"] = wrapper.k_neighbors;
    j["protocol"] = wrapper.protocol == fs::Protocol::kfold ? "kfold" : "loo";
    j["folds"] = wrapper.folds;
  }
  return j;
}

// ---------------------------------------------------------------------------
// Configuration parsing

namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "task",     "algorithm",   "runs",        "seed",      "out",      "trace",       "jobs",
      "population", "iterations", "inertia_start", "inertia_end", "c1",    "c2",          "g_pini",
      "g_pfine",  "m_min",       "m_max",       "velocity_clamp", "function", "dim",      "data",
      "label_col", "normalize",  "threshold",   "k_neighbors", "protocol", "folds"};
  return keys;
}

template <typename T>
T get_as(const json& j, const std::string& key, const char* expected) {
  const json& v = j.at(key);
  try {
    if constexpr (std::is_same_v<T, std::size_t> || std::is_same_v<T, std::uint64_t>) {
      if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0))
        throw ConfigError(key, std::string("expected ") + expected);
    } else if constexpr (std::is_same_v<T, double>) {
      if (!v.is_number()) throw ConfigError(key, std::string("expected ") + expected);
    } else if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ConfigError(key, std::string("expected ") + expected);
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw ConfigError(key, std::string("expected ") + expected);
    }
    return v.get<T>();
  } catch (const json::exception&) {
    throw ConfigError(key, std::string("expected ") + expected);
  }
}

template <typename T>
void read(const json& j, const std::string& key, T& field, const char* expected) {
  if (j.contains(key)) field = get_as<T>(j, key, expected);
}

}  // namespace

ExperimentConfig parse_config(const json& j) {
  if (!j.is_object()) throw ConfigError("config", "expected a JSON object");
  for (const auto& [key, value] : j.items())
    if (!known_keys().contains(key)) throw ConfigError(key, "unknown key");

  ExperimentConfig c;
  if (!j.contains("task")) throw ConfigError("task", "missing required key");
  const auto task = get_as<std::string>(j, "task", "\"benchmark\" or \"feature-selection\"");
  if (task == "benchmark" || task == "bench")
    c.task = Task::benchmark;
  else if (task == "feature-selection" || task == "select")
    c.task = Task::feature_selection;
  else
    throw ConfigError("task", "expected \"benchmark\" or \"feature-selection\"");

  if (c.task == Task::feature_selection) {
    c.population = 20;
    c.iterations = 100;
  }

  if (j.contains("algorithm")) {
    const auto a = get_as<std::string>(j, "algorithm", "\"pso\", \"epso\" or \"both\"");
    if (a == "both")
      c.algorithms = {Algorithm::pso, Algorithm::epso};
    else if (a == "pso" || a == "epso")
      c.algorithms = {parse_algorithm(a)};
    else
      throw ConfigError("algorithm", "expected \"pso\", \"epso\" or \"both\"");
  }
  read(j, "runs", c.runs, "a non-negative integer");
  read(j, "seed", c.base_seed, "a non-negative integer");
  if (j.contains("out")) c.out = get_as<std::string>(j, "out", "a path string");
  read(j, "trace", c.trace, "a boolean");
  read(j, "jobs", c.jobs, "a non-negative integer");
  read(j, "population", c.population, "a non-negative integer");
  read(j, "iterations", c.iterations, "a non-negative integer");
  read(j, "inertia_start", c.inertia_start, "a number");
  read(j, "inertia_end", c.inertia_end, "a number");
  read(j, "c1", c.c1, "a number");
  read(j, "c2", c.c2, "a number");
  read(j, "g_pini", c.g_pini, "a number");
  read(j, "g_pfine", c.g_pfine, "a number");
  read(j, "m_min", c.m_min, "a non-negative integer");
  if (j.contains("m_max") && !j.at("m_max").is_null()) c.m_max = get_as<std::size_t>(j, "m_max", "a non-negative integer");
  read(j, "velocity_clamp", c.velocity_clamp, "a number");

  if (c.task == Task::benchmark) {
    for (const char* key : {"data", "label_col", "normalize", "threshold", "k_neighbors", "protocol", "folds"})
      if (j.contains(key)) throw ConfigError(key, "not applicable to the benchmark task");
    if (!j.contains("function")) throw ConfigError("function", "missing required key");
    if (!j.contains("dim")) throw ConfigError("dim", "missing required key");
    read(j, "function", c.function, "a function name");
    read(j, "dim", c.dim, "a positive integer");
    if (c.dim == 0) throw ConfigError("dim", "must be positive");
    const auto names = bench::benchmark_names();
    if (std::find(names.begin(), names.end(), c.function) == names.end())
      throw ConfigError("function", "unknown function '" + c.function + "'");
  } else {
    for (const char* key : {"function", "dim"})
      if (j.contains(key)) throw ConfigError(key, "not applicable to the feature-selection task");
    if (!j.contains("data")) throw ConfigError("data", "missing required key");
    c.data = get_as<std::string>(j, "data", "a path string");
    read(j, "label_col", c.label_col, "\"first\", \"last\" or a column name");
    read(j, "normalize", c.normalize, "a boolean");
    read(j, "threshold", c.wrapper.threshold, "a number");
    read(j, "k_neighbors", c.wrapper.k_neighbors, "a positive integer");
    read(j, "folds", c.wrapper.folds, "an integer >= 2");
    if (j.contains("protocol")) {
      const auto p = get_as<std::string>(j, "protocol", "\"kfold\" or \"loo\"");
      if (p == "kfold")
        c.wrapper.protocol = fs::Protocol::kfold;
      else if (p == "loo")
        c.wrapper.protocol = fs::Protocol::loo;
      else
        throw ConfigError("protocol", "expected \"kfold\" or \"loo\"");
    }
    c.wrapper.validate();
  }

  if (c.runs < 1) throw ConfigError("runs", "must be at least 1");
  if (c.jobs < 1) throw ConfigError("jobs", "must be at least 1");
  // Field-level checks on the swarm parameters; dimension-dependent ones run again per problem.
  const std::size_t probe_dim =
      c.task == Task::benchmark ? c.dim : std::max<std::size_t>({c.m_min, c.m_max.value_or(1), 1});
  c.swarm_config(probe_dim, 0).validate();
  return c;
}

ExperimentConfig parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot read '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config", std::string("invalid JSON: ") + e.what());
  }
  return parse_config(j);
}

// ---------------------------------------------------------------------------
// Statistics

SummaryStats summarize(std::span<const double> values) {
  require(!values.empty(), "summarize: empty input");
  const auto n = values.size();
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());

  SummaryStats s;
  s.best = sorted.front();
  s.worst = sorted.back();
  s.median = n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(n);
  if (n > 1) {
    double ss = 0.0;
    for (const double v : values) ss += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(n - 1));
  }
  // Rounding in the mean can push it a hair outside [best, worst] for near-constant input.
  s.mean = std::clamp(s.mean, s.best, s.worst);
  return s;
}

// ---------------------------------------------------------------------------
// Experiment

namespace {

// Calls body(i) for i in [0, count) on up to `jobs` threads.
void parallel_for(std::size_t count, std::size_t jobs, const std::function<void(std::size_t)>& body) {
  jobs = std::max<std::size_t>(1, std::min(jobs, count));
  if (jobs == 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> workers;
  for (std::size_t w = 0; w < jobs; ++w) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : workers) t.join();
  if (failure) std::rethrow_exception(failure);
}

void finish(AlgorithmReport& a) {
  std::vector<double> fitness, accuracy, features, time;
  for (const auto& r : a.runs) {
    fitness.push_back(r.best_fitness);
    accuracy.push_back(r.accuracy);
    features.push_back(static_cast<double>(r.features));
    time.push_back(r.wall_time);
  }
  a.fitness = summarize(fitness);
  a.accuracy = summarize(accuracy);
  a.mean_features = summarize(features).mean;
  a.mean_time = std::accumulate(time.begin(), time.end(), 0.0) / static_cast<double>(time.size());
}

// Lowest-index failing run wins so the error is independent of scheduling.
template <typename Fn>
void run_all(const ExperimentConfig& cfg, std::vector<RunRecord>& records, Fn&& one_run) {
  records.assign(cfg.runs, {});
  std::vector<std::string> errors(cfg.runs);
  parallel_for(cfg.runs, cfg.jobs, [&](std::size_t i) {
    try {
      records[i] = one_run(i);
      records[i].index = i;
      records[i].seed = cfg.seed_for_run(i);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });
  for (std::size_t i = 0; i < cfg.runs; ++i)
    if (!errors[i].empty()) throw RunFailure(i, cfg.seed_for_run(i), errors[i]);
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  ExperimentReport report;
  report.config = cfg;

  if (cfg.task == Task::benchmark) {
    const auto benchmark = bench::make_benchmark(cfg.function, static_cast<Index>(cfg.dim), cfg.base_seed);
    report.subject = benchmark.spec.name;
    for (const Algorithm algorithm : cfg.algorithms) {
      AlgorithmReport a;
      a.algorithm = std::string(to_string(algorithm));
      run_all(cfg, a.runs, [&](std::size_t i) {
        EpsoConfig sc = cfg.swarm_config(cfg.dim, i);
        sc.bounds = benchmark.spec.bounds;
        RunRecord r;
        r.run = optimize(sc, benchmark.objective, algorithm);
        r.best_fitness = r.run.best_fitness;
        r.wall_time = r.run.wall_time;
        return r;
      });
      finish(a);
      report.algorithms.push_back(std::move(a));
    }
    return report;
  }

  auto dataset = data::load_csv(cfg.data, data::parse_label_column(cfg.label_col));
  if (cfg.normalize) dataset = data::normalize_minmax(dataset);
  const auto shared = std::make_shared<const data::Dataset>(std::move(dataset));
  const auto F = static_cast<std::size_t>(shared->feature_count());
  report.subject = shared->name;
  report.cfo = data::complexity_index(*shared);

  // All-features baseline on the same folds each run uses.
  AlgorithmReport baseline;
  baseline.algorithm = "1nn";
  run_all(cfg, baseline.runs, [&](std::size_t i) {
    const auto start = std::chrono::steady_clock::now();
    const fs::MaskEvaluator evaluator(shared, cfg.wrapper, cfg.seed_for_run(i));
    RunRecord r;
    r.accuracy = evaluator.accuracy(fs::FeatureMask::all(F));
    r.best_fitness = 1.0 - r.accuracy;
    r.features = F;
    r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
  });
  finish(baseline);
  report.algorithms.push_back(std::move(baseline));

  for (const Algorithm algorithm : cfg.algorithms) {
    AlgorithmReport a;
    a.algorithm = std::string(to_string(algorithm));
    run_all(cfg, a.runs, [&](std::size_t i) {
      auto result = fs::select_features(shared, cfg.swarm_config(F, i), cfg.wrapper, algorithm);
      RunRecord r;
      r.best_fitness = result.run.best_fitness;
      r.wall_time = result.wall_time;
      r.features = result.mask.count;
      r.accuracy = result.accuracy;
      r.selected = std::move(result.selected_names);
      r.run = std::move(result.run);
      return r;
    });
    finish(a);
    report.algorithms.push_back(std::move(a));
  }
  return report;
}

// ---------------------------------------------------------------------------
// Output

namespace {

std::string real(double v, int digits = 12) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (const char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

json stats_json(const SummaryStats& s) {
  return {{"mean", s.mean}, {"median", s.median}, {"std", s.std}, {"best", s.best}, {"worst", s.worst}};
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec && !std::filesystem::is_directory(dir))
    throw std::runtime_error("cannot create output directory '" + dir.string() + "': " + ec.message());
}

}  // namespace

std::string report_csv(const ExperimentReport& report) {
  std::ostringstream out;
  if (report.config.task == Task::benchmark) {
    out << "function,algorithm,mean,median,std,best,worst\n";
    for (const auto& a : report.algorithms) {
      const auto& s = a.fitness;
      out << csv_field(report.subject) << ',' << a.algorithm << ',' << real(s.mean) << ',' << real(s.median) << ','
          << real(s.std) << ',' << real(s.best) << ',' << real(s.worst) << '\n';
    }
  } else {
    out << "dataset,cfo,algorithm,features,accuracy,std,time_sec\n";
    for (const auto& a : report.algorithms) {
      out << csv_field(report.subject) << ',' << std::lround(report.cfo) << ',' << a.algorithm << ','
          << real(a.mean_features) << ',' << real(a.accuracy.mean) << ',' << real(a.accuracy.std) << ','
          << real(a.mean_time, 6) << '\n';
    }
  }
  return out.str();
}

json report_json(const ExperimentReport& report) {
  json j;
  j["config"] = report.config.resolved();
  j["task"] = j["config"]["task"];
  j["seeds"] = {{"first", report.config.seed_for_run(0)}, {"last", report.config.seed_for_run(report.config.runs - 1)}};
  if (report.config.task == Task::benchmark) {
    j["function"] = report.subject;
  } else {
    j["dataset"] = report.subject;
    j["cfo"] = std::lround(report.cfo);
    j["cfo_exact"] = report.cfo;
    j["protocol"] = report.config.wrapper.protocol == fs::Protocol::kfold
                        ? "stratified " + std::to_string(report.config.wrapper.folds) + "-fold"
                        : std::string("leave-one-out");
  }
  json results = json::array();
  for (const auto& a : report.algorithms) {
    json entry;
    entry["algorithm"] = a.algorithm;
    if (report.config.task == Task::benchmark) {
      entry["stats"] = stats_json(a.fitness);
    } else {
      entry["features"] = a.mean_features;
      entry["accuracy"] = a.accuracy.mean;
      entry["std"] = a.accuracy.std;
      entry["accuracy_stats"] = stats_json(a.accuracy);
      entry["time_sec"] = a.mean_time;
    }
    json runs = json::array();
    for (const auto& r : a.runs) {
      json run{{"run", r.index}, {"seed", r.seed}, {"best_fitness", r.best_fitness}, {"wall_time_sec", r.wall_time}};
      if (report.config.task == Task::feature_selection) {
        run["features"] = r.features;
        run["accuracy"] = r.accuracy;
        run["selected"] = r.selected;
      }
      runs.push_back(std::move(run));
    }
    entry["runs"] = std::move(runs);
    results.push_back(std::move(entry));
  }
  j["results"] = std::move(results);
  return j;
}

std::vector<std::filesystem::path> emit_report(const ExperimentReport& report, const std::filesystem::path& dir,
                                               std::span<const ReportFormat> formats) {
  ensure_dir(dir);
  std::vector<std::filesystem::path> written;
  for (const auto format : formats) {
    if (format == ReportFormat::csv) {
      written.push_back(dir / "report.csv");
      write_file(written.back(), report_csv(report));
    } else {
      written.push_back(dir / "report.json");
      write_file(written.back(), report_json(report).dump(2) + "\n");
    }
  }
  return written;
}

void emit_trace(const RunResult& run, const std::filesystem::path& path) {
  std::string out = "iteration,gbest_fitness\n";
  for (const auto& p : run.trace) out += std::to_string(p.iteration) + ',' + real(p.gbest_fitness, 17) + '\n';
  write_file(path, out);
}

std::vector<std::filesystem::path> emit_traces(const ExperimentReport& report, const std::filesystem::path& dir) {
  ensure_dir(dir);
  std::vector<std::filesystem::path> written;
  for (const auto& a : report.algorithms) {
    if (a.algorithm == "1nn") continue;
    for (const auto& r : a.runs) {
      written.push_back(dir / ("trace_" + a.algorithm + "_" + std::to_string(r.index) + ".csv"));
      emit_trace(r.run, written.back());
    }
  }
  return written;
}

}  // namespace epso::harness
