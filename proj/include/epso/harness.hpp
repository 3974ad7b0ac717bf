#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "epso/feature_select.hpp"
#include "epso/swarm.hpp"

namespace epso::harness {

enum class Task { benchmark, feature_selection };

struct ExperimentConfig {
  Task task = Task::benchmark;
  std::vector<Algorithm> algorithms{Algorithm::pso, Algorithm::epso};
  std::size_t runs = 30;
  std::uint64_t base_seed = 1;
  std::filesystem::path out = "out";
  bool trace = false;
  std::size_t jobs = 1;

  // Swarm parameters. m_max left empty resolves against the problem dimension.
  std::size_t population = 50;
  std::size_t iterations = 1000;
  double inertia_start = 0.9;
  double inertia_end = 0.4;
  double c1 = 2.0;
  double c2 = 2.0;
  double g_pini = 1.0;
  double g_pfine = 0.5;
  std::size_t m_min = 1;
  std::optional<std::size_t> m_max;
  double velocity_clamp = 0.2;

  // benchmark
  std::string function;
  std::size_t dim = 0;

  // feature selection
  std::filesystem::path data;
  std::string label_col = "last";
  bool normalize = true;
  fs::WrapperConfig wrapper;

  std::uint64_t seed_for_run(std::size_t run) const { return base_seed + run; }
  /// Swarm configuration for run `run` on a problem of the given dimension.
  EpsoConfig swarm_config(std::size_t dimension, std::size_t run) const;
  /// Every field, defaults included.
  nlohmann::json resolved() const;
};

std::size_t default_m_max(std::size_t dimension);

/// Builds and validates a configuration from a JSON object. Unknown keys,
/// missing required keys, type errors and constraint violations throw
/// ConfigError naming the key.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig parse_config_file(const std::filesystem::path& path);

struct SummaryStats {
  double mean = 0.0;
  double median = 0.0;
  double std = 0.0;  // sample (n - 1) deviation, 0 for a single value
  double best = 0.0;
  double worst = 0.0;
};

SummaryStats summarize(std::span<const double> values);

struct RunRecord {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  double best_fitness = 0.0;
  double wall_time = 0.0;
  // feature selection only
  std::size_t features = 0;
  double accuracy = 0.0;
  std::vector<std::string> selected;
  RunResult run;
};

struct AlgorithmReport {
  std::string algorithm;  // "pso", "epso", or "1nn" for the all-features baseline
  std::vector<RunRecord> runs;
  SummaryStats fitness;
  SummaryStats accuracy;
  double mean_features = 0.0;
  double mean_time = 0.0;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::string subject;  // function or dataset name
  double cfo = 0.0;     // feature selection only
  std::vector<AlgorithmReport> algorithms;
};

class RunFailure : public std::runtime_error {
 public:
  RunFailure(std::size_t run, std::uint64_t seed, const std::string& what)
      : std::runtime_error("run " + std::to_string(run) + " (seed " + std::to_string(seed) + ") failed: " + what),
        run_(run),
        seed_(seed) {}
  std::size_t run() const noexcept { return run_; }
  std::uint64_t seed() const noexcept { return seed_; }

 private:
  std::size_t run_;
  std::uint64_t seed_;
};

/// Runs every algorithm `runs` times with seeds base_seed + i. Runs may be
/// spread over `jobs` threads; the report does not depend on it.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

enum class ReportFormat { csv, json };

std::string report_csv(const ExperimentReport& report);
nlohmann::json report_json(const ExperimentReport& report);

/// Writes report.csv / report.json under `dir`. Returns the written paths.
std::vector<std::filesystem::path> emit_report(const ExperimentReport& report, const std::filesystem::path& dir,
                                               std::span<const ReportFormat> formats);

/// CSV `iteration,gbest_fitness`, one row per trace point.
void emit_trace(const RunResult& run, const std::filesystem::path& path);

/// Per-run traces as trace_<algorithm>_<run>.csv under `dir`.
std::vector<std::filesystem::path> emit_traces(const ExperimentReport& report, const std::filesystem::path& dir);

}  // namespace epso::harness
