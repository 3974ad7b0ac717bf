#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "epso/core.hpp"
#include "epso/random.hpp"

namespace epso {

enum class Algorithm { pso, epso };

std::string_view to_string(Algorithm algorithm);
Algorithm parse_algorithm(std::string_view name);

/// Axis-aligned search box. low(d) < high(d) for every dimension.
template <typename Scalar = double>
struct Bounds {
  VectorX<Scalar> low;
  VectorX<Scalar> high;

  static Bounds uniform(Index dimension, Scalar lo, Scalar hi) {
    return {VectorX<Scalar>::Constant(dimension, lo), VectorX<Scalar>::Constant(dimension, hi)};
  }
  Index dimension() const { return low.size(); }
  VectorX<Scalar> range() const { return high - low; }
};

template <typename Scalar = double>
struct Particle {
  VectorX<Scalar> position;
  VectorX<Scalar> velocity;
  VectorX<Scalar> pbest_position;
  Scalar pbest_fitness = std::numeric_limits<Scalar>::infinity();

  Index dimension() const { return position.size(); }
};

struct SwarmState {
  std::vector<Particle<double>> particles;
  Vector gbest_position;
  double gbest_fitness = std::numeric_limits<double>::infinity();
  std::size_t iteration = 0;
};

/// Hyperparameters of one optimization run.
///
/// The two group percentages bound the share of the population that follows
/// the classic velocity rule; the rest mutates m genes per particle, with m
/// growing from m_min to m_max over the run.
struct EpsoConfig {
  std::size_t population_size = 50;
  std::size_t max_iterations = 1000;
  std::size_t dimension = 10;
  Bounds<double> bounds = Bounds<double>::uniform(10, -100.0, 100.0);
  double inertia_start = 0.9;
  double inertia_end = 0.4;
  double c1 = 2.0;
  double c2 = 2.0;
  double g_pini = 1.0;
  double g_pfine = 0.5;
  std::size_t m_min = 1;
  std::size_t m_max = 5;
  double velocity_clamp_fraction = 0.2;
  std::uint64_t seed = 1;

  // Throws ConfigError naming the first offending field.
  void validate() const;
  Vector velocity_limit() const { return velocity_clamp_fraction * bounds.range(); }
};

struct TracePoint {
  std::size_t iteration;
  double gbest_fitness;
};

struct RunResult {
  Vector best_position;
  double best_fitness = std::numeric_limits<double>::infinity();
  std::vector<TracePoint> trace;
  double wall_time = 0.0;  // seconds
  std::uint64_t seed = 0;
};

class EvaluationError : public std::runtime_error {
 public:
  EvaluationError(std::size_t particle, const std::string& what)
      : std::runtime_error("objective evaluation failed for particle " + std::to_string(particle) +
                           ": " + what),
        particle_(particle) {}
  std::size_t particle() const noexcept { return particle_; }

 private:
  std::size_t particle_;
};

// ---------------------------------------------------------------------------
// Schedules

namespace detail {

inline double progress(std::size_t iteration, std::size_t max_iterations) {
  if (max_iterations == 0) return 0.0;
  return static_cast<double>(iteration) / static_cast<double>(max_iterations);
}

}  // namespace detail

/// Linear decay from inertia_start at t = 0 to inertia_end at t = max_iterations.
inline double inertia_weight(std::size_t iteration, const EpsoConfig& config) {
  const double p = detail::progress(iteration, config.max_iterations);
  return config.inertia_start + p * (config.inertia_end - config.inertia_start);
}

/// Size of the classic-PSO group. Shrinks quadratically from g_pini to g_pfine
/// of the population; std::round rounds halves away from zero.
inline std::size_t group1_size(std::size_t iteration, const EpsoConfig& config) {
  const double p = detail::progress(iteration, config.max_iterations);
  const double share = config.g_pini - p * p * (config.g_pini - config.g_pfine);
  const double size = std::round(share * static_cast<double>(config.population_size));
  return static_cast<std::size_t>(std::clamp(size, 0.0, static_cast<double>(config.population_size)));
}

inline std::size_t group2_size(std::size_t population_size, std::size_t g1) {
  require(g1 <= population_size, "group2_size: g1 exceeds population size");
  return population_size - g1;
}

/// Number of genes mutated per group-2 particle; grows quadratically from m_min to m_max.
inline std::size_t mutation_gene_count(std::size_t iteration, const EpsoConfig& config) {
  const double p = detail::progress(iteration, config.max_iterations);
  const double span = static_cast<double>(config.m_max) - static_cast<double>(config.m_min);
  const double m = std::round(static_cast<double>(config.m_min) + p * p * span);
  return static_cast<std::size_t>(
      std::clamp(m, static_cast<double>(config.m_min), static_cast<double>(config.m_max)));
}

// ---------------------------------------------------------------------------
// Update rules

/// Classic update: w v + c1 r1 (pbest - x) + c2 r2 (gbest - x), per dimension,
/// clamped to +/- velocity_limit. Draw order is r1 then r2 for each dimension.
template <typename Scalar, typename DerivedG, typename DerivedL, UnitRandom Rng>
VectorX<Scalar> update_velocity_standard(const Particle<Scalar>& particle,
                                         const Eigen::MatrixBase<DerivedG>& gbest_position,
                                         std::type_identity_t<Scalar> w,
                                         std::type_identity_t<Scalar> c1,
                                         std::type_identity_t<Scalar> c2,
                                         const Eigen::MatrixBase<DerivedL>& velocity_limit, Rng& rng) {
  const Index n = particle.dimension();
  require(particle.velocity.size() == n && particle.pbest_position.size() == n &&
              gbest_position.size() == n && velocity_limit.size() == n,
          "update_velocity_standard: dimension mismatch");
  VectorX<Scalar> out(n);
  for (Index d = 0; d < n; ++d) {
    const auto r1 = static_cast<Scalar>(rng.uniform01());
    const auto r2 = static_cast<Scalar>(rng.uniform01());
    const Scalar x = particle.position(d);
    const Scalar v = w * particle.velocity(d) + c1 * r1 * (particle.pbest_position(d) - x) +
                     c2 * r2 * (gbest_position(d) - x);
    out(d) = std::clamp(v, -velocity_limit(d), velocity_limit(d));
  }
  return out;
}

/// x + v, clamped into the box.
template <typename DerivedX, typename DerivedV, typename Scalar>
VectorX<Scalar> apply_velocity(const Eigen::MatrixBase<DerivedX>& position,
                               const Eigen::MatrixBase<DerivedV>& velocity,
                               const Bounds<Scalar>& bounds) {
  require(position.size() == velocity.size() && position.size() == bounds.dimension(),
          "apply_velocity: dimension mismatch");
  return (position + velocity).cwiseMax(bounds.low).cwiseMin(bounds.high);
}

/// m distinct gene indices sampled uniformly without replacement, ascending.
template <UnitRandom Rng>
std::vector<Index> select_mutation_genes(Index dimension, std::size_t m, Rng& rng) {
  require(dimension >= 0 && m <= static_cast<std::size_t>(dimension),
          "select_mutation_genes: m exceeds dimension");
  std::vector<Index> pool(static_cast<std::size_t>(dimension));
  std::iota(pool.begin(), pool.end(), Index{0});
  // Partial Fisher-Yates: the first m slots end up a uniform m-subset.
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t j = i + rng.below(pool.size() - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(m);
  std::sort(pool.begin(), pool.end());
  return pool;
}

/// Mutation rule for the second group. For every selected gene i,
///   v_i <- alpha * gbest_i + (1 - beta * v_i) * pbest_i,  alpha, beta ~ U[-1, 1],
/// drawn alpha then beta per gene in ascending index order. Other genes keep
/// their velocity. The result is clamped like the classic rule.
template <typename Scalar, typename DerivedG, typename DerivedL, UnitRandom Rng>
VectorX<Scalar> update_velocity_extended(const Particle<Scalar>& particle,
                                         const Eigen::MatrixBase<DerivedG>& gbest_position,
                                         std::span<const Index> gene_indices,
                                         const Eigen::MatrixBase<DerivedL>& velocity_limit, Rng& rng) {
  const Index n = particle.dimension();
  require(particle.velocity.size() == n && particle.pbest_position.size() == n &&
              gbest_position.size() == n && velocity_limit.size() == n,
          "update_velocity_extended: dimension mismatch");
  VectorX<Scalar> out = particle.velocity;
  for (const Index i : gene_indices) {
    require(i >= 0 && i < n, "update_velocity_extended: gene index out of range");
    const auto alpha = static_cast<Scalar>(rng.uniform_signed());
    const auto beta = static_cast<Scalar>(rng.uniform_signed());
    out(i) = alpha * gbest_position(i) + (Scalar(1) - beta * particle.velocity(i)) * particle.pbest_position(i);
  }
  return out.cwiseMax(-velocity_limit).cwiseMin(velocity_limit);
}

struct GroupPartition {
  std::vector<std::size_t> group1;  // classic PSO update
  std::vector<std::size_t> group2;  // gene mutation
};

/// The g1 particles with the lowest pbest fitness (ties: lower index) form
/// group 1. Both index lists are ascending.
GroupPartition assign_groups(const SwarmState& swarm, std::size_t g1);

/// Records `fitness` (the value at particle.position) as a candidate for the
/// particle's and the swarm's best. Strict improvement only; non-finite
/// values never replace a best. Returns true if pbest changed.
bool update_bests(Particle<double>& particle, double fitness, SwarmState& swarm);

/// Positions uniform in the box, zero velocity, one evaluation per particle.
/// Particle i draws from streams[i].
SwarmState initialize_swarm(const EpsoConfig& config, const Objective& objective,
                            std::span<RandomSource> streams);

/// One iteration: regroup, move both groups, re-evaluate, update bests.
void step(SwarmState& swarm, const Objective& objective, const EpsoConfig& config,
          Algorithm algorithm, std::span<RandomSource> streams);

/// Full run. streams are derived from config.seed, one per particle.
RunResult optimize(const EpsoConfig& config, const Objective& objective, Algorithm algorithm);

std::vector<RandomSource> make_streams(std::uint64_t seed, std::size_t count);

}  // namespace epso
