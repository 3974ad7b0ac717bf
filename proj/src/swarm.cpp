#include "epso/swarm.hpp"

#include <chrono>

namespace epso {

std::string_view to_string(Algorithm algorithm) {
  return algorithm == Algorithm::pso ? "pso" : "epso";
}

Algorithm parse_algorithm(std::string_view name) {
  if (name == "pso") return Algorithm::pso;
  if (name == "epso") return Algorithm::epso;
  throw ConfigError("algorithm", "expected 'pso' or 'epso', got '" + std::string(name) + "'");
}

void EpsoConfig::validate() const {
  if (population_size == 0) throw ConfigError("population", "must be positive");
  if (dimension == 0) throw ConfigError("dimension", "must be positive");
  if (bounds.low.size() != static_cast<Index>(dimension) ||
      bounds.high.size() != static_cast<Index>(dimension))
    throw ConfigError("bounds", "must have one (low, high) pair per dimension");
  for (Index d = 0; d < bounds.dimension(); ++d) {
    if (!(bounds.low(d) < bounds.high(d)) || !std::isfinite(bounds.low(d)) ||
        !std::isfinite(bounds.high(d)))
      throw ConfigError("bounds", "need finite low < high in dimension " + std::to_string(d));
  }
  if (!std::isfinite(inertia_start)) throw ConfigError("inertia_start", "must be finite");
  if (!std::isfinite(inertia_end)) throw ConfigError("inertia_end", "must be finite");
  if (!(c1 >= 0.0) || !std::isfinite(c1)) throw ConfigError("c1", "must be a non-negative real");
  if (!(c2 >= 0.0) || !std::isfinite(c2)) throw ConfigError("c2", "must be a non-negative real");
  if (!(g_pini >= 0.0 && g_pini <= 1.0)) throw ConfigError("g_pini", "must lie in [0, 1]");
  if (!(g_pfine >= 0.0 && g_pfine <= 1.0)) throw ConfigError("g_pfine", "must lie in [0, 1]");
  if (g_pfine > g_pini) throw ConfigError("g_pfine", "must not exceed g_pini");
  if (m_min == 0) throw ConfigError("m_min", "must be positive");
  if (m_min > m_max) throw ConfigError("m_min", "must not exceed m_max");
  if (m_max > dimension) throw ConfigError("m_max", "must not exceed dimension");
  if (!(velocity_clamp_fraction > 0.0 && velocity_clamp_fraction <= 1.0))
    throw ConfigError("velocity_clamp", "must lie in (0, 1]");
}

GroupPartition assign_groups(const SwarmState& swarm, std::size_t g1) {
  const std::size_t n = swarm.particles.size();
  require(g1 <= n, "assign_groups: g1 exceeds population size");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return swarm.particles[a].pbest_fitness < swarm.particles[b].pbest_fitness;
  });
  GroupPartition out;
  out.group1.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(g1));
  out.group2.assign(order.begin() + static_cast<std::ptrdiff_t>(g1), order.end());
  std::sort(out.group1.begin(), out.group1.end());
  std::sort(out.group2.begin(), out.group2.end());
  return out;
}

bool update_bests(Particle<double>& particle, double fitness, SwarmState& swarm) {
  if (!std::isfinite(fitness)) return false;
  bool improved = false;
  if (fitness < particle.pbest_fitness) {
    particle.pbest_fitness = fitness;
    particle.pbest_position = particle.position;
    improved = true;
  }
  if (fitness < swarm.gbest_fitness) {
    swarm.gbest_fitness = fitness;
    swarm.gbest_position = particle.position;
  }
  return improved;
}

std::vector<RandomSource> make_streams(std::uint64_t seed, std::size_t count) {
  std::vector<RandomSource> streams;
  streams.reserve(count);
  for (std::size_t i = 0; i < count; ++i) streams.emplace_back(seed, i);
  return streams;
}

namespace {

double evaluate(const Objective& objective, const Vector& position, std::size_t particle) {
  try {
    return objective(position);
  } catch (const std::exception& e) {
    throw EvaluationError(particle, e.what());
  }
}

}  // namespace

SwarmState initialize_swarm(const EpsoConfig& config, const Objective& objective,
                            std::span<RandomSource> streams) {
  config.validate();
  require(streams.size() == config.population_size, "initialize_swarm: one stream per particle");
  const auto dim = static_cast<Index>(config.dimension);

  SwarmState swarm;
  swarm.particles.resize(config.population_size);
  for (std::size_t i = 0; i < config.population_size; ++i) {
    auto& p = swarm.particles[i];
    p.position.resize(dim);
    for (Index d = 0; d < dim; ++d)
      p.position(d) = streams[i].uniform(config.bounds.low(d), config.bounds.high(d));
    p.velocity = Vector::Zero(dim);
    p.pbest_position = p.position;
  }
  swarm.gbest_position = swarm.particles.front().position;

  std::vector<double> fitness(config.population_size);
  for (std::size_t i = 0; i < fitness.size(); ++i)
    fitness[i] = evaluate(objective, swarm.particles[i].position, i);
  for (std::size_t i = 0; i < fitness.size(); ++i) update_bests(swarm.particles[i], fitness[i], swarm);
  return swarm;
}

void step(SwarmState& swarm, const Objective& objective, const EpsoConfig& config,
          Algorithm algorithm, std::span<RandomSource> streams) {
  require(swarm.iteration < config.max_iterations, "step: iteration budget exhausted");
  require(streams.size() == swarm.particles.size(), "step: one stream per particle");
  const std::size_t t = swarm.iteration;
  const std::size_t pop = swarm.particles.size();
  const Vector limit = config.velocity_limit();
  const double w = inertia_weight(t, config);

  const std::size_t g1 = algorithm == Algorithm::pso ? pop : group1_size(t, config);
  const GroupPartition groups = assign_groups(swarm, g1);

  // Velocities read the gbest of the previous iteration for every particle.
  const Vector gbest = swarm.gbest_position;
  for (const std::size_t i : groups.group1) {
    auto& p = swarm.particles[i];
    p.velocity = update_velocity_standard(p, gbest, w, config.c1, config.c2, limit, streams[i]);
    p.position = apply_velocity(p.position, p.velocity, config.bounds);
  }
  if (!groups.group2.empty()) {
    const std::size_t m = mutation_gene_count(t, config);
    for (const std::size_t i : groups.group2) {
      auto& p = swarm.particles[i];
      const auto genes = select_mutation_genes(p.dimension(), m, streams[i]);
      p.velocity = update_velocity_extended(p, gbest, std::span<const Index>(genes), limit, streams[i]);
      p.position = apply_velocity(p.position, p.velocity, config.bounds);
    }
  }

  std::vector<double> fitness(pop);
  for (std::size_t i = 0; i < pop; ++i) fitness[i] = evaluate(objective, swarm.particles[i].position, i);
  for (std::size_t i = 0; i < pop; ++i) update_bests(swarm.particles[i], fitness[i], swarm);
  ++swarm.iteration;
}

RunResult optimize(const EpsoConfig& config, const Objective& objective, Algorithm algorithm) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();

  auto streams = make_streams(config.seed, config.population_size);
  SwarmState swarm = initialize_swarm(config, objective, streams);

  RunResult result;
  result.seed = config.seed;
  result.trace.reserve(config.max_iterations + 1);
  result.trace.push_back({0, swarm.gbest_fitness});
  while (swarm.iteration < config.max_iterations) {
    step(swarm, objective, config, algorithm, streams);
    result.trace.push_back({swarm.iteration, swarm.gbest_fitness});
  }
  result.best_position = swarm.gbest_position;
  result.best_fitness = swarm.gbest_fitness;
  result.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace epso
