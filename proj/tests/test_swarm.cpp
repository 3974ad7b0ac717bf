#include <doctest.h>

#include <cmath>
#include <set>

#include "epso/benchmarks.hpp"
#include "epso/swarm.hpp"
#include "stub_random.hpp"

using namespace epso;

namespace {

EpsoConfig small_config(std::size_t dim = 4) {
  EpsoConfig c;
  c.dimension = dim;
  c.bounds = Bounds<double>::uniform(static_cast<Index>(dim), -5.0, 5.0);
  c.population_size = 10;
  c.max_iterations = 20;
  c.m_min = 1;
  c.m_max = dim;
  return c;
}

Particle<double> particle_at(double x, double v, double pbest, Index dim) {
  Particle<double> p;
  p.position = Vector::Constant(dim, x);
  p.velocity = Vector::Constant(dim, v);
  p.pbest_position = Vector::Constant(dim, pbest);
  p.pbest_fitness = 0.0;
  return p;
}

const Objective sphere = [](Eigen::Ref<const Vector> x) { return x.squaredNorm(); };

}  // namespace

TEST_CASE("inertia weight decays linearly") {
  EpsoConfig c = small_config();
  c.max_iterations = 100;
  CHECK(inertia_weight(0, c) == 0.9);
  CHECK(inertia_weight(100, c) == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(inertia_weight(50, c) == doctest::Approx(0.65).epsilon(1e-15));
}

TEST_CASE("group sizes follow the quadratic schedule") {
  EpsoConfig c = small_config();
  c.population_size = 10;
  c.max_iterations = 10;
  c.g_pini = 1.0;
  c.g_pfine = 0.0;
  CHECK(group1_size(0, c) == 10);
  CHECK(group1_size(10, c) == 0);
  CHECK(group1_size(5, c) == 8);  // round(7.5), halves away from zero

  CHECK(group2_size(10, 10) == 0);
  CHECK(group2_size(10, 0) == 10);
  CHECK(group2_size(50, 45) == 5);
  CHECK_THROWS_AS(group2_size(5, 6), ContractViolation);
}

TEST_CASE("group 1 shrinks and mutation count grows monotonically") {
  EpsoConfig c = small_config(10);
  c.population_size = 37;
  c.max_iterations = 73;
  c.g_pini = 0.95;
  c.g_pfine = 0.15;
  c.m_min = 2;
  c.m_max = 9;
  std::size_t prev_g1 = c.population_size + 1, prev_m = 0;
  for (std::size_t t = 0; t <= c.max_iterations; ++t) {
    const auto g1 = group1_size(t, c);
    const auto m = mutation_gene_count(t, c);
    CHECK(g1 <= prev_g1);
    CHECK(m >= prev_m);
    CHECK(g1 + group2_size(c.population_size, g1) == c.population_size);
    CHECK(m >= c.m_min);
    CHECK(m <= c.m_max);
    prev_g1 = g1;
    prev_m = m;
  }
}

TEST_CASE("mutation gene count endpoints") {
  EpsoConfig c = small_config(10);
  c.max_iterations = 10;
  c.m_min = 1;
  c.m_max = 10;
  CHECK(mutation_gene_count(0, c) == 1);
  CHECK(mutation_gene_count(10, c) == 10);
  CHECK(mutation_gene_count(5, c) == 3);  // round(3.25)
}

TEST_CASE("standard velocity rule") {
  const Vector limit = Vector::Constant(3, 100.0);
  StubRandom rng;

  SUBCASE("all coefficients zero") {
    const auto p = particle_at(0.3, -2.0, 1.0, 3);
    const Vector v = update_velocity_standard(p, Vector::Constant(3, 4.0), 0.0, 0.0, 0.0, limit, rng);
    CHECK(v.isZero(0.0));
  }
  SUBCASE("hand evaluation with r1 = r2 = 1") {
    const auto p = particle_at(0.0, 0.0, 1.0, 3);
    const Vector v = update_velocity_standard(p, Vector::Constant(3, 2.0), 1.0, 1.0, 1.0, limit, rng);
    CHECK(v == Vector::Constant(3, 3.0));
    CHECK(rng.calls == 6);  // r1 and r2 per dimension
  }
  SUBCASE("consensus leaves only inertia") {
    const auto p = particle_at(1.5, 0.7, 1.5, 3);
    RandomSource real(3, 0);
    const Vector v = update_velocity_standard(p, Vector::Constant(3, 1.5), 0.5, 2.0, 2.0, limit, real);
    CHECK(v.isApprox(Vector::Constant(3, 0.35)));
  }
  SUBCASE("clamped to the limit") {
    const auto p = particle_at(0.0, 0.0, 1.0, 3);
    const Vector v = update_velocity_standard(p, Vector::Constant(3, 2.0), 1.0, 1.0, 1.0,
                                              Vector::Constant(3, 0.5), rng);
    CHECK(v == Vector::Constant(3, 0.5));
  }
  SUBCASE("dimension mismatch") {
    const auto p = particle_at(0.0, 0.0, 1.0, 3);
    CHECK_THROWS_AS(update_velocity_standard(p, Vector::Zero(2), 1.0, 1.0, 1.0, limit, rng), ContractViolation);
  }
}

TEST_CASE("apply_velocity adds and clamps") {
  const auto box = Bounds<double>::uniform(1, -5.0, 5.0);
  CHECK(apply_velocity(Vector::Constant(1, 0.0), Vector::Constant(1, 0.0), box)(0) == 0.0);
  CHECK(apply_velocity(Vector::Constant(1, 0.0), Vector::Constant(1, 1.0), box)(0) == 1.0);
  CHECK(apply_velocity(Vector::Constant(1, 4.0), Vector::Constant(1, 3.0), box)(0) == 5.0);
  CHECK(apply_velocity(Vector::Constant(1, -4.0), Vector::Constant(1, -3.0), box)(0) == -5.0);
  CHECK_THROWS_AS(apply_velocity(Vector::Zero(2), Vector::Zero(1), box), ContractViolation);
}

TEST_CASE("select_mutation_genes") {
  RandomSource rng(11, 0);
  const auto all = select_mutation_genes(5, 5, rng);
  CHECK(all == std::vector<Index>{0, 1, 2, 3, 4});
  CHECK(select_mutation_genes(5, 0, rng).empty());
  CHECK_THROWS_AS(select_mutation_genes(5, 6, rng), ContractViolation);

  RandomSource a(42, 7), b(42, 7);
  const auto first = select_mutation_genes(100, 10, a);
  CHECK(first == select_mutation_genes(100, 10, b));
  CHECK(std::set<Index>(first.begin(), first.end()).size() == 10);
  for (const Index i : first) CHECK((i >= 0 && i < 100));
}

TEST_CASE("select_mutation_genes is close to uniform") {
  // Each index of 10 should be chosen with probability 3/10.
  RandomSource rng(5, 0);
  std::vector<int> hits(10, 0);
  const int trials = 20000;
  for (int t = 0; t < trials; ++t)
    for (const Index i : select_mutation_genes(10, 3, rng)) ++hits[static_cast<std::size_t>(i)];
  for (const int h : hits) CHECK(std::abs(h / double(trials) - 0.3) < 0.02);
}

TEST_CASE("extended velocity rule") {
  const Vector limit = Vector::Constant(3, 100.0);
  const Vector gbest = Vector::Constant(3, 2.5);

  SUBCASE("alpha = 1, beta = 0, pbest = 0 gives gbest") {
    struct AlphaOne {
      int n = 0;
      double uniform01() { return 0.0; }
      double uniform_signed() { return (n++ % 2 == 0) ? 1.0 : 0.0; }
      std::size_t below(std::size_t) { return 0; }
    } rng;
    const auto p = particle_at(0.1, 0.7, 0.0, 3);
    const std::vector<Index> genes{1};
    const Vector v = update_velocity_extended(p, gbest, std::span<const Index>(genes), limit, rng);
    CHECK(v(1) == 2.5);
    CHECK(v(0) == 0.7);
    CHECK(v(2) == 0.7);
  }
  SUBCASE("alpha = beta = 0 gives pbest") {
    StubRandom rng;
    const auto p = particle_at(0.1, 0.7, -1.25, 3);
    const std::vector<Index> genes{0, 2};
    const Vector v = update_velocity_extended(p, gbest, std::span<const Index>(genes), limit, rng);
    CHECK(v(0) == -1.25);
    CHECK(v(1) == 0.7);
    CHECK(v(2) == -1.25);
  }
  SUBCASE("no genes leaves the velocity alone") {
    StubRandom rng;
    const auto p = particle_at(0.1, 0.7, -1.25, 3);
    const Vector v = update_velocity_extended(p, gbest, std::span<const Index>(), limit, rng);
    CHECK(v == p.velocity);
    CHECK(rng.calls == 0);
  }
  SUBCASE("general case matches the formula and the clamp") {
    struct Fixed {
      int n = 0;
      double uniform01() { return 0.0; }
      double uniform_signed() { return (n++ % 2 == 0) ? -0.5 : 0.25; }
      std::size_t below(std::size_t) { return 0; }
    } rng;
    const auto p = particle_at(0.0, 2.0, 3.0, 3);
    const std::vector<Index> genes{0};
    const Vector v = update_velocity_extended(p, gbest, std::span<const Index>(genes), limit, rng);
    CHECK(v(0) == doctest::Approx(-0.5 * 2.5 + (1.0 - 0.25 * 2.0) * 3.0));
    Fixed again;
    const Vector clamped =
        update_velocity_extended(p, gbest, std::span<const Index>(genes), Vector::Constant(3, 0.1), again);
    CHECK(clamped(0) == 0.1);
  }
  SUBCASE("index out of range") {
    StubRandom rng;
    const auto p = particle_at(0.1, 0.7, -1.25, 3);
    const std::vector<Index> genes{3};
    CHECK_THROWS_AS(update_velocity_extended(p, gbest, std::span<const Index>(genes), limit, rng), ContractViolation);
  }
}

TEST_CASE("assign_groups ranks by personal best") {
  SwarmState s;
  for (double f : {3.0, 1.0, 2.0}) {
    Particle<double> p;
    p.pbest_fitness = f;
    s.particles.push_back(p);
  }
  auto g = assign_groups(s, 2);
  CHECK(g.group1 == std::vector<std::size_t>{1, 2});
  CHECK(g.group2 == std::vector<std::size_t>{0});

  g = assign_groups(s, 3);
  CHECK(g.group1.size() == 3);
  CHECK(g.group2.empty());
  g = assign_groups(s, 0);
  CHECK(g.group1.empty());
  CHECK(g.group2.size() == 3);

  s.particles[0].pbest_fitness = 1.0;  // tie with particle 1
  g = assign_groups(s, 1);
  CHECK(g.group1 == std::vector<std::size_t>{0});
}

TEST_CASE("update_bests is strict and rejects non-finite values") {
  SwarmState s;
  s.gbest_fitness = 5.0;
  s.gbest_position = Vector::Constant(2, 9.0);
  Particle<double> p = particle_at(1.0, 0.0, 2.0, 2);
  p.pbest_fitness = 5.0;

  CHECK_FALSE(update_bests(p, 5.0, s));
  CHECK(p.pbest_position == Vector::Constant(2, 2.0));
  CHECK(s.gbest_position == Vector::Constant(2, 9.0));

  CHECK_FALSE(update_bests(p, std::nan(""), s));
  CHECK_FALSE(update_bests(p, -INFINITY, s));
  CHECK(p.pbest_fitness == 5.0);

  CHECK(update_bests(p, 4.0, s));
  CHECK(p.pbest_fitness == 4.0);
  CHECK(p.pbest_position == Vector::Constant(2, 1.0));
  CHECK(s.gbest_fitness == 4.0);
}

TEST_CASE("config validation") {
  EpsoConfig c = small_config();
  CHECK_NOTHROW(c.validate());
  auto expect_key = [](EpsoConfig bad, const std::string& key) {
    try {
      bad.validate();
      FAIL("expected ConfigError for " << key);
    } catch (const ConfigError& e) {
      CHECK(e.key() == key);
    }
  };
  EpsoConfig bad = c;
  bad.g_pini = 0.9;
  bad.g_pfine = 0.95;
  expect_key(bad, "g_pfine");
  bad = c;
  bad.m_max = 5;
  expect_key(bad, "m_max");
  bad = c;
  bad.m_min = 3;
  bad.m_max = 2;
  expect_key(bad, "m_min");
  bad = c;
  bad.bounds.low(1) = 6.0;
  expect_key(bad, "bounds");
  bad = c;
  bad.c1 = -1.0;
  expect_key(bad, "c1");
  bad = c;
  bad.velocity_clamp_fraction = 0.0;
  expect_key(bad, "velocity_clamp");
  bad = c;
  bad.population_size = 0;
  expect_key(bad, "population");
}

TEST_CASE("step with group 2 empty is a pure PSO step") {
  EpsoConfig c = small_config();
  c.g_pini = c.g_pfine = 1.0;
  auto s1 = make_streams(9, c.population_size);
  auto s2 = make_streams(9, c.population_size);
  SwarmState a = initialize_swarm(c, sphere, s1);
  SwarmState b = initialize_swarm(c, sphere, s2);
  for (int i = 0; i < 5; ++i) {
    step(a, sphere, c, Algorithm::epso, s1);
    step(b, sphere, c, Algorithm::pso, s2);
  }
  CHECK(a.gbest_fitness == b.gbest_fitness);
  for (std::size_t i = 0; i < a.particles.size(); ++i) {
    CHECK(a.particles[i].position == b.particles[i].position);
    CHECK(a.particles[i].velocity == b.particles[i].velocity);
  }
}

TEST_CASE("single-particle swarm keeps gbest equal to its pbest") {
  EpsoConfig c = small_config();
  c.population_size = 1;
  c.g_pini = c.g_pfine = 1.0;
  auto streams = make_streams(2, 1);
  SwarmState s = initialize_swarm(c, sphere, streams);
  step(s, sphere, c, Algorithm::epso, streams);
  CHECK(s.gbest_fitness == s.particles[0].pbest_fitness);
  CHECK(s.gbest_position == s.particles[0].pbest_position);
}

TEST_CASE("step invariants hold for EPSO") {
  EpsoConfig c = small_config(6);
  c.g_pini = 0.8;
  c.g_pfine = 0.2;
  auto streams = make_streams(77, c.population_size);
  SwarmState s = initialize_swarm(c, sphere, streams);
  const Vector limit = c.velocity_limit();
  double prev = s.gbest_fitness;
  std::vector<double> prev_pbest;
  for (const auto& p : s.particles) prev_pbest.push_back(p.pbest_fitness);
  while (s.iteration < c.max_iterations) {
    step(s, sphere, c, Algorithm::epso, streams);
    CHECK(s.gbest_fitness <= prev);
    prev = s.gbest_fitness;
    double min_pbest = INFINITY;
    for (std::size_t i = 0; i < s.particles.size(); ++i) {
      const auto& p = s.particles[i];
      CHECK(p.pbest_fitness <= prev_pbest[i]);
      prev_pbest[i] = p.pbest_fitness;
      CHECK(p.pbest_fitness == sphere(p.pbest_position));
      CHECK((p.position.array() >= c.bounds.low.array()).all());
      CHECK((p.position.array() <= c.bounds.high.array()).all());
      CHECK((p.velocity.cwiseAbs().array() <= limit.array()).all());
      min_pbest = std::min(min_pbest, p.pbest_fitness);
    }
    CHECK(s.gbest_fitness == min_pbest);
  }
  CHECK_THROWS_AS(step(s, sphere, c, Algorithm::epso, streams), ContractViolation);
}

TEST_CASE("step determinism") {
  EpsoConfig c = small_config();
  auto s1 = make_streams(123, c.population_size);
  auto s2 = make_streams(123, c.population_size);
  SwarmState a = initialize_swarm(c, sphere, s1);
  SwarmState b = initialize_swarm(c, sphere, s2);
  step(a, sphere, c, Algorithm::epso, s1);
  step(b, sphere, c, Algorithm::epso, s2);
  for (std::size_t i = 0; i < a.particles.size(); ++i) CHECK(a.particles[i].position == b.particles[i].position);
  CHECK(a.gbest_position == b.gbest_position);
}

TEST_CASE("objective failure reports the particle index") {
  EpsoConfig c = small_config();
  int calls = 0;
  const Objective flaky = [&](Eigen::Ref<const Vector> x) {
    if (++calls == 14) throw std::runtime_error("boom");
    return x.squaredNorm();
  };
  try {
    optimize(c, flaky, Algorithm::epso);
    FAIL("expected EvaluationError");
  } catch (const EvaluationError& e) {
    CHECK(e.particle() == 3);  // 10 initial evaluations, then the fourth particle of iteration 1
  }
}

TEST_CASE("non-finite objective values are never stored") {
  EpsoConfig c = small_config();
  const Objective holes = [](Eigen::Ref<const Vector> x) {
    return x(0) > 0.0 ? std::numeric_limits<double>::quiet_NaN() : x.squaredNorm();
  };
  const auto r = optimize(c, holes, Algorithm::epso);
  CHECK(std::isfinite(r.best_fitness));
  CHECK(r.best_position(0) <= 0.0);
}

TEST_CASE("optimize contract") {
  EpsoConfig c = small_config();
  SUBCASE("zero iterations returns the initial best") {
    c.max_iterations = 0;
    const auto r = optimize(c, sphere, Algorithm::epso);
    REQUIRE(r.trace.size() == 1);
    auto streams = make_streams(c.seed, c.population_size);
    const auto s = initialize_swarm(c, sphere, streams);
    CHECK(r.best_fitness == s.gbest_fitness);
    CHECK(r.trace[0].gbest_fitness == s.gbest_fitness);
  }
  SUBCASE("same seed, same trace") {
    const auto a = optimize(c, sphere, Algorithm::epso);
    const auto b = optimize(c, sphere, Algorithm::epso);
    REQUIRE(a.trace.size() == c.max_iterations + 1);
    for (std::size_t i = 0; i < a.trace.size(); ++i) CHECK(a.trace[i].gbest_fitness == b.trace[i].gbest_fitness);
    CHECK(a.best_position == b.best_position);
  }
  SUBCASE("EPSO with g_pini = g_pfine = 1 equals PSO") {
    c.g_pini = c.g_pfine = 1.0;
    const auto a = optimize(c, sphere, Algorithm::epso);
    const auto b = optimize(c, sphere, Algorithm::pso);
    for (std::size_t i = 0; i < a.trace.size(); ++i) CHECK(a.trace[i].gbest_fitness == b.trace[i].gbest_fitness);
  }
  SUBCASE("invalid config fails before evaluating") {
    c.g_pfine = 1.0;
    c.g_pini = 0.5;
    int calls = 0;
    const Objective counting = [&](Eigen::Ref<const Vector> x) {
      ++calls;
      return x.squaredNorm();
    };
    CHECK_THROWS_AS(optimize(c, counting, Algorithm::pso), ConfigError);
    CHECK(calls == 0);
  }
  SUBCASE("converges on a sphere") {
    c.max_iterations = 200;
    CHECK(optimize(c, sphere, Algorithm::epso).best_fitness < 1e-3);
    CHECK(optimize(c, sphere, Algorithm::pso).best_fitness < 1e-3);
  }
}

TEST_CASE("random streams") {
  RandomSource a(1, 0), b(1, 0), other(1, 1), reseeded(2, 0);
  bool differs_stream = false, differs_seed = false;
  for (int i = 0; i < 50; ++i) {
    const double x = a.uniform01();
    CHECK(x == b.uniform01());
    CHECK((x >= 0.0 && x < 1.0));
    differs_stream |= x != other.uniform01();
    differs_seed |= x != reseeded.uniform01();
    const double s = a.uniform_signed();
    b.uniform_signed();
    CHECK((s >= -1.0 && s < 1.0));
  }
  CHECK(differs_stream);
  CHECK(differs_seed);
}
