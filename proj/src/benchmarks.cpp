#include "epso/benchmarks.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <map>
#include <memory>

#include <Eigen/QR>

namespace epso::bench {

TransformSpec::TransformSpec(Vector shift, Matrix rotation)
    : shift_(std::move(shift)), rotation_(std::move(rotation)) {
  const Index n = shift_.size();
  require(rotation_.rows() == n && rotation_.cols() == n, "TransformSpec: rotation must be D x D");
  const Matrix gram = rotation_.transpose() * rotation_;
  const double err = (gram - Matrix::Identity(n, n)).cwiseAbs().maxCoeff();
  require(n == 0 || err <= 1e-9, "TransformSpec: rotation is not orthonormal");
}

TransformSpec TransformSpec::identity(Index dimension) {
  return TransformSpec(Vector::Zero(dimension), Matrix::Identity(dimension, dimension));
}

Matrix random_rotation(Index dimension, RandomSource& rng) {
  Matrix a(dimension, dimension);
  for (Index j = 0; j < dimension; ++j)
    for (Index i = 0; i < dimension; ++i) a(i, j) = rng.normal();
  Eigen::HouseholderQR<Matrix> qr(a);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index j = 0; j < dimension; ++j)
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  return q;
}

std::vector<Index> hybrid_block_sizes(const std::vector<HybridPart>& parts, Index dimension) {
  require(!parts.empty(), "hybrid: no parts");
  double total = 0.0;
  for (const auto& p : parts) {
    require(p.fraction > 0.0, "hybrid: fractions must be positive");
    total += p.fraction;
  }
  require(std::abs(total - 1.0) <= 1e-9, "hybrid: fractions must sum to 1");

  std::vector<Index> sizes(parts.size());
  Index used = 0;
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    sizes[i] = static_cast<Index>(std::round(parts[i].fraction * static_cast<double>(dimension)));
    used += sizes[i];
  }
  sizes.back() = dimension - used;
  for (const Index s : sizes) require(s >= 1, "hybrid: every block needs at least one dimension");
  return sizes;
}

Objective hybrid(std::vector<HybridPart> parts, Index dimension) {
  auto sizes = hybrid_block_sizes(parts, dimension);
  return [parts = std::move(parts), sizes = std::move(sizes), dimension](Eigen::Ref<const Vector> z) {
    require(z.size() == dimension, "hybrid: dimension mismatch");
    double sum = 0.0;
    Index offset = 0;
    for (std::size_t i = 0; i < parts.size(); ++i) {
      sum += parts[i].base(z.segment(offset, sizes[i]));
      offset += sizes[i];
    }
    return sum;
  };
}

Vector composition_weights(Eigen::Ref<const Vector> x, const std::vector<CompositionComponent>& components) {
  const auto n = static_cast<Index>(components.size());
  require(n > 0, "composition: no components");
  Vector w = Vector::Zero(n);
  Vector log_w(n);
  const double dim = static_cast<double>(x.size());
  for (Index i = 0; i < n; ++i) {
    const auto& c = components[static_cast<std::size_t>(i)];
    require(c.shift.size() == x.size(), "composition: shift dimension mismatch");
    const double d2 = (x - c.shift).squaredNorm();
    if (d2 == 0.0) {
      w(i) = 1.0;
      return w;
    }
    // Log domain so far-away points do not underflow every weight to zero.
    log_w(i) = -d2 / (2.0 * dim * c.sigma * c.sigma) - 0.5 * std::log(d2);
  }
  w = (log_w.array() - log_w.maxCoeff()).exp().matrix();
  return w / w.sum();
}

Objective composition(std::vector<CompositionComponent> components) {
  require(!components.empty(), "composition: no components");
  for (const auto& c : components) require(c.sigma > 0.0, "composition: sigma must be positive");
  return [components = std::move(components)](Eigen::Ref<const Vector> x) {
    const Vector w = composition_weights(x, components);
    double sum = 0.0;
    for (std::size_t i = 0; i < components.size(); ++i) {
      const double wi = w(static_cast<Index>(i));
      if (wi == 0.0) continue;
      sum += wi * (components[i].objective(x) + components[i].bias);
    }
    return sum;
  };
}

// ---------------------------------------------------------------------------

namespace {

constexpr double kLow = -100.0;
constexpr double kHigh = 100.0;

enum class Base { elliptic, cigar, ackley, rastrigin, schwefel, hybrid1, hybrid2, hybrid3 };

Objective base_on_block(Base base) {
  // Input scaling follows the usual CEC convention for the [-100, 100] box.
  switch (base) {
    case Base::elliptic:
      return [](Eigen::Ref<const Vector> z) { return elliptic(z); };
    case Base::cigar:
      return [](Eigen::Ref<const Vector> z) { return cigar(z); };
    case Base::ackley:
      return [](Eigen::Ref<const Vector> z) { return ackley(z); };
    case Base::rastrigin:
      return [](Eigen::Ref<const Vector> z) { return rastrigin(0.0512 * z); };
    case Base::schwefel:
      return [](Eigen::Ref<const Vector> z) { return schwefel_modified(10.0 * z); };
    default:
      break;
  }
  throw ContractViolation("base_on_block: not a base function");
}

Objective hybrid_of(Base which, Index dimension) {
  switch (which) {
    case Base::hybrid1:
      return hybrid({{base_on_block(Base::schwefel), 0.3},
                     {base_on_block(Base::rastrigin), 0.3},
                     {base_on_block(Base::elliptic), 0.4}},
                    dimension);
    case Base::hybrid2:
      return hybrid({{base_on_block(Base::cigar), 0.2},
                     {base_on_block(Base::ackley), 0.2},
                     {base_on_block(Base::rastrigin), 0.3},
                     {base_on_block(Base::elliptic), 0.3}},
                    dimension);
    case Base::hybrid3:
      return hybrid({{base_on_block(Base::ackley), 0.1},
                     {base_on_block(Base::rastrigin), 0.2},
                     {base_on_block(Base::elliptic), 0.2},
                     {base_on_block(Base::cigar), 0.2},
                     {base_on_block(Base::schwefel), 0.3}},
                    dimension);
    default:
      return base_on_block(which);
  }
}

// f(R (x - o)) with a freshly drawn shift in the central 80% of the box.
struct Shifted {
  Objective objective;
  Vector shift;
};

Shifted shifted_rotated(Base base, Index dimension, RandomSource& rng, double scale = 1.0) {
  Vector shift(dimension);
  for (Index d = 0; d < dimension; ++d) shift(d) = rng.uniform(0.8 * kLow, 0.8 * kHigh);
  auto transform = std::make_shared<const TransformSpec>(shift, random_rotation(dimension, rng));
  auto inner = hybrid_of(base, dimension);
  Objective f = [transform, inner = std::move(inner), scale](Eigen::Ref<const Vector> x) {
    return scale * inner(apply_transform(x, *transform));
  };
  return {std::move(f), std::move(shift)};
}

struct ComponentDef {
  Base base;
  double scale;
  double sigma;
  double bias;
};

const std::vector<std::vector<ComponentDef>>& composition_table() {
  static const std::vector<std::vector<ComponentDef>> table = {
      {{Base::rastrigin, 1.0, 10, 0}, {Base::elliptic, 1e-6, 20, 100}, {Base::cigar, 1e-6, 30, 200}},
      {{Base::schwefel, 1.0, 10, 0}, {Base::rastrigin, 1.0, 30, 100}, {Base::hybrid1, 1e-6, 50, 200}},
      {{Base::ackley, 1.0, 10, 0},
       {Base::rastrigin, 1.0, 20, 100},
       {Base::elliptic, 1e-6, 20, 200},
       {Base::cigar, 1e-6, 30, 300},
       {Base::schwefel, 1.0, 30, 400}},
      {{Base::schwefel, 1.0, 10, 0},
       {Base::rastrigin, 1.0, 20, 100},
       {Base::elliptic, 1e-6, 20, 200},
       {Base::ackley, 1.0, 30, 300},
       {Base::cigar, 1e-6, 30, 400}},
      {{Base::hybrid3, 1e-6, 10, 0},
       {Base::rastrigin, 1.0, 10, 100},
       {Base::hybrid2, 1e-6, 10, 200},
       {Base::schwefel, 1.0, 20, 300},
       {Base::elliptic, 1e-6, 20, 400}},
      {{Base::ackley, 1.0, 10, 0},
       {Base::rastrigin, 1.0, 20, 100},
       {Base::cigar, 1e-6, 30, 200},
       {Base::elliptic, 1e-6, 40, 300},
       {Base::schwefel, 1.0, 50, 400},
       {Base::hybrid1, 1e-6, 60, 500},
       {Base::hybrid2, 1e-6, 70, 600}},
      {{Base::rastrigin, 1.0, 10, 0},
       {Base::ackley, 1.0, 10, 100},
       {Base::elliptic, 1e-6, 20, 200},
       {Base::cigar, 1e-6, 20, 300},
       {Base::schwefel, 1.0, 30, 400},
       {Base::hybrid1, 1e-6, 30, 500},
       {Base::hybrid2, 1e-6, 40, 600},
       {Base::hybrid3, 1e-6, 40, 700},
       {Base::rastrigin, 1.0, 50, 800},
       {Base::ackley, 1.0, 50, 900}},
  };
  return table;
}

struct Entry {
  std::string name;
  double bias;
  std::function<Benchmark(Index, RandomSource&)> build;
};

Benchmark single(Base base, Index dimension, RandomSource& rng) {
  auto s = shifted_rotated(base, dimension, rng);
  Benchmark b;
  b.objective = std::move(s.objective);
  b.optimum = std::move(s.shift);
  return b;
}

Benchmark composed(std::size_t which, Index dimension, RandomSource& rng) {
  std::vector<CompositionComponent> components;
  for (const auto& def : composition_table()[which]) {
    auto s = shifted_rotated(def.base, dimension, rng, def.scale);
    components.push_back({std::move(s.objective), std::move(s.shift), def.sigma, def.bias});
  }
  Benchmark b;
  b.optimum = components.front().shift;
  b.objective = composition(std::move(components));
  return b;
}

const std::vector<Entry>& registry() {
  static const std::vector<Entry> entries = [] {
    std::vector<Entry> out;
    const std::pair<const char*, Base> singles[] = {
        {"elliptic_shifted_rotated", Base::elliptic}, {"cigar_shifted_rotated", Base::cigar},
        {"ackley_shifted_rotated", Base::ackley},     {"rastrigin_shifted_rotated", Base::rastrigin},
        {"schwefel_shifted_rotated", Base::schwefel}, {"hybrid1", Base::hybrid1},
        {"hybrid2", Base::hybrid2},                   {"hybrid3", Base::hybrid3}};
    double bias = 100.0;
    for (const auto& [name, base] : singles) {
      out.push_back({name, bias, [base = base](Index d, RandomSource& rng) { return single(base, d, rng); }});
      bias += 100.0;
    }
    for (std::size_t i = 0; i < composition_table().size(); ++i) {
      out.push_back({"composition" + std::to_string(i + 1), bias,
                     [i](Index d, RandomSource& rng) { return composed(i, d, rng); }});
      bias += 100.0;
    }
    return out;
  }();
  return entries;
}

}  // namespace

std::vector<std::string> benchmark_names() {
  std::vector<std::string> names;
  for (const auto& e : registry()) names.push_back(e.name);
  return names;
}

Benchmark make_benchmark(const std::string& name, Index dimension, std::uint64_t seed) {
  const auto& entries = registry();
  const auto it = std::find_if(entries.begin(), entries.end(), [&](const Entry& e) { return e.name == name; });
  if (it == entries.end()) {
    std::string list;
    for (const auto& e : entries) list += (list.empty() ? "" : ", ") + e.name;
    throw LookupError("unknown function '" + name + "'; available: " + list);
  }
  require(dimension >= 1, "make_benchmark: dimension must be positive");

  RandomSource rng(seed, 0);
  Benchmark b = it->build(dimension, rng);
  b.spec = {it->name, dimension, Bounds<double>::uniform(dimension, kLow, kHigh), it->bias};

  Objective raw = std::move(b.objective);
  const double bias = it->bias;
  b.objective = [raw = std::move(raw), bias](Eigen::Ref<const Vector> x) { return raw(x) + bias; };
  try {
    // Catches block layouts that are too small (e.g. a one-dimensional cigar block).
    (void)b.objective(b.optimum);
  } catch (const ContractViolation& e) {
    throw ContractViolation("make_benchmark: " + name + " is not defined for dimension " +
                            std::to_string(dimension) + " (" + e.what() + ")");
  }
  return b;
}

}  // namespace epso::bench
