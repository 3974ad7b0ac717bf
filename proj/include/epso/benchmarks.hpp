#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "epso/core.hpp"
#include "epso/swarm.hpp"

namespace epso::bench {

// Base functions. Each is non-negative with its minimum 0 at z = 0, except
// schwefel whose minimizer sits at z_d = 420.9687 (value within 1e-3 of 0).

/// High conditioned elliptic: sum_d (1e6)^(d/(D-1)) z_d^2.
template <typename Derived>
typename Derived::Scalar elliptic(const Eigen::MatrixBase<Derived>& z) {
  using Scalar = typename Derived::Scalar;
  const Index n = z.size();
  require(n > 0, "elliptic: empty input");
  Scalar sum(0);
  for (Index d = 0; d < n; ++d) {
    const Scalar exponent = n == 1 ? Scalar(0) : Scalar(d) / Scalar(n - 1);
    sum += std::pow(Scalar(1e6), exponent) * z(d) * z(d);
  }
  return sum;
}

template <typename Derived>
typename Derived::Scalar cigar(const Eigen::MatrixBase<Derived>& z) {
  using Scalar = typename Derived::Scalar;
  require(z.size() >= 2, "cigar: needs at least two dimensions");
  return z(0) * z(0) + Scalar(1e6) * z.tail(z.size() - 1).squaredNorm();
}

template <typename Derived>
typename Derived::Scalar ackley(const Eigen::MatrixBase<Derived>& z) {
  using Scalar = typename Derived::Scalar;
  require(z.size() > 0, "ackley: empty input");
  const Scalar n = Scalar(z.size());
  const Scalar mean_sq = z.squaredNorm() / n;
  Scalar mean_cos(0);
  for (Index d = 0; d < z.size(); ++d) mean_cos += std::cos(Scalar(2) * std::numbers::pi_v<Scalar> * z(d));
  mean_cos /= n;
  // Grouped so both brackets cancel exactly at the optimum.
  return (Scalar(20) - Scalar(20) * std::exp(Scalar(-0.2) * std::sqrt(mean_sq))) +
         (std::numbers::e_v<Scalar> - std::exp(mean_cos));
}

template <typename Derived>
typename Derived::Scalar rastrigin(const Eigen::MatrixBase<Derived>& z) {
  using Scalar = typename Derived::Scalar;
  require(z.size() > 0, "rastrigin: empty input");
  Scalar sum(0);
  for (Index d = 0; d < z.size(); ++d)
    sum += z(d) * z(d) - Scalar(10) * std::cos(Scalar(2) * std::numbers::pi_v<Scalar> * z(d)) + Scalar(10);
  return sum;
}

inline constexpr double schwefel_optimum = 420.9687462275036;

/// 418.9829 D - sum_d z_d sin(sqrt|z_d|), defined on [-500, 500]^D.
template <typename Derived>
typename Derived::Scalar schwefel(const Eigen::MatrixBase<Derived>& z) {
  using Scalar = typename Derived::Scalar;
  require(z.size() > 0, "schwefel: empty input");
  Scalar sum(0);
  for (Index d = 0; d < z.size(); ++d) {
    require(std::abs(z(d)) <= Scalar(500), "schwefel: component outside [-500, 500]");
    sum += z(d) * std::sin(std::sqrt(std::abs(z(d))));
  }
  return Scalar(418.9829) * Scalar(z.size()) - sum;
}

/// Schwefel shifted so its minimizer is z = 0, with components folded back
/// into [-500, 500] and a quadratic penalty outside, so it accepts any input.
template <typename Derived>
typename Derived::Scalar schwefel_modified(const Eigen::MatrixBase<Derived>& z) {
  using Scalar = typename Derived::Scalar;
  const Index n = z.size();
  require(n > 0, "schwefel_modified: empty input");
  VectorX<Scalar> folded(n);
  Scalar penalty(0);
  for (Index d = 0; d < n; ++d) {
    const Scalar u = z(d) + Scalar(schwefel_optimum);
    if (u > Scalar(500)) {
      folded(d) = Scalar(500) - std::fmod(u, Scalar(500));
      penalty += (u - Scalar(500)) * (u - Scalar(500)) / (Scalar(10000) * Scalar(n));
    } else if (u < Scalar(-500)) {
      folded(d) = Scalar(-500) + std::fmod(std::abs(u), Scalar(500));
      penalty += (u + Scalar(500)) * (u + Scalar(500)) / (Scalar(10000) * Scalar(n));
    } else {
      folded(d) = u;
    }
  }
  return schwefel(folded) + penalty;
}

// ---------------------------------------------------------------------------
// Transforms and composers

/// z = rotation * (x - shift). The rotation must be orthonormal to 1e-9.
class TransformSpec {
 public:
  TransformSpec(Vector shift, Matrix rotation);

  static TransformSpec identity(Index dimension);

  const Vector& shift() const { return shift_; }
  const Matrix& rotation() const { return rotation_; }
  Index dimension() const { return shift_.size(); }

 private:
  Vector shift_;
  Matrix rotation_;
};

template <typename Derived>
Vector apply_transform(const Eigen::MatrixBase<Derived>& x, const TransformSpec& t) {
  require(x.size() == t.dimension(), "apply_transform: dimension mismatch");
  return t.rotation() * (x - t.shift());
}

/// Random orthonormal matrix: QR of a Gaussian matrix with the sign of R's
/// diagonal folded into Q.
Matrix random_rotation(Index dimension, RandomSource& rng);

struct HybridPart {
  Objective base;
  double fraction;
};

/// Splits the input into contiguous blocks by fraction (the last block takes
/// the remainder) and sums each base function over its block.
Objective hybrid(std::vector<HybridPart> parts, Index dimension);

/// Block sizes hybrid() uses for the given parts and dimension.
std::vector<Index> hybrid_block_sizes(const std::vector<HybridPart>& parts, Index dimension);

struct CompositionComponent {
  Objective objective;
  Vector shift;
  double sigma;
  double bias;
};

/// Normalized weights of a composition at x. Components whose shift equals x
/// exactly take the whole weight.
Vector composition_weights(Eigen::Ref<const Vector> x, const std::vector<CompositionComponent>& components);

/// sum_i w_i(x) (f_i(x) + bias_i).
Objective composition(std::vector<CompositionComponent> components);

// ---------------------------------------------------------------------------
// Registry

struct ObjectiveSpec {
  std::string name;
  Index dimension = 0;
  Bounds<double> bounds;
  double bias = 0.0;
};

struct Benchmark {
  ObjectiveSpec spec;
  Objective objective;
  Vector optimum;  // argmin; the value there is spec.bias (schwefel-based: within 1e-3)
};

std::vector<std::string> benchmark_names();

/// Builds a named function with seeded shift and rotation. Throws LookupError
/// for unknown names and ContractViolation when the dimension is too small.
Benchmark make_benchmark(const std::string& name, Index dimension, std::uint64_t seed);

}  // namespace epso::bench
