#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "epso/core.hpp"
#include "epso/dataset.hpp"
#include "epso/swarm.hpp"

namespace epso::fs {

struct FeatureMask {
  std::vector<bool> selected;
  std::size_t count = 0;

  std::vector<Index> indices() const;
  static FeatureMask all(std::size_t features);
  static FeatureMask from_indices(std::size_t features, std::span<const Index> chosen);
};

enum class Protocol { kfold, loo };

struct WrapperConfig {
  double threshold = 0.5;
  std::size_t k_neighbors = 1;
  Protocol protocol = Protocol::kfold;
  std::size_t folds = 10;

  void validate() const;
};

struct FeatureSelectionResult {
  FeatureMask mask;
  double accuracy = 0.0;
  double accuracy_std = 0.0;  // filled in when results are aggregated over runs
  double wall_time = 0.0;
  std::vector<std::string> selected_names;
  RunResult run;
};

/// Feature f is selected iff position(f) > threshold.
template <typename Derived>
FeatureMask binarize(const Eigen::MatrixBase<Derived>& position, double threshold) {
  FeatureMask mask;
  mask.selected.resize(static_cast<std::size_t>(position.size()));
  for (Index f = 0; f < position.size(); ++f) {
    const bool on = position(f) > threshold;
    mask.selected[static_cast<std::size_t>(f)] = on;
    mask.count += on ? 1 : 0;
  }
  return mask;
}

/// Majority label among the k nearest rows of `train` (Euclidean distance over
/// `features`). Equal distances rank the lower row first; a tied vote goes to
/// the class whose member ranks first.
int knn_classify(const Matrix& train, std::span<const int> labels, Eigen::Ref<const Vector> query,
                 std::span<const Index> features, std::size_t k);

/// Scores masks on one dataset with folds frozen at construction.
class MaskEvaluator {
 public:
  MaskEvaluator(std::shared_ptr<const data::Dataset> dataset, WrapperConfig config, std::uint64_t seed);

  /// Mean fold accuracy (or LOO accuracy) of 1..k-NN on the mask. Empty mask scores 0.
  double accuracy(const FeatureMask& mask) const;
  /// Per-fold accuracies; a single entry under LOO.
  std::vector<double> fold_accuracies(const FeatureMask& mask) const;

  const std::vector<data::Fold>& folds() const { return folds_; }
  const data::Dataset& dataset() const { return *dataset_; }
  const WrapperConfig& config() const { return config_; }

 private:
  std::shared_ptr<const data::Dataset> dataset_;
  WrapperConfig config_;
  std::vector<data::Fold> folds_;
  std::vector<std::size_t> fold_of_;
};

double evaluate_mask(const data::Dataset& d, const FeatureMask& mask, const WrapperConfig& cfg, std::uint64_t seed);

/// 1 - accuracy(binarize(position, threshold)); folds are fixed for the lifetime of the objective.
Objective wrapper_objective(std::shared_ptr<const data::Dataset> d, const WrapperConfig& cfg, std::uint64_t seed);

/// Runs the optimizer over [-1, 1]^F. Folds are seeded with epso_config.seed.
FeatureSelectionResult select_features(std::shared_ptr<const data::Dataset> d, EpsoConfig epso_config,
                                       const WrapperConfig& wrapper_cfg, Algorithm algorithm);

}  // namespace epso::fs
