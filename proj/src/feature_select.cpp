#include "epso/feature_select.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <numeric>

namespace epso::fs {

std::vector<Index> FeatureMask::indices() const {
  std::vector<Index> out;
  out.reserve(count);
  for (std::size_t f = 0; f < selected.size(); ++f)
    if (selected[f]) out.push_back(static_cast<Index>(f));
  return out;
}

FeatureMask FeatureMask::all(std::size_t features) { return {std::vector<bool>(features, true), features}; }

FeatureMask FeatureMask::from_indices(std::size_t features, std::span<const Index> chosen) {
  FeatureMask mask{std::vector<bool>(features, false), 0};
  for (const Index f : chosen) {
    require(f >= 0 && static_cast<std::size_t>(f) < features, "FeatureMask: index out of range");
    if (!mask.selected[static_cast<std::size_t>(f)]) ++mask.count;
    mask.selected[static_cast<std::size_t>(f)] = true;
  }
  return mask;
}

void WrapperConfig::validate() const {
  if (!(threshold >= -1.0 && threshold < 1.0)) throw ConfigError("threshold", "must lie in [-1, 1)");
  if (k_neighbors < 1) throw ConfigError("k_neighbors", "must be at least 1");
  if (protocol == Protocol::kfold && folds < 2) throw ConfigError("folds", "must be at least 2");
}

namespace {

struct Neighbor {
  double distance;
  std::size_t row;
};

// Majority vote over neighbors already ordered by (distance, row).
int vote(std::span<const Neighbor> nearest, std::span<const int> labels) {
  if (nearest.size() == 1) return labels[nearest.front().row];
  std::vector<std::pair<int, std::size_t>> tally;  // (label, count) in order of first appearance
  for (const auto& n : nearest) {
    const int l = labels[n.row];
    auto it = std::find_if(tally.begin(), tally.end(), [&](const auto& t) { return t.first == l; });
    if (it == tally.end())
      tally.emplace_back(l, 1);
    else
      ++it->second;
  }
  // max_element keeps the first maximum, which is the class that ranked first.
  return std::max_element(tally.begin(), tally.end(),
                          [](const auto& a, const auto& b) { return a.second < b.second; })
      ->first;
}

bool closer(const Neighbor& a, const Neighbor& b) {
  return a.distance < b.distance || (a.distance == b.distance && a.row < b.row);
}

// k nearest candidates ordered by (distance, row).
std::vector<Neighbor> nearest_k(std::vector<Neighbor> candidates, std::size_t k) {
  k = std::min(k, candidates.size());
  std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(k), candidates.end(), closer);
  candidates.resize(k);
  return candidates;
}

}  // namespace

int knn_classify(const Matrix& train, std::span<const int> labels, Eigen::Ref<const Vector> query,
                 std::span<const Index> features, std::size_t k) {
  require(k >= 1, "knn_classify: k must be at least 1");
  require(!features.empty(), "knn_classify: empty feature mask");
  require(train.rows() > 0, "knn_classify: empty training set");
  require(static_cast<std::size_t>(train.rows()) == labels.size(), "knn_classify: label count mismatch");
  require(query.size() == train.cols(), "knn_classify: query width mismatch");

  std::vector<Neighbor> candidates(static_cast<std::size_t>(train.rows()));
  for (Index r = 0; r < train.rows(); ++r) {
    double d2 = 0.0;
    for (const Index f : features) {
      const double diff = train(r, f) - query(f);
      d2 += diff * diff;
    }
    candidates[static_cast<std::size_t>(r)] = {d2, static_cast<std::size_t>(r)};
  }
  const auto nearest = nearest_k(std::move(candidates), k);
  return vote(nearest, labels);
}

MaskEvaluator::MaskEvaluator(std::shared_ptr<const data::Dataset> dataset, WrapperConfig config, std::uint64_t seed)
    : dataset_(std::move(dataset)), config_(config) {
  require(dataset_ != nullptr, "MaskEvaluator: null dataset");
  config_.validate();
  const auto n = static_cast<std::size_t>(dataset_->observations());
  if (config_.protocol == Protocol::kfold) {
    folds_ = data::stratified_folds(*dataset_, std::min(config_.folds, n), seed);
  } else {
    folds_.resize(n);
    for (std::size_t i = 0; i < n; ++i) folds_[i] = {i};
  }
  fold_of_.assign(n, 0);
  for (std::size_t f = 0; f < folds_.size(); ++f)
    for (const std::size_t i : folds_[f]) fold_of_[i] = f;
}

std::vector<double> MaskEvaluator::fold_accuracies(const FeatureMask& mask) const {
  const auto& d = *dataset_;
  const auto n = static_cast<std::size_t>(d.observations());
  require(mask.selected.size() == static_cast<std::size_t>(d.feature_count()),
          "evaluate_mask: mask width does not match the dataset");
  if (mask.count == 0) {
    return std::vector<double>(config_.protocol == Protocol::loo ? 1 : folds_.size(), 0.0);
  }

  // Selected columns, one sample per contiguous column.
  const auto idx = mask.indices();
  Matrix cols(static_cast<Index>(idx.size()), static_cast<Index>(n));
  for (std::size_t j = 0; j < idx.size(); ++j) cols.row(static_cast<Index>(j)) = d.features.col(idx[j]).transpose();

  // Symmetric pairwise squared distances.
  Matrix dist(static_cast<Index>(n), static_cast<Index>(n));
  for (Index a = 0; a < static_cast<Index>(n); ++a) {
    dist(a, a) = 0.0;
    for (Index b = a + 1; b < static_cast<Index>(n); ++b) {
      const double d2 = (cols.col(a) - cols.col(b)).squaredNorm();
      dist(a, b) = d2;
      dist(b, a) = d2;
    }
  }

  // Under LOO each row is its own fold, so "other folds" means "other rows".
  std::vector<std::size_t> correct(folds_.size(), 0);
  std::vector<Neighbor> candidates;
  candidates.reserve(n);
  for (std::size_t q = 0; q < n; ++q) {
    candidates.clear();
    const std::size_t fq = fold_of_[q];
    for (std::size_t r = 0; r < n; ++r)
      if (fold_of_[r] != fq) candidates.push_back({dist(static_cast<Index>(q), static_cast<Index>(r)), r});
    const int predicted = vote(nearest_k(candidates, config_.k_neighbors), d.labels);
    if (predicted == d.labels[q]) ++correct[fq];
  }

  if (config_.protocol == Protocol::loo) {
    const std::size_t total = std::accumulate(correct.begin(), correct.end(), std::size_t{0});
    return {static_cast<double>(total) / static_cast<double>(n)};
  }
  std::vector<double> out(folds_.size());
  for (std::size_t f = 0; f < folds_.size(); ++f)
    out[f] = static_cast<double>(correct[f]) / static_cast<double>(folds_[f].size());
  return out;
}

double MaskEvaluator::accuracy(const FeatureMask& mask) const {
  const auto per_fold = fold_accuracies(mask);
  return std::accumulate(per_fold.begin(), per_fold.end(), 0.0) / static_cast<double>(per_fold.size());
}

double evaluate_mask(const data::Dataset& d, const FeatureMask& mask, const WrapperConfig& cfg, std::uint64_t seed) {
  // Non-owning view; the evaluator does not outlive this call.
  const MaskEvaluator evaluator(std::shared_ptr<const data::Dataset>(&d, [](const data::Dataset*) {}), cfg, seed);
  return evaluator.accuracy(mask);
}

Objective wrapper_objective(std::shared_ptr<const data::Dataset> d, const WrapperConfig& cfg, std::uint64_t seed) {
  auto evaluator = std::make_shared<const MaskEvaluator>(std::move(d), cfg, seed);
  return [evaluator](Eigen::Ref<const Vector> position) {
    return 1.0 - evaluator->accuracy(binarize(position, evaluator->config().threshold));
  };
}

FeatureSelectionResult select_features(std::shared_ptr<const data::Dataset> d, EpsoConfig epso_config,
                                       const WrapperConfig& wrapper_cfg, Algorithm algorithm) {
  require(d != nullptr, "select_features: null dataset");
  const auto F = static_cast<std::size_t>(d->feature_count());
  if (epso_config.dimension != F)
    throw ConfigError("dimension", "must equal the dataset's feature count (" + std::to_string(F) + ")");
  epso_config.bounds = Bounds<double>::uniform(static_cast<Index>(F), -1.0, 1.0);
  epso_config.validate();
  wrapper_cfg.validate();

  const auto evaluator = std::make_shared<const MaskEvaluator>(d, wrapper_cfg, epso_config.seed);
  const Objective objective = [evaluator](Eigen::Ref<const Vector> position) {
    return 1.0 - evaluator->accuracy(binarize(position, evaluator->config().threshold));
  };

  FeatureSelectionResult result;
  result.run = optimize(epso_config, objective, algorithm);
  result.wall_time = result.run.wall_time;
  result.mask = binarize(result.run.best_position, wrapper_cfg.threshold);
  result.accuracy = evaluator->accuracy(result.mask);
  for (const Index f : result.mask.indices()) result.selected_names.push_back(d->feature_names[static_cast<std::size_t>(f)]);
  return result;
}

}  // namespace epso::fs
