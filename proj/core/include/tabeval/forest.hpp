#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "tabeval/matrix.hpp"

namespace tabeval {

enum class FeatureRule { sqrt, all, fixed };

struct ForestConfig {
  std::size_t n_trees = 100;
  std::optional<std::size_t> max_depth;  // nullopt: unlimited
  std::size_t min_samples_leaf = 1;
  FeatureRule features_per_split = FeatureRule::sqrt;
  std::size_t fixed_features = 1;  // used when features_per_split == fixed
  bool bootstrap = true;
  std::uint64_t seed = 0;

  /// Number of candidate features examined per node for `width` inputs.
  std::size_t features_for(std::size_t width) const;
  void validate() const;
};

nlohmann::json to_json(const ForestConfig& cfg);
ForestConfig forest_config_from_json(const nlohmann::json& doc);

struct TreeNode {
  std::int32_t feature = -1;  // -1 marks a leaf
  double threshold = 0.0;     // rows with x[feature] <= threshold go left
  std::int32_t left = -1;
  std::int32_t right = -1;
  std::array<double, 2> counts{0.0, 0.0};  // training class counts reaching the node

  bool is_leaf() const { return feature < 0; }
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  const TreeNode& leaf_for(const double* row) const;
  std::size_t leaf_count() const;
  std::size_t depth() const;
};

struct RandomForestModel {
  std::vector<DecisionTree> trees;
  std::size_t n_classes = 2;
  std::size_t n_features = 0;
  ForestConfig config;

  /// FNV-1a digest over every node; identical models hash identically.
  std::uint64_t hash() const;
};

struct SplitChoice {
  std::size_t feature = 0;
  double threshold = 0.0;
};

/// Best Gini split of `rows` over `features` with thresholds at midpoints of
/// consecutive distinct values; each side must keep min_samples_leaf rows.
/// Ties go to the lowest feature index, then the lowest threshold. Impurities
/// are compared exactly in integer arithmetic. `x` is column-major.
std::optional<SplitChoice> find_best_split(const Eigen::MatrixXd& x, std::span<const std::uint32_t> y,
                                           std::span<const std::size_t> rows,
                                           std::span<const std::size_t> features,
                                           std::size_t min_samples_leaf);

/// CART trees on seeded bootstrap resamples. Tree t draws from its own stream
/// derive_seed(seed, t), so the model does not depend on thread count.
/// Errors: EmptyData, SingleClass, LengthMismatch.
RandomForestModel train_forest(const Matrix& x, std::span<const std::uint32_t> y, const ForestConfig& cfg);

/// n x 2 matrix: per row, the mean over trees (in index order) of the leaf
/// class frequencies. Throws DimensionMismatch.
Matrix predict_proba(const RandomForestModel& m, const Matrix& x);

/// Argmax of predict_proba; ties go to class 0.
std::vector<std::uint32_t> predict(const RandomForestModel& m, const Matrix& x);
std::vector<std::uint32_t> argmax_labels(const Matrix& proba);

/// Fraction of exact matches. Throws LengthMismatch (also for empty input).
double accuracy(std::span<const std::uint32_t> predicted, std::span<const std::uint32_t> truth);

}  // namespace tabeval
