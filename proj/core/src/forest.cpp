#include "tabeval/forest.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include "tabeval/error.hpp"
#include "tabeval/parallel.hpp"
#include "tabeval/rng.hpp"

namespace tabeval {
namespace {

using u128 = unsigned __int128;

// Candidate split quality as the fraction num / den where
//   num = S_l * n_r + S_r * n_l,  den = n_l * n_r,  S = c0^2 + c1^2.
// Maximizing S_l / n_l + S_r / n_r minimizes the weighted Gini impurity.
struct Score {
  u128 num = 0;
  u128 den = 1;

  bool better_than(const Score& o) const { return num * o.den > o.num * den; }
};

Score score_of(std::uint64_t l0, std::uint64_t l1, std::uint64_t r0, std::uint64_t r1) {
  const u128 nl = l0 + l1, nr = r0 + r1;
  const u128 sl = u128(l0) * l0 + u128(l1) * l1;
  const u128 sr = u128(r0) * r0 + u128(r1) * r1;
  return {sl * nr + sr * nl, nl * nr};
}

double midpoint(double a, double b) {
  double m = a + (b - a) / 2.0;
  // Keeps a <= m < b under rounding.
  if (!(m < b)) m = a;
  return m;
}

struct Builder {
  const Eigen::MatrixXd& x;
  std::span<const std::uint32_t> y;
  const ForestConfig& cfg;
  std::size_t n_candidates;
  Rng rng;

  DecisionTree build(std::vector<std::size_t> rows) {
    DecisionTree tree;
    struct Pending {
      std::int32_t node;
      std::vector<std::size_t> rows;
      std::size_t depth;
    };
    std::vector<Pending> stack;
    tree.nodes.emplace_back();
    stack.push_back({0, std::move(rows), 0});
    std::vector<std::size_t> all_features(static_cast<std::size_t>(x.cols()));
    std::iota(all_features.begin(), all_features.end(), std::size_t{0});

    while (!stack.empty()) {
      Pending p = std::move(stack.back());
      stack.pop_back();
      TreeNode node;
      for (auto r : p.rows) node.counts[y[r]] += 1.0;

      const bool pure = node.counts[0] == 0.0 || node.counts[1] == 0.0;
      const bool depth_limited = cfg.max_depth && p.depth >= *cfg.max_depth;
      std::optional<SplitChoice> split;
      if (!pure && !depth_limited && p.rows.size() >= 2 * cfg.min_samples_leaf) {
        split = choose_split(p.rows, all_features);
      }
      if (!split) {
        tree.nodes[static_cast<std::size_t>(p.node)] = node;
        continue;
      }

      std::vector<std::size_t> left, right;
      for (auto r : p.rows) {
        (x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(split->feature)) <= split->threshold ? left : right)
            .push_back(r);
      }
      node.feature = static_cast<std::int32_t>(split->feature);
      node.threshold = split->threshold;
      node.left = static_cast<std::int32_t>(tree.nodes.size());
      node.right = node.left + 1;
      tree.nodes.emplace_back();
      tree.nodes.emplace_back();
      tree.nodes[static_cast<std::size_t>(p.node)] = node;
      // Right pushed first so the left subtree is expanded first.
      stack.push_back({node.right, std::move(right), p.depth + 1});
      stack.push_back({node.left, std::move(left), p.depth + 1});
    }
    return tree;
  }

  // Random feature subset of size n_candidates; if none of them admits a
  // valid split, keep drawing features one at a time until one does.
  std::optional<SplitChoice> choose_split(const std::vector<std::size_t>& rows,
                                          std::vector<std::size_t>& features) {
    const std::size_t d = features.size();
    for (std::size_t i = 0; i < d; ++i) {
      std::swap(features[i], features[i + rng.uniform_index(d - i)]);
      if (i + 1 < n_candidates && i + 1 < d) continue;
      std::vector<std::size_t> candidates;
      if (i + 1 == std::min(n_candidates, d)) {
        candidates.assign(features.begin(), features.begin() + static_cast<std::ptrdiff_t>(i + 1));
        std::sort(candidates.begin(), candidates.end());
      } else {
        candidates.push_back(features[i]);
      }
      auto split = find_best_split(x, y, rows, candidates, cfg.min_samples_leaf);
      if (split) return split;
    }
    return std::nullopt;
  }
};

}  // namespace

std::size_t ForestConfig::features_for(std::size_t width) const {
  std::size_t m = width;
  switch (features_per_split) {
    case FeatureRule::sqrt:
      m = static_cast<std::size_t>(std::sqrt(static_cast<double>(width)));
      break;
    case FeatureRule::all:
      m = width;
      break;
    case FeatureRule::fixed:
      m = fixed_features;
      break;
  }
  return std::clamp<std::size_t>(m, 1, std::max<std::size_t>(width, 1));
}

void ForestConfig::validate() const {
  if (n_trees < 1) throw Error(ErrorCode::InvalidArgument, "n_trees must be >= 1");
  if (min_samples_leaf < 1) throw Error(ErrorCode::InvalidArgument, "min_samples_leaf must be >= 1");
  if (features_per_split == FeatureRule::fixed && fixed_features < 1) {
    throw Error(ErrorCode::InvalidArgument, "fixed features_per_split must be >= 1");
  }
}

nlohmann::json to_json(const ForestConfig& cfg) {
  nlohmann::json fps;
  switch (cfg.features_per_split) {
    case FeatureRule::sqrt: fps = "sqrt"; break;
    case FeatureRule::all: fps = "all"; break;
    case FeatureRule::fixed: fps = cfg.fixed_features; break;
  }
  return {{"n_trees", cfg.n_trees},
          {"max_depth", cfg.max_depth ? nlohmann::json(*cfg.max_depth) : nlohmann::json(nullptr)},
          {"min_samples_leaf", cfg.min_samples_leaf},
          {"features_per_split", fps},
          {"bootstrap", cfg.bootstrap},
          {"seed", cfg.seed}};
}

ForestConfig forest_config_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw Error(ErrorCode::InvalidArgument, "forest config must be an object");
  ForestConfig cfg;
  cfg.n_trees = doc.value("n_trees", cfg.n_trees);
  if (doc.contains("max_depth") && !doc["max_depth"].is_null()) cfg.max_depth = doc["max_depth"].get<std::size_t>();
  cfg.min_samples_leaf = doc.value("min_samples_leaf", cfg.min_samples_leaf);
  if (doc.contains("features_per_split")) {
    const auto& fps = doc["features_per_split"];
    if (fps.is_number_unsigned() || fps.is_number_integer()) {
      cfg.features_per_split = FeatureRule::fixed;
      cfg.fixed_features = fps.get<std::size_t>();
    } else if (fps == "sqrt") {
      cfg.features_per_split = FeatureRule::sqrt;
    } else if (fps == "all") {
      cfg.features_per_split = FeatureRule::all;
    } else {
      throw Error(ErrorCode::InvalidArgument, "features_per_split must be \"sqrt\", \"all\" or an integer");
    }
  }
  cfg.bootstrap = doc.value("bootstrap", cfg.bootstrap);
  cfg.seed = doc.value("seed", cfg.seed);
  cfg.validate();
  return cfg;
}

const TreeNode& DecisionTree::leaf_for(const double* row) const {
  const TreeNode* node = &nodes[0];
  while (!node->is_leaf()) {
    node = &nodes[static_cast<std::size_t>(row[node->feature] <= node->threshold ? node->left : node->right)];
  }
  return *node;
}

std::size_t DecisionTree::leaf_count() const {
  return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

std::size_t DecisionTree::depth() const {
  std::vector<std::size_t> depth(nodes.size(), 0);
  std::size_t deepest = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    deepest = std::max(deepest, depth[i]);
    if (!nodes[i].is_leaf()) {
      depth[static_cast<std::size_t>(nodes[i].left)] = depth[i] + 1;
      depth[static_cast<std::size_t>(nodes[i].right)] = depth[i] + 1;
    }
  }
  return deepest;
}

std::uint64_t RandomForestModel::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&h](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xff;
      h *= 0x100000001b3ULL;
    }
  };
  feed(trees.size());
  feed(n_features);
  for (const auto& t : trees) {
    feed(t.nodes.size());
    for (const auto& n : t.nodes) {
      feed(static_cast<std::uint64_t>(static_cast<std::int64_t>(n.feature)));
      feed(std::bit_cast<std::uint64_t>(n.threshold));
      feed(static_cast<std::uint64_t>(static_cast<std::int64_t>(n.left)));
      feed(static_cast<std::uint64_t>(static_cast<std::int64_t>(n.right)));
      feed(std::bit_cast<std::uint64_t>(n.counts[0]));
      feed(std::bit_cast<std::uint64_t>(n.counts[1]));
    }
  }
  return h;
}

std::optional<SplitChoice> find_best_split(const Eigen::MatrixXd& x, std::span<const std::uint32_t> y,
                                           std::span<const std::size_t> rows,
                                           std::span<const std::size_t> features,
                                           std::size_t min_samples_leaf) {
  std::uint64_t total[2] = {0, 0};
  for (auto r : rows) ++total[y[r]];
  const std::size_t n = rows.size();

  std::optional<SplitChoice> best;
  Score best_score;
  std::vector<std::pair<double, std::uint32_t>> sorted(n);
  for (std::size_t f : features) {
    for (std::size_t i = 0; i < n; ++i) {
      sorted[i] = {x(static_cast<Eigen::Index>(rows[i]), static_cast<Eigen::Index>(f)), y[rows[i]]};
    }
    std::sort(sorted.begin(), sorted.end());
    std::uint64_t left[2] = {0, 0};
    for (std::size_t i = 0; i + 1 < n; ++i) {
      ++left[sorted[i].second];
      if (sorted[i].first == sorted[i + 1].first) continue;
      const std::size_t n_left = i + 1;
      if (n_left < min_samples_leaf || n - n_left < min_samples_leaf) continue;
      const Score s = score_of(left[0], left[1], total[0] - left[0], total[1] - left[1]);
      if (!best || s.better_than(best_score)) {
        best = SplitChoice{f, midpoint(sorted[i].first, sorted[i + 1].first)};
        best_score = s;
      }
    }
  }
  return best;
}

RandomForestModel train_forest(const Matrix& x, std::span<const std::uint32_t> y, const ForestConfig& cfg) {
  cfg.validate();
  if (static_cast<std::size_t>(x.rows()) != y.size()) {
    throw Error(ErrorCode::LengthMismatch, "feature rows and labels differ in length");
  }
  if (x.rows() < 2) throw Error(ErrorCode::EmptyData, "need at least 2 training rows");
  std::size_t per_class[2] = {0, 0};
  for (auto v : y) {
    if (v > 1) throw Error(ErrorCode::InvalidArgument, "labels must be 0 or 1");
    ++per_class[v];
  }
  if (per_class[0] == 0 || per_class[1] == 0) throw Error(ErrorCode::SingleClass, "training labels contain one class");

  const Eigen::MatrixXd columns = x;  // column-major copy for split scans
  const auto n = static_cast<std::size_t>(x.rows());
  RandomForestModel m;
  m.n_features = static_cast<std::size_t>(x.cols());
  m.config = cfg;
  m.trees.resize(cfg.n_trees);
  const std::size_t candidates = cfg.features_for(m.n_features);

  parallel_for(cfg.n_trees, [&](std::size_t t) {
    Builder builder{columns, y, cfg, candidates, Rng(derive_seed(cfg.seed, t))};
    std::vector<std::size_t> rows(n);
    if (cfg.bootstrap) {
      for (auto& r : rows) r = builder.rng.uniform_index(n);
    } else {
      std::iota(rows.begin(), rows.end(), std::size_t{0});
    }
    m.trees[t] = builder.build(std::move(rows));
  });
  return m;
}

Matrix predict_proba(const RandomForestModel& m, const Matrix& x) {
  if (static_cast<std::size_t>(x.cols()) != m.n_features) {
    throw Error(ErrorCode::DimensionMismatch, "input width " + std::to_string(x.cols()) +
                                                  " differs from training width " + std::to_string(m.n_features));
  }
  const auto n = static_cast<std::size_t>(x.rows());
  Matrix out = Matrix::Zero(x.rows(), 2);
  const double inv_trees = 1.0 / static_cast<double>(m.trees.size());
  parallel_for(n, [&](std::size_t r) {
    const double* row = x.data() + r * static_cast<std::size_t>(x.cols());
    double p0 = 0.0, p1 = 0.0;
    for (const auto& tree : m.trees) {
      const TreeNode& leaf = tree.leaf_for(row);
      const double total = leaf.counts[0] + leaf.counts[1];
      p0 += leaf.counts[0] / total;
      p1 += leaf.counts[1] / total;
    }
    out(static_cast<Eigen::Index>(r), 0) = p0 * inv_trees;
    out(static_cast<Eigen::Index>(r), 1) = p1 * inv_trees;
  });
  return out;
}

std::vector<std::uint32_t> argmax_labels(const Matrix& proba) {
  std::vector<std::uint32_t> out(static_cast<std::size_t>(proba.rows()));
  for (Eigen::Index r = 0; r < proba.rows(); ++r) out[static_cast<std::size_t>(r)] = proba(r, 1) > proba(r, 0) ? 1u : 0u;
  return out;
}

std::vector<std::uint32_t> predict(const RandomForestModel& m, const Matrix& x) {
  return argmax_labels(predict_proba(m, x));
}

double accuracy(std::span<const std::uint32_t> predicted, std::span<const std::uint32_t> truth) {
  if (predicted.size() != truth.size() || predicted.empty()) {
    throw Error(ErrorCode::LengthMismatch, "accuracy needs equal-length, non-empty label vectors");
  }
  std::size_t hits = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) hits += predicted[i] == truth[i];
  return static_cast<double>(hits) / static_cast<double>(predicted.size());
}

}  // namespace tabeval
