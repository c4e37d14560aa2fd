#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "tabeval/dataio.hpp"

namespace tabeval {

// Quality decrease.
struct NoiseLevel {
  double alpha = 0.1;
};
struct NoisyRows {
  double alpha = 0.5;
  double fraction = 0.1;
};
// Mode drop.
struct SingleModeDrop {
  std::uint32_t label = 0;
};
struct SuccessiveModeDrop {
  std::size_t n_top = 1;
};
struct ExtremeModeDrop {
  double keep_percent = 10.0;
};
// Mode collapse.
struct CollapseLabelSplit {};
struct CollapseNoSplit {};

using PerturbationVariant = std::variant<NoiseLevel, NoisyRows, SingleModeDrop, SuccessiveModeDrop, ExtremeModeDrop,
                                         CollapseLabelSplit, CollapseNoSplit>;

/// One defect-injection procedure applied to a clean test set.
struct PerturbationSpec {
  PerturbationVariant variant;
  std::uint64_t seed = 0;

  /// "noise_level", "noisy_rows", "single_mode_drop", "successive_mode_drop",
  /// "extreme_mode_drop", "collapse_label_split" or "collapse_no_split".
  std::string variant_name() const;
  nlohmann::json params() const;
  /// Human-readable identifier, unique within a grid, e.g. "noise_level(alpha=0.3)".
  std::string id() const;
};

/// {"variant": ..., "params": {...}, "seed": ...}
nlohmann::json to_json(const PerturbationSpec& spec);
PerturbationSpec perturbation_from_json(const nlohmann::json& doc);

/// 5 noise levels + 10 noisy-row fractions + 2 single drops + 5 successive
/// drops + 5 extreme keeps + 2 collapses. Every spec of a family shares one
/// seed derived from master_seed, so noise draws are common across a sweep.
std::vector<PerturbationSpec> default_grid(std::uint64_t master_seed);

TabularDataset apply_perturbation(const TabularDataset& ds, const PerturbationSpec& spec);

/// Adds alpha * std(column) * N(0,1) to every numerical cell of a seeded
/// choice of floor(row_fraction * n) rows. Categorical and label columns are
/// untouched. The same seed selects nested row sets across fractions and the
/// same standard-normal draws across alphas.
TabularDataset add_gaussian_noise(const TabularDataset& ds, double alpha, double row_fraction, std::uint64_t seed);

struct ModeKey {
  std::vector<std::uint32_t> codes;  // one per categorical column, schema order
  std::size_t count = 0;
};

/// Distinct categorical tuples by count descending, ties in lexicographic code
/// order. Throws NoCategoricalColumns.
std::vector<ModeKey> rank_mode_combinations(const TabularDataset& ds);

/// Errors: ResultEmpty.
TabularDataset drop_label(const TabularDataset& ds, std::uint32_t label);
TabularDataset drop_top_modes(const TabularDataset& ds, std::size_t n);
/// Keeps rows of the ceil(keep_percent/100 * U) least frequent of the U keys.
TabularDataset keep_bottom_modes(const TabularDataset& ds, double keep_percent);

/// Replaces every row by the modal categories (ties: lowest code) and column
/// means, per label group when split_by_label, else over the whole dataset
/// followed by i.i.d. uniform labels. Errors: MissingClass, EmptyDataset.
TabularDataset collapse_modes(const TabularDataset& ds, bool split_by_label, std::uint64_t seed);

}  // namespace tabeval
