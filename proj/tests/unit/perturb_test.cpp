#include <algorithm>
#include <cmath>
#include <numeric>
#include <map>
#include <set>

#include <gtest/gtest.h>

#include "tabeval/canonical_json.hpp"
#include "tabeval/forest.hpp"
#include "tabeval/metrics.hpp"
#include "tabeval/perturb.hpp"
#include "tabeval/numstats.hpp"
#include "test_util.hpp"

namespace tabeval {
namespace {

using testing::categorical_column;
using testing::label_column;
using testing::numeric_column;

TabularDataset abc_dataset() {
  return TabularDataset({numeric_column("n", {1, 2, 3}), categorical_column("c", {"A", "A", "B"}), label_column({0, 1, 0})});
}

TabularDataset two_column_dataset() {
  return TabularDataset({categorical_column("c1", {"A", "A", "A", "B"}), categorical_column("c2", {"X", "X", "Y", "X"}),
                         label_column({0, 1, 0, 1})});
}

std::vector<std::string> row_strings(const TabularDataset& ds) {
  std::vector<std::string> rows;
  for (std::size_t r = 0; r < ds.row_count(); ++r) {
    std::string s;
    for (const auto& col : ds.columns()) {
      if (col.kind() == ColumnKind::numerical) {
        s += format_double(col.numbers[r]);
      } else if (col.kind() == ColumnKind::categorical) {
        s += col.categories[col.codes[r]];
      } else {
        s += std::to_string(col.codes[r]);
      }
      s += '|';
    }
    rows.push_back(s);
  }
  return rows;
}

std::string key_string(const TabularDataset& ds, std::size_t r) {
  std::string s;
  for (std::size_t c : ds.categorical_indices()) s += ds.column(c).categories[ds.column(c).codes[r]] + "|";
  return s;
}

// Random data with two categorical columns of small alphabets.
TabularDataset random_categorical(Rng& rng, std::size_t rows) {
  std::vector<std::string> a, b;
  std::vector<double> n;
  std::vector<std::uint32_t> y;
  for (std::size_t i = 0; i < rows; ++i) {
    a.push_back(std::string(1, static_cast<char>('a' + rng.uniform_index(3))));
    b.push_back(std::string(1, static_cast<char>('p' + rng.uniform_index(2))));
    n.push_back(rng.normal());
    y.push_back(static_cast<std::uint32_t>(rng.uniform_index(2)));
  }
  return TabularDataset({numeric_column("n", n), categorical_column("a", a), categorical_column("b", b), label_column(y)});
}

TEST(Noise, ZeroAlphaOrFractionIsIdentity) {
  const auto ds = testing::random_mixed_dataset(200, 1);
  EXPECT_EQ(format_csv(add_gaussian_noise(ds, 0.0, 1.0, 4)), format_csv(ds));
  EXPECT_EQ(format_csv(add_gaussian_noise(ds, 0.5, 0.0, 4)), format_csv(ds));
}

TEST(Noise, VarianceOfNoisedStandardNormal) {
  Rng rng(2);
  std::vector<double> x(100000);
  for (auto& v : x) v = rng.normal();
  std::vector<std::uint32_t> y(x.size(), 0);
  y[0] = 1;
  const TabularDataset ds({numeric_column("x", x), label_column(y)});
  const auto out = add_gaussian_noise(ds, 0.5, 1.0, 3);
  const auto& z = out.column(std::size_t{0}).numbers;
  const double m = std::accumulate(z.begin(), z.end(), 0.0) / static_cast<double>(z.size());
  double var = 0.0;
  for (double v : z) var += (v - m) * (v - m);
  var /= static_cast<double>(z.size() - 1);
  EXPECT_NEAR(var, 1.25, 0.03 * 1.25);
}

TEST(Noise, TouchesOnlyNumericalCellsOfChosenRows) {
  const auto ds = testing::random_mixed_dataset(300, 5);
  const auto out = add_gaussian_noise(ds, 0.3, 0.4, 6);
  std::size_t changed_rows = 0;
  for (std::size_t r = 0; r < ds.row_count(); ++r) {
    bool changed = false;
    for (std::size_t c = 0; c < ds.column_count(); ++c) {
      const auto& a = ds.column(c);
      const auto& b = out.column(c);
      if (a.kind() == ColumnKind::numerical) {
        changed = changed || a.numbers[r] != b.numbers[r];
      } else if (a.kind() == ColumnKind::categorical) {
        EXPECT_EQ(a.categories[a.codes[r]], b.categories[b.codes[r]]);
      }
    }
    changed_rows += changed ? 1 : 0;
  }
  EXPECT_EQ(changed_rows, 120u);
  EXPECT_EQ(out.labels(), ds.labels());
}

TEST(Noise, NestedRowsAndCommonDraws) {
  const auto ds = testing::random_mixed_dataset(200, 7);
  const auto small = add_gaussian_noise(ds, 0.5, 0.2, 9);
  const auto large = add_gaussian_noise(ds, 0.5, 0.6, 9);
  const auto weak = add_gaussian_noise(ds, 0.1, 0.2, 9);
  const std::size_t c = ds.numerical_indices().front();
  const auto& base = ds.column(c).numbers;
  for (std::size_t r = 0; r < ds.row_count(); ++r) {
    const double d_small = small.column(c).numbers[r] - base[r];
    if (d_small != 0.0) {
      EXPECT_DOUBLE_EQ(large.column(c).numbers[r] - base[r], d_small);
      EXPECT_NEAR(weak.column(c).numbers[r] - base[r], d_small / 5.0, 1e-9);
    }
  }
}

TEST(RankModes, Examples) {
  const auto ranked = rank_mode_combinations(abc_dataset());
  ASSERT_EQ(ranked.size(), 2u);
  EXPECT_EQ(ranked[0].count, 2u);
  EXPECT_EQ(ranked[1].count, 1u);

  const auto ds = two_column_dataset();
  const auto two = rank_mode_combinations(ds);
  ASSERT_EQ(two.size(), 3u);
  const auto& c1 = ds.column("c1");
  const auto& c2 = ds.column("c2");
  auto name = [&](const ModeKey& k) { return c1.categories[k.codes[0]] + c2.categories[k.codes[1]]; };
  EXPECT_EQ(name(two[0]), "AX");
  EXPECT_EQ(two[0].count, 2u);
  EXPECT_EQ(name(two[1]), "AY");
  EXPECT_EQ(name(two[2]), "BX");

  const TabularDataset same({categorical_column("c", {"z", "z", "z"}), label_column({0, 1, 0})});
  const auto one = rank_mode_combinations(same);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0].count, 3u);

  const TabularDataset numeric_only({numeric_column("n", {1, 2}), label_column({0, 1})});
  EXPECT_TABEVAL_ERROR(rank_mode_combinations(numeric_only), ErrorCode::NoCategoricalColumns);
}

TEST(DropLabel, Examples) {
  const TabularDataset ds({numeric_column("n", {1, 2, 3, 4}), label_column({0, 1, 0, 1})});
  const auto out = drop_label(ds, 0);
  EXPECT_EQ(out.row_count(), 2u);
  EXPECT_EQ(out.labels(), (std::vector<std::uint32_t>{1, 1}));
  EXPECT_EQ(out.column(std::size_t{0}).numbers, (std::vector<double>{2, 4}));

  const TabularDataset ones({numeric_column("n", {1, 2}), label_column({1, 1})});
  EXPECT_EQ(format_csv(drop_label(ones, 0)), format_csv(ones));
  EXPECT_TABEVAL_ERROR(drop_label(ones, 1), ErrorCode::ResultEmpty);
}

TEST(DropTopModes, Examples) {
  const auto out = drop_top_modes(abc_dataset(), 1);
  ASSERT_EQ(out.row_count(), 1u);
  EXPECT_EQ(out.column(std::size_t{0}).numbers[0], 3.0);
  EXPECT_TABEVAL_ERROR(drop_top_modes(abc_dataset(), 2), ErrorCode::ResultEmpty);

  const auto two = drop_top_modes(two_column_dataset(), 1);
  ASSERT_EQ(two.row_count(), 2u);
  EXPECT_EQ(key_string(two, 0), "A|Y|");
  EXPECT_EQ(key_string(two, 1), "B|X|");
}

TEST(DropTopModes, MatchesBruteForceFilter) {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const auto ds = random_categorical(rng, 5 + rng.uniform_index(30));
    const std::size_t n = 1 + rng.uniform_index(3);
    const auto cats = ds.categorical_indices();
    auto codes_of = [&](std::size_t r) {
      std::vector<std::uint32_t> k;
      for (std::size_t c : cats) k.push_back(ds.column(c).codes[r]);
      return k;
    };
    // Oracle: map iteration is lexicographic in codes; stable sort by count keeps that tie order.
    std::map<std::vector<std::uint32_t>, std::size_t> counts;
    for (std::size_t r = 0; r < ds.row_count(); ++r) ++counts[codes_of(r)];
    if (n >= counts.size()) {
      EXPECT_TABEVAL_ERROR(drop_top_modes(ds, n), ErrorCode::ResultEmpty);
      continue;
    }
    std::vector<std::pair<std::vector<std::uint32_t>, std::size_t>> order(counts.begin(), counts.end());
    std::stable_sort(order.begin(), order.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    const auto ranked = rank_mode_combinations(ds);
    ASSERT_EQ(ranked.size(), order.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
      EXPECT_EQ(ranked[i].codes, order[i].first);
      EXPECT_EQ(ranked[i].count, order[i].second);
    }
    std::set<std::vector<std::uint32_t>> dropped;
    for (std::size_t i = 0; i < n; ++i) dropped.insert(order[i].first);
    const auto all = row_strings(ds);
    std::vector<std::string> expected;
    for (std::size_t r = 0; r < ds.row_count(); ++r) {
      if (!dropped.count(codes_of(r))) expected.push_back(all[r]);
    }
    EXPECT_EQ(row_strings(drop_top_modes(ds, n)), expected);
  }
}

TEST(KeepBottomModes, Examples) {
  std::vector<std::string> cats;
  for (int i = 0; i < 5; ++i) cats.push_back("A");
  for (int i = 0; i < 3; ++i) cats.push_back("B");
  cats.push_back("C");
  std::vector<std::uint32_t> labels(cats.size(), 0);
  labels[0] = 1;
  const TabularDataset ds({categorical_column("c", cats), label_column(labels)});

  const auto kept = keep_bottom_modes(ds, 33.0);
  ASSERT_EQ(kept.row_count(), 1u);
  EXPECT_EQ(key_string(kept, 0), "C|");
  // 34% of 3 keys is 1.02, whose ceiling keeps two keys.
  EXPECT_EQ(keep_bottom_modes(ds, 34.0).row_count(), 4u);
  EXPECT_EQ(format_csv(keep_bottom_modes(ds, 100.0)), format_csv(ds));

  const TabularDataset one_key({categorical_column("c", {"k", "k"}), label_column({0, 1})});
  EXPECT_EQ(format_csv(keep_bottom_modes(one_key, 10.0)), format_csv(one_key));
  EXPECT_TABEVAL_ERROR(keep_bottom_modes(ds, 0.0), ErrorCode::InvalidArgument);
}

TEST(KeepBottomModes, PartitionProperty) {
  Rng rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    const auto ds = random_categorical(rng, 5 + rng.uniform_index(40));
    const double pct = 1.0 + rng.uniform() * 99.0;
    const auto kept = keep_bottom_modes(ds, pct);
    std::set<std::string> kept_keys;
    for (std::size_t r = 0; r < kept.row_count(); ++r) kept_keys.insert(key_string(kept, r));
    // Survivors are exactly the rows of kept keys, in order.
    std::vector<std::string> expected;
    const auto all = row_strings(ds);
    for (std::size_t r = 0; r < ds.row_count(); ++r) {
      if (kept_keys.count(key_string(ds, r))) expected.push_back(all[r]);
    }
    EXPECT_EQ(row_strings(kept), expected);
    const auto ranked = rank_mode_combinations(ds);
    const auto want = static_cast<std::size_t>(std::ceil(pct / 100.0 * static_cast<double>(ranked.size()) - 1e-9));
    EXPECT_EQ(kept_keys.size(), std::max<std::size_t>(1, want));
  }
}

TEST(Collapse, NoSplitExample) {
  const TabularDataset ds({categorical_column("c", {"A", "A", "B", "A"}), numeric_column("n", {1, 2, 3, 2}),
                           label_column({0, 1, 0, 1})});
  const auto out = collapse_modes(ds, false, 3);
  ASSERT_EQ(out.row_count(), 4u);
  for (std::size_t r = 0; r < 4; ++r) {
    EXPECT_EQ(key_string(out, r), "A|");
    EXPECT_EQ(out.column("n").numbers[r], 2.0);
  }
  EXPECT_EQ(format_csv(collapse_modes(ds, false, 3)), format_csv(out));
}

TEST(Collapse, DistinctFeatureRows) {
  const auto ds = testing::random_mixed_dataset(300, 13);
  auto distinct_features = [](const TabularDataset& d) {
    std::set<std::string> rows;
    for (std::size_t r = 0; r < d.row_count(); ++r) {
      std::string s;
      for (std::size_t c = 0; c < d.column_count(); ++c) {
        if (c == d.label_index()) continue;
        const auto& col = d.column(c);
        s += col.kind() == ColumnKind::numerical ? format_double(col.numbers[r]) : col.categories[col.codes[r]];
        s += '|';
      }
      rows.insert(s);
    }
    return rows.size();
  };
  const auto split = collapse_modes(ds, true, 1);
  EXPECT_LE(distinct_features(split), 2u);
  EXPECT_EQ(split.labels(), ds.labels());
  EXPECT_EQ(distinct_features(collapse_modes(ds, false, 1)), 1u);

  const TabularDataset single({numeric_column("n", {1, 2}), label_column({0, 0})});
  EXPECT_TABEVAL_ERROR(collapse_modes(single, true, 1), ErrorCode::MissingClass);
}

TEST(Collapse, NoSplitGivesUnitRfis) {
  const auto ds = testing::random_mixed_dataset(400, 14);
  const Encoder enc = fit_encoder(ds);
  const EncodedMatrix x = enc.encode(ds);
  ForestConfig cfg;
  cfg.n_trees = 20;
  cfg.seed = 2;
  const auto clf = train_forest(x.values, *x.labels, cfg);
  const double v = rfis(clf, enc.encode(collapse_modes(ds, false, 8)));
  EXPECT_NEAR(v, 1.0, 1e-12);
}

TEST(PerturbationSpec, JsonRoundTripAndIds) {
  const auto grid = default_grid(2024);
  ASSERT_EQ(grid.size(), 29u);
  std::set<std::string> ids;
  for (const auto& spec : grid) {
    ids.insert(spec.id());
    const auto back = perturbation_from_json(to_json(spec));
    EXPECT_EQ(back.id(), spec.id());
    EXPECT_EQ(back.seed, spec.seed);
  }
  EXPECT_EQ(ids.size(), grid.size());
  // Common random numbers within a family.
  EXPECT_EQ(grid[0].seed, grid[4].seed);
  EXPECT_NE(grid[0].seed, grid.back().seed);
  EXPECT_EQ(default_grid(2024)[7].id(), grid[7].id());

  EXPECT_TABEVAL_ERROR(perturbation_from_json({{"variant", "nope"}, {"params", nlohmann::json::object()}}),
                       ErrorCode::InvalidArgument);
  EXPECT_TABEVAL_ERROR(perturbation_from_json({{"variant", "noise_level"}, {"params", {{"alpha", -1.0}}}}),
                       ErrorCode::InvalidArgument);
}

TEST(ApplyPerturbation, DeterministicPerSpec) {
  const auto ds = testing::random_mixed_dataset(300, 15);
  for (const auto& spec : default_grid(3)) {
    try {
      const auto a = apply_perturbation(ds, spec);
      const auto b = apply_perturbation(ds, spec);
      EXPECT_EQ(format_csv(a), format_csv(b)) << spec.id();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::ResultEmpty) << spec.id();
    }
  }
}

}  // namespace
}  // namespace tabeval
