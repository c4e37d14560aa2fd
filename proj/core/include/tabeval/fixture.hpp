#pragma once

#include <cstdint>
#include <filesystem>

#include "tabeval/dataio.hpp"

namespace tabeval {

/// Seeded 4-mode mixture with 10 numerical columns (x0..x9), 3 categorical
/// columns (cat_a, cat_b, cat_c) and a binary label equal to [x0 > 0]. Every
/// mode emits 3 categorical tuples, so the data holds 12 distinct mode keys.
/// |x0| >= margin, which makes the label linearly separable.
struct DeskFixtureOptions {
  std::size_t rows = 5000;
  std::uint64_t seed = 7;
  double margin = 2.0;
};

Schema desk_fixture_schema();
TabularDataset make_desk_fixture(const DeskFixtureOptions& options = {});

struct FixtureFiles {
  std::filesystem::path data;
  std::filesystem::path schema;
  std::filesystem::path plan;
};

/// Writes data.csv, schema.json and plan.json (all metrics, default grid)
/// into `dir`.
FixtureFiles write_desk_fixture(const std::filesystem::path& dir, const DeskFixtureOptions& options = {},
                                std::uint64_t master_seed = 2024);

}  // namespace tabeval
