#include "tabeval/fixture.hpp"

#include <array>
#include <cmath>
#include <string>

#include "tabeval/canonical_json.hpp"
#include "tabeval/error.hpp"
#include "tabeval/rng.hpp"

namespace tabeval {

namespace {

constexpr std::size_t kModes = 4;
constexpr std::size_t kNumeric = 10;
constexpr std::size_t kFactors = 2;
constexpr double kIdiosyncratic = 0.1;
constexpr std::array<double, kModes> kModeWeights{0.35, 0.30, 0.20, 0.15};
constexpr std::array<double, 3> kTupleWeights{0.5, 0.3, 0.2};
constexpr std::array<double, kModes> kPositiveRate{0.7, 0.4, 0.6, 0.3};

std::size_t pick(Rng& rng, std::span<const double> weights) {
  double u = rng.uniform();
  for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
    if (u < weights[i]) return i;
    u -= weights[i];
  }
  return weights.size() - 1;
}

}  // namespace

Schema desk_fixture_schema() {
  Schema schema;
  for (std::size_t j = 0; j < kNumeric; ++j) schema.push_back({"x" + std::to_string(j), ColumnKind::numerical});
  schema.push_back({"cat_a", ColumnKind::categorical});
  schema.push_back({"cat_b", ColumnKind::categorical});
  schema.push_back({"cat_c", ColumnKind::categorical});
  schema.push_back({"label", ColumnKind::label});
  return schema;
}

TabularDataset make_desk_fixture(const DeskFixtureOptions& options) {
  if (options.rows == 0) throw Error(ErrorCode::InvalidArgument, "fixture needs at least one row");
  const Schema schema = desk_fixture_schema();
  std::vector<Column> columns;
  for (const auto& cs : schema) columns.push_back(Column{cs, {}, {}, {}});

  Rng mode_rng(derive_seed(options.seed, "modes"));
  std::array<std::array<double, kNumeric>, kModes> centers{};
  for (auto& c : centers) {
    for (std::size_t j = 1; j < kNumeric; ++j) c[j] = 3.0 * mode_rng.normal();
  }
  std::array<std::array<double, kFactors>, kNumeric> loadings{};
  for (auto& row : loadings) {
    for (auto& l : row) l = mode_rng.normal();
  }

  Rng rng(derive_seed(options.seed, "rows"));
  for (std::size_t r = 0; r < options.rows; ++r) {
    const std::size_t m = pick(rng, kModeWeights);
    const std::size_t t = pick(rng, kTupleWeights);
    const bool positive = rng.uniform() < kPositiveRate[m];
    const double magnitude = options.margin + std::abs(rng.normal());
    columns[0].numbers.push_back(positive ? magnitude : -magnitude);
    std::array<double, kFactors> f{};
    for (auto& v : f) v = rng.normal();
    for (std::size_t j = 1; j < kNumeric; ++j) {
      double v = centers[m][j] + kIdiosyncratic * rng.normal();
      for (std::size_t k = 0; k < kFactors; ++k) v += loadings[j][k] * f[k];
      columns[j].numbers.push_back(v);
    }
    columns[kNumeric].codes.push_back(columns[kNumeric].intern("a" + std::to_string(m)));
    columns[kNumeric + 1].codes.push_back(
        columns[kNumeric + 1].intern("b" + std::to_string(m) + "_" + std::to_string(t)));
    columns[kNumeric + 2].codes.push_back(columns[kNumeric + 2].intern("c" + std::to_string((m + t) % 3)));
    columns[kNumeric + 3].codes.push_back(positive ? 1u : 0u);
  }
  return TabularDataset(std::move(columns));
}

FixtureFiles write_desk_fixture(const std::filesystem::path& dir, const DeskFixtureOptions& options,
                                std::uint64_t master_seed) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoFailure, "cannot create " + dir.string() + ": " + ec.message());
  FixtureFiles files{dir / "data.csv", dir / "schema.json", dir / "plan.json"};
  write_csv(make_desk_fixture(options), files.data);
  write_file_atomic(files.schema, canonical_dump(schema_to_json(desk_fixture_schema())));
  const nlohmann::json plan = {{"dataset", "data.csv"},
                               {"schema", "schema.json"},
                               {"split", {{"train_fraction", 0.8}}},
                               {"metrics", {"faed", "fpcad", "rfis", "sdv_fidelity", "tstr", "trts"}},
                               {"grid", "default"},
                               {"master_seed", master_seed}};
  write_file_atomic(files.plan, canonical_dump(plan));
  return files;
}

}  // namespace tabeval
