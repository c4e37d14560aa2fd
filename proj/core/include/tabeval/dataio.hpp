#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "tabeval/matrix.hpp"

namespace tabeval {

enum class ColumnKind { numerical, categorical, label };

std::string_view to_string(ColumnKind kind);
ColumnKind column_kind_from_string(std::string_view text);

struct ColumnSchema {
  std::string name;
  ColumnKind kind = ColumnKind::numerical;

  bool operator==(const ColumnSchema&) const = default;
};

using Schema = std::vector<ColumnSchema>;

/// Throws Error(BadSchema) unless names are unique and non-empty and exactly
/// one column is the label.
void validate_schema(const Schema& schema);

Schema schema_from_json(const nlohmann::json& doc);
nlohmann::json schema_to_json(const Schema& schema);
Schema load_schema(const std::filesystem::path& path);

/// One column of a TabularDataset. Which payload is populated depends on the
/// kind: `numbers` for numerical columns, `codes` + `categories` for
/// categorical columns, `codes` holding 0/1 for the label column.
struct Column {
  ColumnSchema schema;
  std::vector<double> numbers;
  std::vector<std::uint32_t> codes;
  std::vector<std::string> categories;

  const std::string& name() const { return schema.name; }
  ColumnKind kind() const { return schema.kind; }
  std::size_t size() const;
  /// Interns `value`, appending it to the category table on first sight.
  std::uint32_t intern(std::string_view value);
  std::optional<std::uint32_t> find_category(std::string_view value) const;
};

/// Schema-typed column store of raw (un-encoded) records. Columns are kept in
/// schema order.
class TabularDataset {
 public:
  TabularDataset() = default;
  explicit TabularDataset(std::vector<Column> columns);

  Schema schema() const;
  std::size_t row_count() const { return row_count_; }
  std::size_t column_count() const { return columns_.size(); }

  const std::vector<Column>& columns() const { return columns_; }
  const Column& column(std::size_t i) const { return columns_.at(i); }
  Column& column(std::size_t i) { return columns_.at(i); }
  const Column& column(std::string_view name) const;

  std::size_t label_index() const { return label_index_; }
  const std::vector<std::uint32_t>& labels() const { return columns_[label_index_].codes; }
  std::vector<std::size_t> categorical_indices() const;
  std::vector<std::size_t> numerical_indices() const;

  /// Rows in the given order; category tables are copied unchanged.
  TabularDataset select_rows(std::span<const std::size_t> rows) const;

  /// Checks every TabularDataset invariant; throws Error on violation.
  void validate() const;

 private:
  std::vector<Column> columns_;
  std::size_t row_count_ = 0;
  std::size_t label_index_ = 0;
};

/// Builds an empty dataset with the given (validated) schema.
TabularDataset make_empty_dataset(const Schema& schema);

/// Loads a CSV whose header names match the schema (order-insensitive).
/// Errors: MissingColumn, UnexpectedColumn, ParseFailure (with row index),
/// BadLabel.
TabularDataset load_csv(const std::filesystem::path& path, const Schema& schema);
TabularDataset parse_csv(std::string_view text, const Schema& schema);

/// Writes the dataset in schema column order; floats at 17 significant digits.
std::string format_csv(const TabularDataset& ds);
void write_csv(const TabularDataset& ds, const std::filesystem::path& path);

struct SplitPair {
  TabularDataset train;
  TabularDataset test;
  std::uint64_t seed = 0;
  double train_fraction = 0.8;
};

/// Per-class seeded shuffle then prefix-take of round(fraction * class size)
/// rows. Selected rows keep their source order. Throws DegenerateSplit when a
/// class would be missing from either side.
SplitPair stratified_split(const TabularDataset& ds, double train_fraction, std::uint64_t seed);

struct EncodedMatrix {
  Matrix values;
  std::optional<std::vector<std::uint32_t>> labels;

  std::size_t rows() const { return static_cast<std::size_t>(values.rows()); }
  std::size_t width() const { return static_cast<std::size_t>(values.cols()); }
};

/// z-score for numerical columns, one-hot plus an "unseen" slot for each
/// categorical column. Fitted once on a reference dataset and then reused so
/// every metric sees the same representation.
class Encoder {
 public:
  static constexpr double kStdFloor = 1e-12;

  struct NumericSlot {
    std::size_t column;
    std::size_t offset;
    double mean;
    double std;
  };
  struct CategoricalSlot {
    std::size_t column;
    std::size_t offset;  // first one-hot slot; offset + categories.size() is the unseen slot
    std::vector<std::string> categories;
    std::unordered_map<std::string, std::size_t> index;
  };

  static Encoder fit(const TabularDataset& reference);

  std::size_t output_width() const { return width_; }
  const Schema& schema() const { return schema_; }
  const std::vector<NumericSlot>& numeric_slots() const { return numeric_; }
  const std::vector<CategoricalSlot>& categorical_slots() const { return categorical_; }

  /// Throws SchemaMismatch if the dataset schema differs from the fitted one.
  EncodedMatrix encode(const TabularDataset& ds) const;

 private:
  Schema schema_;
  std::vector<NumericSlot> numeric_;
  std::vector<CategoricalSlot> categorical_;
  std::size_t width_ = 0;
};

inline Encoder fit_encoder(const TabularDataset& reference) { return Encoder::fit(reference); }
inline EncodedMatrix encode(const Encoder& enc, const TabularDataset& ds) { return enc.encode(ds); }

}  // namespace tabeval
