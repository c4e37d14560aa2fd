#include "tabeval/dataio.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <unordered_set>

#include "tabeval/canonical_json.hpp"
#include "tabeval/csv.hpp"
#include "tabeval/error.hpp"
#include "tabeval/rng.hpp"

namespace tabeval {

std::string_view to_string(ColumnKind kind) {
  switch (kind) {
    case ColumnKind::numerical: return "numerical";
    case ColumnKind::categorical: return "categorical";
    case ColumnKind::label: return "label";
  }
  return "numerical";
}

ColumnKind column_kind_from_string(std::string_view text) {
  if (text == "numerical") return ColumnKind::numerical;
  if (text == "categorical") return ColumnKind::categorical;
  if (text == "label") return ColumnKind::label;
  throw Error(ErrorCode::BadSchema, "unknown column kind '" + std::string(text) + "'");
}

void validate_schema(const Schema& schema) {
  std::unordered_set<std::string> names;
  std::size_t labels = 0;
  for (const auto& col : schema) {
    if (col.name.empty()) throw Error(ErrorCode::BadSchema, "column name must be non-empty");
    if (!names.insert(col.name).second) {
      throw Error(ErrorCode::BadSchema, "duplicate column name '" + col.name + "'");
    }
    if (col.kind == ColumnKind::label) ++labels;
  }
  if (labels != 1) {
    throw Error(ErrorCode::BadSchema,
                "schema must have exactly one label column, found " + std::to_string(labels));
  }
}

Schema schema_from_json(const nlohmann::json& doc) {
  if (!doc.is_array()) throw Error(ErrorCode::BadSchema, "schema must be a JSON array");
  Schema schema;
  for (const auto& entry : doc) {
    if (!entry.is_object() || !entry.contains("name") || !entry.contains("kind") ||
        !entry["name"].is_string() || !entry["kind"].is_string()) {
      throw Error(ErrorCode::BadSchema, "schema entries must be {\"name\": str, \"kind\": str}");
    }
    schema.push_back({entry["name"].get<std::string>(),
                      column_kind_from_string(entry["kind"].get<std::string>())});
  }
  validate_schema(schema);
  return schema;
}

nlohmann::json schema_to_json(const Schema& schema) {
  nlohmann::json doc = nlohmann::json::array();
  for (const auto& col : schema) {
    doc.push_back({{"name", col.name}, {"kind", std::string(to_string(col.kind))}});
  }
  return doc;
}

Schema load_schema(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::BadSchema, path.string() + ": " + e.what());
  }
  return schema_from_json(doc);
}

// ---------------------------------------------------------------------------

std::size_t Column::size() const {
  return kind() == ColumnKind::numerical ? numbers.size() : codes.size();
}

std::uint32_t Column::intern(std::string_view value) {
  if (auto found = find_category(value)) return *found;
  categories.emplace_back(value);
  return static_cast<std::uint32_t>(categories.size() - 1);
}

std::optional<std::uint32_t> Column::find_category(std::string_view value) const {
  for (std::size_t i = 0; i < categories.size(); ++i) {
    if (categories[i] == value) return static_cast<std::uint32_t>(i);
  }
  return std::nullopt;
}

TabularDataset::TabularDataset(std::vector<Column> columns) : columns_(std::move(columns)) {
  validate_schema(schema());
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (columns_[i].kind() == ColumnKind::label) label_index_ = i;
  }
  row_count_ = columns_.empty() ? 0 : columns_.front().size();
  validate();
}

Schema TabularDataset::schema() const {
  Schema s;
  s.reserve(columns_.size());
  for (const auto& c : columns_) s.push_back(c.schema);
  return s;
}

const Column& TabularDataset::column(std::string_view name) const {
  for (const auto& c : columns_) {
    if (c.name() == name) return c;
  }
  throw Error(ErrorCode::MissingColumn, "no column named '" + std::string(name) + "'");
}

std::vector<std::size_t> TabularDataset::categorical_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (columns_[i].kind() == ColumnKind::categorical) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> TabularDataset::numerical_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (columns_[i].kind() == ColumnKind::numerical) out.push_back(i);
  }
  return out;
}

TabularDataset TabularDataset::select_rows(std::span<const std::size_t> rows) const {
  std::vector<Column> out;
  out.reserve(columns_.size());
  for (const auto& src : columns_) {
    Column c;
    c.schema = src.schema;
    c.categories = src.categories;
    if (src.kind() == ColumnKind::numerical) {
      c.numbers.reserve(rows.size());
      for (std::size_t r : rows) c.numbers.push_back(src.numbers.at(r));
    } else {
      c.codes.reserve(rows.size());
      for (std::size_t r : rows) c.codes.push_back(src.codes.at(r));
    }
    out.push_back(std::move(c));
  }
  return TabularDataset(std::move(out));
}

void TabularDataset::validate() const {
  for (const auto& c : columns_) {
    if (c.size() != row_count_) {
      throw Error(ErrorCode::LengthMismatch, "column '" + c.name() + "' has " +
                                                 std::to_string(c.size()) + " rows, expected " +
                                                 std::to_string(row_count_));
    }
    if (c.kind() == ColumnKind::label) {
      for (auto v : c.codes) {
        if (v > 1) throw Error(ErrorCode::BadLabel, "label value " + std::to_string(v) + " outside {0,1}");
      }
    } else if (c.kind() == ColumnKind::categorical) {
      for (auto v : c.codes) {
        if (v >= c.categories.size()) {
          throw Error(ErrorCode::InvalidArgument,
                      "category code out of range in column '" + c.name() + "'");
        }
      }
    }
  }
}

TabularDataset make_empty_dataset(const Schema& schema) {
  validate_schema(schema);
  std::vector<Column> cols;
  for (const auto& s : schema) cols.push_back(Column{s, {}, {}, {}});
  return TabularDataset(std::move(cols));
}

// ---------------------------------------------------------------------------

namespace {

bool parse_double(std::string_view token, double& out) {
  while (!token.empty() && (token.front() == ' ' || token.front() == '\t')) token.remove_prefix(1);
  while (!token.empty() && (token.back() == ' ' || token.back() == '\t')) token.remove_suffix(1);
  if (token.empty()) return false;
  if (token.front() == '+') token.remove_prefix(1);
  const char* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, out);
  return ec == std::errc() && ptr == end;
}

}  // namespace

TabularDataset parse_csv(std::string_view text, const Schema& schema) {
  validate_schema(schema);
  const auto records = csv::parse(text);
  if (records.empty()) throw Error(ErrorCode::ParseFailure, "missing header row");

  const auto& header = records.front();
  std::unordered_map<std::string, std::size_t> header_pos;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (!header_pos.emplace(header[i], i).second) {
      throw Error(ErrorCode::ParseFailure, "duplicate header '" + header[i] + "'");
    }
  }
  std::vector<std::size_t> source(schema.size());
  for (std::size_t c = 0; c < schema.size(); ++c) {
    auto it = header_pos.find(schema[c].name);
    if (it == header_pos.end()) {
      throw Error(ErrorCode::MissingColumn, "column '" + schema[c].name + "' absent from header");
    }
    source[c] = it->second;
  }
  if (header.size() != schema.size()) {
    std::set<std::string> known;
    for (const auto& s : schema) known.insert(s.name);
    for (const auto& h : header) {
      if (!known.count(h)) throw Error(ErrorCode::UnexpectedColumn, "header column '" + h + "' not in schema");
    }
  }

  std::vector<Column> cols;
  std::vector<std::unordered_map<std::string, std::uint32_t>> interned(schema.size());
  for (const auto& s : schema) cols.push_back(Column{s, {}, {}, {}});
  const std::size_t n_rows = records.size() - 1;
  for (auto& c : cols) {
    if (c.kind() == ColumnKind::numerical) c.numbers.reserve(n_rows);
    else c.codes.reserve(n_rows);
  }

  for (std::size_t r = 0; r < n_rows; ++r) {
    const auto& rec = records[r + 1];
    if (rec.size() != header.size()) {
      throw Error(ErrorCode::ParseFailure, "row " + std::to_string(r + 1) + " has " +
                                               std::to_string(rec.size()) + " fields, expected " +
                                               std::to_string(header.size()));
    }
    for (std::size_t c = 0; c < schema.size(); ++c) {
      const std::string& token = rec[source[c]];
      Column& col = cols[c];
      switch (col.kind()) {
        case ColumnKind::numerical: {
          double v;
          if (!parse_double(token, v)) {
            throw Error(ErrorCode::ParseFailure, "row " + std::to_string(r + 1) + ", column '" +
                                                     col.name() + "': '" + token + "' is not numeric");
          }
          col.numbers.push_back(v);
          break;
        }
        case ColumnKind::categorical: {
          auto [it, inserted] =
              interned[c].emplace(token, static_cast<std::uint32_t>(col.categories.size()));
          if (inserted) col.categories.push_back(token);
          col.codes.push_back(it->second);
          break;
        }
        case ColumnKind::label: {
          double v;
          if (!parse_double(token, v) || (v != 0.0 && v != 1.0)) {
            throw Error(ErrorCode::BadLabel, "row " + std::to_string(r + 1) + ": label '" + token +
                                                 "' outside {0,1}");
          }
          col.codes.push_back(v == 1.0 ? 1u : 0u);
          break;
        }
      }
    }
  }
  return TabularDataset(std::move(cols));
}

TabularDataset load_csv(const std::filesystem::path& path, const Schema& schema) {
  return parse_csv(read_file(path), schema);
}

std::string format_csv(const TabularDataset& ds) {
  std::string out;
  csv::Record rec;
  for (const auto& c : ds.columns()) rec.push_back(c.name());
  out += csv::format_record(rec);
  out += "\n";
  for (std::size_t r = 0; r < ds.row_count(); ++r) {
    rec.clear();
    for (const auto& c : ds.columns()) {
      switch (c.kind()) {
        case ColumnKind::numerical: rec.push_back(format_double(c.numbers[r])); break;
        case ColumnKind::categorical: rec.push_back(c.categories[c.codes[r]]); break;
        case ColumnKind::label: rec.push_back(std::to_string(c.codes[r])); break;
      }
    }
    out += csv::format_record(rec);
    out += "\n";
  }
  return out;
}

void write_csv(const TabularDataset& ds, const std::filesystem::path& path) {
  write_file_atomic(path, format_csv(ds));
}

// ---------------------------------------------------------------------------

SplitPair stratified_split(const TabularDataset& ds, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "train_fraction must lie in (0, 1)");
  }
  if (ds.row_count() < 10) {
    throw Error(ErrorCode::DegenerateSplit, "need at least 10 rows, got " + std::to_string(ds.row_count()));
  }
  std::vector<std::size_t> by_class[2];
  const auto& labels = ds.labels();
  for (std::size_t r = 0; r < labels.size(); ++r) by_class[labels[r]].push_back(r);

  std::vector<std::size_t> train_rows, test_rows;
  for (std::uint32_t cls = 0; cls < 2; ++cls) {
    auto& rows = by_class[cls];
    const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(rows.size())));
    if (rows.empty() || n_train == 0 || n_train >= rows.size()) {
      throw Error(ErrorCode::DegenerateSplit,
                  "class " + std::to_string(cls) + " with " + std::to_string(rows.size()) +
                      " rows cannot appear on both sides of the split");
    }
    Rng rng(derive_seed(seed, cls));
    rng.shuffle(rows);
    train_rows.insert(train_rows.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(n_train));
    test_rows.insert(test_rows.end(), rows.begin() + static_cast<std::ptrdiff_t>(n_train), rows.end());
  }
  std::sort(train_rows.begin(), train_rows.end());
  std::sort(test_rows.begin(), test_rows.end());
  return SplitPair{ds.select_rows(train_rows), ds.select_rows(test_rows), seed, train_fraction};
}

// ---------------------------------------------------------------------------

Encoder Encoder::fit(const TabularDataset& reference) {
  if (reference.row_count() < 1) throw Error(ErrorCode::EmptyData, "cannot fit an encoder on 0 rows");
  Encoder enc;
  enc.schema_ = reference.schema();
  std::size_t offset = 0;
  for (std::size_t i = 0; i < reference.column_count(); ++i) {
    const Column& col = reference.column(i);
    if (col.kind() == ColumnKind::numerical) {
      const double n = static_cast<double>(col.numbers.size());
      double mean = 0.0;
      for (double v : col.numbers) mean += v;
      mean /= n;
      double ss = 0.0;
      for (double v : col.numbers) ss += (v - mean) * (v - mean);
      const double std = std::max(std::sqrt(ss / n), kStdFloor);
      enc.numeric_.push_back({i, offset, mean, std});
      offset += 1;
    } else if (col.kind() == ColumnKind::categorical) {
      // Only categories that actually occur, in first-appearance order.
      CategoricalSlot slot{i, offset, {}, {}};
      std::vector<char> seen(col.categories.size(), 0);
      for (auto code : col.codes) {
        if (!seen[code]) {
          seen[code] = 1;
          slot.index.emplace(col.categories[code], slot.categories.size());
          slot.categories.push_back(col.categories[code]);
        }
      }
      offset += slot.categories.size() + 1;
      enc.categorical_.push_back(std::move(slot));
    }
  }
  enc.width_ = offset;
  return enc;
}

EncodedMatrix Encoder::encode(const TabularDataset& ds) const {
  if (ds.schema() != schema_) {
    throw Error(ErrorCode::SchemaMismatch, "dataset schema differs from the encoder's fitted schema");
  }
  EncodedMatrix out;
  const auto n = static_cast<Eigen::Index>(ds.row_count());
  out.values = Matrix::Zero(n, static_cast<Eigen::Index>(width_));
  for (const auto& slot : numeric_) {
    const auto& values = ds.column(slot.column).numbers;
    const auto off = static_cast<Eigen::Index>(slot.offset);
    for (Eigen::Index r = 0; r < n; ++r) {
      out.values(r, off) = (values[static_cast<std::size_t>(r)] - slot.mean) / slot.std;
    }
  }
  for (const auto& slot : categorical_) {
    const Column& col = ds.column(slot.column);
    // Translate the dataset's own codes into fitted slots via the category strings.
    std::vector<std::size_t> translate(col.categories.size(), slot.categories.size());
    for (std::size_t code = 0; code < col.categories.size(); ++code) {
      auto it = slot.index.find(col.categories[code]);
      if (it != slot.index.end()) translate[code] = it->second;
    }
    for (Eigen::Index r = 0; r < n; ++r) {
      const std::size_t k = translate[col.codes[static_cast<std::size_t>(r)]];
      out.values(r, static_cast<Eigen::Index>(slot.offset + k)) = 1.0;
    }
  }
  out.labels = ds.labels();
  return out;
}

}  // namespace tabeval
