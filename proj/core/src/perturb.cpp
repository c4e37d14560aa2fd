#include "tabeval/perturb.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <set>

#include "tabeval/error.hpp"
#include "tabeval/rng.hpp"

namespace tabeval {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::string short_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

double require_number(const nlohmann::json& params, const char* key) {
  if (!params.contains(key) || !params[key].is_number()) {
    throw Error(ErrorCode::InvalidArgument, std::string("perturbation parameter '") + key + "' must be a number");
  }
  return params[key].get<double>();
}

TabularDataset filter_rows(const TabularDataset& ds, const std::vector<char>& keep, const char* what) {
  std::vector<std::size_t> rows;
  for (std::size_t r = 0; r < keep.size(); ++r) {
    if (keep[r]) rows.push_back(r);
  }
  if (rows.empty()) throw Error(ErrorCode::ResultEmpty, std::string(what) + " removed every row");
  return ds.select_rows(rows);
}

std::vector<std::uint32_t> key_of(const TabularDataset& ds, const std::vector<std::size_t>& cats, std::size_t row) {
  std::vector<std::uint32_t> key(cats.size());
  for (std::size_t i = 0; i < cats.size(); ++i) key[i] = ds.column(cats[i]).codes[row];
  return key;
}

// Writes the prototype (modal categories, mean numerics) of `rows` into them.
void collapse_group(TabularDataset& out, const std::vector<std::size_t>& rows) {
  if (rows.empty()) return;
  for (std::size_t c = 0; c < out.column_count(); ++c) {
    Column& col = out.column(c);
    if (col.kind() == ColumnKind::numerical) {
      double mean = 0.0;
      for (auto r : rows) mean += col.numbers[r];
      mean /= static_cast<double>(rows.size());
      for (auto r : rows) col.numbers[r] = mean;
    } else if (col.kind() == ColumnKind::categorical) {
      std::vector<std::size_t> counts(col.categories.size(), 0);
      for (auto r : rows) ++counts[col.codes[r]];
      // max_element returns the first maximum, i.e. the lowest code on ties.
      const auto modal = static_cast<std::uint32_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());
      for (auto r : rows) col.codes[r] = modal;
    }
  }
}

}  // namespace

std::string PerturbationSpec::variant_name() const {
  return std::visit(Overloaded{
                        [](const NoiseLevel&) { return "noise_level"; },
                        [](const NoisyRows&) { return "noisy_rows"; },
                        [](const SingleModeDrop&) { return "single_mode_drop"; },
                        [](const SuccessiveModeDrop&) { return "successive_mode_drop"; },
                        [](const ExtremeModeDrop&) { return "extreme_mode_drop"; },
                        [](const CollapseLabelSplit&) { return "collapse_label_split"; },
                        [](const CollapseNoSplit&) { return "collapse_no_split"; },
                    },
                    variant);
}

nlohmann::json PerturbationSpec::params() const {
  return std::visit(Overloaded{
                        [](const NoiseLevel& v) { return nlohmann::json{{"alpha", v.alpha}}; },
                        [](const NoisyRows& v) { return nlohmann::json{{"alpha", v.alpha}, {"fraction", v.fraction}}; },
                        [](const SingleModeDrop& v) { return nlohmann::json{{"label", v.label}}; },
                        [](const SuccessiveModeDrop& v) { return nlohmann::json{{"n_top", v.n_top}}; },
                        [](const ExtremeModeDrop& v) { return nlohmann::json{{"keep_percent", v.keep_percent}}; },
                        [](const CollapseLabelSplit&) { return nlohmann::json::object(); },
                        [](const CollapseNoSplit&) { return nlohmann::json::object(); },
                    },
                    variant);
}

std::string PerturbationSpec::id() const {
  std::string out = variant_name() + "(";
  bool first = true;
  const nlohmann::json p = params();
  for (const auto& [key, value] : p.items()) {
    if (!first) out += ",";
    first = false;
    out += key + "=" + (value.is_number_float() ? short_number(value.get<double>()) : value.dump());
  }
  return out + ")";
}

nlohmann::json to_json(const PerturbationSpec& spec) {
  return {{"variant", spec.variant_name()}, {"params", spec.params()}, {"seed", spec.seed}};
}

PerturbationSpec perturbation_from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("variant") || !doc["variant"].is_string()) {
    throw Error(ErrorCode::InvalidArgument, "perturbation spec needs a \"variant\" string");
  }
  const std::string name = doc["variant"].get<std::string>();
  const nlohmann::json params = doc.value("params", nlohmann::json::object());
  PerturbationSpec spec;
  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_integer()) throw Error(ErrorCode::InvalidArgument, "seed must be an integer");
    spec.seed = doc["seed"].get<std::uint64_t>();
  }

  if (name == "noise_level") {
    spec.variant = NoiseLevel{require_number(params, "alpha")};
  } else if (name == "noisy_rows") {
    spec.variant = NoisyRows{params.contains("alpha") ? require_number(params, "alpha") : 0.5,
                             require_number(params, "fraction")};
  } else if (name == "single_mode_drop") {
    const double label = require_number(params, "label");
    if (label != 0.0 && label != 1.0) throw Error(ErrorCode::InvalidArgument, "label must be 0 or 1");
    spec.variant = SingleModeDrop{static_cast<std::uint32_t>(label)};
  } else if (name == "successive_mode_drop") {
    const double n = require_number(params, "n_top");
    if (n < 1 || n != std::floor(n)) throw Error(ErrorCode::InvalidArgument, "n_top must be a positive integer");
    spec.variant = SuccessiveModeDrop{static_cast<std::size_t>(n)};
  } else if (name == "extreme_mode_drop") {
    spec.variant = ExtremeModeDrop{require_number(params, "keep_percent")};
  } else if (name == "collapse_label_split") {
    spec.variant = CollapseLabelSplit{};
  } else if (name == "collapse_no_split") {
    spec.variant = CollapseNoSplit{};
  } else {
    throw Error(ErrorCode::InvalidArgument, "unknown perturbation variant '" + name + "'");
  }

  std::visit(Overloaded{
                 [](const NoiseLevel& v) {
                   if (!(v.alpha >= 0.0)) throw Error(ErrorCode::InvalidArgument, "alpha must be >= 0");
                 },
                 [](const NoisyRows& v) {
                   if (!(v.alpha >= 0.0)) throw Error(ErrorCode::InvalidArgument, "alpha must be >= 0");
                   if (!(v.fraction >= 0.0 && v.fraction <= 1.0)) {
                     throw Error(ErrorCode::InvalidArgument, "fraction must lie in [0, 1]");
                   }
                 },
                 [](const ExtremeModeDrop& v) {
                   if (!(v.keep_percent > 0.0 && v.keep_percent <= 100.0)) {
                     throw Error(ErrorCode::InvalidArgument, "keep_percent must lie in (0, 100]");
                   }
                 },
                 [](const auto&) {},
             },
             spec.variant);
  return spec;
}

std::vector<PerturbationSpec> default_grid(std::uint64_t master_seed) {
  std::vector<PerturbationSpec> grid;
  auto family_seed = [&](const char* family) { return derive_seed(master_seed, std::string("perturb:") + family); };
  for (int i = 1; i <= 5; ++i) grid.push_back({NoiseLevel{i / 10.0}, family_seed("noise_level")});
  for (int i = 1; i <= 10; ++i) grid.push_back({NoisyRows{0.5, i / 10.0}, family_seed("noisy_rows")});
  for (std::uint32_t label = 0; label <= 1; ++label) {
    grid.push_back({SingleModeDrop{label}, family_seed("single_mode_drop")});
  }
  for (std::size_t n = 1; n <= 5; ++n) grid.push_back({SuccessiveModeDrop{n}, family_seed("successive_mode_drop")});
  for (int p = 10; p <= 50; p += 10) {
    grid.push_back({ExtremeModeDrop{static_cast<double>(p)}, family_seed("extreme_mode_drop")});
  }
  grid.push_back({CollapseLabelSplit{}, family_seed("collapse_label_split")});
  grid.push_back({CollapseNoSplit{}, family_seed("collapse_no_split")});
  return grid;
}

TabularDataset apply_perturbation(const TabularDataset& ds, const PerturbationSpec& spec) {
  return std::visit(Overloaded{
                        [&](const NoiseLevel& v) { return add_gaussian_noise(ds, v.alpha, 1.0, spec.seed); },
                        [&](const NoisyRows& v) { return add_gaussian_noise(ds, v.alpha, v.fraction, spec.seed); },
                        [&](const SingleModeDrop& v) { return drop_label(ds, v.label); },
                        [&](const SuccessiveModeDrop& v) { return drop_top_modes(ds, v.n_top); },
                        [&](const ExtremeModeDrop& v) { return keep_bottom_modes(ds, v.keep_percent); },
                        [&](const CollapseLabelSplit&) { return collapse_modes(ds, true, spec.seed); },
                        [&](const CollapseNoSplit&) { return collapse_modes(ds, false, spec.seed); },
                    },
                    spec.variant);
}

// ---------------------------------------------------------------------------

TabularDataset add_gaussian_noise(const TabularDataset& ds, double alpha, double row_fraction, std::uint64_t seed) {
  if (!(alpha >= 0.0)) throw Error(ErrorCode::InvalidArgument, "alpha must be >= 0");
  if (!(row_fraction >= 0.0 && row_fraction <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "row_fraction must lie in [0, 1]");
  }
  TabularDataset out = ds;
  const std::size_t n = ds.row_count();
  const auto n_noisy = static_cast<std::size_t>(std::floor(row_fraction * static_cast<double>(n) + 1e-9));
  if (n == 0 || n_noisy == 0 || alpha == 0.0) return out;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng row_rng(derive_seed(seed, "rows"));
  row_rng.shuffle(order);
  std::vector<char> noisy(n, 0);
  for (std::size_t i = 0; i < n_noisy; ++i) noisy[order[i]] = 1;

  Rng noise_rng(derive_seed(seed, "noise"));
  for (auto c : ds.numerical_indices()) {
    auto& values = out.column(c).numbers;
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    const double scale = alpha * std::sqrt(ss / static_cast<double>(n));
    // Draw for every row so the stream is independent of which rows are noisy.
    for (std::size_t r = 0; r < n; ++r) {
      const double z = noise_rng.normal();
      if (noisy[r]) values[r] += scale * z;
    }
  }
  return out;
}

std::vector<ModeKey> rank_mode_combinations(const TabularDataset& ds) {
  const auto cats = ds.categorical_indices();
  if (cats.empty()) throw Error(ErrorCode::NoCategoricalColumns, "mode ranking needs a categorical column");
  std::map<std::vector<std::uint32_t>, std::size_t> counts;
  for (std::size_t r = 0; r < ds.row_count(); ++r) ++counts[key_of(ds, cats, r)];
  std::vector<ModeKey> ranked;
  ranked.reserve(counts.size());
  for (auto& [codes, count] : counts) ranked.push_back({codes, count});
  std::stable_sort(ranked.begin(), ranked.end(), [](const ModeKey& a, const ModeKey& b) { return a.count > b.count; });
  return ranked;
}

TabularDataset drop_label(const TabularDataset& ds, std::uint32_t label) {
  if (label > 1) throw Error(ErrorCode::InvalidArgument, "label must be 0 or 1");
  std::vector<char> keep(ds.row_count());
  const auto& labels = ds.labels();
  for (std::size_t r = 0; r < keep.size(); ++r) keep[r] = labels[r] != label;
  return filter_rows(ds, keep, "dropping the label");
}

TabularDataset drop_top_modes(const TabularDataset& ds, std::size_t n) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "n must be >= 1");
  const auto ranked = rank_mode_combinations(ds);
  std::set<std::vector<std::uint32_t>> dropped;
  for (std::size_t i = 0; i < std::min(n, ranked.size()); ++i) dropped.insert(ranked[i].codes);
  const auto cats = ds.categorical_indices();
  std::vector<char> keep(ds.row_count());
  for (std::size_t r = 0; r < keep.size(); ++r) keep[r] = !dropped.count(key_of(ds, cats, r));
  return filter_rows(ds, keep, "dropping the top modes");
}

TabularDataset keep_bottom_modes(const TabularDataset& ds, double keep_percent) {
  if (!(keep_percent > 0.0 && keep_percent <= 100.0)) {
    throw Error(ErrorCode::InvalidArgument, "keep_percent must lie in (0, 100]");
  }
  const auto ranked = rank_mode_combinations(ds);
  const double wanted = keep_percent / 100.0 * static_cast<double>(ranked.size());
  const auto n_keep = std::clamp<std::size_t>(static_cast<std::size_t>(std::ceil(wanted - 1e-9)), 1, ranked.size());
  std::set<std::vector<std::uint32_t>> kept;
  for (std::size_t i = 0; i < n_keep; ++i) kept.insert(ranked[ranked.size() - 1 - i].codes);
  const auto cats = ds.categorical_indices();
  std::vector<char> keep(ds.row_count());
  for (std::size_t r = 0; r < keep.size(); ++r) keep[r] = kept.count(key_of(ds, cats, r)) > 0;
  return filter_rows(ds, keep, "keeping the bottom modes");
}

TabularDataset collapse_modes(const TabularDataset& ds, bool split_by_label, std::uint64_t seed) {
  if (ds.row_count() == 0) throw Error(ErrorCode::EmptyDataset, "cannot collapse an empty dataset");
  TabularDataset out = ds;
  const auto& labels = ds.labels();
  if (split_by_label) {
    std::vector<std::size_t> groups[2];
    for (std::size_t r = 0; r < labels.size(); ++r) groups[labels[r]].push_back(r);
    if (groups[0].empty() || groups[1].empty()) {
      throw Error(ErrorCode::MissingClass, "label-split collapse needs both classes");
    }
    collapse_group(out, groups[0]);
    collapse_group(out, groups[1]);
    return out;
  }
  std::vector<std::size_t> all(ds.row_count());
  std::iota(all.begin(), all.end(), std::size_t{0});
  collapse_group(out, all);
  Rng rng(derive_seed(seed, "labels"));
  for (auto& label : out.column(out.label_index()).codes) label = static_cast<std::uint32_t>(rng.uniform_index(2));
  return out;
}

}  // namespace tabeval
