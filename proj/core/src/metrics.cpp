#include "tabeval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "tabeval/error.hpp"

namespace tabeval {

std::string_view to_string(Metric metric) {
  switch (metric) {
    case Metric::faed: return "faed";
    case Metric::fpcad: return "fpcad";
    case Metric::rfis: return "rfis";
    case Metric::sdv_fidelity: return "sdv_fidelity";
    case Metric::tstr: return "tstr";
    case Metric::trts: return "trts";
  }
  return "faed";
}

std::string_view to_string(Direction direction) {
  return direction == Direction::higher_is_better ? "higher_is_better" : "lower_is_better";
}

Metric metric_from_string(std::string_view name) {
  for (Metric m : kAllMetrics) {
    if (to_string(m) == name) return m;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown metric '" + std::string(name) + "'");
}

Direction direction_of(Metric metric) {
  return metric == Metric::faed || metric == Metric::fpcad ? Direction::lower_is_better
                                                           : Direction::higher_is_better;
}

MetricOutcome MetricOutcome::make(Metric metric, double value, std::optional<double> base) {
  MetricOutcome out;
  out.metric_name = std::string(to_string(metric));
  out.value = value;
  out.direction = direction_of(metric);
  out.base = base;
  if (base) out.relative = *base - value;
  return out;
}

// ---------------------------------------------------------------------------

namespace {

void require_rows(const EncodedMatrix& m, std::size_t needed, const char* what) {
  if (m.rows() < needed) {
    throw Error(ErrorCode::TooFewSamples, std::string(what) + " has " + std::to_string(m.rows()) +
                                              " rows, needs at least " + std::to_string(needed));
  }
}

}  // namespace

FrechetDetail faed_against(const AutoencoderModel& ae, const GaussianSummary& real_latent, const EncodedMatrix& gen) {
  require_rows(gen, ae.latent_dim() + 1, "generated sample");
  return frechet_distance_detail(real_latent, mean_cov(encode_latent(ae, gen)));
}

double faed(const AutoencoderModel& ae, const EncodedMatrix& real, const EncodedMatrix& gen) {
  require_rows(real, ae.latent_dim() + 1, "real sample");
  return faed_against(ae, mean_cov(encode_latent(ae, real)), gen).value;
}

FrechetDetail fpcad_against(const PcaModel& pca, const GaussianSummary& real_projected, const EncodedMatrix& gen) {
  require_rows(gen, pca.k() + 1, "generated sample");
  return frechet_distance_detail(real_projected, mean_cov(project(pca, gen)));
}

double fpcad(const PcaModel& pca, const EncodedMatrix& real, const EncodedMatrix& gen) {
  require_rows(real, pca.k() + 1, "real sample");
  return fpcad_against(pca, mean_cov(project(pca, real)), gen).value;
}

double rfis_from_probabilities(const Matrix& proba) {
  if (proba.rows() == 0) throw Error(ErrorCode::EmptyInput, "RFIS of an empty sample");
  const Vector marginal = proba.colwise().mean().transpose();
  double conditional = 0.0;
  for (Eigen::Index r = 0; r < proba.rows(); ++r) {
    const Vector row = proba.row(r).transpose();
    conditional += entropy(std::span<const double>(row.data(), static_cast<std::size_t>(row.size())));
  }
  conditional /= static_cast<double>(proba.rows());
  const double h_marginal =
      entropy(std::span<const double>(marginal.data(), static_cast<std::size_t>(marginal.size())));
  const double score = std::exp(h_marginal - conditional);
  return std::clamp(score, 1.0, static_cast<double>(proba.cols()));
}

double rfis(const RandomForestModel& clf, const EncodedMatrix& gen) {
  if (gen.rows() == 0) throw Error(ErrorCode::EmptyInput, "RFIS of an empty sample");
  return rfis_from_probabilities(predict_proba(clf, gen.values));
}

// ---------------------------------------------------------------------------

namespace {

// Maps each dataset's own category codes onto a shared union axis (by string).
struct UnionAxis {
  std::vector<std::size_t> real_map;
  std::vector<std::size_t> gen_map;
  std::size_t size = 0;
};

UnionAxis union_axis(const Column& real, const Column& gen) {
  UnionAxis axis;
  std::unordered_map<std::string, std::size_t> index;
  auto add = [&](const Column& c, std::vector<std::size_t>& out) {
    out.resize(c.categories.size());
    for (std::size_t code = 0; code < c.categories.size(); ++code) {
      auto [it, inserted] = index.emplace(c.categories[code], index.size());
      out[code] = it->second;
    }
  };
  add(real, axis.real_map);
  add(gen, axis.gen_map);
  axis.size = index.size();
  return axis;
}

double column_score(const Column& real, const Column& gen) {
  if (real.kind() == ColumnKind::numerical) return 1.0 - ks_statistic(real.numbers, gen.numbers);
  const UnionAxis axis = union_axis(real, gen);
  std::vector<double> p(axis.size, 0.0), q(axis.size, 0.0);
  for (auto c : real.codes) p[axis.real_map[c]] += 1.0;
  for (auto c : gen.codes) q[axis.gen_map[c]] += 1.0;
  return 1.0 - 0.5 * tvd(p, q);
}

double safe_pearson(const std::vector<double>& x, const std::vector<double>& y) {
  return x.size() < 2 ? 0.0 : pearson(x, y);
}

double categorical_pair_score(const Column& ra, const Column& rb, const Column& ga, const Column& gb) {
  const UnionAxis ax = union_axis(ra, ga);
  const UnionAxis bx = union_axis(rb, gb);
  std::unordered_map<std::uint64_t, std::size_t> cell;
  std::vector<double> p, q;
  auto bump = [&](std::size_t a, std::size_t b, std::vector<double>& side) {
    const std::uint64_t key = static_cast<std::uint64_t>(a) * bx.size + b;
    auto [it, inserted] = cell.emplace(key, p.size());
    if (inserted) {
      p.push_back(0.0);
      q.push_back(0.0);
    }
    side[it->second] += 1.0;
  };
  for (std::size_t r = 0; r < ra.codes.size(); ++r) bump(ax.real_map[ra.codes[r]], bx.real_map[rb.codes[r]], p);
  for (std::size_t r = 0; r < ga.codes.size(); ++r) bump(ax.gen_map[ga.codes[r]], bx.gen_map[gb.codes[r]], q);
  return 1.0 - 0.5 * tvd(p, q);
}

}  // namespace

FidelityBreakdown sdv_fidelity(const TabularDataset& real, const TabularDataset& gen) {
  if (real.schema() != gen.schema()) throw Error(ErrorCode::SchemaMismatch, "real and generated schemas differ");
  if (real.row_count() == 0 || gen.row_count() == 0) {
    throw Error(ErrorCode::EmptyDataset, "fidelity needs non-empty real and generated datasets");
  }
  FidelityBreakdown out;
  std::vector<std::size_t> features;
  for (std::size_t i = 0; i < real.column_count(); ++i) {
    if (real.column(i).kind() != ColumnKind::label) features.push_back(i);
  }

  double col_sum = 0.0;
  for (auto i : features) {
    const double w = column_score(real.column(i), gen.column(i));
    out.per_column[real.column(i).name()] = w;
    col_sum += w;
  }
  if (!features.empty()) out.column_aggregate = col_sum / static_cast<double>(features.size());

  double row_sum = 0.0;
  std::size_t pairs = 0;
  for (std::size_t a = 0; a < features.size(); ++a) {
    for (std::size_t b = a + 1; b < features.size(); ++b) {
      const Column& ra = real.column(features[a]);
      const Column& rb = real.column(features[b]);
      const Column& ga = gen.column(features[a]);
      const Column& gb = gen.column(features[b]);
      double w;
      if (ra.kind() == ColumnKind::numerical && rb.kind() == ColumnKind::numerical) {
        const double rho_real = safe_pearson(ra.numbers, rb.numbers);
        const double rho_gen = safe_pearson(ga.numbers, gb.numbers);
        w = 1.0 - 0.5 * std::abs(rho_real - rho_gen);
      } else if (ra.kind() == ColumnKind::categorical && rb.kind() == ColumnKind::categorical) {
        w = categorical_pair_score(ra, rb, ga, gb);
      } else {
        continue;
      }
      out.per_pair[{ra.name(), rb.name()}] = w;
      row_sum += w;
      ++pairs;
    }
  }
  if (pairs > 0) out.row_aggregate = row_sum / static_cast<double>(pairs);
  out.combined = 0.5 * out.column_aggregate + 0.5 * out.row_aggregate;
  return out;
}

// ---------------------------------------------------------------------------

namespace {

UtilityResult train_and_score(const TabularDataset& train, const TabularDataset& test, const ForestConfig& cfg) {
  if (test.row_count() == 0) throw Error(ErrorCode::EmptyTestSet, "test set is empty");
  if (train.row_count() == 0) throw Error(ErrorCode::EmptyData, "training set is empty");
  if (train.schema() != test.schema()) throw Error(ErrorCode::SchemaMismatch, "train and test schemas differ");

  const auto& train_labels = train.labels();
  const auto ones = static_cast<std::size_t>(std::count(train_labels.begin(), train_labels.end(), 1u));
  if (ones == 0 || ones == train_labels.size()) {
    const std::uint32_t constant = ones == 0 ? 0u : 1u;
    const std::vector<std::uint32_t> predicted(test.row_count(), constant);
    return {accuracy(predicted, test.labels()), true};
  }
  const Encoder enc = Encoder::fit(train);
  const EncodedMatrix x_train = enc.encode(train);
  const RandomForestModel clf = train_forest(x_train.values, train_labels, cfg);
  return {trts_with_model(enc, clf, test), false};
}

}  // namespace

UtilityResult tstr(const TabularDataset& gen_train, const TabularDataset& real_test, const ForestConfig& cfg) {
  return train_and_score(gen_train, real_test, cfg);
}

UtilityResult trts(const TabularDataset& real_train, const TabularDataset& gen_test, const ForestConfig& cfg) {
  return train_and_score(real_train, gen_test, cfg);
}

double trts_with_model(const Encoder& enc, const RandomForestModel& clf, const TabularDataset& gen_test) {
  if (gen_test.row_count() == 0) throw Error(ErrorCode::EmptyTestSet, "test set is empty");
  const EncodedMatrix x = enc.encode(gen_test);
  return accuracy(predict(clf, x.values), gen_test.labels());
}

}  // namespace tabeval
