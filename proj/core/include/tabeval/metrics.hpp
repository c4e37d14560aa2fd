#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include "tabeval/autoenc.hpp"
#include "tabeval/dataio.hpp"
#include "tabeval/forest.hpp"
#include "tabeval/numstats.hpp"
#include "tabeval/pca.hpp"

namespace tabeval {

enum class Metric { faed, fpcad, rfis, sdv_fidelity, tstr, trts };
enum class Direction { higher_is_better, lower_is_better };

inline constexpr Metric kAllMetrics[] = {Metric::faed, Metric::fpcad,        Metric::rfis,
                                         Metric::sdv_fidelity, Metric::tstr, Metric::trts};

std::string_view to_string(Metric metric);
std::string_view to_string(Direction direction);
Metric metric_from_string(std::string_view name);
Direction direction_of(Metric metric);

/// score_gen plus, when a base is known, rel = base - value.
struct MetricOutcome {
  std::string metric_name;
  double value = 0.0;
  std::optional<double> base;
  std::optional<double> relative;
  Direction direction = Direction::higher_is_better;

  static MetricOutcome make(Metric metric, double value, std::optional<double> base = std::nullopt);
};

/// Fréchet distance between Gaussian summaries of autoencoder latents.
/// Lower is better, 0 is a perfect match.
double faed(const AutoencoderModel& ae, const EncodedMatrix& real, const EncodedMatrix& gen);
double fpcad(const PcaModel& pca, const EncodedMatrix& real, const EncodedMatrix& gen);

/// Same as faed/fpcad but against a precomputed real-side summary.
FrechetDetail faed_against(const AutoencoderModel& ae, const GaussianSummary& real_latent, const EncodedMatrix& gen);
FrechetDetail fpcad_against(const PcaModel& pca, const GaussianSummary& real_projected, const EncodedMatrix& gen);

/// exp(H(mean_i q_i) - mean_i H(q_i)) over per-row class distributions q_i,
/// clamped to [1, n_classes]. Throws EmptyInput.
double rfis_from_probabilities(const Matrix& proba);
double rfis(const RandomForestModel& clf, const EncodedMatrix& gen);

struct FidelityBreakdown {
  std::map<std::string, double> per_column;
  std::map<std::pair<std::string, std::string>, double> per_pair;
  double column_aggregate = 1.0;
  double row_aggregate = 1.0;
  double combined = 1.0;
};

/// Column scores (1 - KS for numerical, 1 - TVD/2 for categorical), pair
/// scores (1 - |rho_x - rho_s|/2 for numerical pairs, 1 - TVD/2 over the joint
/// contingency table for categorical pairs; mixed pairs skipped), averaged and
/// combined 50/50. The label column is excluded. An empty pair set scores 1.
/// Errors: SchemaMismatch, EmptyDataset.
FidelityBreakdown sdv_fidelity(const TabularDataset& real, const TabularDataset& gen);

struct UtilityResult {
  double accuracy = 0.0;
  bool constant_fallback = false;  // training side had one class
};

/// Train on gen_train (encoder fitted on gen_train), test on real_test. A
/// single-class gen_train falls back to the constant classifier predicting that
/// class. Errors: EmptyTestSet, EmptyData, SchemaMismatch.
UtilityResult tstr(const TabularDataset& gen_train, const TabularDataset& real_test, const ForestConfig& cfg);

/// Train on real_train (encoder fitted on real_train), test on gen_test.
UtilityResult trts(const TabularDataset& real_train, const TabularDataset& gen_test, const ForestConfig& cfg);
/// TRTS with an already fitted encoder and forest.
double trts_with_model(const Encoder& enc, const RandomForestModel& clf, const TabularDataset& gen_test);

}  // namespace tabeval
