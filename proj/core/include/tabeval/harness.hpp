#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tabeval/autoenc.hpp"
#include "tabeval/dataio.hpp"
#include "tabeval/forest.hpp"
#include "tabeval/metrics.hpp"
#include "tabeval/pca.hpp"
#include "tabeval/perturb.hpp"

namespace tabeval {

std::string_view library_version();

struct ModelSettings {
  AutoencoderConfig autoencoder;
  ForestConfig forest;
  PcaTarget pca = VarianceFraction{0.95};
};

/// Scores generated datasets against a fixed real reference. Every model
/// (encoder, autoencoder, PCA basis, forest) is fitted on the reference only,
/// once, and is immutable afterwards, so score() is safe to call concurrently.
class Evaluator {
 public:
  Evaluator(TabularDataset reference, ModelSettings settings);

  /// Trains exactly the models the given metrics need.
  void prepare(std::span<const Metric> metrics);

  struct Score {
    double value = 0.0;
    std::vector<std::string> warnings;
  };
  /// Throws if prepare() was not called for `metric`.
  Score score(Metric metric, const TabularDataset& gen) const;

  const TabularDataset& reference() const { return reference_; }
  const Encoder& encoder() const { return encoder_; }
  const EncodedMatrix& encoded_reference() const { return encoded_; }
  const ModelSettings& settings() const { return settings_; }
  const std::vector<std::string>& training_warnings() const { return training_warnings_; }

  const AutoencoderModel* autoencoder() const { return autoencoder_ ? &*autoencoder_ : nullptr; }
  const PcaModel* pca() const { return pca_ ? &*pca_ : nullptr; }
  const RandomForestModel* forest() const { return forest_ ? &*forest_ : nullptr; }

 private:
  TabularDataset reference_;
  ModelSettings settings_;
  Encoder encoder_;
  EncodedMatrix encoded_;
  std::optional<AutoencoderModel> autoencoder_;
  std::optional<GaussianSummary> latent_summary_;
  std::optional<PcaModel> pca_;
  std::optional<GaussianSummary> projected_summary_;
  std::optional<RandomForestModel> forest_;
  std::vector<std::string> training_warnings_;
};

struct SplitConfig {
  double train_fraction = 0.8;
  std::uint64_t seed = 0;
};

struct ExperimentPlan {
  std::filesystem::path dataset_path;
  std::filesystem::path schema_path;
  SplitConfig split;
  std::vector<Metric> metrics;
  std::vector<PerturbationSpec> grid;
  ModelSettings models;
  std::uint64_t master_seed = 0;

  /// Throws InvalidArgument (empty metric set, duplicate spec ids, bad split).
  void validate() const;
};

/// Reads a plan document. Relative paths resolve against `base_dir`. Seeds
/// left unset derive from master_seed; master_seed itself defaults to
/// `fallback_seed` (the CLI passes TABEVAL_SEED here) and then to 0.
/// "grid" may be an array of perturbation specs or the string "default" (also
/// used when "grid" is absent).
ExperimentPlan plan_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir,
                              std::optional<std::uint64_t> fallback_seed = std::nullopt);
ExperimentPlan load_plan(const std::filesystem::path& path, std::optional<std::uint64_t> fallback_seed = std::nullopt);
nlohmann::json to_json(const ExperimentPlan& plan);

/// Loaded and split data plus the evaluator trained on the train split.
struct PreparedExperiment {
  ExperimentPlan plan;
  SplitPair split;
  Evaluator evaluator;
};

/// Throws Error(DatasetLoadFailure) when the dataset or schema cannot be read.
PreparedExperiment prepare_experiment(const ExperimentPlan& plan);

/// Each metric evaluated with gen := the clean test split, training the models
/// it needs on a copy of the evaluator. Failures are rethrown tagged with the
/// metric name.
std::map<std::string, double> compute_base_scores(const PreparedExperiment& prepared);
std::map<std::string, double> compute_base_scores(const ExperimentPlan& plan);

/// base - gen. Throws NonFinite when either input is not finite.
double relative_score(double base, double gen);

struct ReportCell {
  std::string spec_id;
  nlohmann::json spec;
  std::string metric;
  std::optional<double> value;
  std::optional<double> base;
  std::optional<double> relative;
  std::optional<std::string> error;
};

struct ExperimentReport {
  std::vector<std::string> metrics;  // row order for tables
  std::map<std::string, double> bases;
  std::vector<ReportCell> cells;  // spec-major, metric-minor
  nlohmann::json env = nlohmann::json::object();
  std::vector<std::string> warnings;

  std::size_t error_count() const;
};

nlohmann::json to_json(const ExperimentReport& report);
ExperimentReport report_from_json(const nlohmann::json& doc);

/// Runs every (spec, metric) cell: perturb the test split only, re-encode with
/// the train-fitted encoder, score. A failing cell records its error and the
/// rest proceed. Output is independent of thread count.
ExperimentReport run_experiment(const ExperimentPlan& plan);
ExperimentReport run_experiment(const PreparedExperiment& prepared);

}  // namespace tabeval
