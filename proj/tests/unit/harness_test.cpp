#include <cmath>

#include <gtest/gtest.h>

#include "tabeval/canonical_json.hpp"
#include "tabeval/fixture.hpp"
#include "tabeval/harness.hpp"
#include "tabeval/parallel.hpp"
#include "test_util.hpp"

namespace tabeval {
namespace {

TEST(RelativeScore, Examples) {
  EXPECT_NEAR(relative_score(0.983, 0.924), 0.059, 1e-12);
  EXPECT_EQ(relative_score(1.5, 1.5), 0.0);
  EXPECT_NEAR(relative_score(2.904, 187.280), -184.376, 1e-9);
  EXPECT_TABEVAL_ERROR(relative_score(std::nan(""), 1.0), ErrorCode::NonFinite);
  EXPECT_TABEVAL_ERROR(relative_score(1.0, INFINITY), ErrorCode::NonFinite);
}

nlohmann::json minimal_plan() {
  return {{"dataset", "data.csv"}, {"schema", "schema.json"}, {"master_seed", 99}};
}

TEST(Plan, DefaultsAndDerivedSeeds) {
  const auto plan = plan_from_json(minimal_plan(), "/base");
  EXPECT_EQ(plan.dataset_path, std::filesystem::path("/base/data.csv"));
  EXPECT_EQ(plan.schema_path, std::filesystem::path("/base/schema.json"));
  EXPECT_EQ(plan.metrics.size(), 6u);
  EXPECT_EQ(plan.grid.size(), 29u);
  EXPECT_EQ(plan.master_seed, 99u);
  EXPECT_EQ(plan.split.seed, derive_seed(99, "split"));
  EXPECT_EQ(plan.models.autoencoder.seed, derive_seed(99, "autoencoder"));
  EXPECT_EQ(plan.models.forest.seed, derive_seed(99, "forest"));

  const auto other = plan_from_json(minimal_plan(), "/base");
  EXPECT_EQ(canonical_dump(to_json(other)), canonical_dump(to_json(plan)));

  nlohmann::json no_seed = minimal_plan();
  no_seed.erase("master_seed");
  EXPECT_EQ(plan_from_json(no_seed, "/b", 7).master_seed, 7u);
  EXPECT_EQ(plan_from_json(no_seed, "/b").master_seed, 0u);
}

TEST(Plan, ExplicitFields) {
  nlohmann::json doc = minimal_plan();
  doc["metrics"] = {"rfis", "tstr"};
  doc["split"] = {{"train_fraction", 0.7}, {"seed", 5}};
  doc["grid"] = nlohmann::json::array({{{"variant", "noise_level"}, {"params", {{"alpha", 0.2}}}}});
  doc["forest"] = {{"n_trees", 10}, {"seed", 3}};
  const auto plan = plan_from_json(doc, "/x");
  EXPECT_EQ(plan.metrics, (std::vector<Metric>{Metric::rfis, Metric::tstr}));
  EXPECT_EQ(plan.split.train_fraction, 0.7);
  EXPECT_EQ(plan.split.seed, 5u);
  ASSERT_EQ(plan.grid.size(), 1u);
  EXPECT_EQ(plan.grid[0].seed, derive_seed(99, "perturb:noise_level"));
  EXPECT_EQ(plan.models.forest.n_trees, 10u);
  EXPECT_EQ(plan.models.forest.seed, 3u);
  const auto again = plan_from_json(to_json(plan), "/elsewhere");
  EXPECT_EQ(canonical_dump(to_json(again)), canonical_dump(to_json(plan)));
}

TEST(Plan, Rejections) {
  auto with = [](const char* key, nlohmann::json value) {
    nlohmann::json doc = minimal_plan();
    doc[key] = std::move(value);
    return doc;
  };
  EXPECT_TABEVAL_ERROR(plan_from_json(with("metrics", nlohmann::json::array()), "/"), ErrorCode::InvalidArgument);
  EXPECT_TABEVAL_ERROR(plan_from_json(with("metrics", {"fid"}), "/"), ErrorCode::InvalidArgument);
  EXPECT_TABEVAL_ERROR(plan_from_json(with("split", {{"train_fraction", 1.0}}), "/"), ErrorCode::InvalidArgument);
  const nlohmann::json spec = {{"variant", "single_mode_drop"}, {"params", {{"label", 0}}}};
  EXPECT_TABEVAL_ERROR(plan_from_json(with("grid", {spec, spec}), "/"), ErrorCode::InvalidArgument);
  EXPECT_TABEVAL_ERROR(plan_from_json(with("grid", "everything"), "/"), ErrorCode::InvalidArgument);
  EXPECT_TABEVAL_ERROR(plan_from_json(nlohmann::json::array(), "/"), ErrorCode::InvalidArgument);
}

TEST(Evaluator, BuildsOnlyRequestedModels) {
  const auto ds = testing::random_mixed_dataset(200, 3);
  Evaluator evaluator(ds, ModelSettings{});
  const Metric only[] = {Metric::sdv_fidelity};
  evaluator.prepare(only);
  EXPECT_EQ(evaluator.autoencoder(), nullptr);
  EXPECT_EQ(evaluator.pca(), nullptr);
  EXPECT_EQ(evaluator.forest(), nullptr);
  EXPECT_NEAR(evaluator.score(Metric::sdv_fidelity, ds).value, 1.0, 1e-9);
  EXPECT_TABEVAL_ERROR(evaluator.score(Metric::faed, ds), ErrorCode::InvalidArgument);

  const Metric pca_only[] = {Metric::fpcad};
  evaluator.prepare(pca_only);
  EXPECT_NE(evaluator.pca(), nullptr);
  EXPECT_EQ(evaluator.autoencoder(), nullptr);
  EXPECT_NEAR(evaluator.score(Metric::fpcad, ds).value, 0.0, 1e-8);
}

TEST(Report, JsonRoundTrip) {
  ExperimentReport report;
  report.metrics = {"faed", "tstr"};
  report.bases = {{"faed", 0.25}, {"tstr", 1.0}};
  report.cells.push_back({"noise_level(alpha=0.1)", {{"variant", "noise_level"}, {"params", {{"alpha", 0.1}}}}, "faed",
                          0.5, 0.25, -0.25, std::nullopt});
  report.cells.push_back({"noise_level(alpha=0.1)", {{"variant", "noise_level"}, {"params", {{"alpha", 0.1}}}}, "tstr",
                          std::nullopt, 1.0, std::nullopt, "EmptyTestSet: none"});
  report.warnings = {"w"};
  report.env = {{"tool", "tabeval"}};
  const std::string text = canonical_dump(to_json(report));
  const auto back = report_from_json(nlohmann::json::parse(text));
  EXPECT_EQ(canonical_dump(to_json(back)), text);
  EXPECT_EQ(back.error_count(), 1u);
  EXPECT_EQ(*back.cells[0].relative, -0.25);
}

class DeskExperiment : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new std::filesystem::path(testing::scratch_dir("harness_desk"));
    const auto files = write_desk_fixture(*dir_);
    nlohmann::json doc = nlohmann::json::parse(read_file(files.plan));
    nlohmann::json grid = nlohmann::json::array();
    for (double a : {0.1, 0.2, 0.3, 0.4, 0.5}) grid.push_back({{"variant", "noise_level"}, {"params", {{"alpha", a}}}});
    for (int label : {0, 1}) grid.push_back({{"variant", "single_mode_drop"}, {"params", {{"label", label}}}});
    doc["grid"] = grid;
    plan_ = new ExperimentPlan(plan_from_json(doc, *dir_));
    prepared_ = new PreparedExperiment(prepare_experiment(*plan_));
    train_csv_ = new std::string(format_csv(prepared_->split.train));
    report_ = new ExperimentReport(run_experiment(*prepared_));
  }
  static void TearDownTestSuite() {
    delete report_;
    delete train_csv_;
    delete prepared_;
    delete plan_;
    std::filesystem::remove_all(*dir_);
    delete dir_;
  }

  static const ReportCell& cell(const std::string& spec_id, const std::string& metric) {
    for (const auto& c : report_->cells) {
      if (c.spec_id == spec_id && c.metric == metric) return c;
    }
    throw std::runtime_error("missing cell " + spec_id + "/" + metric);
  }
  static std::string noise_id(double alpha) {
    return PerturbationSpec{NoiseLevel{alpha}, 0}.id();
  }

  static std::filesystem::path* dir_;
  static ExperimentPlan* plan_;
  static PreparedExperiment* prepared_;
  static std::string* train_csv_;
  static ExperimentReport* report_;
};

std::filesystem::path* DeskExperiment::dir_ = nullptr;
ExperimentPlan* DeskExperiment::plan_ = nullptr;
PreparedExperiment* DeskExperiment::prepared_ = nullptr;
std::string* DeskExperiment::train_csv_ = nullptr;
ExperimentReport* DeskExperiment::report_ = nullptr;

TEST_F(DeskExperiment, EveryCellPresentWithExactRelative) {
  EXPECT_EQ(report_->cells.size(), 7u * 6u);
  EXPECT_EQ(report_->error_count(), 0u);
  for (const auto& c : report_->cells) {
    ASSERT_TRUE(c.value && c.base && c.relative) << c.spec_id << "/" << c.metric;
    EXPECT_EQ(*c.relative, *c.base - *c.value);
    EXPECT_EQ(*c.base, report_->bases.at(c.metric));
  }
}

TEST_F(DeskExperiment, BaseScores) {
  const auto& b = report_->bases;
  EXPECT_GT(b.at("faed"), 0.0);
  EXPECT_LT(b.at("faed"), 5.0);
  EXPECT_GT(b.at("sdv_fidelity"), 0.95);
  EXPECT_EQ(b.at("tstr"), 1.0);
  EXPECT_EQ(b.at("trts"), 1.0);
  EXPECT_GE(b.at("rfis"), 1.0);
  EXPECT_LE(b.at("rfis"), 2.0);
  EXPECT_EQ(compute_base_scores(*prepared_), b);
}

TEST_F(DeskExperiment, NoiseWorsensDistanceAndInceptionScores) {
  double previous = 0.0;
  for (double a : {0.1, 0.2, 0.3, 0.4, 0.5}) {
    const double rel = *cell(noise_id(a), "faed").relative;
    EXPECT_LT(rel, previous) << "alpha=" << a;
    previous = rel;
  }
  EXPECT_GT(*cell(noise_id(0.5), "faed").value, report_->bases.at("faed"));
  EXPECT_GT(*cell(noise_id(0.5), "fpcad").value, report_->bases.at("fpcad"));
  EXPECT_LT(*cell(noise_id(0.5), "rfis").value, report_->bases.at("rfis"));
}

TEST_F(DeskExperiment, SingleModeDropMatchesClassPriors) {
  // TSTR scores the classifier trained on the perturbed test set against the
  // real train split, so the constant classifier hits the train-split prior.
  const auto& y = prepared_->split.train.labels();
  const double prior1 = static_cast<double>(std::count(y.begin(), y.end(), 1u)) / static_cast<double>(y.size());
  const std::string drop0 = PerturbationSpec{SingleModeDrop{0}, 0}.id();
  const std::string drop1 = PerturbationSpec{SingleModeDrop{1}, 0}.id();
  // Training on class 1 only predicts 1 everywhere, losing the class-0 rows.
  EXPECT_NEAR(*cell(drop0, "tstr").relative, 1.0 - prior1, 1e-12);
  EXPECT_NEAR(*cell(drop1, "tstr").relative, prior1, 1e-12);
  EXPECT_EQ(*cell(drop0, "trts").relative, 0.0);
  EXPECT_EQ(*cell(drop1, "trts").relative, 0.0);
}

TEST_F(DeskExperiment, TrainSplitUntouched) { EXPECT_EQ(format_csv(prepared_->split.train), *train_csv_); }

TEST_F(DeskExperiment, EmptyGridGivesBasesOnly) {
  PreparedExperiment copy = *prepared_;
  copy.plan.grid.clear();
  const auto report = run_experiment(copy);
  EXPECT_TRUE(report.cells.empty());
  EXPECT_EQ(report.bases, report_->bases);
}

TEST_F(DeskExperiment, IndependentOfThreadCount) {
  PreparedExperiment copy = *prepared_;
  copy.plan.grid.resize(3);
  const std::size_t saved = max_threads();
  set_max_threads(1);
  const std::string one = canonical_dump(to_json(run_experiment(copy)));
  set_max_threads(4);
  const std::string four = canonical_dump(to_json(run_experiment(copy)));
  set_max_threads(saved);
  EXPECT_EQ(one, four);
}

TEST(PrepareExperiment, MissingDataset) {
  const auto plan = plan_from_json(minimal_plan(), testing::scratch_dir("harness_missing"));
  EXPECT_TABEVAL_ERROR(prepare_experiment(plan), ErrorCode::DatasetLoadFailure);
}

}  // namespace
}  // namespace tabeval
