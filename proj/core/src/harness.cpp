#include "tabeval/harness.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "tabeval/canonical_json.hpp"
#include "tabeval/error.hpp"
#include "tabeval/parallel.hpp"
#include "tabeval/rng.hpp"

#ifndef TABEVAL_VERSION
#define TABEVAL_VERSION "0.0.0"
#endif

namespace tabeval {

std::string_view library_version() { return TABEVAL_VERSION; }

// ---------------------------------------------------------------------------
// Evaluator

Evaluator::Evaluator(TabularDataset reference, ModelSettings settings)
    : reference_(std::move(reference)), settings_(std::move(settings)) {
  encoder_ = Encoder::fit(reference_);
  encoded_ = encoder_.encode(reference_);
}

void Evaluator::prepare(std::span<const Metric> metrics) {
  auto wants = [&](Metric m) { return std::find(metrics.begin(), metrics.end(), m) != metrics.end(); };

  if (wants(Metric::faed) && !autoencoder_) {
    AutoencoderConfig cfg = settings_.autoencoder;
    const std::size_t rows = encoded_.rows();
    if (rows < 2 * cfg.batch_size) {
      const std::size_t clamped = std::max<std::size_t>(1, rows / 2);
      training_warnings_.push_back("autoencoder batch_size reduced from " + std::to_string(cfg.batch_size) + " to " +
                                   std::to_string(clamped) + " for " + std::to_string(rows) + " training rows");
      cfg.batch_size = clamped;
    }
    autoencoder_ = train_autoencoder(encoded_.values, cfg);
    latent_summary_ = mean_cov(encode_latent(*autoencoder_, encoded_.values));
  }
  if (wants(Metric::fpcad) && !pca_) {
    pca_ = fit_pca(encoded_.values, settings_.pca);
    projected_summary_ = mean_cov(project(*pca_, encoded_.values));
  }
  if ((wants(Metric::rfis) || wants(Metric::trts)) && !forest_) {
    forest_ = train_forest(encoded_.values, *encoded_.labels, settings_.forest);
  }
}

Evaluator::Score Evaluator::score(Metric metric, const TabularDataset& gen) const {
  auto missing = [&](const char* model) {
    return Error(ErrorCode::InvalidArgument,
                 std::string(model) + " not trained; call prepare() for " + std::string(to_string(metric)));
  };
  auto frechet_warnings = [](const FrechetDetail& d, Score& s) {
    if (d.clamped_eigenvalues > 0) {
      s.warnings.push_back(std::to_string(d.clamped_eigenvalues) + " negative eigenvalue(s) clamped to 0");
    }
    if (d.clamped_result) s.warnings.push_back("negative Frechet distance clamped to 0");
  };

  Score s;
  switch (metric) {
    case Metric::faed: {
      if (!autoencoder_) throw missing("autoencoder");
      const FrechetDetail d = faed_against(*autoencoder_, *latent_summary_, encoder_.encode(gen));
      s.value = d.value;
      frechet_warnings(d, s);
      break;
    }
    case Metric::fpcad: {
      if (!pca_) throw missing("PCA basis");
      const FrechetDetail d = fpcad_against(*pca_, *projected_summary_, encoder_.encode(gen));
      s.value = d.value;
      frechet_warnings(d, s);
      break;
    }
    case Metric::rfis:
      if (!forest_) throw missing("forest");
      s.value = rfis(*forest_, encoder_.encode(gen));
      break;
    case Metric::sdv_fidelity:
      s.value = sdv_fidelity(reference_, gen).combined;
      break;
    case Metric::tstr: {
      const UtilityResult u = tstr(gen, reference_, settings_.forest);
      s.value = u.accuracy;
      if (u.constant_fallback) {
        s.warnings.push_back("generated training data has a single class; constant-classifier fallback used");
      }
      break;
    }
    case Metric::trts:
      if (!forest_) throw missing("forest");
      s.value = trts_with_model(encoder_, *forest_, gen);
      break;
  }
  return s;
}

// ---------------------------------------------------------------------------
// Plans

void ExperimentPlan::validate() const {
  if (metrics.empty()) throw Error(ErrorCode::InvalidArgument, "plan has an empty metric set");
  std::set<Metric> unique_metrics(metrics.begin(), metrics.end());
  if (unique_metrics.size() != metrics.size()) throw Error(ErrorCode::InvalidArgument, "plan lists a metric twice");
  if (!(split.train_fraction > 0.0 && split.train_fraction < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "split.train_fraction must lie in (0, 1)");
  }
  std::set<std::string> ids;
  for (const auto& spec : grid) {
    if (!ids.insert(spec.id()).second) throw Error(ErrorCode::InvalidArgument, "duplicate grid entry " + spec.id());
  }
  models.forest.validate();
}

ExperimentPlan plan_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir,
                              std::optional<std::uint64_t> fallback_seed) {
  if (!doc.is_object()) throw Error(ErrorCode::InvalidArgument, "plan must be a JSON object");
  try {
    ExperimentPlan plan;
    auto resolve = [&](const char* key) {
      if (!doc.contains(key) || !doc[key].is_string()) {
        throw Error(ErrorCode::InvalidArgument, std::string("plan needs a \"") + key + "\" path");
      }
      std::filesystem::path p = doc[key].get<std::string>();
      return p.is_relative() ? base_dir / p : p;
    };
    plan.dataset_path = resolve("dataset");
    plan.schema_path = resolve("schema");
    plan.master_seed = doc.contains("master_seed") ? doc["master_seed"].get<std::uint64_t>() : fallback_seed.value_or(0);

    const nlohmann::json split = doc.value("split", nlohmann::json::object());
    plan.split.train_fraction = split.value("train_fraction", 0.8);
    plan.split.seed = split.contains("seed") ? split["seed"].get<std::uint64_t>() : derive_seed(plan.master_seed, "split");

    if (doc.contains("metrics")) {
      for (const auto& m : doc["metrics"]) plan.metrics.push_back(metric_from_string(m.get<std::string>()));
    } else {
      plan.metrics.assign(std::begin(kAllMetrics), std::end(kAllMetrics));
    }

    const nlohmann::json grid = doc.value("grid", nlohmann::json("default"));
    if (grid.is_string()) {
      if (grid != "default") throw Error(ErrorCode::InvalidArgument, "grid must be an array or \"default\"");
      plan.grid = default_grid(plan.master_seed);
    } else {
      for (const auto& entry : grid) {
        PerturbationSpec spec = perturbation_from_json(entry);
        if (!entry.contains("seed")) spec.seed = derive_seed(plan.master_seed, "perturb:" + spec.variant_name());
        plan.grid.push_back(std::move(spec));
      }
    }

    const nlohmann::json ae = doc.value("autoencoder", nlohmann::json::object());
    plan.models.autoencoder = autoencoder_config_from_json(ae);
    if (!ae.contains("seed")) plan.models.autoencoder.seed = derive_seed(plan.master_seed, "autoencoder");
    const nlohmann::json forest = doc.value("forest", nlohmann::json::object());
    plan.models.forest = forest_config_from_json(forest);
    if (!forest.contains("seed")) plan.models.forest.seed = derive_seed(plan.master_seed, "forest");
    if (doc.contains("pca")) plan.models.pca = pca_target_from_json(doc["pca"]);

    plan.validate();
    return plan;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("malformed plan: ") + e.what());
  }
}

ExperimentPlan load_plan(const std::filesystem::path& path, std::optional<std::uint64_t> fallback_seed) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::InvalidArgument, path.string() + ": " + e.what());
  }
  return plan_from_json(doc, path.parent_path(), fallback_seed);
}

nlohmann::json to_json(const ExperimentPlan& plan) {
  nlohmann::json metrics = nlohmann::json::array();
  for (auto m : plan.metrics) metrics.push_back(std::string(to_string(m)));
  nlohmann::json grid = nlohmann::json::array();
  for (const auto& spec : plan.grid) grid.push_back(to_json(spec));
  return {{"dataset", plan.dataset_path.string()},
          {"schema", plan.schema_path.string()},
          {"split", {{"train_fraction", plan.split.train_fraction}, {"seed", plan.split.seed}}},
          {"metrics", metrics},
          {"grid", grid},
          {"autoencoder", to_json(plan.models.autoencoder)},
          {"forest", to_json(plan.models.forest)},
          {"pca", to_json(plan.models.pca)},
          {"master_seed", plan.master_seed}};
}

// ---------------------------------------------------------------------------
// Protocol

PreparedExperiment prepare_experiment(const ExperimentPlan& plan) {
  plan.validate();
  TabularDataset ds;
  try {
    ds = load_csv(plan.dataset_path, load_schema(plan.schema_path));
  } catch (const Error& e) {
    throw Error(ErrorCode::DatasetLoadFailure, e.what());
  }
  SplitPair split = stratified_split(ds, plan.split.train_fraction, plan.split.seed);
  Evaluator evaluator(split.train, plan.models);
  return PreparedExperiment{plan, std::move(split), std::move(evaluator)};
}

namespace {

// Rethrows the in-flight exception with the metric name prepended, keeping the
// error code of tabeval errors.
[[noreturn]] void rethrow_tagged(Metric m) {
  const std::string name(to_string(m));
  try {
    throw;
  } catch (const Error& e) {
    throw Error(e.code(), name + ": " + e.what());
  } catch (const std::exception& e) {
    throw Error(ErrorCode::InvalidArgument, name + ": " + e.what());
  }
}

}  // namespace

std::map<std::string, double> compute_base_scores(const PreparedExperiment& const_prepared) {
  PreparedExperiment prepared = const_prepared;
  std::map<std::string, double> bases;
  for (Metric m : prepared.plan.metrics) {
    try {
      const Metric one[] = {m};
      prepared.evaluator.prepare(one);
      bases[std::string(to_string(m))] = prepared.evaluator.score(m, prepared.split.test).value;
    } catch (...) {
      rethrow_tagged(m);
    }
  }
  return bases;
}

std::map<std::string, double> compute_base_scores(const ExperimentPlan& plan) {
  return compute_base_scores(prepare_experiment(plan));
}

double relative_score(double base, double gen) {
  if (!std::isfinite(base) || !std::isfinite(gen)) {
    throw Error(ErrorCode::NonFinite, "relative score needs finite base and generated scores");
  }
  return base - gen;
}

std::size_t ExperimentReport::error_count() const {
  return static_cast<std::size_t>(std::count_if(cells.begin(), cells.end(), [](const ReportCell& c) { return c.error.has_value(); }));
}

namespace {

nlohmann::json optional_number(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

std::optional<double> read_optional_number(const nlohmann::json& v) {
  if (v.is_null()) return std::nullopt;
  return v.get<double>();
}

}  // namespace

nlohmann::json to_json(const ExperimentReport& report) {
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& c : report.cells) {
    cells.push_back({{"spec_id", c.spec_id},
                     {"spec", c.spec},
                     {"metric", c.metric},
                     {"value", optional_number(c.value)},
                     {"base", optional_number(c.base)},
                     {"relative", optional_number(c.relative)},
                     {"error", c.error ? nlohmann::json(*c.error) : nlohmann::json(nullptr)}});
  }
  nlohmann::json env = report.env;
  env["metrics"] = report.metrics;
  return {{"bases", report.bases}, {"cells", cells}, {"env", env}, {"warnings", report.warnings}};
}

ExperimentReport report_from_json(const nlohmann::json& doc) {
  try {
    ExperimentReport report;
    report.bases = doc.at("bases").get<std::map<std::string, double>>();
    report.env = doc.at("env");
    report.warnings = doc.at("warnings").get<std::vector<std::string>>();
    if (report.env.contains("metrics")) {
      report.metrics = report.env["metrics"].get<std::vector<std::string>>();
      report.env.erase("metrics");
    }
    for (const auto& jc : doc.at("cells")) {
      ReportCell c;
      c.spec = jc.at("spec");
      c.metric = jc.at("metric").get<std::string>();
      c.spec_id = jc.contains("spec_id") ? jc["spec_id"].get<std::string>()
                                         : perturbation_from_json(c.spec).id();
      c.value = read_optional_number(jc.at("value"));
      c.base = read_optional_number(jc.at("base"));
      c.relative = read_optional_number(jc.at("relative"));
      if (!jc.at("error").is_null()) c.error = jc["error"].get<std::string>();
      if (std::find(report.metrics.begin(), report.metrics.end(), c.metric) == report.metrics.end()) {
        report.metrics.push_back(c.metric);
      }
      report.cells.push_back(std::move(c));
    }
    return report;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("malformed report: ") + e.what());
  }
}

ExperimentReport run_experiment(const ExperimentPlan& plan) {
  PreparedExperiment prepared = prepare_experiment(plan);
  return run_experiment(prepared);
}

ExperimentReport run_experiment(const PreparedExperiment& const_prepared) {
  // Model training mutates the evaluator; work on a copy so the caller's
  // prepared state is left as it was.
  PreparedExperiment prepared = const_prepared;
  const ExperimentPlan& plan = prepared.plan;

  ExperimentReport report;
  std::map<std::string, std::string> base_errors;
  for (Metric m : plan.metrics) {
    const std::string name(to_string(m));
    report.metrics.push_back(name);
    try {
      const Metric one[] = {m};
      prepared.evaluator.prepare(one);
      const auto s = prepared.evaluator.score(m, prepared.split.test);
      if (!std::isfinite(s.value)) throw Error(ErrorCode::NonFinite, "base score is not finite");
      report.bases[name] = s.value;
      for (const auto& w : s.warnings) report.warnings.push_back("base/" + name + ": " + w);
    } catch (const std::exception& e) {
      base_errors[name] = e.what();
      report.warnings.push_back("base/" + name + ": " + e.what());
    }
  }
  for (const auto& w : prepared.evaluator.training_warnings()) report.warnings.push_back("training: " + w);

  const std::size_t n_metrics = plan.metrics.size();
  std::vector<ReportCell> cells(plan.grid.size() * n_metrics);
  std::vector<std::vector<std::string>> cell_warnings(cells.size());

  parallel_for(plan.grid.size(), [&](std::size_t s) {
    const PerturbationSpec& spec = plan.grid[s];
    std::optional<TabularDataset> gen;
    std::string perturb_error;
    try {
      gen = apply_perturbation(prepared.split.test, spec);
    } catch (const std::exception& e) {
      perturb_error = std::string("perturbation failed: ") + e.what();
    }
    for (std::size_t k = 0; k < n_metrics; ++k) {
      const Metric m = plan.metrics[k];
      const std::string name(to_string(m));
      ReportCell& cell = cells[s * n_metrics + k];
      cell.spec_id = spec.id();
      cell.spec = to_json(spec);
      cell.metric = name;
      if (auto it = report.bases.find(name); it != report.bases.end()) cell.base = it->second;
      if (!gen) {
        cell.error = perturb_error;
        continue;
      }
      if (auto it = base_errors.find(name); it != base_errors.end()) {
        cell.error = "base score unavailable: " + it->second;
        continue;
      }
      try {
        auto score = prepared.evaluator.score(m, *gen);
        cell.value = score.value;
        cell.relative = relative_score(*cell.base, score.value);
        for (auto& w : score.warnings) cell_warnings[s * n_metrics + k].push_back(cell.spec_id + "/" + name + ": " + w);
      } catch (const std::exception& e) {
        cell.error = e.what();
      }
    }
  });

  report.cells = std::move(cells);
  for (auto& ws : cell_warnings) {
    for (auto& w : ws) report.warnings.push_back(std::move(w));
  }
  report.env = {{"tool", "tabeval"},
                {"version", std::string(library_version())},
                {"master_seed", plan.master_seed},
                {"split_seed", plan.split.seed},
                {"train_rows", prepared.split.train.row_count()},
                {"test_rows", prepared.split.test.row_count()},
                {"encoded_width", prepared.evaluator.encoder().output_width()},
                {"grid_size", plan.grid.size()}};
  return report;
}

}  // namespace tabeval
