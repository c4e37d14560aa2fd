#include "tabeval_cli/commands.hpp"

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <ostream>

#include <CLI11.hpp>

#include "tabeval/canonical_json.hpp"
#include "tabeval/error.hpp"
#include "tabeval/harness.hpp"
#include "tabeval/parallel.hpp"
#include "tabeval/report.hpp"
#include "tabeval/rng.hpp"

namespace tabeval::cli {

namespace {

std::string fixed3(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

nlohmann::json read_json(const std::filesystem::path& path) {
  try {
    return nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::InvalidArgument, path.string() + ": " + e.what());
  }
}

void apply_threads(std::size_t threads) {
  if (threads > 0) set_max_threads(threads);
}

}  // namespace

std::optional<std::uint64_t> env_seed() {
  const char* raw = std::getenv("TABEVAL_SEED");
  if (raw == nullptr || *raw == '\0') return std::nullopt;
  const std::string_view text(raw);
  std::uint64_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw Error(ErrorCode::InvalidArgument, "TABEVAL_SEED must be an unsigned integer, got '" + std::string(text) + "'");
  }
  return value;
}

// ---------------------------------------------------------------------------

int cmd_evaluate(const EvaluateOptions& opts, std::ostream& out, std::ostream& err) {
  std::vector<Metric> metrics;
  ModelSettings settings;
  TabularDataset real, synth;
  std::uint64_t master = 0;
  try {
    if (opts.metrics.empty()) throw Error(ErrorCode::InvalidArgument, "--metrics must name at least one metric");
    for (const auto& name : opts.metrics) {
      const Metric m = metric_from_string(name);
      if (std::find(metrics.begin(), metrics.end(), m) == metrics.end()) metrics.push_back(m);
    }
    master = opts.seed ? *opts.seed : env_seed().value_or(0);
    nlohmann::json config = nlohmann::json::object();
    if (opts.config) config = read_json(*opts.config);
    const nlohmann::json ae = config.value("autoencoder", nlohmann::json::object());
    const nlohmann::json forest = config.value("forest", nlohmann::json::object());
    settings.autoencoder = autoencoder_config_from_json(ae);
    if (!ae.contains("seed")) settings.autoencoder.seed = derive_seed(master, "autoencoder");
    settings.forest = forest_config_from_json(forest);
    if (!forest.contains("seed")) settings.forest.seed = derive_seed(master, "forest");
    settings.forest.validate();
    if (config.contains("pca")) settings.pca = pca_target_from_json(config["pca"]);

    const Schema schema = load_schema(opts.schema);
    real = load_csv(opts.real, schema);
    synth = load_csv(opts.synth, schema);
    apply_threads(opts.threads);
  } catch (const std::exception& e) {
    err << "tabeval evaluate: " << e.what() << "\n";
    return kExitUsage;
  }

  ExperimentReport report;
  bool failed = false;
  try {
    Evaluator evaluator(real, settings);
    const nlohmann::json spec = {{"variant", "synthetic"}, {"params", {{"synth", opts.synth.filename().string()}}}};
    for (Metric m : metrics) {
      const std::string name(to_string(m));
      report.metrics.push_back(name);
      ReportCell cell{"synthetic", spec, name, std::nullopt, std::nullopt, std::nullopt, std::nullopt};
      try {
        const Metric one[] = {m};
        evaluator.prepare(one);
        auto score = evaluator.score(m, synth);
        cell.value = score.value;
        for (const auto& w : score.warnings) report.warnings.push_back(name + ": " + w);
        out << name << "  " << fixed3(score.value) << "\n";
      } catch (const std::exception& e) {
        cell.error = e.what();
        failed = true;
        err << "tabeval evaluate: " << name << ": " << e.what() << "\n";
      }
      report.cells.push_back(std::move(cell));
    }
    for (const auto& w : evaluator.training_warnings()) report.warnings.push_back("training: " + w);
    report.env = {{"tool", "tabeval"},
                  {"version", std::string(library_version())},
                  {"command", "evaluate"},
                  {"master_seed", master},
                  {"real_rows", real.row_count()},
                  {"synth_rows", synth.row_count()},
                  {"encoded_width", evaluator.encoder().output_width()}};
    emit_report(report, opts.out);
  } catch (const std::exception& e) {
    err << "tabeval evaluate: " << e.what() << "\n";
    return kExitFailure;
  }
  return failed ? kExitFailure : kExitOk;
}

int cmd_perturb(const PerturbOptions& opts, std::ostream& out, std::ostream& err) {
  PerturbationSpec spec;
  TabularDataset input;
  try {
    const nlohmann::json doc = read_json(opts.spec);
    spec = perturbation_from_json(doc);
    if (!doc.contains("seed")) {
      if (auto s = env_seed()) spec.seed = derive_seed(*s, "perturb:" + spec.variant_name());
    }
    input = load_csv(opts.in, load_schema(opts.schema));
  } catch (const std::exception& e) {
    err << "tabeval perturb: " << e.what() << "\n";
    return kExitUsage;
  }
  try {
    const TabularDataset result = apply_perturbation(input, spec);
    write_csv(result, opts.out);
    out << spec.id() << ": " << input.row_count() << " -> " << result.row_count() << " rows\n";
  } catch (const std::exception& e) {
    err << "tabeval perturb: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitOk;
}

int cmd_benchmark(const BenchmarkOptions& opts, std::ostream& out, std::ostream& err) {
  ExperimentPlan plan;
  try {
    plan = load_plan(opts.plan, env_seed());
    if (!std::filesystem::exists(plan.dataset_path)) {
      throw Error(ErrorCode::DatasetLoadFailure, "dataset not found: " + plan.dataset_path.string());
    }
    if (!std::filesystem::exists(plan.schema_path)) {
      throw Error(ErrorCode::DatasetLoadFailure, "schema not found: " + plan.schema_path.string());
    }
  } catch (const std::exception& e) {
    err << "tabeval benchmark: " << e.what() << "\n";
    return kExitUsage;
  }
  if (opts.dry_run) {
    out << "plan ok: " << plan.grid.size() << " specs x " << plan.metrics.size() << " metrics = "
        << plan.grid.size() * plan.metrics.size() << " cells\n";
    return kExitOk;
  }
  apply_threads(opts.threads);

  std::optional<PreparedExperiment> prepared;
  try {
    prepared.emplace(prepare_experiment(plan));
  } catch (const std::exception& e) {
    err << "tabeval benchmark: " << e.what() << "\n";
    return kExitUsage;
  }
  try {
    const ExperimentReport report = run_experiment(*prepared);
    emit_report(report, opts.out);
    out << format_table(report);
    const bool base_failed = report.bases.size() != report.metrics.size();
    if (report.error_count() > 0 || base_failed) {
      err << "tabeval benchmark: " << report.error_count() << " cell(s) failed; see report.json\n";
      return kExitFailure;
    }
  } catch (const std::exception& e) {
    err << "tabeval benchmark: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitOk;
}

int cmd_report(const ReportOptions& opts, std::ostream& out, std::ostream& err) {
  ExperimentReport report;
  try {
    report = report_from_json(read_json(opts.in));
    if (opts.format != "table" && opts.format != "csv" && opts.format != "svg") {
      throw Error(ErrorCode::InvalidArgument, "--format must be table, csv or svg");
    }
  } catch (const std::exception& e) {
    err << "tabeval report: " << e.what() << "\n";
    return kExitUsage;
  }
  try {
    if (opts.format == "table") {
      const std::string table = format_table(report);
      if (opts.out.empty() || opts.out == "-") {
        out << table;
      } else {
        write_file_atomic(opts.out, table);
      }
      return kExitOk;
    }
    std::filesystem::create_directories(opts.out);
    if (opts.format == "csv") {
      write_metric_csvs(report, opts.out);
    } else {
      write_family_svgs(report, opts.out);
    }
  } catch (const std::exception& e) {
    err << "tabeval report: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Synthetic tabular data evaluation benchmark"};
  app.set_version_flag("--version", std::string(library_version()));
  app.require_subcommand(1);

  EvaluateOptions eval;
  std::uint64_t eval_seed = 0;
  auto* evaluate = app.add_subcommand("evaluate", "Score a synthetic CSV against a real CSV");
  evaluate->add_option("--real", eval.real, "Real dataset CSV")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--synth", eval.synth, "Synthetic dataset CSV")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--schema", eval.schema, "Schema JSON")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--metrics", eval.metrics, "Comma-separated metric list")->required()->delimiter(',');
  evaluate->add_option("--out", eval.out, "Output directory")->required();
  evaluate->add_option("--config", eval.config, "Model configuration JSON")->check(CLI::ExistingFile);
  auto* seed_opt = evaluate->add_option("--seed", eval_seed, "Master seed");
  evaluate->add_option("--threads", eval.threads, "Worker thread cap")->check(CLI::PositiveNumber);

  PerturbOptions pert;
  auto* perturb = app.add_subcommand("perturb", "Apply one perturbation to a CSV");
  perturb->add_option("--in", pert.in, "Input CSV")->required()->check(CLI::ExistingFile);
  perturb->add_option("--schema", pert.schema, "Schema JSON")->required()->check(CLI::ExistingFile);
  perturb->add_option("--spec", pert.spec, "Perturbation spec JSON")->required()->check(CLI::ExistingFile);
  perturb->add_option("--out", pert.out, "Output CSV")->required();

  BenchmarkOptions bench;
  auto* benchmark = app.add_subcommand("benchmark", "Run an experiment plan over its perturbation grid");
  benchmark->add_option("--plan", bench.plan, "Plan JSON")->required()->check(CLI::ExistingFile);
  benchmark->add_option("--out", bench.out, "Output directory");
  benchmark->add_flag("--dry-run", bench.dry_run, "Validate the plan and print the grid size");
  benchmark->add_option("--threads", bench.threads, "Worker thread cap")->check(CLI::PositiveNumber);

  ReportOptions rep;
  auto* report = app.add_subcommand("report", "Render a report.json as a table, CSVs or SVGs");
  report->add_option("--in", rep.in, "report.json")->required()->check(CLI::ExistingFile);
  report->add_option("--format", rep.format, "table, csv or svg")
      ->check(CLI::IsMember({"table", "csv", "svg"}));
  report->add_option("--out", rep.out, "Output file (table) or directory (csv, svg)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (evaluate->parsed()) {
    if (seed_opt->count() > 0) eval.seed = eval_seed;
    return cmd_evaluate(eval, out, err);
  }
  if (perturb->parsed()) return cmd_perturb(pert, out, err);
  if (benchmark->parsed()) {
    if (!bench.dry_run && bench.out.empty()) {
      err << "tabeval benchmark: --out is required unless --dry-run is given\n";
      return kExitUsage;
    }
    return cmd_benchmark(bench, out, err);
  }
  return cmd_report(rep, out, err);
}

}  // namespace tabeval::cli
