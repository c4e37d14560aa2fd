#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace tabeval::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

struct EvaluateOptions {
  std::filesystem::path real;
  std::filesystem::path synth;
  std::filesystem::path schema;
  std::vector<std::string> metrics;
  std::filesystem::path out;
  std::optional<std::filesystem::path> config;  // {"autoencoder","forest","pca"} overrides
  std::optional<std::uint64_t> seed;
  std::size_t threads = 0;
};

struct PerturbOptions {
  std::filesystem::path in;
  std::filesystem::path schema;
  std::filesystem::path spec;
  std::filesystem::path out;
};

struct BenchmarkOptions {
  std::filesystem::path plan;
  std::filesystem::path out;
  bool dry_run = false;
  std::size_t threads = 0;
};

struct ReportOptions {
  std::filesystem::path in;
  std::string format = "table";  // table | csv | svg
  std::filesystem::path out;
};

/// TABEVAL_SEED, if set. Throws Error(InvalidArgument) when it is not an
/// unsigned integer.
std::optional<std::uint64_t> env_seed();

int cmd_evaluate(const EvaluateOptions& opts, std::ostream& out, std::ostream& err);
int cmd_perturb(const PerturbOptions& opts, std::ostream& out, std::ostream& err);
int cmd_benchmark(const BenchmarkOptions& opts, std::ostream& out, std::ostream& err);
int cmd_report(const ReportOptions& opts, std::ostream& out, std::ostream& err);

/// Parses argv and dispatches to one subcommand. Returns the exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace tabeval::cli
