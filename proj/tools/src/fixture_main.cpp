#include <iostream>

#include <CLI11.hpp>

#include "tabeval/fixture.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Write the seeded desk fixture (data.csv, schema.json, plan.json)"};
  std::filesystem::path dir;
  tabeval::DeskFixtureOptions options;
  std::uint64_t master_seed = 2024;
  app.add_option("--out", dir, "Output directory")->required();
  app.add_option("--rows", options.rows, "Row count")->check(CLI::PositiveNumber);
  app.add_option("--seed", options.seed, "Data seed");
  app.add_option("--master-seed", master_seed, "master_seed written into plan.json");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }
  try {
    const auto files = tabeval::write_desk_fixture(dir, options, master_seed);
    std::cout << files.data.string() << "\n" << files.schema.string() << "\n" << files.plan.string() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "tabeval-fixture: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
