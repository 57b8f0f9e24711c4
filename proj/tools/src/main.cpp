#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"

int main(int argc, char** argv) {
  using namespace vecgee::cli;
  CLI::App app{"vecgee: generalized estimating equations for vector responses"};
  app.require_subcommand(1);

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "Fit a vector GEE model");
  fit_cmd->add_option("--spec", fit.spec, "Model spec JSON")->required();
  fit_cmd->add_option("--data", fit.data, "Data CSV or builtin:sorbinil")->required();
  fit_cmd->add_option("--working", fit.working,
                      "independence | unstructured | odds_ratio (default: from spec)");
  fit_cmd->add_option("--out", fit.out, "Output JSON (a .csv table is written alongside)")
      ->required();
  fit_cmd->add_option("--missing", fit.missing_token, "Missing-value token in the CSV");
  fit_cmd->add_option("--export-external", fit.export_external,
                      "Also write <prefix>_means.csv and <prefix>_wcov.csv");

  TestArgs test;
  auto* test_cmd = app.add_subcommand("test", "Wald F test of M beta = delta");
  test_cmd->add_option("--fit", test.fit, "Fit JSON from `vecgee fit`")->required();
  test_cmd->add_option("--contrast", test.contrast, "Contrast JSON")->required();
  test_cmd->add_option("--variance", test.variance, "naive | sandwich | both");

  RegionArgs region;
  auto* region_cmd = app.add_subcommand("region", "Joint confidence regions for two coefficients");
  region_cmd->add_option("--fit", region.fit, "Fit JSON")->required();
  region_cmd->add_option("--pair", region.pair, "Two coefficient names, e.g. b11,b21")->required();
  region_cmd->add_option("--levels", region.levels, "Comma-separated confidence levels");
  region_cmd->add_option("--grid", region.grid, "Grid points per axis")->check(CLI::Range(2, 5000));
  region_cmd->add_option("--variance", region.variance, "naive | sandwich | both");
  region_cmd->add_option("--out", region.out, "Boundary CSV (default <fit>_region.csv)");

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo study");
  sim_cmd->add_option("--config", sim.config, "Simulation config JSON")->required();
  sim_cmd->add_option("--out", sim.out, "Report CSV (a .json report is written alongside)")
      ->required();
  sim_cmd->add_option("--age-pool", sim.age_pool, "CSV with an 'age' column for the burn design");

  AdjustArgs adjust;
  auto* adjust_cmd = app.add_subcommand("adjust", "Sandwich adjustment of an external fit");
  adjust_cmd->add_option("--means", adjust.means, "Fitted means CSV")->required();
  adjust_cmd->add_option("--wcov", adjust.wcov, "Working covariance CSV")->required();
  adjust_cmd->add_option("--link", adjust.link, "Link for all components, or name=link,...");
  adjust_cmd->add_option("--estimates", adjust.estimates, "CSV of coefficient,estimate");
  adjust_cmd->add_option("--out", adjust.out, "Output JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*fit_cmd) run_fit(fit, std::cout);
    if (*test_cmd) run_test(test, std::cout);
    if (*region_cmd) run_region(region, std::cout, std::cerr);
    if (*sim_cmd) {
      sim.threads = threads_from_environment();
      run_simulate(sim, std::cout);
    }
    if (*adjust_cmd) run_adjust(adjust, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "vecgee: " << e.what() << "\n";
    return exit_code(e);
  }
  return 0;
}
