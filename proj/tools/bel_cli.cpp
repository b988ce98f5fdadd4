#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "bel/scenario.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Radial verification scenarios on weighted model manifolds"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run a scenario file (comma lists expand to a sweep)");
  std::string config;
  std::string out;
  std::optional<double> tol;
  int jobs = 1;
  run->add_option("config", config, "scenario file")->required();
  run->add_option("--out", out, "output directory (overrides out_dir and BEL_OUT_DIR)");
  run->add_option("--tol", tol, "solver tolerance (overrides tol)")->check(CLI::PositiveNumber);
  run->add_option("--jobs", jobs, "parallel runs for sweeps")->check(CLI::PositiveNumber);

  auto* list = app.add_subcommand("list-scenarios", "print the scenarios and their keys");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : bel::exit_config_error;
  }

  if (list->parsed()) {
    for (const auto& s : bel::scenario_catalog()) {
      std::cout << s.name << "\n  " << s.summary << "\n  required:";
      for (const auto& k : s.required) std::cout << ' ' << k;
      if (s.required.empty()) std::cout << " (none)";
      std::cout << "\n  optional:";
      for (const auto& k : s.optional) std::cout << ' ' << k;
      std::cout << " grid.r_max grid.nodes grid.spacing tol out_dir\n";
    }
    return 0;
  }

  bel::RunOptions opts;
  if (!out.empty()) opts.out = out;
  opts.tol = tol;
  opts.jobs = jobs;
  return bel::run_config_file(config, opts, std::cout);
}
