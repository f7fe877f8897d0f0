#include <iostream>

#include "CLI11.hpp"

#include "chks/cli/check.hpp"
#include "chks/cli/commands.hpp"

int main(int argc, char** argv) {
  using namespace chks::cli;
  CLI::App app{"Cahn-Hilliard / Keller-Segel chemotaxis simulator"};
  app.set_version_flag("--version", std::string(version()));
  app.require_subcommand(1);

  std::string config;
  std::vector<std::string> sets;
  int jobs = 0;
  std::string inject;

  auto* run = app.add_subcommand("run", "Run one simulation");
  run->add_option("config", config, "INI config file")->required();
  auto* wsu = app.add_subcommand("wsu", "Paired coarse/fine weak-strong uniqueness experiment");
  wsu->add_option("config", config, "INI config file")->required();
  auto* sweep = app.add_subcommand("sweep", "Cartesian parameter sweep");
  sweep->add_option("config", config, "INI config file")->required();
  sweep->add_option("--set", sets, "section.key=v1,v2,... (repeatable)")->take_all();
  sweep->add_option("--jobs,-j", jobs, "Worker threads (default: hardware concurrency)");
  auto* check = app.add_subcommand("check", "Run the property and invariant battery");
  check->add_option("--inject", inject, "Fault injection: beta-sign-flip");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run) return cmd_run(config, std::cout, std::cerr);
    if (*wsu) return cmd_wsu(config, std::cout, std::cerr);
    if (*sweep) return cmd_sweep(config, sets, jobs, std::cout, std::cerr);
    if (*check) return cmd_check(inject, std::cout, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailed;
  }
  return kExitConfig;
}
