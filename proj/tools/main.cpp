#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "mdlab/config.hpp"
#include "mdlab/runner.hpp"
#include "mdlab/suite.hpp"

int main(int argc, char** argv) {
  CLI::App app{"mdlab: moderate deviation experiments for weakly dependent sequences"};
  app.require_subcommand(1);
  app.set_version_flag("--version", mdlab::library_version());
  app.footer("Threads: set MDLAB_THREADS (default: hardware concurrency).\n"
             "Exit codes: 0 ok, 1 task failure, 2 config error, 3 capacity/precision refusal.");

  std::string config_path, out_dir;
  auto* run = app.add_subcommand("run", "Run one experiment config");
  run->add_option("config", config_path, "JSON config file")->required();
  run->add_option("-o,--output", out_dir, "Output directory (overrides output_dir in the config)");

  std::string suite_name, suite_out = "mdlab_suite_out";
  auto* suite = app.add_subcommand("suite", "Run a registered suite (acceptance, demo)");
  suite->add_option("name", suite_name, "Suite name")->required();
  suite->add_option("-o,--output", suite_out, "Directory for the suite's data files");

  app.add_subcommand("print-schema", "Print the JSON Schema of config files");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : mdlab::kExitConfig;
  }

  try {
    if (*run) return mdlab::run_config_file(config_path, out_dir, std::cout, std::cerr);
    if (*suite) return mdlab::run_suite(suite_name, suite_out, std::cout, std::cerr);
    std::cout << mdlab::config_schema();
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return mdlab::kExitTaskFailure;
  }
}
