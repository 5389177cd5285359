#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "polarfloer/cli.hpp"

int main(int argc, char** argv) {
  using namespace polarfloer;
  CLI::App app{"Chain-level Z/2-equivariant and twisted Floer computations on flow datasets"};
  std::string command;
  CommandArgs args;
  std::string commands;
  for (const auto& c : command_names()) commands += (commands.empty() ? "" : ", ") + c;
  app.add_option("command", command, "One of: " + commands)->required();
  app.add_option("dataset", args.target, "Dataset file (block kind B0, Bplus, Bminus, Binfty for blocks)")->required();
  app.add_option("--window", args.window, "Window size");
  app.add_option("--truncate", args.truncate, "Truncation level for ss-compare");
  app.add_flag("--grading", args.grading, "Report per-degree data where available");
  app.add_option("--out", args.out, "Write the report (or the block dataset) to this path");
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitSchema;
  }

  Report rep;
  try {
    rep = run_cli(command, args, CliEnvironment::from_process());
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitSchema;
  }
  std::string text = rep.text();
  if (args.out && command != "blocks") {
    std::ofstream out(*args.out, std::ios::binary);
    if (!out) {
      std::cerr << "cannot write " << *args.out << "\n";
      return kExitSchema;
    }
    out << text;
  } else {
    std::cout << text;
  }
  return rep.exit_code;
}
