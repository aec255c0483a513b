// ejecta: command-line front end.
//
//   ejecta <zeros|classify|sample|branch|multiplicity|reproduce> [spec|id]
//          [-o PATH] [--lambda-grid N] [--from P0]

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ejecta/commands.hpp"

int main(int argc, char** argv) {
  using namespace ejecta::cli;

  CLI::App app{"Starting points and T-periodic solutions of x' = g(x) + lambda f(t, x)", "ejecta"};
  std::string command;
  std::string target;
  CommandOptions opt;
  std::optional<double> from;

  app.add_option("command", command, "zeros | classify | sample | branch | multiplicity | reproduce")
      ->required()
      ->check(CLI::IsMember(command_names()));
  app.add_option("target", target, "problem file, or example id for reproduce")->required();
  app.add_option("-o,--output", opt.out_path, "CSV path (sample, branch) or output directory (reproduce)");
  app.add_option("--lambda-grid", opt.lambda_grid, "number of lambda slices for sample")
      ->check(CLI::PositiveNumber);
  app.add_option("--from", from, "starting zero p0 for branch");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }
  opt.from = from;
  return run(command, target, opt, std::cout, std::cerr);
}
