#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sktflow/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Invariant Hermitian geometry and pluriclosed flows on Lie algebras"};
  app.require_subcommand(1);

  std::string run_config;
  auto* run = app.add_subcommand("run", "Integrate the flow described by a config; write trajectory and summary");
  run->add_option("config", run_config, "Config file (JSON)")->required();

  std::string verify_config;
  auto* verify = app.add_subcommand("verify", "Print the invariant report for a config's algebra and metric");
  verify->add_option("config", verify_config, "Config file (JSON)")->required();

  std::string export_name;
  std::vector<std::string> raw_params;
  auto* catalog = app.add_subcommand("catalog", "List built-in algebras, or export one as a config");
  catalog->add_option("--export", export_name, "Entry to export as explicit structure constants");
  catalog->add_option("--param", raw_params, "Entry parameter as key=value (repeatable)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : sktflow::kExitParse;
  }

  if (*run) return sktflow::run_command(run_config, std::cout, std::cerr);
  if (*verify) return sktflow::verify_command(verify_config, std::cout, std::cerr);

  std::map<std::string, double> params;
  for (const auto& p : raw_params) {
    const auto eq = p.find('=');
    try {
      if (eq == std::string::npos) throw std::invalid_argument(p);
      std::size_t used = 0;
      const std::string value = p.substr(eq + 1);
      params[p.substr(0, eq)] = std::stod(value, &used);
      if (used != value.size()) throw std::invalid_argument(p);
    } catch (const std::exception&) {
      std::cerr << "parse error: --param expects key=number, got '" << p << "'\n";
      return sktflow::kExitParse;
    }
  }
  std::optional<std::string> name;
  if (!export_name.empty()) name = export_name;
  return sktflow::catalog_command(name, params, std::cout, std::cerr);
}
