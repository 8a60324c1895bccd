// Command-line front end: one subcommand per analysis, JSON scenario configs,
// dot-path overrides, JSON/CSV emission.
//
// Exit codes: 0 success, 1 validation error, 2 analysis error,
//             3 inconclusive verdict.

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "pacrit/scenario.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw pacrit::ValidationError("cannot read config file: " + path);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

struct CommonArgs {
  std::string config_path;
  std::vector<std::string> sets;
  std::string out;
  std::string format = "json";
  long long seed = -1;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "scenario config (JSON)")->required();
  cmd->add_option("--set", args.sets, "override config entries, path.to.key=value");
  cmd->add_option("--out", args.out, "write the report to this path");
  cmd->add_option("--format", args.format, "json|csv")->check(CLI::IsMember({"json", "csv"}));
  cmd->add_option("--seed", args.seed, "override the scenario seed");
}

int run(const std::string& analysis, const CommonArgs& args) {
  pacrit::Json config = pacrit::parse_config(read_file(args.config_path));
  config["analysis"] = analysis;
  for (const auto& s : args.sets) pacrit::apply_override(config, s);
  if (args.seed >= 0) config["seed"] = args.seed;

  const pacrit::RunReport report = pacrit::run_scenario(config);
  if (!args.out.empty()) {
    pacrit::emit_report(report, args.format, args.out);
  } else if (args.format == "json") {
    std::cout << report.json.dump(2) << "\n";
  } else {
    for (const auto& [name, content] : report.tables)
      std::cout << "# table: " << name << "\n" << content;
  }
  return report.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"criticality toolkit for the (p,A)-Laplacian with potential"};
  app.require_subcommand(1);

  static const char* analyses[] = {"eigen",     "dirichlet",    "classify",
                                   "capacity",  "tau-scan",     "ground-state",
                                   "green",     "liouville",    "verify-identities"};
  CommonArgs args;
  for (const char* name : analyses) {
    CLI::App* cmd = app.add_subcommand(name);
    add_common(cmd, args);
  }

  CLI11_PARSE(app, argc, argv);

  const std::string analysis = app.get_subcommands().front()->get_name();
  try {
    return run(analysis, args);
  } catch (const pacrit::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 1;
  } catch (const pacrit::Error& e) {
    std::cerr << "analysis error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
