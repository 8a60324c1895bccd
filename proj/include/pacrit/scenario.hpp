#ifndef PACRIT_SCENARIO_HPP
#define PACRIT_SCENARIO_HPP

#include <json.hpp>
#include <string>
#include <utility>
#include <vector>

#include "pacrit/types.hpp"

namespace pacrit {

using Json = nlohmann::ordered_json;

/// Outcome of one scenario run: the full JSON report, flattened CSV tables,
/// and the process exit code (0 success, 3 inconclusive verdict; validation
/// and analysis errors are thrown instead and map to 1 and 2).
struct RunReport {
  Json json;
  std::vector<std::pair<std::string, std::string>> tables;  // (name, csv text)
  int exit_code = 0;
};

/// Parse config text into JSON; throws ValidationError on syntax errors.
Json parse_config(const std::string& text);

/// Apply a `--set path.to.key=value` override; the value is parsed as JSON
/// when possible and kept as a string otherwise.
void apply_override(Json& config, const std::string& assignment);

RunReport run_scenario(const Json& config);
RunReport run_scenario(const std::string& config_text);

/// Write the report to path atomically (temp file + rename).  Format "json"
/// writes the full report; "csv" writes one file per table, named
/// <stem>.<table>.csv next to the requested path.
void emit_report(const RunReport& report, const std::string& format, const std::string& path);

}  // namespace pacrit

#endif
