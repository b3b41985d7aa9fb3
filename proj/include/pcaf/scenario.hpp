#pragma once

// Declarative scenarios behind the pcaf-lab command line: a JSON config goes in, a
// materialized config, CSV / JSON / plot-data artifacts and a text summary come out.

#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace pcaf::lab {

/// Rows of pre-formatted cells; numbers are written with 17 significant digits.
struct Table {
    std::string name;  ///< suffix of the CSV file; empty for the main table
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
};

/// (x, y, yerr) triples of one curve.
struct Curve {
    std::string name;
    std::vector<double> x, y, yerr;
};

struct Assertion {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct ScenarioResult {
    std::string kind;
    nlohmann::json config;  ///< fully materialized, every default written out
    std::vector<Table> tables;
    std::vector<Curve> curves;
    nlohmann::json report = nlohmann::json::object();
    std::vector<Assertion> assertions;
    std::vector<std::string> notes;

    bool passed() const;
    std::string summary() const;
};

/// Scenario kinds: oracle-suite, metric, classify, mc-convergence, conditions, martingale.
const std::vector<std::string>& scenario_kinds();
/// Command-line subcommand to scenario kind (oracle, mc map to oracle-suite, mc-convergence).
std::string kind_for_command(const std::string& command);

/// Applies "a.b.c=value"; the value is parsed as JSON when possible, else taken as a string.
void apply_override(nlohmann::json& config, const std::string& assignment);

/// Throws ConfigInvalid (with the offending key path) or the module error of the failing step.
ScenarioResult run_scenario(const nlohmann::json& config);

/// Writes the artifacts of one format under `prefix` and returns the file names.
///   csv       prefix.csv and prefix.<table>.csv
///   json      prefix.json
///   plotdata  prefix.plot.dat, blocks of "x y yerr" lines separated by blank lines
/// Throws UnsupportedFormat otherwise.
std::vector<std::string> emit_report(const ScenarioResult& result, const std::string& format, const std::string& prefix);

/// Config echo, every requested format and prefix.summary.txt. Returns the file names.
std::vector<std::string> write_artifacts(const ScenarioResult& result);

}  // namespace pcaf::lab
