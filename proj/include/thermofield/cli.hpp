// cli.hpp: experiment driver layer. A run is a flat key = value configuration
// checked against a declared schema, dispatched to one of the experiment
// routines, and emitted as CSV or JSON payloads next to a JSON manifest.
#pragma once

#include <map>
#include <string>
#include <vector>

namespace tfld::cli {

inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr int kOutputSchemaVersion = 1;

enum class Experiment {
    validate,
    spectrum,
    kms,
    overlap_sweep,
    fgr,
    lso,
    virial,
    evolve,
    dyson_bound,
    dyson_oracle,
    wick_test,
    pc_probe,
};

// Hyphenated command names ("overlap-sweep"); unknown names raise config errors.
Experiment experiment_from_name(const std::string& name);
std::string experiment_name(Experiment experiment);
const std::vector<std::string>& experiment_names();

struct SchemaEntry {
    std::string key;
    std::string kind;                  // int, uint, real, bool, string, real-list,
                                       // int-list, choice
    std::string default_value;         // empty string means the key starts unset
    std::vector<std::string> choices;  // admissible values for kind == choice
    std::string help;
};

const std::vector<SchemaEntry>& config_schema();

struct RunConfig {
    Experiment experiment{Experiment::validate};
    std::map<std::string, std::string> values;  // schema key -> resolved text
};

// Schema defaults only.
RunConfig default_config(Experiment experiment);

// One key = value assignment: schema lookup, lexical type check, canonical
// storage. context names the source (file:line or the override flag) and is
// prefixed to every config_error diagnostic.
void apply_assignment(RunConfig& config, const std::string& key,
                      const std::string& value, const std::string& context);

// key = value lines, [section] prefixes, # comments, blank lines.
void apply_config_file(RunConfig& config, const std::string& path);

struct RunResult {
    std::vector<std::string> outputs;  // payload files first, manifest last
    std::string summary;               // one line for the driver to print
};

// Executes the configured experiment: computes, writes the payload files and
// the manifest under the run.output prefix, and returns their paths.
RunResult run(const RunConfig& config);

} // namespace tfld::cli
