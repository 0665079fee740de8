#pragma once
// Run configuration: one JSON file of flat dotted keys selecting a model, a
// task, a partition, and parameter overrides.  Unknown keys are rejected.
// Every key may also be supplied through the environment as NESSKIT_<KEY>
// with dots replaced by underscores and letters uppercased (the environment
// wins over the file); values there use the same JSON literals.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nesskit/rates.hpp"
#include "nesskit/spinboson.hpp"
#include "nesskit/vsystem.hpp"

namespace nesskit {

enum class Model { vsystem, spinboson, custom };
enum class Task { ness, rates, dynamics, markov, sweep };

std::string model_name(Model m);
std::string task_name(Task t);

struct SweepSpec {
    std::string parameter;       // dotted key to vary
    std::vector<double> values;  // resolved grid: nonempty, strictly monotone
    bool logspace = false;
    // Two-axis grid for the coherence-contribution map (parameter
    // "vsystem.beta"): explicit detuning and width axes.
    std::vector<double> delta_values;
    std::vector<double> gamma_values;
};

struct RunConfig {
    Model model = Model::vsystem;
    Task task = Task::rates;
    std::string output_dir = ".";
    long seed = 0;

    VParams vsystem;
    SBParams spinboson;

    std::string partition_name;  // named builtin; empty means the model default
    std::vector<std::vector<std::string>> partition_groups;  // labels per component

    std::optional<SweepSpec> sweep;

    double t_end = 0.0;  // required when task = dynamics
    double dt = 0.0;
    int perturb_component = 1;  // initial-state controls shared by dynamics/markov
    double perturb_eta = 0.5;
    Route route = Route::direct;

    std::string custom_file;  // matrix bundle for the custom model

    // Every key applied from file or environment, with its literal value;
    // echoed into the run manifest.
    std::map<std::string, std::string> resolved;
};

// All recognized dotted keys, in documentation order.
const std::vector<std::string>& config_keys();

// Parses and validates the JSON text.  `full_scale` selects the 400-basis
// defaults for the spin-boson model before overrides apply; otherwise the
// reduced-basis defaults are used.
RunConfig parse_config(const std::string& json_text, bool full_scale = false);

// Reads the file, then applies environment overrides.
RunConfig load_config(const std::string& path, bool full_scale = false);

// Applies one numeric model override by dotted key (used by sweeps).
void set_parameter(RunConfig& config, const std::string& key, double value);

// Re-runs cross-field validation after programmatic edits (the CLI overrides
// the task from its subcommand after loading).
void check_config(const RunConfig& config);

}  // namespace nesskit
