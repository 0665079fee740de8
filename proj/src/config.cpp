#include "nesskit/config.hpp"

#include "json.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace nesskit {

namespace {

using nlohmann::json;

const std::map<std::string, double VParams::*>& vsystem_fields() {
    static const std::map<std::string, double VParams::*> m = {
        {"vsystem.eps_g", &VParams::eps_g},       {"vsystem.eps_1", &VParams::eps_1},
        {"vsystem.eps_2", &VParams::eps_2},       {"vsystem.J", &VParams::J},
        {"vsystem.Gamma_H1", &VParams::Gamma_H1}, {"vsystem.Gamma_H2", &VParams::Gamma_H2},
        {"vsystem.Gamma_C1", &VParams::Gamma_C1}, {"vsystem.Gamma_C2", &VParams::Gamma_C2},
        {"vsystem.Gamma_Df", &VParams::Gamma_Df}, {"vsystem.Gamma_Db", &VParams::Gamma_Db},
    };
    return m;
}

const std::map<std::string, double SBParams::*>& spinboson_fields() {
    static const std::map<std::string, double SBParams::*> m = {
        {"spinboson.Omega_1", &SBParams::Omega_1},
        {"spinboson.Omega_2", &SBParams::Omega_2},
        {"spinboson.eps_1", &SBParams::eps_1},
        {"spinboson.eps_2", &SBParams::eps_2},
        {"spinboson.q_1", &SBParams::q_1},
        {"spinboson.q_2", &SBParams::q_2},
        {"spinboson.lambda", &SBParams::lambda},
        {"spinboson.Gamma_rad", &SBParams::Gamma_rad},
        {"spinboson.Gamma_ph1", &SBParams::Gamma_ph1},
        {"spinboson.Gamma_ph2", &SBParams::Gamma_ph2},
        {"spinboson.T_rad", &SBParams::T_rad},
        {"spinboson.T_ph", &SBParams::T_ph},
        {"spinboson.alpha_att", &SBParams::alpha_att},
        {"spinboson.e_cut", &SBParams::e_cut},
    };
    return m;
}

const std::vector<std::string> scalar_keys = {
    "model",          "task",          "output_dir",     "seed",
    "partition.name", "partition.groups", "custom.file",  "rates.route",
    "dynamics.t_end", "dynamics.dt",   "dynamics.component", "dynamics.eta",
    "spinboson.n_basis",
    "sweep.parameter", "sweep.values", "sweep.min",      "sweep.max",
    "sweep.points",    "sweep.scale",  "sweep.delta_values", "sweep.gamma_values",
};

double as_number(const json& v, const std::string& key) {
    if (!v.is_number()) throw std::invalid_argument("config key " + key + " expects a number");
    return v.get<double>();
}

long as_integer(const json& v, const std::string& key) {
    if (!v.is_number_integer())
        throw std::invalid_argument("config key " + key + " expects an integer");
    return v.get<long>();
}

std::string as_string(const json& v, const std::string& key) {
    if (!v.is_string()) throw std::invalid_argument("config key " + key + " expects a string");
    return v.get<std::string>();
}

std::vector<double> as_number_list(const json& v, const std::string& key) {
    if (!v.is_array()) throw std::invalid_argument("config key " + key + " expects an array");
    std::vector<double> out;
    for (const auto& e : v) out.push_back(as_number(e, key));
    return out;
}

bool strictly_monotone(const std::vector<double>& v) {
    if (v.empty()) return false;
    bool inc = true, dec = true;
    for (std::size_t i = 1; i < v.size(); ++i) {
        inc = inc && v[i] > v[i - 1];
        dec = dec && v[i] < v[i - 1];
    }
    return inc || dec;
}

struct SweepStaging {
    double min = std::numeric_limits<double>::quiet_NaN();
    double max = std::numeric_limits<double>::quiet_NaN();
    long points = 0;
    std::string scale = "linear";
};

SweepSpec& sweep_of(RunConfig& c) {
    if (!c.sweep) c.sweep.emplace();
    return *c.sweep;
}

void apply_key(RunConfig& c, SweepStaging& stage, const std::string& key, const json& v) {
    if (auto it = vsystem_fields().find(key); it != vsystem_fields().end()) {
        c.vsystem.*(it->second) = as_number(v, key);
        return;
    }
    if (auto it = spinboson_fields().find(key); it != spinboson_fields().end()) {
        c.spinboson.*(it->second) = as_number(v, key);
        return;
    }
    if (key == "model") {
        const std::string s = as_string(v, key);
        if (s == "vsystem") c.model = Model::vsystem;
        else if (s == "spinboson") c.model = Model::spinboson;
        else if (s == "custom-matrices") c.model = Model::custom;
        else throw std::invalid_argument("unknown model: " + s);
    } else if (key == "task") {
        const std::string s = as_string(v, key);
        if (s == "ness") c.task = Task::ness;
        else if (s == "rates") c.task = Task::rates;
        else if (s == "dynamics") c.task = Task::dynamics;
        else if (s == "markov") c.task = Task::markov;
        else if (s == "sweep") c.task = Task::sweep;
        else throw std::invalid_argument("unknown task: " + s);
    } else if (key == "output_dir") {
        c.output_dir = as_string(v, key);
    } else if (key == "seed") {
        c.seed = as_integer(v, key);
    } else if (key == "partition.name") {
        c.partition_name = as_string(v, key);
    } else if (key == "partition.groups") {
        if (!v.is_array()) throw std::invalid_argument("partition.groups expects an array");
        for (const auto& g : v) {
            if (!g.is_array() || g.empty())
                throw std::invalid_argument("partition.groups expects nonempty label arrays");
            std::vector<std::string> labels;
            for (const auto& l : g) labels.push_back(as_string(l, key));
            c.partition_groups.push_back(std::move(labels));
        }
    } else if (key == "custom.file") {
        c.custom_file = as_string(v, key);
    } else if (key == "rates.route") {
        const std::string s = as_string(v, key);
        if (s == "direct") c.route = Route::direct;
        else if (s == "linear") c.route = Route::linear_solve;
        else throw std::invalid_argument("unknown route: " + s);
    } else if (key == "dynamics.t_end") {
        c.t_end = as_number(v, key);
    } else if (key == "dynamics.dt") {
        c.dt = as_number(v, key);
    } else if (key == "dynamics.component") {
        c.perturb_component = static_cast<int>(as_integer(v, key));
    } else if (key == "dynamics.eta") {
        c.perturb_eta = as_number(v, key);
    } else if (key == "spinboson.n_basis") {
        c.spinboson.n_basis = static_cast<int>(as_integer(v, key));
    } else if (key == "sweep.parameter") {
        sweep_of(c).parameter = as_string(v, key);
    } else if (key == "sweep.values") {
        sweep_of(c).values = as_number_list(v, key);
    } else if (key == "sweep.min") {
        sweep_of(c);
        stage.min = as_number(v, key);
    } else if (key == "sweep.max") {
        sweep_of(c);
        stage.max = as_number(v, key);
    } else if (key == "sweep.points") {
        sweep_of(c);
        stage.points = as_integer(v, key);
    } else if (key == "sweep.scale") {
        sweep_of(c);
        stage.scale = as_string(v, key);
        if (stage.scale != "linear" && stage.scale != "log")
            throw std::invalid_argument("sweep.scale must be linear or log");
    } else if (key == "sweep.delta_values") {
        sweep_of(c).delta_values = as_number_list(v, key);
    } else if (key == "sweep.gamma_values") {
        sweep_of(c).gamma_values = as_number_list(v, key);
    } else {
        throw std::invalid_argument("unknown config key: " + key);
    }
}

void finalize_sweep(RunConfig& c, const SweepStaging& stage) {
    if (!c.sweep) {
        if (c.task == Task::sweep)
            throw std::invalid_argument("sweep task needs sweep keys");
        return;
    }
    SweepSpec& s = *c.sweep;
    s.logspace = stage.scale == "log";
    if (s.parameter.empty()) throw std::invalid_argument("sweep.parameter is required");

    if (s.parameter == "vsystem.beta") {
        if (c.model != Model::vsystem)
            throw std::invalid_argument("sweep parameter does not belong to the selected model");
        if (!strictly_monotone(s.delta_values) || !strictly_monotone(s.gamma_values))
            throw std::invalid_argument(
                "the beta map needs nonempty monotone sweep.delta_values and sweep.gamma_values");
        return;
    }
    const bool is_v = vsystem_fields().count(s.parameter) > 0;
    const bool is_s = spinboson_fields().count(s.parameter) > 0;
    if (!is_v && !is_s)
        throw std::invalid_argument("sweep parameter must be a real-valued model parameter: " +
                                    s.parameter);
    if ((is_v && c.model != Model::vsystem) || (is_s && c.model != Model::spinboson))
        throw std::invalid_argument("sweep parameter does not belong to the selected model");

    const bool have_range =
        !std::isnan(stage.min) || !std::isnan(stage.max) || stage.points > 0;
    if (!s.values.empty() && have_range)
        throw std::invalid_argument("give sweep.values or a min/max grid, not both");
    if (s.values.empty()) {
        if (std::isnan(stage.min) || std::isnan(stage.max) || stage.points < 1)
            throw std::invalid_argument("sweep needs sweep.values or sweep.min/max/points");
        if (stage.points == 1) {
            s.values = {stage.min};
        } else {
            if (!(stage.min < stage.max))
                throw std::invalid_argument("sweep grid needs sweep.min < sweep.max");
            if (s.logspace && (stage.min <= 0.0 || stage.max <= 0.0))
                throw std::invalid_argument("log-scale sweep needs positive bounds");
            for (long i = 0; i < stage.points; ++i) {
                const double f = static_cast<double>(i) / static_cast<double>(stage.points - 1);
                s.values.push_back(s.logspace
                                       ? std::exp(std::log(stage.min) +
                                                  f * (std::log(stage.max) - std::log(stage.min)))
                                       : stage.min + f * (stage.max - stage.min));
            }
        }
    }
    if (!strictly_monotone(s.values))
        throw std::invalid_argument("sweep grid must be nonempty and strictly monotone");
}

void validate_config(const RunConfig& c) {
    if (c.task == Task::dynamics && (!(c.t_end > 0.0) || !(c.dt > 0.0)))
        throw std::invalid_argument("dynamics task needs positive dynamics.t_end and dynamics.dt");
    if (c.perturb_eta < 0.0 || c.perturb_eta > 1.0)
        throw std::invalid_argument("dynamics.eta outside [0, 1]");
    if (c.perturb_component < 0)
        throw std::invalid_argument("dynamics.component must be non-negative");
    if (!c.partition_name.empty() && !c.partition_groups.empty())
        throw std::invalid_argument("choose either partition.name or partition.groups");
    if (c.model == Model::custom && c.custom_file.empty())
        throw std::invalid_argument("custom-matrices model needs custom.file");
    if (c.task == Task::sweep && !c.sweep)
        throw std::invalid_argument("sweep task needs sweep keys");
}

RunConfig parse_from_json(const json& j, bool full_scale) {
    if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
    RunConfig c;
    if (!full_scale) c.spinboson = reduced_basis_params();
    SweepStaging stage;
    // Apply "model" first so model-dependent validation sees the final value.
    if (j.contains("model")) apply_key(c, stage, "model", j.at("model"));
    for (const auto& [key, value] : j.items()) {
        if (key != "model") apply_key(c, stage, key, value);
        c.resolved[key] = value.dump();
    }
    finalize_sweep(c, stage);
    validate_config(c);
    return c;
}

std::string env_name(const std::string& key) {
    std::string out = "NESSKIT_";
    for (char ch : key) {
        if (ch == '.') {
            out += '_';
        } else {
            out += static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
        }
    }
    return out;
}

}  // namespace

std::string model_name(Model m) {
    switch (m) {
        case Model::vsystem: return "vsystem";
        case Model::spinboson: return "spinboson";
        case Model::custom: return "custom-matrices";
    }
    return "?";
}

std::string task_name(Task t) {
    switch (t) {
        case Task::ness: return "ness";
        case Task::rates: return "rates";
        case Task::dynamics: return "dynamics";
        case Task::markov: return "markov";
        case Task::sweep: return "sweep";
    }
    return "?";
}

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> k = scalar_keys;
        for (const auto& [key, _] : vsystem_fields()) k.push_back(key);
        for (const auto& [key, _] : spinboson_fields()) k.push_back(key);
        return k;
    }();
    return keys;
}

RunConfig parse_config(const std::string& json_text, bool full_scale) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
    }
    return parse_from_json(j, full_scale);
}

RunConfig load_config(const std::string& path, bool full_scale) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read config file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    json j;
    try {
        j = json::parse(buf.str());
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
    for (const std::string& key : config_keys()) {
        const char* env = std::getenv(env_name(key).c_str());
        if (env == nullptr) continue;
        json v = json::parse(env, nullptr, /*allow_exceptions=*/false);
        if (v.is_discarded()) v = json(std::string(env));
        j[key] = v;
    }
    return parse_from_json(j, full_scale);
}

void check_config(const RunConfig& config) { validate_config(config); }

void set_parameter(RunConfig& config, const std::string& key, double value) {
    if (auto it = vsystem_fields().find(key); it != vsystem_fields().end()) {
        config.vsystem.*(it->second) = value;
        return;
    }
    if (auto it = spinboson_fields().find(key); it != spinboson_fields().end()) {
        config.spinboson.*(it->second) = value;
        return;
    }
    throw std::invalid_argument("unknown sweep parameter: " + key);
}

}  // namespace nesskit
