#include "CLI11.hpp"

#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include "nesskit/run.hpp"

namespace {

nesskit::Task task_from_name(const std::string& name) {
    if (name == "ness") return nesskit::Task::ness;
    if (name == "rates") return nesskit::Task::rates;
    if (name == "dynamics") return nesskit::Task::dynamics;
    if (name == "markov") return nesskit::Task::markov;
    return nesskit::Task::sweep;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "Exact component-to-component rate matrices of open quantum networks at "
        "their steady state, with relaxation diagnostics and parameter sweeps."};
    app.require_subcommand(1);

    std::string config_path;
    std::string output_dir;
    int threads = 0;
    bool full_scale = false;

    const std::vector<std::pair<std::string, std::string>> subs = {
        {"ness", "solve the steady state and write it out"},
        {"rates", "steady state plus the component rate matrix (both routes compared)"},
        {"dynamics", "propagate a perturbed steady state on a fixed grid"},
        {"markov", "timescales, fitted generator, and the relative-error metric"},
        {"sweep", "steady rates along a parameter grid"},
        {"validate-config", "parse and validate a configuration, then exit"},
    };
    for (const auto& [name, desc] : subs) {
        CLI::App* sub = app.add_subcommand(name, desc);
        sub->add_option("--config", config_path, "JSON run configuration")->required();
        sub->add_option("--output", output_dir, "output directory (overrides output_dir)");
        sub->add_option("--threads", threads, "worker threads for dense algebra");
        sub->add_flag("--full-scale", full_scale,
                      "use the 400-basis settings for the oscillator model");
    }

    CLI11_PARSE(app, argc, argv);
    const std::string chosen = app.get_subcommands().front()->get_name();

    try {
        if (threads > 0) Eigen::setNbThreads(threads);
        nesskit::RunConfig cfg = nesskit::load_config(config_path, full_scale);
        if (!output_dir.empty()) cfg.output_dir = output_dir;

        if (chosen == "validate-config") {
            std::cout << "config ok: model=" << nesskit::model_name(cfg.model)
                      << " task=" << nesskit::task_name(cfg.task)
                      << " output_dir=" << cfg.output_dir << "\n";
            for (const auto& [key, value] : cfg.resolved)
                std::cout << "  " << key << " = " << value << "\n";
            return 0;
        }

        cfg.task = task_from_name(chosen);
        nesskit::check_config(cfg);
        nesskit::RunArtifacts art = nesskit::run(cfg);
        std::cout << art.summary << "\n";
        for (const auto& f : art.files) std::cout << "wrote " << f << "\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
