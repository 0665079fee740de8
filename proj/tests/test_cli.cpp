#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "nesskit/output.hpp"
#include "nesskit/run.hpp"
#include "nesskit/vsystem.hpp"

using namespace nesskit;
namespace fs = std::filesystem;

namespace {

bool throws_with(const std::function<void()>& f, const std::string& needle) {
    try {
        f();
    } catch (const std::exception& e) {
        return std::string(e.what()).find(needle) != std::string::npos;
    }
    return false;
}

std::string fresh_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / "nesskit_cli_tests" / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p.string();
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
}

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

Table read_table(const std::string& path) {
    std::istringstream in(read_file(path));
    Table t;
    std::string line;
    REQUIRE(std::getline(in, line));
    t.header = split_line(line);
    while (std::getline(in, line))
        if (!line.empty()) t.rows.push_back(split_line(line));
    return t;
}

// Looks a row up by its first column and a value by column name.
double cell(const Table& t, const std::string& row_key, const std::string& col) {
    std::size_t j = t.header.size();
    for (std::size_t i = 0; i < t.header.size(); ++i)
        if (t.header[i] == col) j = i;
    REQUIRE(j < t.header.size());
    for (const auto& row : t.rows)
        if (row.at(0) == row_key) return std::stod(row.at(j));
    REQUIRE(false);
    return 0.0;
}

double cell(const Table& t, std::size_t row, const std::string& col) {
    std::size_t j = t.header.size();
    for (std::size_t i = 0; i < t.header.size(); ++i)
        if (t.header[i] == col) j = i;
    REQUIRE(j < t.header.size());
    return std::stod(t.rows.at(row).at(j));
}

}  // namespace

TEST_CASE("config defaults and recognized keys") {
    const RunConfig c = parse_config("{}");
    CHECK(c.model == Model::vsystem);
    CHECK(c.task == Task::rates);
    CHECK(c.output_dir == ".");
    CHECK(c.seed == 0);
    CHECK(c.route == Route::direct);
    CHECK(c.partition_name.empty());
    CHECK_FALSE(c.sweep.has_value());
    CHECK(c.spinboson.n_basis == 128);  // desk-scale defaults
    CHECK(resolved_e_cut(c.spinboson) == doctest::Approx(0.022).epsilon(1e-12));

    const RunConfig f = parse_config("{}", /*full_scale=*/true);
    CHECK(f.spinboson.n_basis == 400);
    CHECK(resolved_e_cut(f.spinboson) == doctest::Approx(0.032).epsilon(1e-12));

    const auto& keys = config_keys();
    for (const std::string needle :
         {"model", "task", "vsystem.J", "spinboson.alpha_att", "sweep.parameter"})
        CHECK(std::count(keys.begin(), keys.end(), needle) == 1);
}

TEST_CASE("config rejects malformed input") {
    CHECK(throws_with([] { parse_config("{\"nope\": 1}"); }, "unknown config key"));
    CHECK(throws_with([] { parse_config("{"); }, "not valid JSON"));
    CHECK(throws_with([] { parse_config("[1]"); }, "JSON object"));
    CHECK(throws_with([] { parse_config("{\"model\": \"frog\"}"); }, "unknown model"));
    CHECK(throws_with([] { parse_config("{\"task\": \"frog\"}"); }, "unknown task"));
    CHECK(throws_with([] { parse_config("{\"rates.route\": \"frog\"}"); }, "unknown route"));
    CHECK(throws_with([] { parse_config("{\"vsystem.J\": \"big\"}"); }, "expects a number"));
    CHECK(throws_with([] { parse_config("{\"seed\": 1.5}"); }, "expects an integer"));
    CHECK(throws_with(
        [] {
            parse_config(
                "{\"partition.name\": \"grouped\", \"partition.groups\": [[\"g\"],[\"1\",\"2\"]]}");
        },
        "either partition.name or partition.groups"));
    CHECK(throws_with([] { parse_config("{\"task\": \"dynamics\"}"); },
                      "positive dynamics.t_end"));
    CHECK(throws_with([] { parse_config("{\"dynamics.eta\": 1.5}"); }, "outside [0, 1]"));
    CHECK(throws_with([] { parse_config("{\"model\": \"custom-matrices\"}"); }, "custom.file"));
    CHECK(throws_with([] { parse_config("{\"task\": \"sweep\"}"); }, "sweep task needs"));
}

TEST_CASE("sweep grid construction and validation") {
    const std::string head = "{\"task\": \"sweep\", \"sweep.parameter\": \"vsystem.Gamma_H1\", ";

    RunConfig lin = parse_config(head + "\"sweep.min\": 0, \"sweep.max\": 1, \"sweep.points\": 5}");
    REQUIRE(lin.sweep.has_value());
    REQUIRE(lin.sweep->values.size() == 5);
    for (int i = 0; i < 5; ++i)
        CHECK(lin.sweep->values[i] == doctest::Approx(0.25 * i).epsilon(1e-14));

    RunConfig lg = parse_config(head +
                                "\"sweep.min\": 1e-4, \"sweep.max\": 1e-1, "
                                "\"sweep.points\": 7, \"sweep.scale\": \"log\"}");
    REQUIRE(lg.sweep->values.size() == 7);
    CHECK(lg.sweep->logspace);
    CHECK(lg.sweep->values.front() == doctest::Approx(1e-4).epsilon(1e-12));
    CHECK(lg.sweep->values.back() == doctest::Approx(1e-1).epsilon(1e-12));
    for (int i = 0; i + 1 < 7; ++i)
        CHECK(lg.sweep->values[i + 1] / lg.sweep->values[i] ==
              doctest::Approx(std::pow(10.0, 0.5)).epsilon(1e-12));

    RunConfig one =
        parse_config(head + "\"sweep.min\": 2.0, \"sweep.max\": 2.0, \"sweep.points\": 1}");
    CHECK(one.sweep->values == std::vector<double>{2.0});

    RunConfig dec = parse_config(head + "\"sweep.values\": [3e-6, 2e-6, 1e-6]}");
    CHECK(dec.sweep->values.size() == 3);

    CHECK(throws_with([&] { parse_config(head + "\"sweep.values\": [1e-6, 1e-6]}"); },
                      "strictly monotone"));
    CHECK(throws_with(
        [&] { parse_config(head + "\"sweep.values\": [1e-6], \"sweep.min\": 0}"); },
        "not both"));
    CHECK(throws_with(
        [&] {
            parse_config(head +
                         "\"sweep.min\": -1, \"sweep.max\": 1, \"sweep.points\": 3, "
                         "\"sweep.scale\": \"log\"}");
        },
        "positive bounds"));
    CHECK(throws_with([&] { parse_config(head + "\"sweep.min\": 1, \"sweep.max\": 0, "
                                                "\"sweep.points\": 3}"); },
                      "sweep.min < sweep.max"));
    CHECK(throws_with([] { parse_config("{\"task\": \"sweep\", \"sweep.parameter\": "
                                        "\"vsystem.nope\", \"sweep.values\": [1]}"); },
                      "model parameter"));
    CHECK(throws_with(
        [] {
            parse_config("{\"model\": \"spinboson\", \"task\": \"sweep\", \"sweep.parameter\": "
                         "\"vsystem.Gamma_H1\", \"sweep.values\": [1e-6]}");
        },
        "does not belong to the selected model"));
    CHECK(throws_with(
        [] {
            parse_config("{\"model\": \"spinboson\", \"task\": \"sweep\", "
                         "\"sweep.parameter\": \"vsystem.beta\", "
                         "\"sweep.delta_values\": [0], \"sweep.gamma_values\": [1e-6]}");
        },
        "does not belong to the selected model"));
}

TEST_CASE("environment overrides the config file") {
    const std::string dir = fresh_dir("env");
    const std::string path = dir + "/cfg.json";
    {
        std::ofstream out(path);
        out << "{\"model\": \"vsystem\", \"vsystem.J\": 2e-5}\n";
    }
    REQUIRE(setenv("NESSKIT_VSYSTEM_J", "3e-05", 1) == 0);
    REQUIRE(setenv("NESSKIT_PARTITION_NAME", "grouped", 1) == 0);
    const RunConfig c = load_config(path);
    unsetenv("NESSKIT_VSYSTEM_J");
    unsetenv("NESSKIT_PARTITION_NAME");
    CHECK(c.vsystem.J == doctest::Approx(3e-5).epsilon(1e-14));
    CHECK(c.partition_name == "grouped");
    CHECK(c.resolved.count("vsystem.J") == 1);
    CHECK(c.resolved.at("vsystem.J") == "3e-05");

    CHECK(throws_with([&] { load_config(dir + "/missing.json"); }, "cannot read config file"));
}

TEST_CASE("set_parameter reaches both models") {
    RunConfig c = parse_config("{}");
    set_parameter(c, "vsystem.Gamma_H1", 7e-7);
    CHECK(c.vsystem.Gamma_H1 == 7e-7);
    set_parameter(c, "spinboson.alpha_att", 0.25);
    CHECK(c.spinboson.alpha_att == 0.25);
    CHECK(throws_with([&] { set_parameter(c, "vsystem.nope", 1.0); }, "unknown sweep parameter"));
}

TEST_CASE("sample configurations in tools/ parse cleanly") {
    const fs::path tools = fs::path("..") / "tools";
    if (!fs::exists(tools / "vsystem_rates.json")) return;  // run from the build tree
    int seen = 0;
    for (const auto& entry : fs::directory_iterator(tools)) {
        if (entry.path().extension() != ".json") continue;
        if (entry.path().filename() == "custom_two_level_model.json") continue;  // matrix bundle
        CHECK_NOTHROW(load_config(entry.path().string()));
        ++seen;
    }
    CHECK(seen >= 6);
}

TEST_CASE("rate task reproduces the three-level rates and is byte-reproducible") {
    RunConfig c = parse_config("{\"model\": \"vsystem\", \"task\": \"rates\"}");
    c.output_dir = fresh_dir("vrates_a");
    const RunArtifacts art = run(c);
    CHECK(art.files.size() == 3);

    const Table k = read_table(c.output_dir + "/rates.csv");
    CHECK(k.header == std::vector<std::string>{"component", "g", "1", "2"});
    CHECK(cell(k, "2", "1") == doctest::Approx(2.0562749821784131e-9).epsilon(1e-8));
    CHECK(cell(k, "1", "2") == doctest::Approx(5.6274982178413065e-11).epsilon(1e-8));
    // Columns of a rate matrix sum to zero.
    for (const std::string& col : {"g", "1", "2"}) {
        const double sum = cell(k, "g", col) + cell(k, "1", col) + cell(k, "2", col);
        CHECK(std::abs(sum) <= 1e-12 * std::abs(cell(k, col, col)));
    }

    const Table p = read_table(c.output_dir + "/populations.csv");
    double total = 0.0;
    for (const std::string& name : {"g", "1", "2"}) total += cell(p, name, "population");
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));

    const std::string manifest = read_file(c.output_dir + "/manifest.json");
    CHECK(manifest.find("route_agreement_rel") != std::string::npos);
    CHECK(manifest.find("\"task\": \"rates\"") != std::string::npos);

    RunConfig c2 = c;
    c2.output_dir = fresh_dir("vrates_b");
    run(c2);
    CHECK(read_file(c.output_dir + "/rates.csv") == read_file(c2.output_dir + "/rates.csv"));
    CHECK(read_file(c.output_dir + "/populations.csv") ==
          read_file(c2.output_dir + "/populations.csv"));
}

TEST_CASE("dynamics task writes a trajectory and a runnable plot script") {
    RunConfig c = parse_config(
        "{\"model\": \"vsystem\", \"task\": \"dynamics\", "
        "\"dynamics.t_end\": 1e6, \"dynamics.dt\": 1e4}");
    c.output_dir = fresh_dir("vdyn");
    run(c);

    const Table t = read_table(c.output_dir + "/trajectory.csv");
    REQUIRE(t.rows.size() == 101);
    CHECK(t.header.size() == 13);  // t + four blocks of three
    CHECK(t.header[0] == "t");
    CHECK(t.header[1] == "p_g");
    // The split terms add up to the recorded derivative.
    const double pdot = cell(t, std::size_t{5}, "pdot_1");
    const double m1 = cell(t, std::size_t{5}, "m1_1");
    const double m2 = cell(t, std::size_t{5}, "m2_1");
    CHECK(pdot == doctest::Approx(m1 + m2).epsilon(1e-10));

    const std::string script = read_file(c.output_dir + "/plot_trajectory.py");
    CHECK(script.find("matplotlib") != std::string::npos);
    CHECK(script.find("trajectory.csv") != std::string::npos);
    CHECK(script.find("p_g") != std::string::npos);
}

TEST_CASE("markov task reproduces the relaxation diagnostics") {
    RunConfig c = parse_config("{\"model\": \"vsystem\", \"task\": \"markov\"}");
    c.output_dir = fresh_dir("vmarkov");
    run(c);

    const Table t = read_table(c.output_dir + "/markov.csv");
    REQUIRE(t.rows.size() == 1);
    CHECK(cell(t, std::size_t{0}, "t1") == doctest::Approx(1.0 / 2.5703561079369363e-9).epsilon(1e-8));
    CHECK(cell(t, std::size_t{0}, "t2") == doctest::Approx(666210.0354).epsilon(1e-8));
    CHECK(cell(t, std::size_t{0}, "markovian") == 1.0);
    CHECK(cell(t, std::size_t{0}, "relative_error") == doctest::Approx(0.0696165).epsilon(1e-4));
    CHECK(cell(t, std::size_t{0}, "slow_rate") ==
          doctest::Approx(-2.5703561079369363e-9).epsilon(1e-10));
    CHECK(cell(t, std::size_t{0}, "slow_rate_fitted") ==
          doctest::Approx(-2.5703561079369363e-9).epsilon(1e-2));
}

TEST_CASE("grouped pump sweep saturates at the strong-pumping limit") {
    RunConfig c = parse_config(
        "{\"model\": \"vsystem\", \"task\": \"sweep\", \"partition.name\": \"grouped\", "
        "\"sweep.parameter\": \"vsystem.Gamma_H1\", \"sweep.min\": 1e-7, "
        "\"sweep.max\": 1e-2, \"sweep.points\": 6, \"sweep.scale\": \"log\"}");
    c.output_dir = fresh_dir("vsweep");
    run(c);

    const Table t = read_table(c.output_dir + "/sweep.csv");
    REQUIRE(t.rows.size() == 6);
    CHECK(t.header == std::vector<std::string>{"value", "p_A", "p_2", "k_A_2", "k_2_A"});
    for (std::size_t i = 0; i + 1 < t.rows.size(); ++i)
        CHECK(cell(t, i, "k_2_A") < cell(t, i + 1, "k_2_A"));
    const GroupedLimits lim = grouped_rate_limits(c.vsystem);
    CHECK(cell(t, std::size_t{5}, "k_2_A") == doctest::Approx(lim.pump1_k2A).epsilon(0.01));

    const std::string script = read_file(c.output_dir + "/plot_sweep.py");
    CHECK(script.find("sweep.csv") != std::string::npos);
    CHECK(script.find("log") != std::string::npos);
}

TEST_CASE("coherence-contribution map is symmetric in the detuning") {
    RunConfig c = parse_config(
        "{\"model\": \"vsystem\", \"task\": \"sweep\", \"sweep.parameter\": \"vsystem.beta\", "
        "\"sweep.delta_values\": [-0.004, 0.0, 0.004], "
        "\"sweep.gamma_values\": [1e-6, 1e-5]}");
    c.output_dir = fresh_dir("vbeta");
    run(c);

    const Table t = read_table(c.output_dir + "/beta.csv");
    REQUIRE(t.rows.size() == 6);
    CHECK(t.header == std::vector<std::string>{"delta", "gamma", "beta"});
    // Rows are ordered delta-major, gamma-minor.
    CHECK(cell(t, std::size_t{0}, "beta") == doctest::Approx(cell(t, std::size_t{4}, "beta")));
    CHECK(cell(t, std::size_t{2}, "beta") > cell(t, std::size_t{0}, "beta"));
    CHECK(fs::exists(c.output_dir + "/plot_beta.py"));
}

TEST_CASE("custom matrix bundles run through every stage") {
    const std::string dir = fresh_dir("custom");
    const std::string model_path = dir + "/model.json";
    {
        std::ofstream out(model_path);
        out << "{\"labels\": [\"a\", \"b\"],\n"
            << " \"hamiltonian\": {\"real\": [[0.0, 0.0], [0.0, 0.01]]},\n"
            << " \"channels\": [{\"operator\": {\"real\": [[0.0, 1.0], [0.0, 0.0]]},\n"
            << "                 \"rate\": 1e-5, \"occupation\": 0.8}]}\n";
    }
    RunConfig c = parse_config("{\"model\": \"custom-matrices\", \"task\": \"rates\", "
                               "\"custom.file\": \"" + model_path + "\"}");
    c.output_dir = dir + "/out";
    run(c);

    // Two-level exchange with occupation n: up = rate*n, down = rate*(n+1).
    const Table k = read_table(c.output_dir + "/rates.csv");
    CHECK(cell(k, "b", "a") == doctest::Approx(8e-6).epsilon(1e-12));
    CHECK(cell(k, "a", "b") == doctest::Approx(1.8e-5).epsilon(1e-12));
    const Table p = read_table(c.output_dir + "/populations.csv");
    CHECK(cell(p, "a", "population") == doctest::Approx(1.8 / 2.6).epsilon(1e-12));

    RunConfig missing = c;
    missing.custom_file = dir + "/absent.json";
    CHECK(throws_with([&] { run(missing); }, "cannot read"));
}

TEST_CASE("partition selection errors name the offender") {
    RunConfig c = parse_config("{\"model\": \"vsystem\", \"task\": \"ness\", "
                               "\"partition.name\": \"frog\"}");
    c.output_dir = fresh_dir("vbadpart");
    CHECK(throws_with([&] { run(c); }, "unknown partition name: frog"));

    RunConfig g = parse_config("{\"model\": \"vsystem\", \"task\": \"ness\", "
                               "\"partition.groups\": [[\"g\", \"1\"], [\"zz\"]]}");
    g.output_dir = fresh_dir("vbadgroup");
    CHECK(throws_with([&] { run(g); }, "unknown basis label"));

    RunConfig ok = parse_config("{\"model\": \"vsystem\", \"task\": \"rates\", "
                                "\"partition.groups\": [[\"g\", \"1\"], [\"2\"]]}");
    ok.output_dir = fresh_dir("vgroup");
    run(ok);
    const Table p = read_table(ok.output_dir + "/populations.csv");
    CHECK(cell(p, "g+1", "population") == doctest::Approx(0.8000266631115851).epsilon(1e-8));
}

TEST_CASE("plot emitters reject tables with missing columns") {
    const std::string dir = fresh_dir("plots");
    const std::string bad = dir + "/bad.csv";
    {
        std::ofstream out(bad);
        out << "x,y\n1,2\n";
    }
    CHECK(throws_with([&] { emit_trajectory_plot(bad, dir + "/p.py"); }, "missing columns"));
    CHECK(throws_with([&] { emit_sweep_plot(bad, dir + "/p.py", false); }, "missing columns"));
    CHECK(throws_with([&] { emit_beta_map_plot(bad, dir + "/p.py"); }, "missing columns"));

    CsvTable t;
    t.header = {"a", "b"};
    t.rows.push_back({"1"});
    CHECK(throws_with([&] { write_csv(dir + "/w.csv", t); }, "row width"));
}

TEST_CASE("oscillator model steady state through the runner") {
    RunConfig c = parse_config("{\"model\": \"spinboson\", \"task\": \"ness\"}");
    c.output_dir = fresh_dir("sbness");
    run(c);

    const Table p = read_table(c.output_dir + "/populations.csv");
    CHECK(cell(p, "L", "population") == doctest::Approx(0.6292633151).epsilon(1e-7));
    CHECK(cell(p, "R", "population") == doctest::Approx(0.3707366849).epsilon(1e-7));

    const std::string manifest = read_file(c.output_dir + "/manifest.json");
    CHECK(manifest.find("\"total\": 36") != std::string::npos);
    CHECK(manifest.find("overlap_condition") != std::string::npos);
}
