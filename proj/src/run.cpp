#include "nesskit/run.hpp"

#include "json.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "nesskit/dynamics.hpp"
#include "nesskit/ness.hpp"
#include "nesskit/output.hpp"

namespace nesskit {

namespace {

using nlohmann::ordered_json;

std::string out_path(const RunConfig& cfg, const std::string& name) {
    return (std::filesystem::path(cfg.output_dir) / name).string();
}

ordered_json vsystem_json(const VParams& p) {
    return ordered_json{{"eps_g", p.eps_g},       {"eps_1", p.eps_1},
                        {"eps_2", p.eps_2},       {"J", p.J},
                        {"Gamma_H1", p.Gamma_H1}, {"Gamma_H2", p.Gamma_H2},
                        {"Gamma_C1", p.Gamma_C1}, {"Gamma_C2", p.Gamma_C2},
                        {"Gamma_Df", p.Gamma_Df}, {"Gamma_Db", p.Gamma_Db}};
}

ordered_json spinboson_json(const SBParams& p) {
    return ordered_json{{"Omega_1", p.Omega_1},
                        {"Omega_2", p.Omega_2},
                        {"eps_1", p.eps_1},
                        {"eps_2", p.eps_2},
                        {"q_1", p.q_1},
                        {"q_2", p.q_2},
                        {"lambda", p.lambda},
                        {"Gamma_rad", p.Gamma_rad},
                        {"Gamma_ph1", p.Gamma_ph1},
                        {"Gamma_ph2", p.Gamma_ph2},
                        {"T_rad", p.T_rad},
                        {"T_ph", p.T_ph},
                        {"alpha_att", p.alpha_att},
                        {"n_basis", p.n_basis},
                        {"e_cut", resolved_e_cut(p)}};
}

ordered_json tolerances_json() {
    return ordered_json{{"ness_residual_rel", tol::ness_residual_rel},
                        {"complement_residual_rel", tol::complement_residual_rel},
                        {"rate_imag_rel", tol::rate_imag_rel},
                        {"route_agreement_rel", tol::route_agreement_rel},
                        {"partition_closure", tol::partition_closure},
                        {"population_floor", tol::population_floor},
                        {"structural_zero_rel", tol::structural_zero_rel},
                        {"steady_reach_inf", tol::steady_reach_inf},
                        {"markovian_ratio", tol::markovian_ratio}};
}

MatrixXc matrix_from_json(const nlohmann::json& m, const std::string& what) {
    if (!m.is_object() || !m.contains("real"))
        throw std::invalid_argument(what + " needs a real part");
    const auto& re = m.at("real");
    if (!re.is_array() || re.empty())
        throw std::invalid_argument(what + " real part must be a nonempty array of rows");
    const Eigen::Index rows = static_cast<Eigen::Index>(re.size());
    const Eigen::Index cols = static_cast<Eigen::Index>(re.at(0).size());
    MatrixXc out = MatrixXc::Zero(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        if (static_cast<Eigen::Index>(re.at(i).size()) != cols)
            throw std::invalid_argument(what + " rows have unequal lengths");
        for (Eigen::Index j = 0; j < cols; ++j)
            out(i, j) = Complex(re.at(i).at(j).get<double>(), 0.0);
    }
    if (m.contains("imag")) {
        const auto& im = m.at("imag");
        if (static_cast<Eigen::Index>(im.size()) != rows)
            throw std::invalid_argument(what + " imaginary part shape differs");
        for (Eigen::Index i = 0; i < rows; ++i)
            for (Eigen::Index j = 0; j < cols; ++j)
                out(i, j) += Complex(0.0, im.at(i).at(j).get<double>());
    }
    return out;
}

struct ModelBundle {
    Operator h;
    SuperOperator l;
    std::map<std::string, Partition> partitions;
    std::string default_partition;
    ordered_json info;
};

ModelBundle build_custom(const RunConfig& cfg) {
    std::ifstream in(cfg.custom_file);
    if (!in) throw std::runtime_error("cannot read custom.file: " + cfg.custom_file);
    nlohmann::json j;
    in >> j;
    if (!j.contains("labels") || !j.at("labels").is_array())
        throw std::invalid_argument("custom.file needs a labels array");
    HilbertSpace space;
    for (const auto& l : j.at("labels")) space.labels.push_back(l.get<std::string>());
    space.dim = static_cast<Eigen::Index>(space.labels.size());
    check_space(space);

    if (!j.contains("hamiltonian"))
        throw std::invalid_argument("custom.file needs a hamiltonian");
    MatrixXc h = matrix_from_json(j.at("hamiltonian"), "hamiltonian");
    if (h.rows() != space.dim || h.cols() != space.dim)
        throw std::invalid_argument("hamiltonian shape does not match the labels");

    std::vector<MatrixXc> terms;
    if (j.contains("channels")) {
        for (const auto& ch : j.at("channels")) {
            MatrixXc s = matrix_from_json(ch.at("operator"), "channel operator");
            if (s.rows() != space.dim || s.cols() != space.dim)
                throw std::invalid_argument("channel operator shape does not match the labels");
            const double rate = ch.at("rate").get<double>();
            const double occ = ch.value("occupation", 0.0);
            if (rate < 0.0 || occ < 0.0)
                throw std::invalid_argument("channel rate and occupation must be non-negative");
            if (rate > 0.0) terms.push_back(lindblad_pair(s, rate, occ));
        }
    }

    ModelBundle mb;
    mb.h = Operator{space, std::move(h)};
    mb.l = assemble_liouvillian(mb.h, terms);
    // Default partition: every basis state is its own component.
    std::vector<MatrixXc> projs;
    for (Eigen::Index i = 0; i < space.dim; ++i) {
        MatrixXc pr = MatrixXc::Zero(space.dim, space.dim);
        pr(i, i) = 1.0;
        projs.push_back(std::move(pr));
    }
    mb.partitions.emplace("states", validate(space, projs, space.labels));
    mb.default_partition = "states";
    mb.info["parameters"] = ordered_json{{"file", cfg.custom_file}};
    mb.info["dims"] = ordered_json{{"total", space.dim}};
    return mb;
}

ModelBundle build_model(const RunConfig& cfg) {
    if (cfg.model == Model::vsystem) {
        VSystem sys = build(cfg.vsystem);
        ModelBundle mb;
        mb.h = sys.h;
        mb.l = sys.l;
        mb.partitions.emplace("standard", sys.standard);
        mb.partitions.emplace("grouped", sys.grouped);
        mb.default_partition = "standard";
        mb.info["parameters"] = vsystem_json(cfg.vsystem);
        return mb;
    }
    if (cfg.model == Model::spinboson) {
        SBWorkspace ws = build_truncated(cfg.spinboson);
        ModelBundle mb;
        mb.h = ws.h;
        mb.l = ws.l;
        mb.partitions.emplace("side", ws.side);
        mb.partitions.emplace("three", ws.three);
        mb.default_partition = "side";
        mb.info["parameters"] = spinboson_json(cfg.spinboson);
        mb.info["dims"] = ordered_json{
            {"total", ws.space.dim}, {"left", ws.dim_left}, {"right", ws.dim_right}};
        mb.info["q_x"] = ws.q_x;
        mb.info["e_rad"] = ws.e_rad;
        mb.info["overlap_condition"] = ws.overlap_condition;
        mb.info["projector_round_distance"] = ws.projector_round_distance;
        return mb;
    }
    return build_custom(cfg);
}

Partition group_partition(const HilbertSpace& space,
                          const std::vector<std::vector<std::string>>& groups) {
    std::vector<MatrixXc> projs;
    std::vector<std::string> names;
    for (const auto& group : groups) {
        MatrixXc pr = MatrixXc::Zero(space.dim, space.dim);
        std::string name;
        for (const std::string& label : group) {
            const auto it = std::find(space.labels.begin(), space.labels.end(), label);
            if (it == space.labels.end())
                throw std::invalid_argument("unknown basis label in partition.groups: " + label);
            pr(it - space.labels.begin(), it - space.labels.begin()) = 1.0;
            name += (name.empty() ? "" : "+") + label;
        }
        projs.push_back(std::move(pr));
        names.push_back(std::move(name));
    }
    return validate(space, projs, names);
}

Partition select_partition(const ModelBundle& mb, const RunConfig& cfg) {
    if (!cfg.partition_groups.empty())
        return group_partition(mb.l.space, cfg.partition_groups);
    const std::string name =
        cfg.partition_name.empty() ? mb.default_partition : cfg.partition_name;
    const auto it = mb.partitions.find(name);
    if (it == mb.partitions.end()) {
        std::string known;
        for (const auto& [n, _] : mb.partitions) known += (known.empty() ? "" : ", ") + n;
        throw std::invalid_argument("unknown partition name: " + name + " (available: " +
                                    known + ")");
    }
    return it->second;
}

ordered_json ness_json(const NessResult& ness) {
    return ordered_json{{"residual", ness.residual},
                        {"null_dim", ness.null_dim},
                        {"min_eig", ness.min_eig}};
}

void emit_state_csv(const RunConfig& cfg, const HilbertSpace& space, const MatrixXc& rho,
                    RunArtifacts& art) {
    CsvTable t;
    t.header = {"row", "col", "re", "im"};
    for (Eigen::Index i = 0; i < space.dim; ++i)
        for (Eigen::Index j = 0; j < space.dim; ++j)
            t.rows.push_back({space.labels[i], space.labels[j],
                              format_full(rho(i, j).real()), format_full(rho(i, j).imag())});
    const std::string path = out_path(cfg, "ness.csv");
    write_csv(path, t);
    art.files.push_back(path);
}

void emit_populations_csv(const RunConfig& cfg, const Partition& part,
                          const Eigen::VectorXd& pops, RunArtifacts& art) {
    CsvTable t;
    t.header = {"component", "population"};
    for (Eigen::Index n = 0; n < part.size(); ++n)
        t.rows.push_back({part.names[n], format_full(pops(n))});
    const std::string path = out_path(cfg, "populations.csv");
    write_csv(path, t);
    art.files.push_back(path);
}

void emit_rates_csv(const RunConfig& cfg, const RateMatrix& k, RunArtifacts& art) {
    CsvTable t;
    t.header = {"component"};
    for (const auto& n : k.names) t.header.push_back(n);
    for (Eigen::Index m = 0; m < k.k.rows(); ++m) {
        std::vector<std::string> row = {k.names[m]};
        for (Eigen::Index n = 0; n < k.k.cols(); ++n) row.push_back(format_full(k.k(m, n)));
        t.rows.push_back(std::move(row));
    }
    const std::string path = out_path(cfg, "rates.csv");
    write_csv(path, t);
    art.files.push_back(path);
}

void emit_trajectory_csv(const RunConfig& cfg, const Trajectory& traj, RunArtifacts& art) {
    CsvTable t;
    t.header = {"t"};
    const bool split = traj.m1.size() > 0;
    for (const auto& n : traj.names) t.header.push_back("p_" + n);
    for (const auto& n : traj.names) t.header.push_back("pdot_" + n);
    if (split) {
        for (const auto& n : traj.names) t.header.push_back("m1_" + n);
        for (const auto& n : traj.names) t.header.push_back("m2_" + n);
    }
    for (Eigen::Index i = 0; i < traj.times.size(); ++i) {
        std::vector<std::string> row = {format_full(traj.times(i))};
        for (Eigen::Index n = 0; n < traj.p.rows(); ++n)
            row.push_back(format_full(traj.p(n, i)));
        for (Eigen::Index n = 0; n < traj.pdot.rows(); ++n)
            row.push_back(format_full(traj.pdot(n, i)));
        if (split) {
            for (Eigen::Index n = 0; n < traj.m1.rows(); ++n)
                row.push_back(format_full(traj.m1(n, i)));
            for (Eigen::Index n = 0; n < traj.m2.rows(); ++n)
                row.push_back(format_full(traj.m2(n, i)));
        }
        t.rows.push_back(std::move(row));
    }
    const std::string path = out_path(cfg, "trajectory.csv");
    write_csv(path, t);
    art.files.push_back(path);
    const std::string script = out_path(cfg, "plot_trajectory.py");
    emit_trajectory_plot(path, script);
    art.files.push_back(script);
}

// The slow relaxation mode: the nonzero eigenvalue of smallest magnitude
// real part, after discarding the conserved (near-zero) mode.
double slow_eigenvalue(const Eigen::MatrixXd& k) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(k);
    double fastest = 0.0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
        fastest = std::max(fastest, std::abs(es.eigenvalues()(i).real()));
    const double floor = 1e-8 * fastest;
    double slow = -fastest;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        const double re = es.eigenvalues()(i).real();
        if (std::abs(re) > floor && std::abs(re) < std::abs(slow)) slow = re;
    }
    return slow;
}

// The fitted generator is only constrained on the modes still alive in the
// fit window; its other eigenvalues are artifacts.  Report the one nearest
// the reference slow rate.
double nearest_eigenvalue(const Eigen::MatrixXd& k, double target) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(k);
    double best = 0.0;
    double dist = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        const double re = es.eigenvalues()(i).real();
        if (std::abs(re - target) < dist) {
            dist = std::abs(re - target);
            best = re;
        }
    }
    return best;
}

void run_ness(const RunConfig& cfg, const ModelBundle& mb, const Partition& part,
              ordered_json& manifest, RunArtifacts& art) {
    NessResult ness = solve_ness(mb.l);
    manifest["ness"] = ness_json(ness);
    emit_state_csv(cfg, mb.l.space, ness.rho_s.matrix, art);
    emit_populations_csv(cfg, part, populations(part, ness.rho_s.matrix), art);
    std::ostringstream s;
    s << "steady state solved: residual " << ness.residual << ", kernel dimension "
      << ness.null_dim;
    art.summary = s.str();
}

void run_rates(const RunConfig& cfg, const ModelBundle& mb, const Partition& part,
               ordered_json& manifest, RunArtifacts& art) {
    NessResult ness = solve_ness(mb.l);
    LiouvillePartition lp = liouville_partition(part, ness.rho_s.matrix);
    RateMatrix k = rate_matrix(mb.l, lp, cfg.route);
    const Route other = cfg.route == Route::direct ? Route::linear_solve : Route::direct;
    RateMatrix k2 = rate_matrix(mb.l, lp, other);
    const double scale = std::max(k.k.cwiseAbs().maxCoeff(), 1e-300);
    const double agreement = (k.k - k2.k).cwiseAbs().maxCoeff() / scale;

    manifest["ness"] = ness_json(ness);
    manifest["route"] = route_name(k.route);
    manifest["route_agreement_rel"] = agreement;
    manifest["imag_residue"] = k.imag_residue;
    emit_rates_csv(cfg, k, art);
    emit_populations_csv(cfg, part, lp.steady_populations, art);
    std::ostringstream s;
    s << "rate matrix via " << route_name(k.route) << " route; routes agree to "
      << agreement;
    art.summary = s.str();
}

void run_dynamics(const RunConfig& cfg, const ModelBundle& mb, const Partition& part,
                  ordered_json& manifest, RunArtifacts& art) {
    NessResult ness = solve_ness(mb.l);
    LiouvillePartition lp = liouville_partition(part, ness.rho_s.matrix);
    RateMatrix k = rate_matrix(mb.l, lp, cfg.route);
    const MatrixXc rho0 = perturbed_initial(ness.rho_s.matrix, part, cfg.perturb_component,
                                            cfg.perturb_eta);
    Trajectory traj = propagate(mb.l, rho0, uniform_grid(cfg.t_end, cfg.dt), part);
    m_split(traj, k);
    manifest["ness"] = ness_json(ness);
    manifest["grid"] =
        ordered_json{{"t_end", cfg.t_end}, {"dt", cfg.dt}, {"points", traj.times.size()}};
    emit_trajectory_csv(cfg, traj, art);
    std::ostringstream s;
    s << "propagated " << traj.times.size() << " points to t = " << cfg.t_end;
    art.summary = s.str();
}

void run_markov(const RunConfig& cfg, const ModelBundle& mb, const Partition& part,
                ordered_json& manifest, RunArtifacts& art) {
    NessResult ness = solve_ness(mb.l);
    LiouvillePartition lp = liouville_partition(part, ness.rho_s.matrix);
    RateMatrix k = rate_matrix(mb.l, lp, cfg.route);
    const MatrixXc rho0 = perturbed_initial(ness.rho_s.matrix, part, cfg.perturb_component,
                                            cfg.perturb_eta);
    TimescaleReport rep = timescales(mb.l, k, lp, rho0);

    // Default observation window: five slow periods, sampled no coarser than
    // a thousand points.
    const double t_end = 5.0 * rep.t1;
    const double dt = std::min(7e4, t_end / 1000.0);
    Trajectory traj = propagate(mb.l, rho0, uniform_grid(t_end, dt), part);
    m_split(traj, k);
    RateMatrix kfit = fit_rate_matrix(traj, rep.t2, t_end);
    const double err_end = std::min(t_end, 30.0 * rep.t2);
    const double relerr = relative_error(traj, k, rep.t2, err_end);
    const double slow = slow_eigenvalue(k.k);
    const double slow_fit = nearest_eigenvalue(kfit.k, slow);

    CsvTable t;
    t.header = {"t1", "t2", "ts", "markovian", "relative_error",
                "slow_rate", "slow_rate_fitted", "fit_start", "fit_end", "error_end"};
    t.rows.push_back({format_full(rep.t1), format_full(rep.t2), format_full(rep.ts),
                      rep.markovian ? "1" : "0", format_full(relerr), format_full(slow),
                      format_full(slow_fit), format_full(rep.t2), format_full(t_end),
                      format_full(err_end)});
    const std::string path = out_path(cfg, "markov.csv");
    write_csv(path, t);
    art.files.push_back(path);

    manifest["ness"] = ness_json(ness);
    manifest["timescales"] = ordered_json{{"t1", rep.t1},
                                          {"t2", rep.t2},
                                          {"ts", rep.ts},
                                          {"markovian", rep.markovian}};
    manifest["relative_error"] = relerr;
    manifest["slow_rate"] = slow;
    manifest["slow_rate_fitted"] = slow_fit;
    std::ostringstream s;
    s << "t1 = " << rep.t1 << ", t2 = " << rep.t2 << ", relative error " << relerr
      << (rep.markovian ? " (markovian)" : " (not markovian)");
    art.summary = s.str();
}

void run_beta_map(const RunConfig& cfg, ordered_json& manifest, RunArtifacts& art) {
    const SweepSpec& s = *cfg.sweep;
    const auto rows = sweep_beta(s.delta_values, s.gamma_values, cfg.vsystem);
    CsvTable t;
    t.header = {"delta", "gamma", "beta"};
    for (const auto& r : rows)
        t.rows.push_back(
            {format_full(r.delta), format_full(r.gamma), format_full(r.beta)});
    const std::string path = out_path(cfg, "beta.csv");
    write_csv(path, t);
    art.files.push_back(path);
    const std::string script = out_path(cfg, "plot_beta.py");
    emit_beta_map_plot(path, script);
    art.files.push_back(script);
    manifest["model_info"] =
        ordered_json{{"parameters", vsystem_json(cfg.vsystem)}};
    manifest["grid"] = ordered_json{{"delta_points", s.delta_values.size()},
                                    {"gamma_points", s.gamma_values.size()}};
    art.summary = "coherence-contribution map over " + std::to_string(rows.size()) +
                  " grid points";
}

void run_sweep(const RunConfig& cfg, ordered_json& manifest, RunArtifacts& art) {
    const SweepSpec& spec = *cfg.sweep;
    CsvTable t;
    bool header_done = false;
    for (const double value : spec.values) {
        RunConfig point = cfg;
        set_parameter(point, spec.parameter, value);
        ModelBundle mb = build_model(point);
        Partition part = select_partition(mb, point);
        NessResult ness = solve_ness(mb.l);
        LiouvillePartition lp = liouville_partition(part, ness.rho_s.matrix);
        RateMatrix k = rate_matrix(mb.l, lp, cfg.route);
        if (!header_done) {
            t.header = {"value"};
            for (const auto& n : k.names) t.header.push_back("p_" + n);
            for (Eigen::Index m = 0; m < k.k.rows(); ++m)
                for (Eigen::Index n = 0; n < k.k.cols(); ++n)
                    if (m != n)
                        t.header.push_back("k_" + k.names[m] + "_" + k.names[n]);
            header_done = true;
        }
        std::vector<std::string> row = {format_full(value)};
        for (Eigen::Index n = 0; n < lp.steady_populations.size(); ++n)
            row.push_back(format_full(lp.steady_populations(n)));
        for (Eigen::Index m = 0; m < k.k.rows(); ++m)
            for (Eigen::Index n = 0; n < k.k.cols(); ++n)
                if (m != n) row.push_back(format_full(k.k(m, n)));
        t.rows.push_back(std::move(row));
    }
    const std::string path = out_path(cfg, "sweep.csv");
    write_csv(path, t);
    art.files.push_back(path);
    const std::string script = out_path(cfg, "plot_sweep.py");
    emit_sweep_plot(path, script, spec.logspace);
    art.files.push_back(script);
    manifest["sweep"] = ordered_json{{"parameter", spec.parameter},
                                     {"points", spec.values.size()},
                                     {"scale", spec.logspace ? "log" : "linear"}};
    art.summary = "swept " + spec.parameter + " over " +
                  std::to_string(spec.values.size()) + " points";
}

}  // namespace

RunArtifacts run(const RunConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    std::filesystem::create_directories(cfg.output_dir);
    RunArtifacts art;
    ordered_json manifest;
    manifest["model"] = model_name(cfg.model);
    manifest["task"] = task_name(cfg.task);
    manifest["seed"] = cfg.seed;
    manifest["tolerances"] = tolerances_json();
    {
        ordered_json echo;
        for (const auto& [key, value] : cfg.resolved)
            echo[key] = ordered_json::parse(value);
        manifest["config"] = echo;
    }

    if (cfg.task == Task::sweep) {
        if (cfg.sweep->parameter == "vsystem.beta") {
            run_beta_map(cfg, manifest, art);
        } else {
            run_sweep(cfg, manifest, art);
        }
    } else {
        ModelBundle mb = build_model(cfg);
        Partition part = select_partition(mb, cfg);
        manifest["model_info"] = mb.info;
        manifest["partition"] = part.names;
        switch (cfg.task) {
            case Task::ness: run_ness(cfg, mb, part, manifest, art); break;
            case Task::rates: run_rates(cfg, mb, part, manifest, art); break;
            case Task::dynamics: run_dynamics(cfg, mb, part, manifest, art); break;
            case Task::markov: run_markov(cfg, mb, part, manifest, art); break;
            case Task::sweep: break;  // handled above
        }
    }

    const auto dt = std::chrono::steady_clock::now() - t0;
    manifest["wall_ms"] =
        std::chrono::duration_cast<std::chrono::milliseconds>(dt).count();
    {
        ordered_json files = ordered_json::array();
        for (const auto& f : art.files)
            files.push_back(std::filesystem::path(f).filename().string());
        manifest["artifacts"] = files;
    }
    const std::string mpath = out_path(cfg, "manifest.json");
    write_text(mpath, manifest.dump(2) + "\n");
    art.files.push_back(mpath);
    return art;
}

}  // namespace nesskit
