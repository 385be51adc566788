#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

#include "CLI11.hpp"
#include "distflow/analysis.hpp"
#include "distflow/checks.hpp"
#include "distflow/feeder_io.hpp"
#include "distflow/random_networks.hpp"
#include "json.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";

namespace fs = std::filesystem;
using distflow::Network;

struct CommonOptions {
    std::string feeder;
    std::string out = ".";
    double tol = 1e-10;
    int max_iter = 1000;
};

Network load_feeder(const std::string& source) {
    for (const auto& name : distflow::bundled_feeder_names())
        if (source == name) return distflow::load_bundled(source);
    std::ifstream in(source);
    if (!in) throw distflow::ParseError("cannot read feeder file \"" + source + "\"");
    std::ostringstream text;
    text << in.rdbuf();
    return distflow::to_network(distflow::parse_feeder(text.str()));
}

distflow::SolverConfig solver_config(const CommonOptions& c) {
    distflow::SolverConfig cfg;
    cfg.tolerance = c.tol;
    cfg.max_iterations = c.max_iter;
    return cfg;
}

void write_manifest(const fs::path& dir, const std::string& command,
                    const std::vector<std::string>& argv, const nlohmann::json& config,
                    const std::vector<std::string>& outputs) {
    nlohmann::json m;
    m["command"] = command;
    m["argv"] = argv;
    m["config"] = config;
    m["outputs"] = outputs;
    m["version"] = kVersion;
    // timestamp lives in its own field; data files stay byte-reproducible
    auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[64];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    m["timestamp"] = buf;
    std::ofstream os(dir / "manifest.json");
    os << m.dump(1) << "\n";
}

void write_matrix_csv(const fs::path& path, const Eigen::MatrixXd& m) {
    std::ofstream os(path);
    for (int r = 0; r < m.rows(); ++r) {
        for (int c = 0; c < m.cols(); ++c) os << (c ? "," : "") << m(r, c);
        os << "\n";
    }
}

void write_nodes_csv(const fs::path& path, const Network& net, const distflow::IndexMaps& idx) {
    std::ofstream os(path);
    os << "node,bus,phase\n";
    for (int i = 0; i < idx.n; ++i)
        os << i << ',' << net.buses[idx.node[i].bus].id << ','
           << distflow::phase_letter(idx.node[i].phase) << "\n";
}

void write_ybus_csv(const fs::path& path, const Eigen::MatrixXcd& y) {
    std::ofstream os(path);
    os << "row,col,re,im\n";
    for (int r = 0; r < y.rows(); ++r)
        for (int c = 0; c < y.cols(); ++c)
            if (y(r, c) != distflow::Complex(0, 0))
                os << r << ',' << c << ',' << y(r, c).real() << ',' << y(r, c).imag() << "\n";
}

int cmd_solve(const CommonOptions& c, bool dump_ybus, const std::vector<std::string>& argv) {
    Network net = load_feeder(c.feeder);
    auto idx = distflow::build_index_maps(net);
    auto mats = distflow::build_system(net, idx);
    auto S = distflow::injection_vector(net, idx);
    auto sol = distflow::fixed_point_solve(mats, S, solver_config(c));

    fs::create_directories(c.out);
    fs::path dir(c.out);
    {
        std::ofstream os(dir / "solve.csv");
        os << "node,bus,phase,vm_pu,va_deg,converged\n";
        for (int i = 0; i < idx.n; ++i) {
            os << i << ',' << net.buses[idx.node[i].bus].id << ','
               << distflow::phase_letter(idx.node[i].phase) << ',' << std::abs(sol.V(i)) << ','
               << std::arg(sol.V(i)) * 180.0 / std::numbers::pi << ',' << (sol.converged ? 1 : 0)
               << "\n";
        }
    }
    std::vector<std::string> outputs = {"solve.csv"};
    if (dump_ybus) {
        write_ybus_csv(dir / "ybus.csv", mats.Y_LL);
        outputs.push_back("ybus.csv");
    }
    write_manifest(dir, "solve", argv,
                   {{"feeder", c.feeder}, {"tol", c.tol}, {"max_iter", c.max_iter}}, outputs);
    if (!sol.converged) {
        std::cerr << "solve did not converge (status " << static_cast<int>(sol.status)
                  << ", residual " << sol.residual << ")\n";
        return 1;
    }
    std::cout << "converged in " << sol.iterations << " iterations, residual " << sol.residual
              << "\n";
    return 0;
}

int cmd_linearize(const CommonOptions& c, double lin_k, const std::vector<std::string>& argv) {
    Network net = load_feeder(c.feeder);
    auto idx = distflow::build_index_maps(net);
    auto mats = distflow::build_system(net, idx);
    auto S_ref = distflow::injection_vector(net, idx);

    Eigen::VectorXcd S_star = lin_k * S_ref;
    Eigen::VectorXcd V_star = mats.E;
    if (lin_k != 0.0) {
        auto sol = distflow::fixed_point_solve(mats, S_star, solver_config(c));
        if (!sol.converged) {
            std::cerr << "nonlinear solve at lin-k " << lin_k << " did not converge\n";
            return 1;
        }
        V_star = sol.V;
    }
    auto mdl = distflow::build_gldf(mats, S_star, V_star);

    fs::create_directories(c.out);
    fs::path dir(c.out);
    write_matrix_csv(dir / "M.csv", mdl.M);
    write_matrix_csv(dir / "N.csv", mdl.N);
    write_matrix_csv(dir / "Lambda.csv", mdl.lambda);
    write_matrix_csv(dir / "base.csv", mdl.base);
    write_nodes_csv(dir / "nodes.csv", net, idx);
    write_manifest(dir, "linearize", argv, {{"feeder", c.feeder}, {"lin_k", lin_k}},
                   {"M.csv", "N.csv", "Lambda.csv", "base.csv", "nodes.csv"});
    std::cout << "wrote M/N/Lambda for " << idx.n << " nodes\n";
    return 0;
}

int cmd_sweep(const CommonOptions& c, double lin_k, double kmin, double kmax, double kstep,
              const std::vector<std::string>& argv) {
    Network net = load_feeder(c.feeder);
    distflow::SweepConfig cfg;
    cfg.k_min = kmin;
    cfg.k_max = kmax;
    cfg.step = kstep;
    cfg.lin_k = lin_k;
    cfg.solver = solver_config(c);
    auto res = distflow::continuation_sweep(net, cfg);

    fs::create_directories(c.out);
    fs::path dir(c.out);
    std::ostringstream fname;
    fname << "sweep_lin" << lin_k << ".csv";
    {
        std::ofstream os(dir / fname.str());
        distflow::write_sweep_csv(os, res);
    }
    write_manifest(dir, "sweep", argv,
                   {{"feeder", c.feeder},
                    {"lin_k", lin_k},
                    {"kmin", kmin},
                    {"kmax", kmax},
                    {"kstep", kstep},
                    {"tol", c.tol}},
                   {fname.str()});
    int conv = 0;
    for (bool b : res.converged) conv += b;
    std::cout << "swept " << res.k.size() << " points, " << conv << " converged\n";
    return 0;
}

int cmd_montecarlo(const CommonOptions& c, const std::string& scenario,
                   const std::string& partition, int samples, std::uint64_t seed, int jobs,
                   const std::vector<std::string>& argv) {
    Network net = load_feeder(c.feeder);
    distflow::McConfig cfg;
    cfg.samples = samples;
    cfg.seed = seed;
    cfg.jobs = jobs;
    cfg.solver = solver_config(c);
    if (partition == "first")
        cfg.partition = distflow::DerPartition::FirstHalf;
    else if (partition == "swapped")
        cfg.partition = distflow::DerPartition::Swapped;
    else if (partition == "random")
        cfg.partition = distflow::DerPartition::Random;
    else {
        std::cerr << "unknown DER partition \"" << partition << "\" (use first, swapped or random)\n";
        return 2;
    }

    auto idx = distflow::build_index_maps(net);
    std::vector<std::pair<std::string, distflow::MonteCarloResult>> rows;
    if (scenario == "positive" || scenario == "both")
        rows.emplace_back("positive", distflow::random_load_positive(net, cfg));
    if (scenario == "der" || scenario == "both")
        rows.emplace_back("der", distflow::random_load_der(net, cfg));
    if (rows.empty()) {
        std::cerr << "unknown scenario \"" << scenario << "\" (use positive, der or both)\n";
        return 2;
    }

    // the DER half, as bus.phase labels, goes into the manifest
    nlohmann::json der_nodes = nlohmann::json::array();
    for (const auto& [name, r] : rows) {
        if (name != "der") continue;
        for (int i : r.der_nodes)
            der_nodes.push_back(net.buses[idx.node[i].bus].id + "." +
                                distflow::phase_letter(idx.node[i].phase));
    }

    fs::create_directories(c.out);
    fs::path dir(c.out);
    {
        std::ofstream os(dir / "montecarlo.csv");
        distflow::write_montecarlo_csv(os, net.name.empty() ? c.feeder : net.name, rows);
    }
    write_manifest(dir, "montecarlo", argv,
                   {{"feeder", c.feeder},
                    {"scenario", scenario},
                    {"der_partition", partition},
                    {"der_nodes", der_nodes},
                    {"samples", samples},
                    {"seed", seed},
                    {"jobs", jobs},
                    {"tol", c.tol}},
                   {"montecarlo.csv"});
    for (const auto& [name, r] : rows)
        std::cout << name << ": gldf mean " << r.gldf.mean * 100 << " / ldf " << r.ldf.mean * 100
                  << " / fpl " << r.fpl.mean * 100 << " (0.01 p.u.), skipped " << r.skipped << "\n";
    return 0;
}

int cmd_verify(const CommonOptions& c, int samples, std::uint64_t seed, double dominance_tol,
               const std::vector<std::string>& argv) {
    Network net = load_feeder(c.feeder);
    auto idx = distflow::build_index_maps(net);
    auto mats = distflow::build_system(net, idx);

    nlohmann::json report = nlohmann::json::array();
    bool all_pass = true;

    auto add = [&](const char* name, auto&& fn) {
        nlohmann::json r;
        r["check"] = name;
        try {
            distflow::CheckReport rep = fn();
            r["pass"] = rep.pass;
            r["worst"] = rep.worst;
            r["skipped_samples"] = rep.skipped;
            if (!rep.note.empty()) r["note"] = rep.note;
            if (rep.witness) {
                r["witness"] = rep.witness->description;
                r["value"] = rep.witness->value;
                r["bound"] = rep.witness->bound;
            }
            all_pass &= rep.pass;
            std::cout << (rep.pass ? "PASS " : "FAIL ") << name << " (worst " << rep.worst << ")\n";
        } catch (const distflow::Error& e) {
            // precondition not met (meshed or shunted): skip with the reason
            r["skipped"] = e.what();
            std::cout << "SKIP " << name << ": " << e.what() << "\n";
        }
        report.push_back(r);
    };

    add("common_path", [&] { return distflow::check_common_path(net, idx, mats); });
    add("incidence_identities", [&] { return distflow::check_incidence_identities(net, idx); });
    add("dominance", [&] {
        auto S_ref = distflow::injection_vector(net, idx);
        std::vector<Eigen::VectorXcd> S_samples;
        for (int j = 0; j < samples; ++j)
            S_samples.push_back(
                distflow::mc_injection_positive(S_ref, distflow::mc_draws(seed, j, idx.n)));
        distflow::DominanceOptions opt;
        opt.tol = dominance_tol;
        opt.solver = solver_config(c);
        return distflow::check_dominance(net, idx, mats, S_samples, opt);
    });

    fs::create_directories(c.out);
    fs::path dir(c.out);
    {
        std::ofstream os(dir / "verify.json");
        os << report.dump(1) << "\n";
    }
    write_manifest(dir, "verify", argv,
                   {{"feeder", c.feeder},
                    {"samples", samples},
                    {"seed", seed},
                    {"tol", c.tol},
                    {"dominance_tol", dominance_tol}},
                   {"verify.json"});
    return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"multiphase distribution power flow linearization toolkit"};
    app.require_subcommand(1);

    CommonOptions common;
    double lin_k = 0.0, kmin = -2.5, kmax = 2.5, kstep = 0.01;
    int samples = 10000, verify_samples = 500, jobs = 1;
    std::uint64_t seed = 1;
    std::string scenario = "both";
    std::string der_partition = "first";
    bool dump_ybus = false;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--feeder", common.feeder, "feeder file path or bundled name (ieee13/ieee37/ieee123)")
            ->required();
        sub->add_option("--out", common.out, "output directory");
        sub->add_option("--tol", common.tol, "solver tolerance");
        sub->add_option("--max-iter", common.max_iter, "solver iteration cap");
    };

    CLI::App* solve = app.add_subcommand("solve", "nonlinear power flow, per-node |V| and angle CSV");
    add_common(solve);
    solve->add_flag("--dump-ybus", dump_ybus, "also write the Y_LL sparsity as CSV");

    CLI::App* linearize = app.add_subcommand("linearize", "emit M, N and Lambda as CSV");
    add_common(linearize);
    linearize->add_option("--lin-k", lin_k, "linearization multiplier on the reference loading");

    CLI::App* sweep = app.add_subcommand("sweep", "continuation analysis over k");
    add_common(sweep);
    sweep->add_option("--lin-k", lin_k, "linearization multiplier");
    sweep->add_option("--kmin", kmin, "grid start");
    sweep->add_option("--kmax", kmax, "grid end");
    sweep->add_option("--kstep", kstep, "grid step");

    CLI::App* mc = app.add_subcommand("montecarlo", "random-load error tables");
    add_common(mc);
    mc->add_option("--scenario", scenario, "positive, der or both");
    mc->add_option("--der-partition", der_partition,
                   "which load nodes generate in the DER scenario: first, swapped or random");
    mc->add_option("--samples", samples, "sample count");
    mc->add_option("--seed", seed, "RNG seed");
    mc->add_option("--jobs", jobs, "worker threads");

    CLI::App* verify = app.add_subcommand("verify", "structural checks with counterexample reporting");
    add_common(verify);
    verify->add_option("--samples", verify_samples, "dominance sample count");
    verify->add_option("--seed", seed, "RNG seed");
    double dominance_tol = 1e-7;
    verify->add_option("--dominance-tol", dominance_tol,
                       "per-node tolerance for the dominance check (unbalanced feeders carry a "
                       "structural excess around 1e-3 at full loading)");

    std::vector<std::string> argvec(argv + 1, argv + argc);
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (solve->parsed()) return cmd_solve(common, dump_ybus, argvec);
        if (linearize->parsed()) return cmd_linearize(common, lin_k, argvec);
        if (sweep->parsed()) return cmd_sweep(common, lin_k, kmin, kmax, kstep, argvec);
        if (mc->parsed())
            return cmd_montecarlo(common, scenario, der_partition, samples, seed, jobs, argvec);
        if (verify->parsed()) return cmd_verify(common, verify_samples, seed, dominance_tol, argvec);
    } catch (const distflow::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const distflow::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
