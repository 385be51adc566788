#include "distflow/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <thread>

#include "distflow/errors.hpp"
#include "distflow/random_networks.hpp"

namespace distflow {

double relative_error(const Eigen::VectorXcd& V_true, const Eigen::VectorXd& V_est_mag) {
    if (V_true.size() != V_est_mag.size()) throw ValidationError("vector size mismatch");
    Eigen::VectorXd mag = V_true.cwiseAbs();
    double denom = mag.norm();
    if (denom == 0.0) throw ValidationError("true voltage vector is zero");
    return (V_est_mag - mag).norm() / denom;
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct ModelSet {
    LinearVoltageModel gldf;
    FplModel fpl;
    std::optional<LinearVoltageModel> ldf;  // radial networks only
};

ModelSet build_models(const Network& net, const IndexMaps& idx, const SystemMatrices& mats,
                      const Eigen::VectorXcd& S_star, const SolverConfig& solver) {
    Eigen::VectorXcd V_star;
    if (S_star.isZero(0.0)) {
        V_star = mats.E;
    } else {
        PowerFlowSolution sol = fixed_point_solve(mats, S_star, solver);
        if (!sol.converged)
            throw NumericalError("nonlinear solve at the linearization point did not converge");
        V_star = sol.V;
    }
    ModelSet models;
    models.gldf = build_gldf(mats, S_star, V_star);
    models.fpl = build_fpl(mats, S_star, V_star);
    if (is_radial(net)) models.ldf = build_ldf(net, idx, mats);
    return models;
}

struct SampleErrors {
    double gldf = kNaN, ldf = kNaN, fpl = kNaN;
};

SampleErrors relative_errors(const ModelSet& models, const Eigen::VectorXcd& S,
                             const Eigen::VectorXcd& V_true) {
    SampleErrors e;
    Eigen::VectorXd p = S.real(), q = S.imag();
    e.gldf = relative_error(V_true, magnitudes_from_squared(eval_squared_voltages(models.gldf, p, q)).value);
    if (models.ldf)
        e.ldf = relative_error(V_true, magnitudes_from_squared(eval_squared_voltages(*models.ldf, p, q)).value);
    e.fpl = relative_error(V_true, eval_fpl(models.fpl, S).cwiseAbs());
    return e;
}

}  // namespace

SweepResult continuation_sweep(const Network& net, const SweepConfig& cfg) {
    IndexMaps idx = build_index_maps(net);
    SystemMatrices mats = build_system(net, idx);
    Eigen::VectorXcd S_ref = injection_vector(net, idx);
    if (S_ref.isZero(0.0)) throw ValidationError("network carries no reference loading");

    ModelSet models = build_models(net, idx, mats, Eigen::VectorXcd(cfg.lin_k * S_ref), cfg.solver);

    SweepResult res;
    res.lin_k = cfg.lin_k;
    const int count = static_cast<int>(std::llround((cfg.k_max - cfg.k_min) / cfg.step)) + 1;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < count; ++i) {
        double k = cfg.k_min + i * cfg.step;
        if (std::abs(k - cfg.lin_k) < best) {
            best = std::abs(k - cfg.lin_k);
            res.lin_index = i;
        }
        res.k.push_back(k);
        PowerFlowSolution sol = fixed_point_solve(mats, k * S_ref, cfg.solver);
        res.converged.push_back(sol.converged);
        if (!sol.converged) {
            res.err_gldf.push_back(kNaN);
            res.err_ldf.push_back(kNaN);
            res.err_fpl.push_back(kNaN);
            continue;
        }
        SampleErrors e = relative_errors(models, k * S_ref, sol.V);
        res.err_gldf.push_back(e.gldf);
        res.err_ldf.push_back(e.ldf);
        res.err_fpl.push_back(e.fpl);
    }
    return res;
}

McDraws mc_draws(std::uint64_t seed, int sample_index, int n) {
    Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(sample_index));
    McDraws d;
    d.u_p.resize(n);
    d.u_pf.resize(n);
    for (int i = 0; i < n; ++i) {
        d.u_p(i) = rng.uniform();
        d.u_pf(i) = rng.uniform();
    }
    return d;
}

namespace {

std::vector<int> load_node_list(const Eigen::VectorXcd& S_ref) {
    std::vector<int> load_nodes;
    for (int i = 0; i < S_ref.size(); ++i)
        if (std::abs(S_ref(i)) > 0.0) load_nodes.push_back(i);
    return load_nodes;
}

}  // namespace

std::vector<int> der_partition(const Eigen::VectorXcd& S_ref, bool swap_halves) {
    std::vector<int> load_nodes = load_node_list(S_ref);
    // the first ceil(L/2) load nodes keep the load distribution; the rest
    // become generators
    std::size_t keep = (load_nodes.size() + 1) / 2;
    std::vector<int> der;
    for (std::size_t i = 0; i < load_nodes.size(); ++i) {
        bool is_der = swap_halves ? (i < load_nodes.size() - keep) : (i >= keep);
        if (is_der) der.push_back(load_nodes[i]);
    }
    return der;
}

std::vector<int> random_der_partition(const Eigen::VectorXcd& S_ref, std::uint64_t seed) {
    std::vector<int> load_nodes = load_node_list(S_ref);
    Rng rng = Rng::stream(seed, 0x4445525031ULL);  // stream tag for the partition draw
    for (std::size_t i = load_nodes.size(); i > 1; --i)
        std::swap(load_nodes[i - 1], load_nodes[rng.uniform_int(0, static_cast<int>(i) - 1)]);
    std::size_t take = load_nodes.size() / 2;
    std::vector<int> der(load_nodes.begin(), load_nodes.begin() + take);
    std::sort(der.begin(), der.end());
    return der;
}

namespace {

double pf_to_tan(double u_pf) {
    double pf = 0.7 + 0.3 * u_pf;  // U(0.7, 1)
    return std::tan(std::acos(pf));
}

}  // namespace

Eigen::VectorXcd mc_injection_positive(const Eigen::VectorXcd& S_ref, const McDraws& d) {
    Eigen::VectorXcd S = Eigen::VectorXcd::Zero(S_ref.size());
    for (int i = 0; i < S_ref.size(); ++i) {
        double lo = 1.5 * S_ref(i).real();  // negative for loads
        if (lo == 0.0) continue;
        double p = lo + d.u_p(i) * (0.0 - lo);
        double q = p * pf_to_tan(d.u_pf(i));  // q keeps the sign of p
        S(i) = Complex(p, q);
    }
    return S;
}

Eigen::VectorXcd mc_injection_der(const Eigen::VectorXcd& S_ref, const std::vector<int>& der_nodes,
                                  const McDraws& d) {
    std::vector<char> is_der(S_ref.size(), 0);
    for (int i : der_nodes) is_der[i] = 1;
    Eigen::VectorXcd S = Eigen::VectorXcd::Zero(S_ref.size());
    for (int i = 0; i < S_ref.size(); ++i) {
        if (std::abs(S_ref(i)) == 0.0) continue;
        double p;
        if (is_der[i]) {
            double hi = -1.5 * S_ref(i).real();  // positive: generation
            p = d.u_p(i) * hi;
        } else {
            double lo = 1.5 * S_ref(i).real();
            p = lo + d.u_p(i) * (0.0 - lo);
        }
        double q = p * pf_to_tan(d.u_pf(i));
        S(i) = Complex(p, q);
    }
    return S;
}

Eigen::VectorXcd der_linearization_reference(const Eigen::VectorXcd& S_ref,
                                             const std::vector<int>& der_nodes) {
    Eigen::VectorXcd S = S_ref;
    for (int i : der_nodes) S(i) = Complex(-S_ref(i).real(), S_ref(i).imag());
    return S;
}

namespace {

MonteCarloResult run_monte_carlo(const Network& net, const McConfig& cfg, bool der_scenario) {
    IndexMaps idx = build_index_maps(net);
    SystemMatrices mats = build_system(net, idx);
    Eigen::VectorXcd S_ref = injection_vector(net, idx);
    if (S_ref.isZero(0.0)) throw ValidationError("network carries no reference loading");

    MonteCarloResult res;
    res.seed = cfg.seed;
    std::vector<int> der_nodes;
    Eigen::VectorXcd S_signed = S_ref;
    if (der_scenario) {
        der_nodes = cfg.partition == DerPartition::Random
                        ? random_der_partition(S_ref, cfg.seed)
                        : der_partition(S_ref, cfg.partition == DerPartition::Swapped);
        S_signed = der_linearization_reference(S_ref, der_nodes);
        res.der_nodes = der_nodes;
    }

    ModelSet models =
        build_models(net, idx, mats, Eigen::VectorXcd(cfg.lin_fraction * S_signed), cfg.solver);

    const int n = idx.n;
    const int count = cfg.samples;
    // per-sample accumulators indexed by sample so the reduction below is
    // independent of thread count and scheduling
    std::vector<double> sum_g(count), sum_l(count), sum_f(count);
    std::vector<double> max_g(count), max_l(count), max_f(count);
    std::vector<char> ok(count, 0);

    auto worker = [&](int begin, int end) {
        for (int j = begin; j < end; ++j) {
            McDraws d = mc_draws(cfg.seed, j, n);
            Eigen::VectorXcd S = der_scenario ? mc_injection_der(S_ref, der_nodes, d)
                                              : mc_injection_positive(S_ref, d);
            PowerFlowSolution sol = fixed_point_solve(mats, S, cfg.solver);
            if (!sol.converged) continue;
            ok[j] = 1;
            Eigen::VectorXd mag = sol.V.cwiseAbs();
            Eigen::VectorXd g =
                (magnitudes_from_squared(eval_squared_voltages(models.gldf, S.real(), S.imag())).value - mag)
                    .cwiseAbs();
            Eigen::VectorXd f = (eval_fpl(models.fpl, S).cwiseAbs() - mag).cwiseAbs();
            sum_g[j] = g.sum();
            max_g[j] = g.maxCoeff();
            sum_f[j] = f.sum();
            max_f[j] = f.maxCoeff();
            if (models.ldf) {
                Eigen::VectorXd l =
                    (magnitudes_from_squared(eval_squared_voltages(*models.ldf, S.real(), S.imag())).value - mag)
                        .cwiseAbs();
                sum_l[j] = l.sum();
                max_l[j] = l.maxCoeff();
            }
        }
    };

    int jobs = std::max(1, cfg.jobs);
    if (jobs == 1) {
        worker(0, count);
    } else {
        std::vector<std::thread> pool;
        int chunk = (count + jobs - 1) / jobs;
        for (int t = 0; t < jobs; ++t) {
            int b = t * chunk, e = std::min(count, b + chunk);
            if (b >= e) break;
            pool.emplace_back(worker, b, e);
        }
        for (auto& th : pool) th.join();
    }

    // deterministic reduction in sample order
    int converged = 0;
    for (int j = 0; j < count; ++j) {
        if (!ok[j]) {
            ++res.skipped;
            if (cfg.keep_per_sample) res.per_sample.push_back({kNaN, kNaN, kNaN, false});
            continue;
        }
        ++converged;
        res.gldf.mean += sum_g[j];
        res.ldf.mean += sum_l[j];
        res.fpl.mean += sum_f[j];
        res.gldf.max = std::max(res.gldf.max, max_g[j]);
        res.ldf.max = std::max(res.ldf.max, max_l[j]);
        res.fpl.max = std::max(res.fpl.max, max_f[j]);
        if (cfg.keep_per_sample)
            res.per_sample.push_back({sum_g[j] / n, sum_l[j] / n, sum_f[j] / n, true});
    }
    res.samples = count;
    if (converged > 0) {
        double denom = static_cast<double>(n) * converged;
        res.gldf.mean /= denom;
        res.ldf.mean /= denom;
        res.fpl.mean /= denom;
    }
    if (!models.ldf) res.ldf = {kNaN, kNaN};
    return res;
}

}  // namespace

MonteCarloResult random_load_positive(const Network& net, const McConfig& cfg) {
    return run_monte_carlo(net, cfg, false);
}

MonteCarloResult random_load_der(const Network& net, const McConfig& cfg) {
    return run_monte_carlo(net, cfg, true);
}

namespace {

void write_double(std::ostream& os, double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    os << buf;
}

}  // namespace

void write_sweep_csv(std::ostream& os, const SweepResult& res) {
    os << "k,err_gldf,err_ldf,err_fpl,converged\n";
    for (std::size_t i = 0; i < res.k.size(); ++i) {
        write_double(os, res.k[i]);
        os << ',';
        write_double(os, res.err_gldf[i]);
        os << ',';
        write_double(os, res.err_ldf[i]);
        os << ',';
        write_double(os, res.err_fpl[i]);
        os << ',' << (res.converged[i] ? 1 : 0) << '\n';
    }
}

void write_montecarlo_csv(std::ostream& os, const std::string& feeder,
                          const std::vector<std::pair<std::string, MonteCarloResult>>& rows) {
    os << "feeder,scenario,model,mean_pu,max_pu,mean_001pu,max_001pu,samples,skipped,seed\n";
    for (const auto& [scenario, r] : rows) {
        struct Row {
            const char* model;
            const ModelError* e;
        } models[3] = {{"ldf", &r.ldf}, {"gldf", &r.gldf}, {"fpl", &r.fpl}};
        for (const auto& m : models) {
            os << feeder << ',' << scenario << ',' << m.model << ',';
            write_double(os, m.e->mean);
            os << ',';
            write_double(os, m.e->max);
            os << ',';
            write_double(os, m.e->mean * 100.0);
            os << ',';
            write_double(os, m.e->max * 100.0);
            os << ',' << r.samples << ',' << r.skipped << ',' << r.seed << '\n';
        }
    }
}

}  // namespace distflow
