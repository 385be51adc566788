#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "distflow/linear_models.hpp"
#include "distflow/power_flow.hpp"

namespace distflow {

/// || |V_true| - V_est_mag ||_2 / || |V_true| ||_2.
double relative_error(const Eigen::VectorXcd& V_true, const Eigen::VectorXd& V_est_mag);

struct SweepConfig {
    double k_min = -2.5;
    double k_max = 2.5;
    double step = 0.01;
    double lin_k = 0.0;  // linearization multiplier for GLDF and FPL
    SolverConfig solver{};
};

struct SweepResult {
    std::vector<double> k;
    std::vector<double> err_gldf;  // NaN when the reference did not converge
    std::vector<double> err_ldf;   // NaN on meshed networks as well
    std::vector<double> err_fpl;
    std::vector<bool> converged;
    double lin_k = 0.0;
    int lin_index = -1;  // grid index closest to lin_k
};

/// Solve the nonlinear reference at k S_ref over the grid and record the
/// relative error of each model built at lin_k S_ref. Non-converged points
/// are recorded and carry NaN errors.
SweepResult continuation_sweep(const Network& net, const SweepConfig& cfg = {});

/// Which load nodes generate in the DER scenario.
enum class DerPartition {
    FirstHalf,  // first ceil(L/2) load nodes keep the load draw, the rest generate
    Swapped,    // flip the two halves
    Random,     // seeded random half, reported in the result
};

struct McConfig {
    int samples = 10000;
    std::uint64_t seed = 1;
    int jobs = 1;
    double lin_fraction = 0.75;  // linearize at lin_fraction * S (signed)
    DerPartition partition = DerPartition::FirstHalf;
    bool keep_per_sample = false;
    SolverConfig solver{};
};

struct ModelError {
    double mean = 0.0;  // p.u.; multiply by 100 for 0.01-p.u. table units
    double max = 0.0;
};

struct MonteCarloResult {
    ModelError gldf, ldf, fpl;
    int samples = 0;
    int skipped = 0;  // non-converged, excluded from the statistics
    std::uint64_t seed = 0;
    std::vector<int> der_nodes;  // DER scenario partition, node indices
    struct PerSample {
        double gldf, ldf, fpl;  // mean absolute magnitude error of the sample
        bool converged;
    };
    std::vector<PerSample> per_sample;  // filled when keep_per_sample
};

/// Uniform-load scenario: p_i ~ U(1.5 Re(S_ref_i), 0), pf_i ~ U(0.7, 1),
/// q_i = p_i tan(acos(pf_i)); linearized at lin_fraction * S_ref.
MonteCarloResult random_load_positive(const Network& net, const McConfig& cfg = {});

/// DER scenario: the first half of the load nodes (by node index) keeps the
/// load distribution, the rest draws p_i ~ U(0, -1.5 Re(S_ref_i));
/// linearized at lin_fraction * S with the DER half sign-flipped.
MonteCarloResult random_load_der(const Network& net, const McConfig& cfg = {});

// --- deterministic draw plumbing, exposed so tests can pin exact samples ---

struct McDraws {
    Eigen::VectorXd u_p;   // per node, uniform in [0, 1)
    Eigen::VectorXd u_pf;  // per node, uniform in [0, 1)
};

/// Draws for one sample; derived from (seed, sample_index) only, so results
/// do not depend on evaluation order or thread count.
McDraws mc_draws(std::uint64_t seed, int sample_index, int n);

/// Load nodes (nonzero S_ref) that generate in the DER scenario.
std::vector<int> der_partition(const Eigen::VectorXcd& S_ref, bool swap_halves);

/// Seeded random half of the load nodes (same size as the swapped half).
std::vector<int> random_der_partition(const Eigen::VectorXcd& S_ref, std::uint64_t seed);

Eigen::VectorXcd mc_injection_positive(const Eigen::VectorXcd& S_ref, const McDraws& d);
Eigen::VectorXcd mc_injection_der(const Eigen::VectorXcd& S_ref,
                                  const std::vector<int>& der_nodes, const McDraws& d);

/// Linearization point of the DER scenario (signed reference vector).
Eigen::VectorXcd der_linearization_reference(const Eigen::VectorXcd& S_ref,
                                             const std::vector<int>& der_nodes);

// --- CSV emission (headers documented in the README) ---

void write_sweep_csv(std::ostream& os, const SweepResult& res);
void write_montecarlo_csv(std::ostream& os, const std::string& feeder,
                          const std::vector<std::pair<std::string, MonteCarloResult>>& rows);

}  // namespace distflow
