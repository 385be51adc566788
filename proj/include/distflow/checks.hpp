#pragma once

#include <optional>
#include <string>
#include <vector>

#include "distflow/linear_models.hpp"
#include "distflow/power_flow.hpp"

namespace distflow {

struct CheckWitness {
    std::string description;  // enough to reproduce the violation in isolation
    double value = 0.0;
    double bound = 0.0;
};

struct CheckReport {
    std::string name;
    bool pass = false;
    double worst = 0.0;  // worst-case deviation, nonnegative
    std::optional<CheckWitness> witness;
    int skipped = 0;  // non-converged samples
    std::string note;
};

/// Z(I_i, I_j) equals the summed impedance of the common slack path, for all
/// PQ bus pairs. Requires a radial shunt-free network.
CheckReport check_common_path(const Network& net, const IndexMaps& idx,
                              const SystemMatrices& mats, double tol = 1e-9);

struct DominanceOptions {
    double tol = 1e-7;            // over-estimate and comparison inequalities
    double tol_identity = 1e-12;  // algebraic vtilde >= vhat inequality
    SolverConfig solver{};
    /// Test seam: replaces the internally built zero-injection model.
    const LinearVoltageModel* gldf_override = nullptr;
};

/// For each converged sample: vhat >= v - tol, vtilde >= vhat - tol_identity,
/// |vhat - v| <= |vtilde - v| + tol per node, with both linear models built
/// at zero injection. Non-converged samples are skipped and counted.
CheckReport check_dominance(const Network& net, const IndexMaps& idx,
                            const SystemMatrices& mats,
                            const std::vector<Eigen::VectorXcd>& samples,
                            const DominanceOptions& opt = {});

/// A A^{-1} = I exactly, ||Y_LL - A^T y A||_inf <= tol and
/// ||Z - sum_k (A^{-1})_{J_k} z_k (A^{-1})_{J_k}^T||_inf <= tol.
/// Requires a radial shunt-free network.
CheckReport check_incidence_identities(const Network& net, const IndexMaps& idx,
                                       double tol = 1e-9);

}  // namespace distflow
