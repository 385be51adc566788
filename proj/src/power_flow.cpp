#include "distflow/power_flow.hpp"

#include "distflow/errors.hpp"

namespace distflow {

namespace {

Eigen::VectorXcd picard_step(const SystemMatrices& mats, const Eigen::VectorXcd& S,
                             const Eigen::VectorXcd& V) {
    Eigen::VectorXcd I = S.conjugate().array() / V.conjugate().array();
    return mats.E + mats.Z * I;
}

}  // namespace

PowerFlowSolution fixed_point_solve(const SystemMatrices& mats, const Eigen::VectorXcd& S,
                                    const SolverConfig& cfg) {
    if (mats.E.size() == 0 || mats.Z.size() == 0)
        throw NumericalError("system matrices are missing E or Z; call build_system first");
    if (S.size() != mats.E.size())
        throw ValidationError("injection vector size mismatch");
    if (cfg.tolerance <= 0.0) throw ValidationError("solver tolerance must be positive");

    PowerFlowSolution sol;
    sol.V = cfg.initial.value_or(mats.E);

    for (int it = 1; it <= cfg.max_iterations; ++it) {
        if (sol.V.cwiseAbs().minCoeff() < cfg.voltage_floor) {
            sol.status = SolveStatus::VoltageCollapse;
            sol.converged = false;
            return sol;
        }
        Eigen::VectorXcd W = picard_step(mats, S, sol.V);
        double defect = (W - sol.V).lpNorm<Eigen::Infinity>();
        sol.iterations = it;
        sol.residual = defect;
        if (defect <= cfg.tolerance) {
            // the pre-update iterate provably satisfies the defect bound
            sol.converged = true;
            sol.status = SolveStatus::Converged;
            return sol;
        }
        if (defect > cfg.blowup) {
            sol.V = W;
            sol.status = SolveStatus::Diverged;
            sol.converged = false;
            return sol;
        }
        sol.V = W;
    }
    sol.status = SolveStatus::MaxIterations;
    sol.converged = false;
    return sol;
}

double residual(const SystemMatrices& mats, const Eigen::VectorXcd& S,
                const Eigen::VectorXcd& V) {
    if (V.size() != mats.E.size() || S.size() != V.size())
        throw ValidationError("vector size mismatch");
    for (int i = 0; i < V.size(); ++i)
        if (std::abs(V(i)) == 0.0)
            throw NumericalError("zero-magnitude voltage entry at node " + std::to_string(i));
    return (V - picard_step(mats, S, V)).lpNorm<Eigen::Infinity>();
}

}  // namespace distflow
