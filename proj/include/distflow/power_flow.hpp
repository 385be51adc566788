#pragma once

#include <limits>
#include <optional>

#include "distflow/system_matrices.hpp"

namespace distflow {

struct SolverConfig {
    double tolerance = 1e-10;   // p.u., on the fixed-point defect
    int max_iterations = 1000;
    /// Iterate magnitudes below this floor abort the solve (collapse guard).
    double voltage_floor = 1e-6;
    /// Defects beyond this bound abort early as divergence.
    double blowup = 1e6;
    /// Starting point; defaults to the open-circuit voltage E.
    std::optional<Eigen::VectorXcd> initial;
};

enum class SolveStatus { Converged, MaxIterations, VoltageCollapse, Diverged };

struct PowerFlowSolution {
    Eigen::VectorXcd V;
    bool converged = false;
    SolveStatus status = SolveStatus::MaxIterations;
    int iterations = 0;
    double residual = std::numeric_limits<double>::infinity();
};

/// Picard iteration V <- E + Z diag(conj(V))^{-1} conj(S), starting at E.
/// Never throws on divergence: the returned solution carries the diagnostics.
PowerFlowSolution fixed_point_solve(const SystemMatrices& mats, const Eigen::VectorXcd& S,
                                    const SolverConfig& cfg = {});

/// Fixed-point defect ||V - E - Z diag(conj(V))^{-1} conj(S)||_inf.
/// Throws NumericalError when V has a zero-magnitude entry.
double residual(const SystemMatrices& mats, const Eigen::VectorXcd& S,
                const Eigen::VectorXcd& V);

}  // namespace distflow
