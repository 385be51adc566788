#pragma once

#include <vector>

#include "distflow/system_matrices.hpp"
#include "distflow/topology.hpp"

namespace distflow {

/// Linear map from injections to squared voltage magnitudes:
///     v = base + M p + N q + lambda,   base = diag(conj(E)) E.
/// M and N depend only on E and Z; lambda pins the model to its
/// linearization point (lambda = 0 for a zero-injection build).
struct LinearVoltageModel {
    Eigen::MatrixXd M;
    Eigen::MatrixXd N;
    Eigen::VectorXd lambda;
    Eigen::VectorXd base;
    Eigen::VectorXcd S_star;
    Eigen::VectorXcd V_star;
};

/// Generalized model around (S*, V*); pass (0, E) for the zero-injection
/// build. Works on radial and meshed networks alike.
LinearVoltageModel build_gldf(const SystemMatrices& mats, const Eigen::VectorXcd& S_star,
                              const Eigen::VectorXcd& V_star);

Eigen::VectorXd eval_squared_voltages(const LinearVoltageModel& mdl,
                                      const Eigen::VectorXd& p, const Eigen::VectorXd& q);

/// Multiphase LinDistFlow: sensitivity matrices from common-path impedance
/// sums with the alpha = e^{-i 2pi/3} phase rotation. Radial networks only.
LinearVoltageModel build_ldf(const Network& net, const IndexMaps& idx,
                             const SystemMatrices& mats);

/// Fixed-point linearization: complex phasor estimate
///     V(S) = E + K conj(S),   K = Z diag(conj(V*))^{-1}.
struct FplModel {
    Eigen::VectorXcd E;
    Eigen::MatrixXcd K;
    Eigen::VectorXcd S_star;
    Eigen::VectorXcd V_star;
};

FplModel build_fpl(const SystemMatrices& mats, const Eigen::VectorXcd& S_star,
                   const Eigen::VectorXcd& V_star);

Eigen::VectorXcd eval_fpl(const FplModel& mdl, const Eigen::VectorXcd& S);

struct Magnitudes {
    Eigen::VectorXd value;
    /// Nodes where a negative squared magnitude was clamped to zero.
    std::vector<int> clamped;
};

/// sqrt with clamp-and-report semantics for negative entries.
Magnitudes magnitudes_from_squared(const Eigen::VectorXd& v);

}  // namespace distflow
