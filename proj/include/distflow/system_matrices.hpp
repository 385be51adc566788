#pragma once

#include <cstdint>
#include <vector>

#include "distflow/index_maps.hpp"

namespace distflow {

/// Bus admittance partition, open-circuit voltage and PQ impedance matrix.
/// Built once per network; immutable and shareable afterwards.
struct SystemMatrices {
    Eigen::MatrixXcd Y_LL;  // n x n
    Eigen::MatrixXcd Y_LS;  // n x n_slack
    Eigen::MatrixXcd Y_SL;
    Eigen::MatrixXcd Y_SS;
    Eigen::VectorXcd V_slack;  // per slack node

    Eigen::MatrixXcd Z;  // Y_LL^{-1}; empty until impedance_matrix()
    Eigen::VectorXcd E;  // open-circuit voltage; empty until open_circuit_voltage()

    bool has_shunts = false;
};

/// Scatter-assemble the Y blocks (Z and E left empty).
SystemMatrices assemble_ybus(const Network& net, const IndexMaps& idx);

/// E = -Y_LL^{-1} Y_LS V_S. Throws NumericalError when Y_LL is singular.
Eigen::VectorXcd open_circuit_voltage(const SystemMatrices& mats);

/// Z = Y_LL^{-1} as a dense matrix. Throws NumericalError when singular.
Eigen::MatrixXcd impedance_matrix(const SystemMatrices& mats);

/// assemble_ybus + E + Z in one call.
SystemMatrices build_system(const Network& net, const IndexMaps& idx);

enum class LineOrientation {
    TowardSlack,  // child -> parent; radial networks only
    AsDeclared,   // from -> to
};

struct IncidenceOptions {
    LineOrientation orientation = LineOrientation::TowardSlack;
    /// Per-line ordinal reversal flags; empty means no line is reversed.
    std::vector<std::uint8_t> flip;
};

/// m x n reduced oriented incidence matrix: slack columns eliminated, +1 at
/// the bus a line is directed out of, -1 at the bus it is directed toward,
/// 0 across phases. Requires a shunt-free network.
Eigen::MatrixXd build_incidence(const Network& net, const IndexMaps& idx,
                                const IncidenceOptions& opt = {});

/// Closed-form inverse of the incidence matrix of a radial shunt-free
/// network: entry (node i^phi, branch k^phi) is +1 when line k lies on the
/// slack path of bus i and is directed along the walk from i to the slack,
/// -1 when directed against it, 0 otherwise. Exact integer arithmetic.
Eigen::MatrixXd incidence_inverse_closed_form(const Network& net, const IndexMaps& idx,
                                              const IncidenceOptions& opt = {});

/// Block-diagonal m x m branch admittance (per-line z^{-1} blocks).
Eigen::MatrixXcd branch_admittance(const Network& net, const IndexMaps& idx);

}  // namespace distflow
