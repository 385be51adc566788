#include "distflow/linear_models.hpp"

#include <cmath>

#include "distflow/errors.hpp"

namespace distflow {

namespace {

// alpha^e for e in {0, 1, 2}, alpha = e^{-i 2pi/3}; negative exponents wrap
// via alpha^{-1} = alpha^2
const Complex kAlphaPow[3] = {
    Complex(1.0, 0.0),
    Complex(-0.5, -0.86602540378443864676),
    Complex(-0.5, +0.86602540378443864676),
};

Complex alpha_pow(Phase phi, Phase psi) {
    int e = static_cast<int>(phi) - static_cast<int>(psi);
    return kAlphaPow[((e % 3) + 3) % 3];
}

void guard_nonzero(const Eigen::VectorXcd& v, const char* what) {
    for (int i = 0; i < v.size(); ++i)
        if (std::abs(v(i)) < 1e-12)
            throw NumericalError(std::string(what) + " has a zero-magnitude entry at node " +
                                 std::to_string(i));
}

}  // namespace

LinearVoltageModel build_gldf(const SystemMatrices& mats, const Eigen::VectorXcd& S_star,
                              const Eigen::VectorXcd& V_star) {
    if (mats.E.size() == 0 || mats.Z.size() == 0)
        throw NumericalError("system matrices are missing E or Z; call build_system first");
    if (S_star.size() != mats.E.size() || V_star.size() != mats.E.size())
        throw ValidationError("linearization point size mismatch");
    guard_nonzero(mats.E, "open-circuit voltage E");
    const Eigen::VectorXcd& E = mats.E;

    Eigen::MatrixXcd W = E.asDiagonal() * mats.Z.conjugate() * E.cwiseInverse().asDiagonal();

    LinearVoltageModel mdl;
    mdl.M = 2.0 * W.real();
    mdl.N = -2.0 * W.imag();
    mdl.base = (E.conjugate().asDiagonal() * E).real();
    mdl.S_star = S_star;
    mdl.V_star = V_star;

    Eigen::VectorXd v_star = (V_star.conjugate().asDiagonal() * V_star).real();
    mdl.lambda = v_star - (mdl.base + mdl.M * S_star.real() + mdl.N * S_star.imag());
    return mdl;
}

Eigen::VectorXd eval_squared_voltages(const LinearVoltageModel& mdl, const Eigen::VectorXd& p,
                                      const Eigen::VectorXd& q) {
    if (p.size() != mdl.M.cols() || q.size() != mdl.N.cols())
        throw ValidationError("injection vector size mismatch");
    return mdl.base + mdl.M * p + mdl.N * q + mdl.lambda;
}

LinearVoltageModel build_ldf(const Network& net, const IndexMaps& idx,
                             const SystemMatrices& mats) {
    if (!is_radial(net))
        throw TopologyError("LinDistFlow path sums are undefined on meshed networks");
    if (mats.E.size() == 0)
        throw NumericalError("system matrices are missing E; call build_system first");

    std::vector<std::vector<int>> paths = all_paths_to_slack(net);

    LinearVoltageModel mdl;
    mdl.M = Eigen::MatrixXd::Zero(idx.n, idx.n);
    mdl.N = Eigen::MatrixXd::Zero(idx.n, idx.n);
    mdl.lambda = Eigen::VectorXd::Zero(idx.n);
    mdl.base = (mats.E.conjugate().asDiagonal() * mats.E).real();
    mdl.S_star = Eigen::VectorXcd::Zero(idx.n);
    mdl.V_star = mats.E;

    const int nb = static_cast<int>(net.buses.size());
    for (int bi = 0; bi < nb; ++bi) {
        if (net.buses[bi].kind == BusKind::Slack) continue;
        for (int bj = 0; bj < nb; ++bj) {
            if (net.buses[bj].kind == BusKind::Slack) continue;
            // common slack path: both paths are sorted ascending by construction order;
            // intersect via the smaller one
            const auto& pi = paths[bi];
            const auto& pj = paths[bj];
            for (int l : pi) {
                bool shared = false;
                for (int l2 : pj)
                    if (l2 == l) {
                        shared = true;
                        break;
                    }
                if (!shared) continue;
                const Line& line = net.lines[l];
                for (Phase phi : net.buses[bi].phases) {
                    if (!line.phases.contains(phi)) continue;
                    int row = idx.node_of(bi, phi);
                    for (Phase psi : net.buses[bj].phases) {
                        if (!line.phases.contains(psi)) continue;
                        int col = idx.node_of(bj, psi);
                        Complex term = alpha_pow(phi, psi) *
                                       std::conj(line.z(line.phases.offset_of(phi),
                                                        line.phases.offset_of(psi)));
                        mdl.M(row, col) += 2.0 * term.real();
                        mdl.N(row, col) += -2.0 * term.imag();
                    }
                }
            }
        }
    }
    return mdl;
}

FplModel build_fpl(const SystemMatrices& mats, const Eigen::VectorXcd& S_star,
                   const Eigen::VectorXcd& V_star) {
    if (mats.E.size() == 0 || mats.Z.size() == 0)
        throw NumericalError("system matrices are missing E or Z; call build_system first");
    if (S_star.size() != mats.E.size() || V_star.size() != mats.E.size())
        throw ValidationError("linearization point size mismatch");
    guard_nonzero(V_star, "linearization voltage V*");
    FplModel mdl;
    mdl.E = mats.E;
    mdl.K = mats.Z * V_star.conjugate().cwiseInverse().asDiagonal();
    mdl.S_star = S_star;
    mdl.V_star = V_star;
    return mdl;
}

Eigen::VectorXcd eval_fpl(const FplModel& mdl, const Eigen::VectorXcd& S) {
    if (S.size() != mdl.E.size()) throw ValidationError("injection vector size mismatch");
    return mdl.E + mdl.K * S.conjugate();
}

Magnitudes magnitudes_from_squared(const Eigen::VectorXd& v) {
    Magnitudes out;
    out.value.resize(v.size());
    for (int i = 0; i < v.size(); ++i) {
        if (v(i) < 0.0) {
            out.value(i) = 0.0;
            out.clamped.push_back(i);
        } else {
            out.value(i) = std::sqrt(v(i));
        }
    }
    return out;
}

}  // namespace distflow
