#include "distflow/checks.hpp"

#include <cmath>
#include <sstream>

#include "distflow/errors.hpp"

namespace distflow {

namespace {

void require_radial_shunt_free(const Network& net, const char* what) {
    if (net.has_shunts())
        throw ValidationError(std::string(what) + " requires a shunt-free network");
    if (!is_radial(net))
        throw TopologyError(std::string(what) + " requires a radial network");
}

std::string node_label(const Network& net, const IndexMaps& idx, int node) {
    const auto& ref = idx.node[node];
    return net.buses[ref.bus].id + "." + phase_letter(ref.phase);
}

}  // namespace

CheckReport check_common_path(const Network& net, const IndexMaps& idx,
                              const SystemMatrices& mats, double tol) {
    require_radial_shunt_free(net, "common-path check");
    if (mats.Z.size() == 0) throw NumericalError("system matrices are missing Z");

    std::vector<std::vector<int>> paths = all_paths_to_slack(net);

    CheckReport rep;
    rep.name = "common_path";
    rep.pass = true;
    const int nb = static_cast<int>(net.buses.size());
    for (int bi = 0; bi < nb; ++bi) {
        if (net.buses[bi].kind == BusKind::Slack) continue;
        for (int bj = bi; bj < nb; ++bj) {
            if (net.buses[bj].kind == BusKind::Slack) continue;
            // expected block: sum of common-path line impedances restricted to
            // the phase pairs both the line and the buses carry
            Eigen::MatrixXcd want =
                Eigen::MatrixXcd::Zero(net.buses[bi].phases.size(), net.buses[bj].phases.size());
            for (int l : paths[bi]) {
                bool shared = false;
                for (int l2 : paths[bj])
                    if (l2 == l) {
                        shared = true;
                        break;
                    }
                if (!shared) continue;
                const Line& line = net.lines[l];
                for (Phase phi : net.buses[bi].phases) {
                    if (!line.phases.contains(phi)) continue;
                    for (Phase psi : net.buses[bj].phases) {
                        if (!line.phases.contains(psi)) continue;
                        want(net.buses[bi].phases.offset_of(phi), net.buses[bj].phases.offset_of(psi)) +=
                            line.z(line.phases.offset_of(phi), line.phases.offset_of(psi));
                    }
                }
            }
            for (Phase phi : net.buses[bi].phases) {
                for (Phase psi : net.buses[bj].phases) {
                    int r = idx.node_of(bi, phi);
                    int c = idx.node_of(bj, psi);
                    double dev = std::abs(mats.Z(r, c) - want(net.buses[bi].phases.offset_of(phi),
                                                              net.buses[bj].phases.offset_of(psi)));
                    if (dev > rep.worst) {
                        rep.worst = dev;
                        if (dev > tol) {
                            rep.pass = false;
                            std::ostringstream os;
                            os << "Z(" << node_label(net, idx, r) << ", " << node_label(net, idx, c)
                               << ") deviates from the common-path sum by " << dev;
                            rep.witness = CheckWitness{os.str(), dev, tol};
                        }
                    }
                }
            }
        }
    }
    if (rep.pass) rep.witness.reset();
    return rep;
}

CheckReport check_dominance(const Network& net, const IndexMaps& idx,
                            const SystemMatrices& mats,
                            const std::vector<Eigen::VectorXcd>& samples,
                            const DominanceOptions& opt) {
    if (!is_radial(net)) throw TopologyError("dominance check requires a radial network");
    if (mats.E.size() == 0 || mats.Z.size() == 0)
        throw NumericalError("system matrices are missing E or Z");

    LinearVoltageModel gldf0 = build_gldf(mats, Eigen::VectorXcd::Zero(idx.n), mats.E);
    const LinearVoltageModel& gldf = opt.gldf_override ? *opt.gldf_override : gldf0;
    FplModel fpl0 = build_fpl(mats, Eigen::VectorXcd::Zero(idx.n), mats.E);

    CheckReport rep;
    rep.name = "dominance";
    rep.pass = true;
    rep.note = "checked against the Picard fixed point from E only";

    for (std::size_t s = 0; s < samples.size(); ++s) {
        const Eigen::VectorXcd& S = samples[s];
        PowerFlowSolution sol = fixed_point_solve(mats, S, opt.solver);
        if (!sol.converged) {
            ++rep.skipped;
            continue;
        }
        Eigen::VectorXd v = sol.V.cwiseAbs2();
        Eigen::VectorXd vhat = eval_squared_voltages(gldf, S.real(), S.imag());
        Eigen::VectorXd vtilde = eval_fpl(fpl0, S).cwiseAbs2();

        for (int i = 0; i < idx.n; ++i) {
            struct Term {
                double excess;
                const char* what;
                double bound;
            } terms[3] = {
                {v(i) - vhat(i), "vhat >= v violated", opt.tol},
                {vhat(i) - vtilde(i), "vtilde >= vhat violated", opt.tol_identity},
                {std::abs(vhat(i) - v(i)) - std::abs(vtilde(i) - v(i)), "|vhat-v| <= |vtilde-v| violated", opt.tol},
            };
            for (const auto& t : terms) {
                if (t.excess > rep.worst) rep.worst = t.excess;
                if (t.excess > t.bound && rep.pass) {
                    rep.pass = false;
                    std::ostringstream os;
                    os << t.what << " at node " << node_label(net, idx, i) << " (sample " << s
                       << "): excess " << t.excess;
                    rep.witness = CheckWitness{os.str(), t.excess, t.bound};
                }
            }
        }
    }
    rep.worst = std::max(rep.worst, 0.0);
    if (rep.pass) rep.witness.reset();
    return rep;
}

CheckReport check_incidence_identities(const Network& net, const IndexMaps& idx, double tol) {
    require_radial_shunt_free(net, "incidence identity check");

    Eigen::MatrixXd A = build_incidence(net, idx);
    Eigen::MatrixXd Ainv = incidence_inverse_closed_form(net, idx);
    Eigen::MatrixXcd y = branch_admittance(net, idx);
    SystemMatrices mats = build_system(net, idx);

    CheckReport rep;
    rep.name = "incidence_identities";
    rep.pass = true;

    // A * A^{-1} is an integer product; demand exact identity
    Eigen::MatrixXd prod = A * Ainv;
    double dev_exact = (prod - Eigen::MatrixXd::Identity(idx.m, idx.n)).lpNorm<Eigen::Infinity>();
    if (dev_exact != 0.0) {
        rep.pass = false;
        rep.worst = dev_exact;
        rep.witness = CheckWitness{"A * A^{-1} differs from the identity", dev_exact, 0.0};
        return rep;
    }

    double dev_y = (mats.Y_LL - A.transpose() * y * A).cwiseAbs().maxCoeff();
    rep.worst = std::max(rep.worst, dev_y);
    if (dev_y > tol) {
        rep.pass = false;
        rep.witness = CheckWitness{"Y_LL deviates from A^T y A", dev_y, tol};
        return rep;
    }

    Eigen::MatrixXcd zsum = Eigen::MatrixXcd::Zero(idx.n, idx.n);
    for (std::size_t l = 0; l < net.lines.size(); ++l) {
        const auto& cols = idx.branches_of_line[l];
        Eigen::MatrixXd Acols(idx.n, cols.size());
        for (std::size_t c = 0; c < cols.size(); ++c) Acols.col(c) = Ainv.col(cols[c]);
        zsum += Acols * net.lines[l].z * Acols.transpose();
    }
    double dev_z = (mats.Z - zsum).cwiseAbs().maxCoeff();
    rep.worst = std::max(rep.worst, dev_z);
    if (dev_z > tol) {
        rep.pass = false;
        rep.witness = CheckWitness{"Z deviates from sum_k (A^{-1})_k z_k (A^{-1})_k^T", dev_z, tol};
    }
    return rep;
}

}  // namespace distflow
