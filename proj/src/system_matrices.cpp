#include "distflow/system_matrices.hpp"

#include <Eigen/LU>

#include "distflow/errors.hpp"
#include "distflow/topology.hpp"

namespace distflow {

namespace {

Eigen::MatrixXcd inverse_checked(const Eigen::MatrixXcd& m, const std::string& what) {
    Eigen::FullPivLU<Eigen::MatrixXcd> lu(m);
    if (!lu.isInvertible()) throw NumericalError(what);
    return lu.inverse();
}

// node/slack lookup: returns (is_slack, index)
std::pair<bool, int> locate(const IndexMaps& idx, const Network& net, int bus, Phase p) {
    if (net.buses[bus].kind == BusKind::Slack) return {true, idx.slack_node_of(p)};
    return {false, idx.node_of(bus, p)};
}

}  // namespace

SystemMatrices assemble_ybus(const Network& net, const IndexMaps& idx) {
    SystemMatrices mats;
    mats.Y_LL = Eigen::MatrixXcd::Zero(idx.n, idx.n);
    mats.Y_LS = Eigen::MatrixXcd::Zero(idx.n, idx.n_slack);
    mats.Y_SL = Eigen::MatrixXcd::Zero(idx.n_slack, idx.n);
    mats.Y_SS = Eigen::MatrixXcd::Zero(idx.n_slack, idx.n_slack);
    mats.has_shunts = net.has_shunts();

    auto add = [&](bool slack_r, int r, bool slack_c, int c, Complex v) {
        if (!slack_r && !slack_c)
            mats.Y_LL(r, c) += v;
        else if (!slack_r && slack_c)
            mats.Y_LS(r, c) += v;
        else if (slack_r && !slack_c)
            mats.Y_SL(r, c) += v;
        else
            mats.Y_SS(r, c) += v;
    };

    for (const Line& l : net.lines) {
        int fb = net.bus_ordinal(l.from);
        int tb = net.bus_ordinal(l.to);
        Eigen::MatrixXcd y = inverse_checked(l.z, "line \"" + l.id + "\" impedance is singular");
        const int d = l.phases.size();
        for (int i = 0; i < d; ++i) {
            Phase pi = l.phases.at(i);
            auto [fs_i, fr_i] = locate(idx, net, fb, pi);
            auto [ts_i, tr_i] = locate(idx, net, tb, pi);
            for (int j = 0; j < d; ++j) {
                Phase pj = l.phases.at(j);
                auto [fs_j, fc_j] = locate(idx, net, fb, pj);
                auto [ts_j, tc_j] = locate(idx, net, tb, pj);
                add(fs_i, fr_i, fs_j, fc_j, y(i, j));
                add(ts_i, tr_i, ts_j, tc_j, y(i, j));
                add(fs_i, fr_i, ts_j, tc_j, -y(i, j));
                add(ts_i, tr_i, fs_j, fc_j, -y(i, j));
                if (l.shunt_from.size() > 0) add(fs_i, fr_i, fs_j, fc_j, l.shunt_from(i, j));
                if (l.shunt_to.size() > 0) add(ts_i, tr_i, ts_j, tc_j, l.shunt_to(i, j));
            }
        }
    }

    mats.V_slack.resize(idx.n_slack);
    for (int s = 0; s < idx.n_slack; ++s) {
        const auto& ref = idx.slack_node[s];
        mats.V_slack(s) = net.slack_voltage[static_cast<int>(ref.phase)];
    }
    return mats;
}

Eigen::VectorXcd open_circuit_voltage(const SystemMatrices& mats) {
    Eigen::FullPivLU<Eigen::MatrixXcd> lu(mats.Y_LL);
    if (!lu.isInvertible())
        throw NumericalError("Y_LL is singular (disconnected PQ island or zero-impedance loop)");
    return lu.solve(-(mats.Y_LS * mats.V_slack));
}

Eigen::MatrixXcd impedance_matrix(const SystemMatrices& mats) {
    Eigen::FullPivLU<Eigen::MatrixXcd> lu(mats.Y_LL);
    if (!lu.isInvertible())
        throw NumericalError("Y_LL is singular (disconnected PQ island or zero-impedance loop)");
    return lu.inverse();
}

SystemMatrices build_system(const Network& net, const IndexMaps& idx) {
    SystemMatrices mats = assemble_ybus(net, idx);
    Eigen::FullPivLU<Eigen::MatrixXcd> lu(mats.Y_LL);
    if (!lu.isInvertible())
        throw NumericalError("Y_LL is singular (disconnected PQ island or zero-impedance loop)");
    mats.Z = lu.inverse();
    mats.E = lu.solve(-(mats.Y_LS * mats.V_slack));
    return mats;
}

namespace {

// resolved tail/head bus ordinal per line under the given options
struct Directions {
    std::vector<int> tail;  // line directed out of this bus (+1 entries)
    std::vector<int> head;  // line directed toward this bus (-1 entries)
};

Directions resolve_directions(const Network& net, const IncidenceOptions& opt) {
    if (!opt.flip.empty() && opt.flip.size() != net.lines.size())
        throw ValidationError("flip vector size does not match line count");
    Directions dir;
    dir.tail.resize(net.lines.size());
    dir.head.resize(net.lines.size());
    SpanningTree tree;
    if (opt.orientation == LineOrientation::TowardSlack) tree = spanning_tree(net);
    for (std::size_t l = 0; l < net.lines.size(); ++l) {
        int fb = net.bus_ordinal(net.lines[l].from);
        int tb = net.bus_ordinal(net.lines[l].to);
        int tail = fb, head = tb;
        if (opt.orientation == LineOrientation::TowardSlack) {
            // child -> parent, pointing at the slack
            if (tree.parent_bus[fb] == tb) {
                tail = fb;
                head = tb;
            } else if (tree.parent_bus[tb] == fb) {
                tail = tb;
                head = fb;
            } else {
                throw TopologyError("line \"" + net.lines[l].id + "\" is not a tree edge");
            }
        }
        if (!opt.flip.empty() && opt.flip[l]) std::swap(tail, head);
        dir.tail[l] = tail;
        dir.head[l] = head;
    }
    return dir;
}

void require_shunt_free(const Network& net) {
    if (net.has_shunts())
        throw ValidationError("network has shunt elements; the incidence matrix encodes series topology only");
}

}  // namespace

Eigen::MatrixXd build_incidence(const Network& net, const IndexMaps& idx,
                                const IncidenceOptions& opt) {
    require_shunt_free(net);
    Directions dir = resolve_directions(net, opt);
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(idx.m, idx.n);
    for (int j = 0; j < idx.m; ++j) {
        const auto& br = idx.branch[j];
        Phase p = br.phase;
        int tail_node = net.buses[dir.tail[br.line]].kind == BusKind::Slack
                            ? -1
                            : idx.node_of(dir.tail[br.line], p);
        int head_node = net.buses[dir.head[br.line]].kind == BusKind::Slack
                            ? -1
                            : idx.node_of(dir.head[br.line], p);
        if (tail_node >= 0) A(j, tail_node) = 1.0;
        if (head_node >= 0) A(j, head_node) = -1.0;
    }
    return A;
}

Eigen::MatrixXd incidence_inverse_closed_form(const Network& net, const IndexMaps& idx,
                                              const IncidenceOptions& opt) {
    require_shunt_free(net);
    if (!is_radial(net))
        throw TopologyError("incidence inverse requires a radial network (square A)");
    Directions dir = resolve_directions(net, opt);
    SpanningTree tree = spanning_tree(net);
    Eigen::MatrixXd Ainv = Eigen::MatrixXd::Zero(idx.n, idx.m);
    for (int i = 0; i < idx.n; ++i) {
        const auto& ref = idx.node[i];
        Phase p = ref.phase;
        // walk the path from bus i up to the slack
        for (int u = ref.bus; tree.parent_bus[u] >= 0; u = tree.parent_bus[u]) {
            int l = tree.parent_line[u];
            if (!net.lines[l].phases.contains(p)) continue;
            int j = idx.branch_of(l, p);
            // walk direction at this edge is u -> parent(u); the line is
            // "along" the path when its tail sits at u
            Ainv(i, j) = (dir.tail[l] == u) ? 1.0 : -1.0;
        }
    }
    return Ainv;
}

Eigen::MatrixXcd branch_admittance(const Network& net, const IndexMaps& idx) {
    Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(idx.m, idx.m);
    for (std::size_t l = 0; l < net.lines.size(); ++l) {
        const Line& line = net.lines[l];
        Eigen::MatrixXcd yb = inverse_checked(line.z, "line \"" + line.id + "\" impedance is singular");
        const int d = line.phases.size();
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
                y(idx.branch_of(static_cast<int>(l), line.phases.at(i)),
                  idx.branch_of(static_cast<int>(l), line.phases.at(j))) = yb(i, j);
    }
    return y;
}

}  // namespace distflow
