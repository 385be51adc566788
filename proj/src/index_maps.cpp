#include "distflow/index_maps.hpp"

#include "distflow/errors.hpp"

namespace distflow {

IndexMaps build_index_maps(const Network& net) {
    net.validate();

    IndexMaps idx;
    idx.nodes_of_bus.resize(net.buses.size());
    idx.node_table.assign(net.buses.size(), {-1, -1, -1});
    idx.branches_of_line.resize(net.lines.size());
    idx.branch_table.assign(net.lines.size(), {-1, -1, -1});

    for (std::size_t b = 0; b < net.buses.size(); ++b) {
        const Bus& bus = net.buses[b];
        for (Phase p : bus.phases) {
            if (bus.kind == BusKind::Slack) {
                idx.slack_table[static_cast<int>(p)] = idx.n_slack;
                idx.slack_node.push_back({static_cast<int>(b), p});
                ++idx.n_slack;
            } else {
                idx.node_table[b][static_cast<int>(p)] = idx.n;
                idx.nodes_of_bus[b].push_back(idx.n);
                idx.node.push_back({static_cast<int>(b), p});
                ++idx.n;
            }
        }
    }

    for (std::size_t l = 0; l < net.lines.size(); ++l) {
        for (Phase p : net.lines[l].phases) {
            idx.branch_table[l][static_cast<int>(p)] = idx.m;
            idx.branches_of_line[l].push_back(idx.m);
            idx.branch.push_back({static_cast<int>(l), p});
            ++idx.m;
        }
    }
    return idx;
}

Eigen::VectorXcd injection_vector(const Network& net, const IndexMaps& idx) {
    Eigen::VectorXcd S = Eigen::VectorXcd::Zero(idx.n);
    for (int i = 0; i < idx.n; ++i) {
        const auto& ref = idx.node[i];
        S(i) = net.buses[ref.bus].injection[static_cast<int>(ref.phase)];
    }
    return S;
}

}  // namespace distflow
