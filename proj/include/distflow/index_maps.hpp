#pragma once

#include <array>
#include <vector>

#include "distflow/network.hpp"

namespace distflow {

/// Deterministic node/branch numbering: buses in declaration order, phases
/// a < b < c within a bus; same for lines. A node is one phase of a PQ bus,
/// a branch one phase of a line. Slack phases are indexed separately.
struct IndexMaps {
    struct NodeRef {
        int bus;  // ordinal into Network::buses
        Phase phase;
    };
    struct BranchRef {
        int line;  // ordinal into Network::lines
        Phase phase;
    };

    int n = 0;        // PQ nodes
    int m = 0;        // branches
    int n_slack = 0;  // slack nodes

    std::vector<NodeRef> node;        // size n
    std::vector<BranchRef> branch;    // size m
    std::vector<NodeRef> slack_node;  // size n_slack

    std::vector<std::vector<int>> nodes_of_bus;      // by bus ordinal; empty for slack
    std::vector<std::vector<int>> branches_of_line;  // by line ordinal

    int node_of(int bus_ordinal, Phase p) const { return node_table[bus_ordinal][static_cast<int>(p)]; }
    int branch_of(int line_ordinal, Phase p) const { return branch_table[line_ordinal][static_cast<int>(p)]; }
    int slack_node_of(Phase p) const { return slack_table[static_cast<int>(p)]; }

    // lookup tables, -1 for absent entries
    std::vector<std::array<int, 3>> node_table;
    std::vector<std::array<int, 3>> branch_table;
    std::array<int, 3> slack_table{-1, -1, -1};
};

IndexMaps build_index_maps(const Network& net);

/// Node-indexed injection vector assembled from the bus loads.
Eigen::VectorXcd injection_vector(const Network& net, const IndexMaps& idx);

}  // namespace distflow
