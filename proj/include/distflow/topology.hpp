#pragma once

#include <string>
#include <vector>

#include "distflow/network.hpp"

namespace distflow {

/// Parent pointers of a radial network rooted at the slack bus.
struct SpanningTree {
    std::vector<int> parent_bus;   // by bus ordinal; -1 at the slack
    std::vector<int> parent_line;  // line ordinal towards the slack; -1 at the slack
    std::vector<int> depth;
};

/// True iff the connected network is a tree rooted at the slack
/// (line count equals PQ-bus count). Throws TopologyError when disconnected.
bool is_radial(const Network& net);

/// Tree structure of a radial network; throws TopologyError on meshes.
SpanningTree spanning_tree(const Network& net);

/// Line ordinals of the unique slack-to-bus path, ordered from the slack end
/// outward. Radial networks only.
std::vector<int> path_to_slack(const Network& net, const std::string& bus_id);

/// Intersection of the two slack paths, as sorted line ordinals.
std::vector<int> common_path(const Network& net, const std::string& bus_i,
                             const std::string& bus_j);

/// Slack paths for every bus at once (indexed by bus ordinal, sorted line
/// ordinals). Used by the path-sum builders.
std::vector<std::vector<int>> all_paths_to_slack(const Network& net);

}  // namespace distflow
