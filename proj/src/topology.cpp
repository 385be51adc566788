#include "distflow/topology.hpp"

#include <algorithm>
#include <queue>

#include "distflow/errors.hpp"

namespace distflow {

namespace {

struct Adjacency {
    // per bus: (neighbor bus, line ordinal) in line declaration order
    std::vector<std::vector<std::pair<int, int>>> edges;
};

Adjacency adjacency(const Network& net) {
    Adjacency a;
    a.edges.resize(net.buses.size());
    for (std::size_t l = 0; l < net.lines.size(); ++l) {
        int fi = net.bus_ordinal(net.lines[l].from);
        int ti = net.bus_ordinal(net.lines[l].to);
        a.edges[fi].push_back({ti, static_cast<int>(l)});
        a.edges[ti].push_back({fi, static_cast<int>(l)});
    }
    return a;
}

void check_connected(const Network& net, const Adjacency& a) {
    std::vector<char> seen(net.buses.size(), 0);
    std::queue<int> q;
    int root = net.slack_ordinal();
    if (root < 0) throw ValidationError("network has no slack bus");
    seen[root] = 1;
    q.push(root);
    std::size_t count = 1;
    while (!q.empty()) {
        int u = q.front();
        q.pop();
        for (auto [v, l] : a.edges[u])
            if (!seen[v]) {
                seen[v] = 1;
                ++count;
                q.push(v);
            }
    }
    if (count != net.buses.size()) throw TopologyError("network is disconnected");
}

}  // namespace

bool is_radial(const Network& net) {
    Adjacency a = adjacency(net);
    check_connected(net, a);
    return net.lines.size() + 1 == net.buses.size();
}

SpanningTree spanning_tree(const Network& net) {
    if (!is_radial(net))
        throw TopologyError("network is meshed; slack paths are not unique");
    Adjacency a = adjacency(net);
    SpanningTree t;
    t.parent_bus.assign(net.buses.size(), -1);
    t.parent_line.assign(net.buses.size(), -1);
    t.depth.assign(net.buses.size(), 0);
    std::vector<char> seen(net.buses.size(), 0);
    std::queue<int> q;
    int root = net.slack_ordinal();
    seen[root] = 1;
    q.push(root);
    while (!q.empty()) {
        int u = q.front();
        q.pop();
        for (auto [v, l] : a.edges[u]) {
            if (seen[v]) continue;
            seen[v] = 1;
            t.parent_bus[v] = u;
            t.parent_line[v] = l;
            t.depth[v] = t.depth[u] + 1;
            q.push(v);
        }
    }
    return t;
}

std::vector<int> path_to_slack(const Network& net, const std::string& bus_id) {
    int b = net.bus_ordinal(bus_id);
    if (b < 0) throw ValidationError("unknown bus \"" + bus_id + "\"");
    SpanningTree t = spanning_tree(net);
    std::vector<int> path;
    for (int u = b; t.parent_bus[u] >= 0; u = t.parent_bus[u])
        path.push_back(t.parent_line[u]);
    std::reverse(path.begin(), path.end());  // first edge incident to the slack
    return path;
}

std::vector<std::vector<int>> all_paths_to_slack(const Network& net) {
    SpanningTree t = spanning_tree(net);
    std::vector<std::vector<int>> paths(net.buses.size());
    // buses in BFS depth order so parents are always filled first
    std::vector<int> order(net.buses.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(), [&](int x, int y) { return t.depth[x] < t.depth[y]; });
    for (int u : order) {
        if (t.parent_bus[u] < 0) continue;
        paths[u] = paths[t.parent_bus[u]];
        paths[u].push_back(t.parent_line[u]);
    }
    return paths;
}

std::vector<int> common_path(const Network& net, const std::string& bus_i,
                             const std::string& bus_j) {
    std::vector<int> pi = path_to_slack(net, bus_i);
    std::vector<int> pj = path_to_slack(net, bus_j);
    std::sort(pi.begin(), pi.end());
    std::sort(pj.begin(), pj.end());
    std::vector<int> out;
    std::set_intersection(pi.begin(), pi.end(), pj.begin(), pj.end(), std::back_inserter(out));
    return out;
}

}  // namespace distflow
