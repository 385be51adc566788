#include "distflow/network.hpp"

#include <cmath>
#include <numbers>
#include <queue>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "distflow/errors.hpp"

namespace distflow {

std::array<Complex, 3> balanced_slack_voltage() {
    const double th = 2.0 * std::numbers::pi / 3.0;
    return {Complex(1.0, 0.0), std::polar(1.0, -th), std::polar(1.0, th)};
}

int Network::slack_ordinal() const {
    for (std::size_t i = 0; i < buses.size(); ++i)
        if (buses[i].kind == BusKind::Slack) return static_cast<int>(i);
    return -1;
}

int Network::bus_ordinal(const std::string& id) const {
    for (std::size_t i = 0; i < buses.size(); ++i)
        if (buses[i].id == id) return static_cast<int>(i);
    return -1;
}

const Bus& Network::bus(const std::string& id) const {
    int i = bus_ordinal(id);
    if (i < 0) throw ValidationError("unknown bus \"" + id + "\"");
    return buses[i];
}

bool Network::has_shunts() const {
    for (const auto& l : lines)
        if (l.has_shunt()) return true;
    return false;
}

Network Network::without_shunts() const {
    Network out = *this;
    for (auto& l : out.lines) {
        l.shunt_from.resize(0, 0);
        l.shunt_to.resize(0, 0);
    }
    return out;
}

namespace {

bool invertible(const Eigen::MatrixXcd& m) {
    return Eigen::FullPivLU<Eigen::MatrixXcd>(m).isInvertible();
}

}  // namespace

void Network::validate() const {
    if (buses.empty()) throw ValidationError("network has no buses");

    std::unordered_map<std::string, int> by_id;
    int slack_count = 0;
    for (std::size_t i = 0; i < buses.size(); ++i) {
        const Bus& b = buses[i];
        if (b.id.empty()) throw ValidationError("bus with empty id");
        if (!by_id.emplace(b.id, static_cast<int>(i)).second)
            throw ValidationError("duplicate bus id \"" + b.id + "\"");
        if (b.phases.empty()) throw ValidationError("bus \"" + b.id + "\" has no phases");
        if (b.kind == BusKind::Slack) {
            ++slack_count;
            for (Phase p : b.phases) {
                if (b.injection[static_cast<int>(p)] != Complex(0.0, 0.0))
                    throw ValidationError("slack bus \"" + b.id + "\" must carry no load");
                if (std::abs(slack_voltage[static_cast<int>(p)]) == 0.0)
                    throw ValidationError("slack voltage missing for phase " +
                                          std::string(1, phase_letter(p)));
            }
        }
        for (Phase p : kPhases) {
            if (!b.phases.contains(p) && b.injection[static_cast<int>(p)] != Complex(0.0, 0.0))
                throw ValidationError("bus \"" + b.id + "\" has load on absent phase " +
                                      std::string(1, phase_letter(p)));
        }
    }
    if (slack_count != 1)
        throw ValidationError("network must define exactly one slack bus, found " +
                              std::to_string(slack_count));

    std::unordered_set<std::string> line_ids;
    std::set<std::pair<int, int>> pairs;
    for (const Line& l : lines) {
        if (!line_ids.insert(l.id).second)
            throw ValidationError("duplicate line id \"" + l.id + "\"");
        int fi = bus_ordinal(l.from);
        int ti = bus_ordinal(l.to);
        if (fi < 0) throw ValidationError("line \"" + l.id + "\" references unknown bus \"" + l.from + "\"");
        if (ti < 0) throw ValidationError("line \"" + l.id + "\" references unknown bus \"" + l.to + "\"");
        if (fi == ti) throw ValidationError("line \"" + l.id + "\" is a self-loop");
        auto key = std::minmax(fi, ti);
        if (!pairs.insert(key).second)
            throw ValidationError("parallel line \"" + l.id + "\" between \"" + l.from +
                                  "\" and \"" + l.to + "\"; merge before loading");
        if (l.phases.empty()) throw ValidationError("line \"" + l.id + "\" has no phases");
        if (!l.phases.is_subset_of(buses[fi].phases) || !l.phases.is_subset_of(buses[ti].phases))
            throw ValidationError("line \"" + l.id + "\" carries phases \"" + l.phases.to_string() +
                                  "\" not present at both endpoints");
        const int d = l.phases.size();
        if (l.z.rows() != d || l.z.cols() != d)
            throw ValidationError("line \"" + l.id + "\" impedance block is " +
                                  std::to_string(l.z.rows()) + "x" + std::to_string(l.z.cols()) +
                                  ", expected " + std::to_string(d) + "x" + std::to_string(d));
        if (!l.z.isApprox(l.z.transpose(), 1e-12))
            throw ValidationError("line \"" + l.id + "\" impedance block is not symmetric");
        for (int i = 0; i < d; ++i) {
            if (l.z(i, i).real() < 0.0 || l.z(i, i).imag() < 0.0)
                throw ValidationError("line \"" + l.id + "\" has negative diagonal r or x");
        }
        if (!invertible(l.z))
            throw ValidationError("line \"" + l.id + "\" impedance block is singular");
        for (const auto* sh : {&l.shunt_from, &l.shunt_to}) {
            if (sh->size() > 0 && (sh->rows() != d || sh->cols() != d))
                throw ValidationError("line \"" + l.id + "\" shunt block dimension mismatch");
        }
    }

    // bus-level connectivity
    const int nb = static_cast<int>(buses.size());
    const int slack = slack_ordinal();
    if (slack < 0) throw ValidationError("network has no slack bus");
    std::vector<std::vector<int>> adj(nb);
    for (const Line& l : lines) {
        int fi = bus_ordinal(l.from), ti = bus_ordinal(l.to);
        adj[fi].push_back(ti);
        adj[ti].push_back(fi);
    }
    {
        std::vector<char> seen(nb, 0);
        std::queue<int> q;
        q.push(slack);
        seen[slack] = 1;
        int count = 1;
        while (!q.empty()) {
            int u = q.front();
            q.pop();
            for (int v : adj[u])
                if (!seen[v]) {
                    seen[v] = 1;
                    ++count;
                    q.push(v);
                }
        }
        if (count != nb) throw ValidationError("network is disconnected");
    }

    // every phase of every bus must reach the slack through lines carrying
    // that phase, otherwise Y_LL and the per-phase incidence trees degenerate
    for (Phase p : kPhases) {
        std::vector<char> seen(nb, 0);
        std::queue<int> q;
        if (buses[slack].phases.contains(p)) {
            seen[slack] = 1;
            q.push(slack);
        }
        while (!q.empty()) {
            int u = q.front();
            q.pop();
            for (const Line& l : lines) {
                if (!l.phases.contains(p)) continue;
                int fi = bus_ordinal(l.from), ti = bus_ordinal(l.to);
                int other = (fi == u) ? ti : (ti == u ? fi : -1);
                if (other >= 0 && !seen[other]) {
                    seen[other] = 1;
                    q.push(other);
                }
            }
        }
        for (int i = 0; i < nb; ++i) {
            if (buses[i].phases.contains(p) && !seen[i])
                throw ValidationError("phase " + std::string(1, phase_letter(p)) + " of bus \"" +
                                      buses[i].id + "\" has no same-phase path to the slack");
        }
    }
}

}  // namespace distflow
