#include "distflow/random_networks.hpp"

#include <set>
#include <string>

#include "distflow/errors.hpp"

namespace distflow {

namespace {

PhaseSet random_subset(Rng& rng, const PhaseSet& parent) {
    // any nonempty subset of the parent phases
    for (;;) {
        PhaseSet s;
        for (Phase p : parent)
            if (rng.uniform() < 0.6) s.add(p);
        if (!s.empty()) return s;
    }
}

Eigen::MatrixXcd random_z_block(Rng& rng, int d, const RandomNetworkOptions& opt) {
    Eigen::MatrixXcd z(d, d);
    double min_r = opt.r_max, min_x = opt.r_max;
    for (int i = 0; i < d; ++i) {
        double r = rng.uniform(opt.r_min, opt.r_max);
        double x = rng.uniform(opt.r_min, opt.r_max);
        z(i, i) = Complex(r, x);
        min_r = std::min(min_r, r);
        min_x = std::min(min_x, x);
    }
    if (d > 1) {
        // strict diagonal dominance keeps the block invertible
        double cap_r = opt.mutual_fraction * min_r / (d - 1);
        double cap_x = opt.mutual_fraction * min_x / (d - 1);
        for (int i = 0; i < d; ++i)
            for (int j = i + 1; j < d; ++j) {
                Complex m(rng.uniform(0.0, cap_r), rng.uniform(0.0, cap_x));
                z(i, j) = m;
                z(j, i) = m;
            }
    }
    return z;
}

}  // namespace

Network random_radial_network(std::uint64_t seed, const RandomNetworkOptions& opt) {
    Rng rng(seed);
    const int nb = rng.uniform_int(opt.min_buses, opt.max_buses);

    Network net;
    net.name = "random-" + std::to_string(seed);
    net.slack_voltage = balanced_slack_voltage();
    net.base_kva = 1000.0;

    Bus slack;
    slack.id = "b0";
    slack.phases = opt.single_phase ? PhaseSet::parse("a") : PhaseSet::all();
    slack.kind = BusKind::Slack;
    net.buses.push_back(slack);

    for (int b = 1; b <= nb; ++b) {
        int parent = rng.uniform_int(0, b - 1);
        PhaseSet lph = opt.single_phase        ? PhaseSet::parse("a")
                       : opt.multiphase        ? random_subset(rng, net.buses[parent].phases)
                                               : PhaseSet::all();
        Bus bus;
        bus.id = "b" + std::to_string(b);
        bus.phases = lph;  // nested phase sets keep every phase slack-connected
        net.buses.push_back(bus);

        Line line;
        line.id = "l" + std::to_string(b);
        line.from = net.buses[parent].id;
        line.to = bus.id;
        line.phases = lph;
        line.z = random_z_block(rng, lph.size(), opt);
        net.lines.push_back(line);
    }
    net.validate();
    return net;
}

Network add_random_chord(const Network& net, std::uint64_t seed) {
    Rng rng(seed);
    const int nb = static_cast<int>(net.buses.size());
    if (nb < 3) throw TopologyError("need at least 3 buses to add a chord");

    std::set<std::pair<int, int>> existing;
    for (const Line& l : net.lines)
        existing.insert(std::minmax(net.bus_ordinal(l.from), net.bus_ordinal(l.to)));

    for (int attempt = 0; attempt < 1000; ++attempt) {
        int i = rng.uniform_int(0, nb - 1);
        int j = rng.uniform_int(0, nb - 1);
        if (i == j) continue;
        auto key = std::minmax(i, j);
        if (existing.count(key)) continue;
        PhaseSet common = net.buses[i].phases.intersect(net.buses[j].phases);
        if (common.empty()) continue;

        Network out = net;
        out.name = net.name + "-chord";
        Line chord;
        chord.id = "chord";
        chord.from = net.buses[i].id;
        chord.to = net.buses[j].id;
        chord.phases = common;
        RandomNetworkOptions opt;
        Rng zrng(seed ^ 0x5bd1e995u);
        chord.z = [&] {
            Eigen::MatrixXcd z(common.size(), common.size());
            for (int r = 0; r < common.size(); ++r) z(r, r) = Complex(zrng.uniform(0.005, 0.05), zrng.uniform(0.005, 0.05));
            for (int r = 0; r < common.size(); ++r)
                for (int c = r + 1; c < common.size(); ++c) {
                    Complex m(zrng.uniform(0.0, 0.001), zrng.uniform(0.0, 0.001));
                    z(r, c) = m;
                    z(c, r) = m;
                }
            return z;
        }();
        out.lines.push_back(chord);
        out.validate();
        return out;
    }
    throw TopologyError("no feasible chord found");
}

Eigen::VectorXcd random_injection(std::uint64_t seed, int n, double s_max) {
    Rng rng(seed);
    Eigen::VectorXcd S(n);
    for (int i = 0; i < n; ++i) {
        // mostly load, some generation
        double mag = rng.uniform(0.0, s_max);
        double p = -mag * rng.uniform(-0.3, 1.0);
        double q = p * rng.uniform(0.1, 0.6);
        S(i) = Complex(p, q);
        if (std::abs(S(i)) > s_max) S(i) *= s_max / std::abs(S(i));
    }
    return S;
}

}  // namespace distflow
