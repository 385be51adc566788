#pragma once

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <string>
#include <vector>

#include "distflow/phase.hpp"

namespace distflow {

using Complex = std::complex<double>;

enum class BusKind { Slack, Pq };

struct Bus {
    std::string id;
    PhaseSet phases;
    BusKind kind = BusKind::Pq;
    /// Per-phase complex power injection in p.u., generator convention
    /// (consumption is negative). Indexed by Phase; absent phases stay zero.
    std::array<Complex, 3> injection{};
};

struct Line {
    std::string id;
    std::string from;
    std::string to;
    PhaseSet phases;
    /// |phases| x |phases| series impedance block, p.u., ordered a < b < c.
    Eigen::MatrixXcd z;
    /// Optional terminal shunt admittance blocks, p.u.; 0x0 when absent.
    Eigen::MatrixXcd shunt_from;
    Eigen::MatrixXcd shunt_to;

    bool has_shunt() const { return shunt_from.size() > 0 || shunt_to.size() > 0; }
};

/// In-memory multiphase network. Immutable by convention once validated;
/// safe to share read-only across threads.
struct Network {
    std::string name;
    std::vector<Bus> buses;
    std::vector<Line> lines;
    /// Slack phasor per phase slot (entries for phases the slack lacks are
    /// ignored).
    std::array<Complex, 3> slack_voltage{};
    double base_kva = 0.0;  // informational only; quantities are p.u.

    int slack_ordinal() const;
    int bus_ordinal(const std::string& id) const;  // -1 when unknown
    const Bus& bus(const std::string& id) const;

    bool has_shunts() const;
    /// Copy with every line terminal shunt removed (the shunt-free reduction).
    Network without_shunts() const;

    /// Checks all structural invariants; throws ValidationError on failure.
    void validate() const;
};

/// Balanced 1 p.u. positive-sequence phasors: 1∠0, 1∠-120, 1∠+120 degrees.
std::array<Complex, 3> balanced_slack_voltage();

}  // namespace distflow
