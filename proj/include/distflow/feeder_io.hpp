#pragma once

#include <array>
#include <string>
#include <vector>

#include "distflow/network.hpp"

namespace distflow {

/// Parsed feeder description. Impedances are carried in the unit the file
/// used (ohms or p.u.); conversion happens in to_network.
struct FeederZone {
    std::string name;
    double base_kv = 0.0;
};

struct FeederSlackRecord {
    std::string bus;
    std::vector<double> magnitude_pu;  // aligned with the slack bus phases
    std::vector<double> angle_deg;
};

struct FeederBusRecord {
    std::string id;
    PhaseSet phases;
    std::string zone;                    // empty = first zone
    std::vector<double> load_kw;         // aligned with phases; empty = no load
    std::vector<double> load_kvar;
};

struct FeederLineRecord {
    std::string id;
    std::string from;
    std::string to;
    PhaseSet phases;
    Eigen::MatrixXcd z;    // |phases| x |phases|
    bool z_in_ohms = true;  // false: already p.u.
    Eigen::MatrixXcd shunt_from_s;  // siemens; 0x0 when absent
    Eigen::MatrixXcd shunt_to_s;
};

struct FeederFile {
    std::string name;
    std::string description;
    double base_kva = 0.0;
    double load_scale = 1.0;
    std::vector<FeederZone> zones;
    FeederSlackRecord slack;
    std::vector<FeederBusRecord> buses;
    std::vector<FeederLineRecord> lines;
};

/// Parse and structurally validate feeder text (JSON syntax). Throws
/// ParseError with 1-based line/column on syntax errors, ValidationError on
/// semantic ones (dangling references, non-square blocks, ...).
FeederFile parse_feeder(const std::string& text);

/// Serialize back to canonical feeder text.
std::string emit_feeder(const FeederFile& f);

/// Per-unit conversion: z_pu = z_ohm * base_kva / (1000 * base_kv^2) with the
/// zone taken from the line's endpoints; loads become negative injections
/// scaled by load_scale. Throws on zero bases and singular blocks.
Network to_network(const FeederFile& f);

/// Inverse conversion for single-zone networks (used for round trips).
FeederFile feeder_from_network(const Network& net, double base_kva, double base_kv,
                               const std::string& name = "");

/// Bundled simplified datasets: "ieee13", "ieee37", "ieee123".
std::vector<std::string> bundled_feeder_names();
const std::string& bundled_feeder_text(const std::string& name);
Network load_bundled(const std::string& name);

}  // namespace distflow
