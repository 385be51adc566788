#include "distflow/feeder_io.hpp"

#include <cmath>
#include <numbers>
#include <unordered_map>
#include <unordered_set>

#include "distflow/errors.hpp"
#include "distflow/topology.hpp"
#include "json.hpp"

namespace distflow {

namespace {

using nlohmann::ordered_json;

std::pair<int, int> line_column(const std::string& text, std::size_t byte) {
    int line = 1, col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

const ordered_json& need(const ordered_json& j, const char* key, const std::string& where) {
    auto it = j.find(key);
    if (it == j.end())
        throw ValidationError("feeder: missing key \"" + std::string(key) + "\" in " + where);
    return *it;
}

Eigen::MatrixXcd parse_block(const ordered_json& j, int dim, const std::string& where) {
    if (!j.is_array() || static_cast<int>(j.size()) != dim)
        throw ValidationError("feeder: " + where + " must be a " + std::to_string(dim) + "x" +
                              std::to_string(dim) + " matrix of [re, im] pairs");
    Eigen::MatrixXcd m(dim, dim);
    for (int r = 0; r < dim; ++r) {
        const auto& row = j[r];
        if (!row.is_array() || static_cast<int>(row.size()) != dim)
            throw ValidationError("feeder: non-square block in " + where);
        for (int c = 0; c < dim; ++c) {
            const auto& e = row[c];
            if (!e.is_array() || e.size() != 2)
                throw ValidationError("feeder: entry in " + where + " is not an [re, im] pair");
            m(r, c) = Complex(e[0].get<double>(), e[1].get<double>());
        }
    }
    return m;
}

ordered_json emit_block(const Eigen::MatrixXcd& m) {
    ordered_json rows = ordered_json::array();
    for (int r = 0; r < m.rows(); ++r) {
        ordered_json row = ordered_json::array();
        for (int c = 0; c < m.cols(); ++c)
            row.push_back(ordered_json::array({m(r, c).real(), m(r, c).imag()}));
        rows.push_back(row);
    }
    return rows;
}

std::vector<double> parse_numbers(const ordered_json& j, int expect, const std::string& where) {
    if (!j.is_array() || static_cast<int>(j.size()) != expect)
        throw ValidationError("feeder: " + where + " must list " + std::to_string(expect) +
                              " numbers (one per phase)");
    std::vector<double> out;
    for (const auto& e : j) out.push_back(e.get<double>());
    return out;
}

}  // namespace

FeederFile parse_feeder(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        auto [line, col] = line_column(text, e.byte > 0 ? e.byte - 1 : 0);
        throw ParseError("feeder syntax error at line " + std::to_string(line) + ", column " +
                             std::to_string(col) + ": " + e.what(),
                         line, col);
    }
    if (!j.is_object()) throw ValidationError("feeder: top level must be an object");

    FeederFile f;
    f.name = j.value("name", "");
    f.description = j.value("description", "");
    f.base_kva = need(j, "base_kva", "top level").get<double>();
    f.load_scale = j.value("load_scale", 1.0);

    for (const auto& z : need(j, "zones", "top level")) {
        FeederZone zone;
        zone.name = need(z, "name", "zones").get<std::string>();
        zone.base_kv = need(z, "base_kv", "zone \"" + zone.name + "\"").get<double>();
        f.zones.push_back(zone);
    }
    if (f.zones.empty()) throw ValidationError("feeder: at least one zone is required");

    std::unordered_map<std::string, PhaseSet> bus_phases;
    for (const auto& b : need(j, "buses", "top level")) {
        FeederBusRecord rec;
        rec.id = need(b, "id", "buses").get<std::string>();
        rec.phases = PhaseSet::parse(need(b, "phases", "bus \"" + rec.id + "\"").get<std::string>());
        rec.zone = b.value("zone", f.zones.front().name);
        if (b.contains("load_kw") || b.contains("load_kvar")) {
            rec.load_kw = parse_numbers(need(b, "load_kw", "bus \"" + rec.id + "\""),
                                        rec.phases.size(), "bus \"" + rec.id + "\" load_kw");
            rec.load_kvar = parse_numbers(need(b, "load_kvar", "bus \"" + rec.id + "\""),
                                          rec.phases.size(), "bus \"" + rec.id + "\" load_kvar");
        }
        if (!bus_phases.emplace(rec.id, rec.phases).second)
            throw ValidationError("feeder: duplicate bus id \"" + rec.id + "\"");
        bool zone_known = false;
        for (const auto& z : f.zones) zone_known |= (z.name == rec.zone);
        if (!zone_known)
            throw ValidationError("feeder: bus \"" + rec.id + "\" references unknown zone \"" +
                                  rec.zone + "\"");
        f.buses.push_back(rec);
    }

    std::unordered_set<std::string> line_ids;
    for (const auto& l : need(j, "lines", "top level")) {
        FeederLineRecord rec;
        rec.id = need(l, "id", "lines").get<std::string>();
        if (!line_ids.insert(rec.id).second)
            throw ValidationError("feeder: duplicate line id \"" + rec.id + "\"");
        rec.from = need(l, "from", "line \"" + rec.id + "\"").get<std::string>();
        rec.to = need(l, "to", "line \"" + rec.id + "\"").get<std::string>();
        for (const auto& end : {rec.from, rec.to})
            if (!bus_phases.count(end))
                throw ValidationError("feeder: line \"" + rec.id + "\" references undefined bus \"" +
                                      end + "\"");
        rec.phases = PhaseSet::parse(need(l, "phases", "line \"" + rec.id + "\"").get<std::string>());
        const int d = rec.phases.size();
        if (l.contains("z_ohm") && l.contains("z_pu"))
            throw ValidationError("feeder: line \"" + rec.id + "\" must give z_ohm or z_pu, not both");
        if (l.contains("z_ohm")) {
            rec.z = parse_block(l["z_ohm"], d, "line \"" + rec.id + "\" z_ohm");
            rec.z_in_ohms = true;
        } else if (l.contains("z_pu")) {
            rec.z = parse_block(l["z_pu"], d, "line \"" + rec.id + "\" z_pu");
            rec.z_in_ohms = false;
        } else {
            throw ValidationError("feeder: line \"" + rec.id + "\" is missing z_ohm or z_pu");
        }
        if (l.contains("shunt_from_s"))
            rec.shunt_from_s = parse_block(l["shunt_from_s"], d, "line \"" + rec.id + "\" shunt_from_s");
        if (l.contains("shunt_to_s"))
            rec.shunt_to_s = parse_block(l["shunt_to_s"], d, "line \"" + rec.id + "\" shunt_to_s");
        f.lines.push_back(rec);
    }

    const auto& s = need(j, "slack", "top level");
    f.slack.bus = need(s, "bus", "slack").get<std::string>();
    auto it = bus_phases.find(f.slack.bus);
    if (it == bus_phases.end())
        throw ValidationError("feeder: slack references undefined bus \"" + f.slack.bus + "\"");
    int nph = it->second.size();
    f.slack.magnitude_pu = parse_numbers(need(s, "magnitude_pu", "slack"), nph, "slack magnitude_pu");
    f.slack.angle_deg = parse_numbers(need(s, "angle_deg", "slack"), nph, "slack angle_deg");

    return f;
}

std::string emit_feeder(const FeederFile& f) {
    ordered_json j;
    j["name"] = f.name;
    if (!f.description.empty()) j["description"] = f.description;
    j["base_kva"] = f.base_kva;
    j["zones"] = ordered_json::array();
    for (const auto& z : f.zones) j["zones"].push_back({{"name", z.name}, {"base_kv", z.base_kv}});
    j["load_scale"] = f.load_scale;
    j["slack"] = {{"bus", f.slack.bus},
                  {"magnitude_pu", f.slack.magnitude_pu},
                  {"angle_deg", f.slack.angle_deg}};
    j["buses"] = ordered_json::array();
    for (const auto& b : f.buses) {
        ordered_json rec{{"id", b.id}, {"phases", b.phases.to_string()}};
        if (!b.zone.empty()) rec["zone"] = b.zone;
        if (!b.load_kw.empty()) {
            rec["load_kw"] = b.load_kw;
            rec["load_kvar"] = b.load_kvar;
        }
        j["buses"].push_back(rec);
    }
    j["lines"] = ordered_json::array();
    for (const auto& l : f.lines) {
        ordered_json rec{{"id", l.id}, {"from", l.from}, {"to", l.to}, {"phases", l.phases.to_string()}};
        rec[l.z_in_ohms ? "z_ohm" : "z_pu"] = emit_block(l.z);
        if (l.shunt_from_s.size() > 0) rec["shunt_from_s"] = emit_block(l.shunt_from_s);
        if (l.shunt_to_s.size() > 0) rec["shunt_to_s"] = emit_block(l.shunt_to_s);
        j["lines"].push_back(rec);
    }
    return j.dump(1) + "\n";
}

Network to_network(const FeederFile& f) {
    if (f.base_kva <= 0.0) throw ValidationError("feeder: base_kva must be positive");
    std::unordered_map<std::string, double> zone_kv;
    for (const auto& z : f.zones) {
        if (z.base_kv <= 0.0)
            throw ValidationError("feeder: zone \"" + z.name + "\" base_kv must be positive");
        zone_kv[z.name] = z.base_kv;
    }

    Network net;
    net.name = f.name;
    net.base_kva = f.base_kva;

    std::unordered_map<std::string, std::string> bus_zone;
    for (const auto& b : f.buses) {
        Bus bus;
        bus.id = b.id;
        bus.phases = b.phases;
        bus.kind = (b.id == f.slack.bus) ? BusKind::Slack : BusKind::Pq;
        if (!b.load_kw.empty()) {
            for (int i = 0; i < b.phases.size(); ++i) {
                // consumption becomes a negative injection
                Complex s(-b.load_kw[i] * f.load_scale / f.base_kva,
                          -b.load_kvar[i] * f.load_scale / f.base_kva);
                bus.injection[static_cast<int>(b.phases.at(i))] = s;
            }
        }
        bus_zone[b.id] = b.zone.empty() ? f.zones.front().name : b.zone;
        net.buses.push_back(bus);
    }

    for (const auto& l : f.lines) {
        Line line;
        line.id = l.id;
        line.from = l.from;
        line.to = l.to;
        line.phases = l.phases;
        if (l.z_in_ohms) {
            const std::string& zf = bus_zone.at(l.from);
            if (zf != bus_zone.at(l.to))
                throw ValidationError("feeder: line \"" + l.id +
                                      "\" in ohms bridges zones; give z_pu instead");
            double base_kv = zone_kv.at(zf);
            double to_pu = f.base_kva / (1000.0 * base_kv * base_kv);  // 1/Z_base
            line.z = l.z * to_pu;
            double z_base = 1.0 / to_pu;
            if (l.shunt_from_s.size() > 0) line.shunt_from = l.shunt_from_s * z_base;
            if (l.shunt_to_s.size() > 0) line.shunt_to = l.shunt_to_s * z_base;
        } else {
            line.z = l.z;
            // shunts of p.u. lines are taken as p.u. as well
            if (l.shunt_from_s.size() > 0) line.shunt_from = l.shunt_from_s;
            if (l.shunt_to_s.size() > 0) line.shunt_to = l.shunt_to_s;
        }
        net.lines.push_back(line);
    }

    const Bus& slack = net.bus(f.slack.bus);
    for (int i = 0; i < slack.phases.size(); ++i) {
        double ang = f.slack.angle_deg[i] * std::numbers::pi / 180.0;
        net.slack_voltage[static_cast<int>(slack.phases.at(i))] =
            std::polar(f.slack.magnitude_pu[i], ang);
    }

    net.validate();
    return net;
}

FeederFile feeder_from_network(const Network& net, double base_kva, double base_kv,
                               const std::string& name) {
    if (base_kva <= 0.0 || base_kv <= 0.0) throw ValidationError("bases must be positive");
    FeederFile f;
    f.name = name.empty() ? net.name : name;
    f.base_kva = base_kva;
    f.zones.push_back({"mv", base_kv});
    double z_base = 1000.0 * base_kv * base_kv / base_kva;

    const Bus& slack = net.buses[net.slack_ordinal()];
    f.slack.bus = slack.id;
    for (Phase p : slack.phases) {
        Complex v = net.slack_voltage[static_cast<int>(p)];
        f.slack.magnitude_pu.push_back(std::abs(v));
        f.slack.angle_deg.push_back(std::arg(v) * 180.0 / std::numbers::pi);
    }

    for (const Bus& b : net.buses) {
        FeederBusRecord rec;
        rec.id = b.id;
        rec.phases = b.phases;
        rec.zone = "mv";
        bool any_load = false;
        for (Phase p : b.phases) any_load |= (b.injection[static_cast<int>(p)] != Complex(0, 0));
        if (any_load) {
            for (Phase p : b.phases) {
                Complex s = b.injection[static_cast<int>(p)];
                rec.load_kw.push_back(-s.real() * base_kva);
                rec.load_kvar.push_back(-s.imag() * base_kva);
            }
        }
        f.buses.push_back(rec);
    }
    for (const Line& l : net.lines) {
        FeederLineRecord rec;
        rec.id = l.id;
        rec.from = l.from;
        rec.to = l.to;
        rec.phases = l.phases;
        rec.z = l.z * z_base;
        rec.z_in_ohms = true;
        if (l.shunt_from.size() > 0) rec.shunt_from_s = l.shunt_from / z_base;
        if (l.shunt_to.size() > 0) rec.shunt_to_s = l.shunt_to / z_base;
        f.lines.push_back(rec);
    }
    return f;
}

namespace detail {
const char* bundled_json(const std::string& name);  // bundled_feeders.cpp (generated)
}

std::vector<std::string> bundled_feeder_names() { return {"ieee13", "ieee37", "ieee123"}; }

const std::string& bundled_feeder_text(const std::string& name) {
    static std::unordered_map<std::string, std::string> cache;
    auto it = cache.find(name);
    if (it != cache.end()) return it->second;
    const char* text = detail::bundled_json(name);
    if (!text) throw ValidationError("unknown bundled feeder \"" + name + "\"");
    return cache.emplace(name, text).first->second;
}

Network load_bundled(const std::string& name) {
    return to_network(parse_feeder(bundled_feeder_text(name)));
}

}  // namespace distflow
