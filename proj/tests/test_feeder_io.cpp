#include <fstream>
#include <sstream>

#include "distflow/errors.hpp"
#include "distflow/feeder_io.hpp"
#include "distflow/power_flow.hpp"
#include "distflow/topology.hpp"
#include "doctest.h"
#include "test_support.hpp"

using namespace distflow;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

const char* kTinyFeeder = R"({
  "name": "tiny",
  "base_kva": 100.0,
  "zones": [{"name": "mv", "base_kv": 1.0}],
  "slack": {"bus": "s", "magnitude_pu": [1.0], "angle_deg": [0.0]},
  "buses": [
    {"id": "s", "phases": "a"},
    {"id": "t", "phases": "a", "load_kw": [10.0], "load_kvar": [5.0]}
  ],
  "lines": [
    {"id": "L", "from": "s", "to": "t", "phases": "a", "z_ohm": [[[1.0, 2.0]]]}
  ]
})";

}  // namespace

TEST_CASE("parse bundled 13-bus file") {
    FeederFile f = parse_feeder(bundled_feeder_text("ieee13"));
    CHECK(f.buses.size() == 13);
    CHECK(f.name == "ieee13");
    CHECK(f.slack.bus == "650");

    // node count equals the hand count of declared PQ phases:
    // 632/633/634/671/675/680/692 three-phase, 645/646/684 two-phase,
    // 611/652 single-phase -> 7*3 + 3*2 + 2*1 = 29
    Network net = to_network(f);
    IndexMaps idx = build_index_maps(net);
    CHECK(idx.n == 29);
    CHECK(idx.m == 29);
    CHECK(idx.n_slack == 3);
}

TEST_CASE("empty document is a syntax error with a position") {
    try {
        parse_feeder("");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line >= 1);
        CHECK(e.column >= 1);
    }
}

TEST_CASE("dangling bus reference") {
    std::string text = kTinyFeeder;
    text.replace(text.find("\"to\": \"t\""), 9, "\"to\": \"999\"");
    CHECK_THROWS_WITH_AS(parse_feeder(text),
                         doctest::Contains("undefined bus \"999\""), ValidationError);
}

TEST_CASE("non-square impedance block") {
    std::string text = kTinyFeeder;
    text.replace(text.find("[[[1.0, 2.0]]]"), 14, "[[[1.0, 2.0],[1.0,2.0]]]");
    CHECK_THROWS_AS(parse_feeder(text), ValidationError);
}

TEST_CASE("unit arithmetic: 1 ohm at 100 kVA / 1 kV is 0.1 p.u.") {
    Network net = to_network(parse_feeder(kTinyFeeder));
    CHECK(net.lines[0].z(0, 0).real() == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(net.lines[0].z(0, 0).imag() == doctest::Approx(0.2).epsilon(1e-15));
    // 10 kW + 5 kvar load on a 100 kVA base becomes injection -0.1 - 0.05i
    CHECK(net.bus("t").injection[0].real() == doctest::Approx(-0.1).epsilon(1e-15));
    CHECK(net.bus("t").injection[0].imag() == doctest::Approx(-0.05).epsilon(1e-15));
}

TEST_CASE("zero base values rejected") {
    std::string text = kTinyFeeder;
    text.replace(text.find("\"base_kva\": 100.0"), 17, "\"base_kva\": 0.0");
    CHECK_THROWS_AS(to_network(parse_feeder(text)), ValidationError);
}

TEST_CASE("per-unit conversion round-trips through a network") {
    FeederFile f = parse_feeder(kTinyFeeder);
    Network net = to_network(f);
    FeederFile back = feeder_from_network(net, f.base_kva, f.zones[0].base_kv, f.name);
    REQUIRE(back.lines.size() == 1);
    // ohms -> p.u. -> ohms within 1e-12 relative
    CHECK(back.lines[0].z(0, 0).real() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(back.lines[0].z(0, 0).imag() == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(back.buses[1].load_kw[0] == doctest::Approx(10.0).epsilon(1e-12));
    CHECK(back.buses[1].load_kvar[0] == doctest::Approx(5.0).epsilon(1e-12));

    // identical FeederFile up to float formatting: emit and reparse
    FeederFile reparsed = parse_feeder(emit_feeder(back));
    CHECK(reparsed.buses.size() == back.buses.size());
    CHECK(reparsed.lines.size() == back.lines.size());
    CHECK(reparsed.slack.bus == back.slack.bus);
    CHECK(reparsed.lines[0].z(0, 0).real() == doctest::Approx(back.lines[0].z(0, 0).real()).epsilon(1e-15));
}

TEST_CASE("emit/parse round trip on the bundled 37-bus feeder") {
    FeederFile f = parse_feeder(bundled_feeder_text("ieee37"));
    FeederFile g = parse_feeder(emit_feeder(f));
    REQUIRE(g.buses.size() == f.buses.size());
    REQUIRE(g.lines.size() == f.lines.size());
    for (std::size_t i = 0; i < f.lines.size(); ++i) {
        CHECK(g.lines[i].id == f.lines[i].id);
        CHECK((g.lines[i].z - f.lines[i].z).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("bundled feeders are radial and inside the published voltage envelopes") {
    SUBCASE("ieee13") {
        Network net = load_bundled("ieee13");
        CHECK(is_radial(net));
        CHECK_FALSE(net.has_shunts());
    }
    SUBCASE("ieee37") {
        Network net = load_bundled("ieee37");
        CHECK(is_radial(net));
    }
    SUBCASE("ieee123 voltage range") {
        Network net = load_bundled("ieee123");
        CHECK(is_radial(net));
        IndexMaps idx = build_index_maps(net);
        SystemMatrices mats = build_system(net, idx);
        PowerFlowSolution sol = fixed_point_solve(mats, injection_vector(net, idx));
        REQUIRE(sol.converged);
        Eigen::VectorXd mag = sol.V.cwiseAbs();
        CHECK(mag.minCoeff() >= 0.90);
        CHECK(mag.maxCoeff() <= 1.01);
    }
}

TEST_CASE("unknown bundled name") {
    CHECK_THROWS_AS(load_bundled("ieee9999"), ValidationError);
}

TEST_CASE("data files on disk parse to the same networks as the embedded copies") {
    for (const auto& name : bundled_feeder_names()) {
        std::string disk = read_file(std::string(DISTFLOW_DATA_DIR) + "/" + name + ".json");
        CHECK(disk == bundled_feeder_text(name));
    }
}

TEST_CASE("line in ohms must not bridge voltage zones") {
    std::string text = R"({
      "name": "zx", "base_kva": 100.0,
      "zones": [{"name": "mv", "base_kv": 1.0}, {"name": "lv", "base_kv": 0.5}],
      "slack": {"bus": "s", "magnitude_pu": [1.0], "angle_deg": [0.0]},
      "buses": [{"id": "s", "phases": "a"}, {"id": "t", "phases": "a", "zone": "lv"}],
      "lines": [{"id": "L", "from": "s", "to": "t", "phases": "a", "z_ohm": [[[1.0, 2.0]]]}]
    })";
    CHECK_THROWS_WITH_AS(to_network(parse_feeder(text)), doctest::Contains("bridges zones"),
                         ValidationError);
}

TEST_CASE("load_scale scales loads only") {
    std::string text = kTinyFeeder;
    text.replace(text.find("\"base_kva\": 100.0"), 17, "\"base_kva\": 100.0, \"load_scale\": 0.5");
    Network net = to_network(parse_feeder(text));
    CHECK(net.bus("t").injection[0].real() == doctest::Approx(-0.05).epsilon(1e-15));
    CHECK(net.lines[0].z(0, 0).real() == doctest::Approx(0.1).epsilon(1e-15));
}

TEST_CASE("emit preserves shunt blocks and the unit tag") {
    FeederFile f = parse_feeder(kTinyFeeder);
    f.lines[0].shunt_to_s = Eigen::MatrixXcd::Constant(1, 1, Complex(0.0, 0.012));
    f.lines[0].z_in_ohms = false;  // reinterpret the block as p.u. for the tag check
    FeederFile g = parse_feeder(emit_feeder(f));
    REQUIRE(g.lines.size() == 1);
    CHECK_FALSE(g.lines[0].z_in_ohms);
    REQUIRE(g.lines[0].shunt_to_s.size() == 1);
    CHECK(g.lines[0].shunt_to_s(0, 0) == Complex(0.0, 0.012));
    CHECK(g.lines[0].shunt_from_s.size() == 0);
}

TEST_CASE("terminal shunts parse in siemens and convert to p.u.") {
    std::string text = kTinyFeeder;
    text.replace(text.find("\"z_ohm\": [[[1.0, 2.0]]]"), 23,
                 "\"z_ohm\": [[[1.0, 2.0]]], \"shunt_to_s\": [[[0.0, 0.012]]]");
    Network net = to_network(parse_feeder(text));
    REQUIRE(net.lines[0].shunt_to.size() == 1);
    // y_pu = y_S * Z_base, Z_base = 1000 * 1^2 / 100 = 10 ohm
    CHECK(net.lines[0].shunt_to(0, 0).imag() == doctest::Approx(0.12).epsilon(1e-12));
    CHECK(net.has_shunts());
    CHECK_FALSE(net.without_shunts().has_shunts());
}
