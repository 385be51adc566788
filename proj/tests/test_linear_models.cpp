#include <numbers>

#include "distflow/errors.hpp"
#include "distflow/feeder_io.hpp"
#include "distflow/linear_models.hpp"
#include "distflow/power_flow.hpp"
#include "distflow/random_networks.hpp"
#include "doctest.h"
#include "test_support.hpp"

using namespace distflow;
using namespace testsupport;

namespace {

LinearVoltageModel zero_injection_gldf(const SystemMatrices& mats) {
    return build_gldf(mats, Eigen::VectorXcd::Zero(mats.E.size()), mats.E);
}

}  // namespace

TEST_CASE("zero-injection build has lambda = 0") {
    Network net = three_bus_example();
    IndexMaps idx = build_index_maps(net);
    SystemMatrices mats = build_system(net, idx);
    LinearVoltageModel mdl = zero_injection_gldf(mats);
    CHECK(mdl.lambda.lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("GLDF coefficient formulas, checked entrywise") {
    Network net = three_bus_example();
    IndexMaps idx = build_index_maps(net);
    SystemMatrices mats = build_system(net, idx);
    LinearVoltageModel mdl = zero_injection_gldf(mats);
    // independent elementwise evaluation of 2 diag(E) conj(Z) diag(E)^{-1}
    for (int i = 0; i < idx.n; ++i)
        for (int j = 0; j < idx.n; ++j) {
            Complex w = mats.E(i) * std::conj(mats.Z(i, j)) / mats.E(j);
            CHECK(mdl.M(i, j) == doctest::Approx(2.0 * w.real()).epsilon(1e-12));
            CHECK(mdl.N(i, j) == doctest::Approx(-2.0 * w.imag()).epsilon(1e-12));
        }
}

TEST_CASE("evaluation at the linearization point reproduces |V*|^2") {
    Network net = load_bundled("ieee13");
    IndexMaps idx = build_index_maps(net);
    SystemMatrices mats = build_system(net, idx);
    Eigen::VectorXcd S_star = injection_vector(net, idx);
    PowerFlowSolution sol = fixed_point_solve(mats, S_star);
    REQUIRE(sol.converged);
    LinearVoltageModel mdl = build_gldf(mats, S_star, sol.V);
    Eigen::VectorXd v = eval_squared_voltages(mdl, S_star.real(), S_star.imag());
    Eigen::VectorXd want = sol.V.cwiseAbs2();
    CHECK((v - want).lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("2-bus hand evaluation: 0.996") {
    Network net = chain_network({Complex(0.01, 0.02)});
    IndexMaps idx = build_index_maps(net);
    SystemMatrices mats = build_system(net, idx);
    LinearVoltageModel mdl = zero_injection_gldf(mats);
    Eigen::VectorXd p(1), q(1);
    p << -0.1;
    q << -0.05;
    Eigen::VectorXd v = eval_squared_voltages(mdl, p, q);
    // v = 1 + 2(r p + x q) = 1 - 2(0.01*0.1 + 0.02*0.05) = 0.996
    CHECK(v(0) == doctest::Approx(0.996).epsilon(1e-12));
}

TEST_CASE("zero model evaluated at zero gives |E|^2; deviations scale linearly") {
    Network net = three_bus_example();
    IndexMaps idx = build_index_maps(net);
    SystemMatrices mats = build_system(net, idx);
    LinearVoltageModel mdl = zero_injection_gldf(mats);

    Eigen::VectorXd zero = Eigen::VectorXd::Zero(idx.n);
    Eigen::VectorXd at0 = eval_squared_voltages(mdl, zero, zero);
    CHECK((at0 - mats.E.cwiseAbs2()).lpNorm<Eigen::Infinity>() < 1e-14);

    Eigen::VectorXd p(idx.n), q(idx.n);
    p << -0.1, -0.05, -0.02, -0.08, -0.03;
    q << -0.04, -0.02, -0.01, -0.03, -0.02;
    Eigen::VectorXd base = mdl.base + mdl.lambda;
    Eigen::VectorXd d1 = eval_squared_voltages(mdl, p, q) - base;
    Eigen::VectorXd d2 = eval_squared_voltages(mdl, Eigen::VectorXd(2 * p), Eigen::VectorXd(2 * q)) - base;
    CHECK((d2 - 2.0 * d1).lpNorm<Eigen::Infinity>() < 1e-13);
}

TEST_CASE("exactness at the linearization point against the nonlinear truth") {
    Network net = load_bundled("ieee13");
    IndexMaps idx = build_index_maps(net);
    SystemMatrices mats = build_system(net, idx);
    Eigen::VectorXcd S = injection_vector(net, idx);  // k = 1
    PowerFlowSolution sol = fixed_point_solve(mats, S);
    REQUIRE(sol.converged);
    LinearVoltageModel mdl = build_gldf(mats, S, sol.V);
    Eigen::VectorXd mag = magnitudes_from_squared(eval_squared_voltages(mdl, S.real(), S.imag())).value;
    double rel = (mag - sol.V.cwiseAbs()).norm() / sol.V.cwiseAbs().norm();
    CHECK(rel < 1e-9);
}

TEST_CASE("M and N do not depend on the linearization point") {
    Network net = load_bundled("ieee13");
    IndexMaps idx = build_index_maps(net);
    SystemMatrices mats = build_system(net, idx);
    Eigen::VectorXcd S = injection_vector(net, idx);
    PowerFlowSolution sol = fixed_point_solve(mats, S);
    REQUIRE(sol.converged);

    LinearVoltageModel at_zero = zero_injection_gldf(mats);
    LinearVoltageModel at_ref = build_gldf(mats, S, sol.V);
    CHECK((at_zero.M - at_ref.M).lpNorm<Eigen::Infinity>() == 0.0);
    CHECK((at_zero.N - at_ref.N).lpNorm<Eigen::Infinity>() == 0.0);
    CHECK(at_ref.lambda.lpNorm<Eigen::Infinity>() > 0.0);
}

TEST_CASE("LDF on a single-phase chain: plain resistance sums") {
    Complex z1(0.01, 0.02), z2(0.015, 0.025);
    Network net = chain_network({z1, z2});
    IndexMaps idx = build_index_maps(net);
    SystemMatrices mats = build_system(net, idx);
    LinearVoltageModel ldf = build_ldf(net, idx, mats);
    CHECK(ldf.M(0, 0) == doctest::Approx(2 * z1.real()).epsilon(1e-14));
    CHECK(ldf.M(0, 1) == doctest::Approx(2 * z1.real()).epsilon(1e-14));
    CHECK(ldf.M(1, 1) == doctest::Approx(2 * (z1 + z2).real()).epsilon(1e-14));
    CHECK(ldf.N(1, 1) == doctest::Approx(2 * (z1 + z2).imag()).epsilon(1e-14));
    CHECK(ldf.lambda.lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("LDF: phase pairs absent from a path line contribute zero") {
    // bus 2 has phases ac but the common path line to bus 1's b-phase node
    // lacks the (b,*) pairs below bus 1
    Network net = three_bus_example();
    IndexMaps idx = build_index_maps(net);
    SystemMatrices mats = build_system(net, idx);
    LinearVoltageModel ldf = build_ldf(net, idx, mats);
    // (bus2 a, bus2 c) common path = {line1, line2}; (bus1 b, bus2 a) = line1 only
    int n1b = idx.node_of(1, Phase::B);
    int n2a = idx.node_of(2, Phase::A);
    Complex alpha = std::polar(1.0, -2.0 * std::numbers::pi / 3.0);
    Complex term = alpha * std::conj(net.lines[0].z(1, 0));  // line 1 only
    CHECK(ldf.M(n1b, n2a) == doctest::Approx(2 * term.real()).epsilon(1e-12));
}

TEST_CASE("zero-injection GLDF equals LDF on radial networks") {
    SUBCASE("ieee37") {
        Network net = load_bundled("ieee37");
        IndexMaps idx = build_index_maps(net);
        SystemMatrices mats = build_system(net, idx);
        LinearVoltageModel gldf = zero_injection_gldf(mats);
        LinearVoltageModel ldf = build_ldf(net, idx, mats);
        CHECK((gldf.M - ldf.M).cwiseAbs().maxCoeff() < 1e-9);
        CHECK((gldf.N - ldf.N).cwiseAbs().maxCoeff() < 1e-9);
    }
    SUBCASE("random trees") {
        for (std::uint64_t seed = 200; seed < 210; ++seed) {
            Network net = random_radial_network(seed);
            IndexMaps idx = build_index_maps(net);
            SystemMatrices mats = build_system(net, idx);
            LinearVoltageModel gldf = zero_injection_gldf(mats);
            LinearVoltageModel ldf = build_ldf(net, idx, mats);
            CHECK((gldf.M - ldf.M).cwiseAbs().maxCoeff() < 1e-9);
            CHECK((gldf.N - ldf.N).cwiseAbs().maxCoeff() < 1e-9);
        }
    }
}

TEST_CASE("build_ldf rejects meshed networks; GLDF still works there") {
    Network net = add_random_chord(random_radial_network(31), 7);
    IndexMaps idx = build_index_maps(net);
    SystemMatrices mats = build_system(net, idx);
    CHECK_THROWS_AS(build_ldf(net, idx, mats), TopologyError);

    // meshed exactness at the linearization point
    Eigen::VectorXcd S = random_injection(900, idx.n, 0.2 / static_cast<double>(net.buses.size()));
    PowerFlowSolution sol = fixed_point_solve(mats, S);
    REQUIRE(sol.converged);
    LinearVoltageModel mdl = build_gldf(mats, S, sol.V);
    Eigen::VectorXd mag = magnitudes_from_squared(eval_squared_voltages(mdl, S.real(), S.imag())).value;
    CHECK((mag - sol.V.cwiseAbs()).norm() / sol.V.cwiseAbs().norm() < 1e-9);
}

TEST_CASE("FPL fixed-point consistency") {
    Network net = load_bundled("ieee13");
    IndexMaps idx = build_index_maps(net);
    SystemMatrices mats = build_system(net, idx);
    Eigen::VectorXcd S = injection_vector(net, idx);
    PowerFlowSolution sol = fixed_point_solve(mats, S);
    REQUIRE(sol.converged);
    FplModel fpl = build_fpl(mats, S, sol.V);

    SUBCASE("S = S* returns V*") {
        CHECK((eval_fpl(fpl, S) - sol.V).lpNorm<Eigen::Infinity>() < 1e-9);
    }
    SUBCASE("S = 0 returns E regardless of the linearization point") {
        CHECK((eval_fpl(fpl, Eigen::VectorXcd::Zero(idx.n)) - mats.E).lpNorm<Eigen::Infinity>() == 0.0);
    }
}

TEST_CASE("zero-injection FPL: vtilde = vhat + |Z diag(conj(E))^{-1} conj(S)|^2") {
    Network net = load_bundled("ieee13");
    IndexMaps idx = build_index_maps(net);
    SystemMatrices mats = build_system(net, idx);
    LinearVoltageModel gldf = zero_injection_gldf(mats);
    FplModel fpl = build_fpl(mats, Eigen::VectorXcd::Zero(idx.n), mats.E);

    Eigen::VectorXcd S = 0.8 * injection_vector(net, idx);
    Eigen::VectorXd vhat = eval_squared_voltages(gldf, S.real(), S.imag());
    Eigen::VectorXd vtilde = eval_fpl(fpl, S).cwiseAbs2();
    Eigen::VectorXcd corr = mats.Z * (mats.E.conjugate().cwiseInverse().asDiagonal() * S.conjugate());
    Eigen::VectorXd want = vhat + corr.cwiseAbs2();
    CHECK((vtilde - want).lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("per-node dominance holds on single-phase radial networks") {
    RandomNetworkOptions opt;
    opt.single_phase = true;
    opt.max_buses = 12;
    int tested = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Network net = random_radial_network(seed, opt);
        IndexMaps idx = build_index_maps(net);
        SystemMatrices mats = build_system(net, idx);
        LinearVoltageModel gldf = zero_injection_gldf(mats);
        FplModel fpl = build_fpl(mats, Eigen::VectorXcd::Zero(idx.n), mats.E);
        for (std::uint64_t s = 0; s < 10; ++s) {
            Eigen::VectorXcd S =
                random_injection(seed * 100 + s, idx.n, 0.3 / static_cast<double>(net.buses.size()));
            PowerFlowSolution sol = fixed_point_solve(mats, S);
            if (!sol.converged) continue;
            Eigen::VectorXd v = sol.V.cwiseAbs2();
            Eigen::VectorXd vhat = eval_squared_voltages(gldf, S.real(), S.imag());
            Eigen::VectorXd vtilde = eval_fpl(fpl, S).cwiseAbs2();
            for (int i = 0; i < idx.n; ++i) {
                CHECK(vhat(i) >= v(i) - 1e-10);
                CHECK(vtilde(i) >= vhat(i) - 1e-12);
                CHECK(std::abs(vhat(i) - v(i)) <= std::abs(vtilde(i) - v(i)) + 1e-10);
            }
            ++tested;
        }
    }
    CHECK(tested >= 60);
}

TEST_CASE("the FPL square never undershoots the zero-injection model on any network") {
    // vtilde - vhat = |Z diag(conj(E))^{-1} conj(S)|^2 elementwise, so the
    // inequality is algebraic and holds on unbalanced feeders too
    Network net = load_bundled("ieee13");
    IndexMaps idx = build_index_maps(net);
    SystemMatrices mats = build_system(net, idx);
    LinearVoltageModel gldf = zero_injection_gldf(mats);
    FplModel fpl = build_fpl(mats, Eigen::VectorXcd::Zero(idx.n), mats.E);
    Eigen::VectorXcd S_ref = injection_vector(net, idx);
    for (std::uint64_t s = 0; s < 40; ++s) {
        Rng rng(s);
        Eigen::VectorXcd S = rng.uniform(-1.5, 1.5) * S_ref;
        Eigen::VectorXd vhat = eval_squared_voltages(gldf, S.real(), S.imag());
        Eigen::VectorXd vtilde = eval_fpl(fpl, S).cwiseAbs2();
        CHECK((vtilde - vhat).minCoeff() >= -1e-12);
    }
}

TEST_CASE("known limitation: per-node dominance can fail on unbalanced phases") {
    // two-phase line, load on phase a only: the true voltage on the unloaded
    // phase b rises more than the linear model predicts, so vhat < v there.
    // The aggregate (norm) comparison against FPL still favors the model;
    // the acceptance suite tracks the per-node version separately.
    Network net;
    net.name = "twophase";
    net.base_kva = 1000.0;
    net.slack_voltage = balanced_slack_voltage();
    net.buses.push_back({"s", PhaseSet::parse("ab"), BusKind::Slack, {}});
    Bus load{"t", PhaseSet::parse("ab"), BusKind::Pq, {}};
    load.injection[0] = Complex(-0.3, -0.1);
    net.buses.push_back(load);
    Line l;
    l.id = "L";
    l.from = "s";
    l.to = "t";
    l.phases = PhaseSet::parse("ab");
    l.z.resize(2, 2);
    l.z << Complex(0.01, 0.03), Complex(0.003, 0.01), Complex(0.003, 0.01), Complex(0.012, 0.028);
    net.lines.push_back(l);

    IndexMaps idx = build_index_maps(net);
    SystemMatrices mats = build_system(net, idx);
    Eigen::VectorXcd S = injection_vector(net, idx);
    PowerFlowSolution sol = fixed_point_solve(mats, S);
    REQUIRE(sol.converged);
    LinearVoltageModel gldf = zero_injection_gldf(mats);
    Eigen::VectorXd vhat = eval_squared_voltages(gldf, S.real(), S.imag());
    Eigen::VectorXd v = sol.V.cwiseAbs2();
    int node_b = idx.node_of(1, Phase::B);
    CHECK(v(node_b) > 1.0);        // the unloaded phase rises
    CHECK(vhat(node_b) < v(node_b));  // and the linear model underestimates it
}

TEST_CASE("magnitudes_from_squared") {
    Eigen::VectorXd v(2);
    v << 1.0, 0.81;
    Magnitudes m = magnitudes_from_squared(v);
    CHECK(m.value(0) == 1.0);
    CHECK(m.value(1) == doctest::Approx(0.9).epsilon(1e-15));
    CHECK(m.clamped.empty());

    Eigen::VectorXd zero(1);
    zero << 0.0;
    CHECK(magnitudes_from_squared(zero).value(0) == 0.0);

    Eigen::VectorXd neg(1);
    neg << -0.01;
    Magnitudes mn = magnitudes_from_squared(neg);
    CHECK(mn.value(0) == 0.0);
    CHECK(mn.clamped == std::vector<int>{0});
}

TEST_CASE("guards: zero E entry and zero V* entry") {
    Network net = chain_network({Complex(0.01, 0.02)});
    IndexMaps idx = build_index_maps(net);
    SystemMatrices mats = build_system(net, idx);
    SystemMatrices broken = mats;
    broken.E(0) = Complex(0.0, 0.0);
    CHECK_THROWS_AS(build_gldf(broken, Eigen::VectorXcd::Zero(1), broken.E), NumericalError);
    Eigen::VectorXcd vz(1);
    vz << Complex(0.0, 0.0);
    CHECK_THROWS_AS(build_fpl(mats, Eigen::VectorXcd::Zero(1), vz), NumericalError);
}
