#pragma once

#include <cstdint>

#include "distflow/network.hpp"

namespace distflow {

/// Small deterministic generator (splitmix64 core). Streams derived from
/// (seed, index) are independent of each other and of platform RNG details.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed ^ 0x9e3779b97f4a7c15ULL) { next(); }

    static Rng stream(std::uint64_t seed, std::uint64_t index) {
        return Rng(seed * 0x2545f4914f6cdd1dULL + index * 0x9e3779b97f4a7c15ULL + 0x632be59bd9b4e019ULL);
    }

    std::uint64_t next() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + uniform() * (hi - lo); }

    /// Uniform integer in [lo, hi] inclusive.
    int uniform_int(int lo, int hi) {
        return lo + static_cast<int>(next() % static_cast<std::uint64_t>(hi - lo + 1));
    }

private:
    std::uint64_t state_;
};

struct RandomNetworkOptions {
    int min_buses = 3;   // PQ buses
    int max_buses = 30;
    double r_min = 0.001;  // p.u. per line, diagonal entries
    double r_max = 0.05;
    /// Off-diagonal scale relative to the smallest diagonal entry; kept
    /// below 1/(size-1) so blocks stay diagonally dominant.
    double mutual_fraction = 0.4;
    bool multiphase = true;    // random per-bus phase subsets; false = all abc
    bool single_phase = false; // phase a only, scalar impedances
};

/// Random radial network with balanced slack, nested phase sets along paths
/// and invertible impedance blocks. Buses carry zero load.
Network random_radial_network(std::uint64_t seed, const RandomNetworkOptions& opt = {});

/// Copy of net with one extra line between two random non-adjacent buses.
Network add_random_chord(const Network& net, std::uint64_t seed);

/// Moderate random injections, per-node magnitude <= s_max (mix of load and
/// generation).
Eigen::VectorXcd random_injection(std::uint64_t seed, int n, double s_max);

}  // namespace distflow
