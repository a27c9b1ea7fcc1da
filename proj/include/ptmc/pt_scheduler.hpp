#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "ptmc/error.hpp"
#include "ptmc/mh_kernel.hpp"
#include "ptmc/rng.hpp"

namespace ptmc {

/// Replica temperatures 1 + 3i/|R|, strictly increasing in [1, 4).
struct TemperatureLadder {
    std::vector<double> temperatures;

    std::size_t size() const noexcept { return temperatures.size(); }
    double operator[](std::size_t i) const noexcept { return temperatures[i]; }
};

inline double ladder_temperature(std::size_t index, std::size_t replica_count) noexcept {
    return 1.0 + 3.0 * static_cast<double>(index) / static_cast<double>(replica_count);
}

inline TemperatureLadder build_ladder(std::size_t replica_count) {
    if (replica_count == 0) throw ConfigError("replica_count must be >= 1");
    TemperatureLadder ladder;
    ladder.temperatures.reserve(replica_count);
    for (std::size_t i = 0; i < replica_count; ++i) {
        ladder.temperatures.push_back(ladder_temperature(i, replica_count));
    }
    return ladder;
}

enum class Parity { even, odd };

/// Disjoint adjacent pairs (i, i+1) for one exchange round.
struct SwapRound {
    Parity parity = Parity::even;
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
};

/// Even rounds pair (0,1),(2,3),...; odd rounds pair (1,2),(3,4),...
/// A trailing replica without a partner sits the round out.
inline SwapRound pairing(std::uint64_t round_index, std::size_t replica_count) {
    SwapRound round;
    round.parity = (round_index % 2 == 0) ? Parity::even : Parity::odd;
    if (replica_count < 2) return round;
    const std::size_t start = round.parity == Parity::even ? 0 : 1;
    for (std::size_t i = start; i + 1 < replica_count; i += 2) {
        round.pairs.emplace_back(i, i + 1);
    }
    return round;
}

/// Logistic exchange probability sigma((beta_i - beta_j) * (E_i - E_j)).
inline double swap_probability(double beta_i, double beta_j, double energy_i, double energy_j) noexcept {
    const double x = (beta_i - beta_j) * (energy_i - energy_j);
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

/// Per-pair swap streams keyed by (round index, pair index), independent of
/// which worker evaluates the pair.
class SwapStreams {
public:
    SwapStreams(std::uint64_t seed, std::size_t replica_count) noexcept
        : seed_(seed), replica_count_(replica_count) {}

    double uniform(std::uint64_t round_index, std::size_t pair_index) const noexcept {
        RngStream s(seed_, streams::swap(replica_count_, pair_index), round_index);
        return s.uniform();
    }

private:
    std::uint64_t seed_;
    std::size_t replica_count_;
};

/// Attempt one exchange between adjacent slots; returns true when accepted.
inline bool try_swap(Replica& lower, Replica& upper, double u) noexcept {
    const double p = swap_probability(lower.beta(), upper.beta(), lower.energy(), upper.energy());
    if (u < p) {
        lower.swap_state(upper);
        return true;
    }
    return false;
}

/// Runs every pair of `round` sequentially. Returns the number of accepted swaps.
inline std::size_t execute_swap_round(std::span<Replica> replicas, const SwapRound& round,
                                      std::uint64_t round_index, const SwapStreams& swap_rng) {
    std::size_t accepted = 0;
    for (const auto& [i, j] : round.pairs) {
        if (try_swap(replicas[i], replicas[j], swap_rng.uniform(round_index, i))) ++accepted;
    }
    return accepted;
}

}  // namespace ptmc
