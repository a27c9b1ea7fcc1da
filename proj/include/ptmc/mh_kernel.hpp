#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <utility>

#include "ptmc/error.hpp"
#include "ptmc/lattice.hpp"
#include "ptmc/rng.hpp"

namespace ptmc {

/// One Metropolis-Hastings chain bound to a temperature slot.
///
/// The configuration (lattice, cached energy, cached spin sum) can move
/// between replicas during swaps; the slot data (index, temperature, rng)
/// never does.
class Replica {
public:
    Replica(std::size_t index, double temperature, SpinLattice lattice, const IsingParams& params,
            RngStream rng)
        : index_(index),
          temperature_(temperature),
          beta_(1.0 / temperature),
          lattice_(std::move(lattice)),
          energy_(total_energy(lattice_, params)),
          spin_sum_(lattice_.spin_sum()),
          rng_(rng) {
        if (!(temperature > 0.0) || !std::isfinite(temperature)) {
            throw ConfigError("replica temperature must be finite and > 0");
        }
    }

    std::size_t index() const noexcept { return index_; }
    double temperature() const noexcept { return temperature_; }
    double beta() const noexcept { return beta_; }
    double energy() const noexcept { return energy_; }
    std::int64_t spin_sum() const noexcept { return spin_sum_; }
    double magnetization() const noexcept {
        return static_cast<double>(spin_sum_) / static_cast<double>(lattice_.size());
    }
    const SpinLattice& lattice() const noexcept { return lattice_; }
    RngStream& rng() noexcept { return rng_; }
    const RngStream& rng() const noexcept { return rng_; }

    /// Flip `site` and update cached observables by the known delta.
    void apply_flip(Site site, double delta) noexcept {
        spin_sum_ -= 2 * lattice_(site.row, site.col);
        lattice_.flip(site);
        energy_ += delta;
    }

    /// Exchange configurations (lattice and cached observables) with `other`.
    void swap_state(Replica& other) noexcept {
        using std::swap;
        swap(lattice_, other.lattice_);
        swap(energy_, other.energy_);
        swap(spin_sum_, other.spin_sum_);
    }

    /// True when the cached energy and spin sum match a full recomputation.
    bool audit(const IsingParams& params, double rel_tol = 0.0) const {
        const double fresh = total_energy(lattice_, params);
        const double scale = std::max(1.0, std::abs(fresh));
        return std::abs(fresh - energy_) <= rel_tol * scale && spin_sum_ == lattice_.spin_sum();
    }

private:
    std::size_t index_;
    double temperature_;
    double beta_;
    SpinLattice lattice_;
    double energy_;
    std::int64_t spin_sum_;
    RngStream rng_;
};

/// Uniform random site; one draw from the replica stream.
inline Site propose(Replica& replica) noexcept {
    const auto& lat = replica.lattice();
    return lat.site_of(static_cast<std::size_t>(replica.rng().below(lat.size())));
}

/// min(1, exp(-beta * dE)); the Boltzmann ratio with Z cancelled.
inline double acceptance_probability(double delta_energy, double beta) noexcept {
    if (delta_energy <= 0.0) return 1.0;
    return std::exp(-beta * delta_energy);
}

/// One Metropolis-Hastings iteration. Always consumes exactly two draws.
inline bool mh_step(Replica& replica, const IsingParams& params) noexcept {
    const Site site = propose(replica);
    const double delta = flip_delta(replica.lattice(), site, params);
    const double p = acceptance_probability(delta, replica.beta());
    const double u = replica.rng().uniform();
    if (u < p) {
        replica.apply_flip(site, delta);
        return true;
    }
    return false;
}

}  // namespace ptmc
