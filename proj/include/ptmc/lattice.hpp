#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "ptmc/error.hpp"
#include "ptmc/rng.hpp"

namespace ptmc {

/// Coupling J and field B of the Ising Hamiltonian.
struct IsingParams {
    double J = 1.0;
    double B = 0.0;
};

struct Site {
    std::size_t row = 0;
    std::size_t col = 0;
    friend bool operator==(const Site&, const Site&) = default;
};

/// L x L grid of +/-1 spins with periodic boundaries, stored row-major.
class SpinLattice {
public:
    using spin_type = std::int8_t;

    /// All-up lattice.
    explicit SpinLattice(std::size_t side) : side_(side), spins_(side * side, spin_type{1}) {
        if (side < 2) throw ConfigError("lattice side L must be >= 2");
    }

    SpinLattice(std::size_t side, std::vector<spin_type> spins) : side_(side), spins_(std::move(spins)) {
        if (side < 2) throw ConfigError("lattice side L must be >= 2");
        if (spins_.size() != side * side) throw ConfigError("spin array size must equal L*L");
        for (auto s : spins_) {
            if (s != 1 && s != -1) throw ConfigError("spins must be -1 or +1");
        }
    }

    std::size_t side() const noexcept { return side_; }
    std::size_t size() const noexcept { return spins_.size(); }

    spin_type operator()(std::size_t row, std::size_t col) const noexcept {
        return spins_[row * side_ + col];
    }
    spin_type operator[](std::size_t index) const noexcept { return spins_[index]; }

    Site site_of(std::size_t index) const noexcept { return {index / side_, index % side_}; }
    std::size_t index_of(Site s) const noexcept { return s.row * side_ + s.col; }
    bool contains(Site s) const noexcept { return s.row < side_ && s.col < side_; }

    void flip(Site s) noexcept {
        assert(contains(s));
        auto& v = spins_[index_of(s)];
        v = static_cast<spin_type>(-v);
    }

    /// Sum of the four periodic nearest neighbours of s.
    int neighbour_sum(Site s) const noexcept {
        const std::size_t up = s.row == 0 ? side_ - 1 : s.row - 1;
        const std::size_t down = s.row + 1 == side_ ? 0 : s.row + 1;
        const std::size_t left = s.col == 0 ? side_ - 1 : s.col - 1;
        const std::size_t right = s.col + 1 == side_ ? 0 : s.col + 1;
        return (*this)(up, s.col) + (*this)(down, s.col) + (*this)(s.row, left) + (*this)(s.row, right);
    }

    std::int64_t spin_sum() const noexcept {
        return std::accumulate(spins_.begin(), spins_.end(), std::int64_t{0});
    }

    std::span<const spin_type> spins() const noexcept { return spins_; }

    friend bool operator==(const SpinLattice&, const SpinLattice&) = default;

private:
    std::size_t side_;
    std::vector<spin_type> spins_;
};

/// E = B * sum(s_i) - J * sum over bonds(s_i s_j), each site contributing its
/// right and down bond (2 L^2 bonds).
inline double total_energy(const SpinLattice& lattice, const IsingParams& params) {
    const std::size_t L = lattice.side();
    std::int64_t field_sum = 0;
    std::int64_t bond_sum = 0;
    for (std::size_t r = 0; r < L; ++r) {
        const std::size_t down = r + 1 == L ? 0 : r + 1;
        for (std::size_t c = 0; c < L; ++c) {
            const std::size_t right = c + 1 == L ? 0 : c + 1;
            const int s = lattice(r, c);
            field_sum += s;
            bond_sum += s * (lattice(r, right) + lattice(down, c));
        }
    }
    return params.B * static_cast<double>(field_sum) - params.J * static_cast<double>(bond_sum);
}

/// Energy change from flipping the spin at `site`.
inline double flip_delta(const SpinLattice& lattice, Site site, const IsingParams& params) noexcept {
    assert(lattice.contains(site));
    const int s = lattice(site.row, site.col);
    return 2.0 * s * (params.J * lattice.neighbour_sum(site) - params.B);
}

/// Mean spin in [-1, 1].
inline double magnetization_fraction(const SpinLattice& lattice) noexcept {
    return static_cast<double>(lattice.spin_sum()) / static_cast<double>(lattice.size());
}

/// Lattice with exactly round(up_fraction * L^2) up spins at shuffled positions.
inline SpinLattice init_lattice(std::size_t side, double up_fraction, RngStream& rng) {
    if (side < 2) throw ConfigError("lattice side L must be >= 2");
    if (!(up_fraction >= 0.0 && up_fraction <= 1.0)) {
        throw ConfigError("init_up_fraction must be in [0, 1]");
    }
    const std::size_t n = side * side;
    const auto up = static_cast<std::size_t>(std::llround(up_fraction * static_cast<double>(n)));
    std::vector<SpinLattice::spin_type> spins(n, -1);
    std::fill_n(spins.begin(), up, SpinLattice::spin_type{1});
    if (up != 0 && up != n) {
        for (std::size_t i = n - 1; i > 0; --i) {
            std::swap(spins[i], spins[rng.below(i + 1)]);
        }
    }
    return SpinLattice(side, std::move(spins));
}

}  // namespace ptmc
