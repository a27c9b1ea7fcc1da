#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "ptmc/error.hpp"
#include "ptmc/executor.hpp"
#include "ptmc/lattice.hpp"

namespace ptmc {

/// Mean |m| per temperature slot over the iterations after the burn-in prefix.
inline std::vector<double> equilibrium_magnetization(const RunRecord& record, double burn_in_fraction = 0.5) {
    if (!(burn_in_fraction >= 0.0 && burn_in_fraction < 1.0)) {
        throw AnalysisError("burn_in_fraction must be in [0, 1)");
    }
    std::vector<double> out;
    out.reserve(record.series.size());
    for (const auto& s : record.series) {
        const auto& m = s.magnetization;
        const auto skip = static_cast<std::size_t>(burn_in_fraction * static_cast<double>(m.size()));
        if (skip >= m.size()) throw AnalysisError("no iterations left after burn-in");
        double sum = 0.0;
        for (std::size_t t = skip; t < m.size(); ++t) sum += std::abs(m[t]);
        out.push_back(sum / static_cast<double>(m.size() - skip));
    }
    return out;
}

struct ConvergenceCriterion {
    std::size_t window = 1000;
    double tolerance = 0.02;
};

/// Earliest t from which the mean |m| over [t, t+w) and over [t+w, t+2w)
/// differ by less than the tolerance for every later t. Empty when the last
/// comparable window pair still differs.
inline std::optional<std::size_t> convergence_iteration(std::span<const double> magnetization,
                                                        const ConvergenceCriterion& criterion) {
    const std::size_t w = criterion.window;
    if (w < 1) throw AnalysisError("convergence window must be >= 1");
    if (!(criterion.tolerance > 0.0)) throw AnalysisError("convergence tolerance must be > 0");
    const std::size_t n = magnetization.size();
    if (n < 2 * w) throw AnalysisError("series shorter than two convergence windows");

    std::vector<double> prefix(n + 1, 0.0);
    for (std::size_t t = 0; t < n; ++t) prefix[t + 1] = prefix[t] + std::abs(magnetization[t]);
    const auto window_mean = [&](std::size_t begin) {
        return (prefix[begin + w] - prefix[begin]) / static_cast<double>(w);
    };

    const std::size_t last = n - 2 * w;
    for (std::size_t t = last + 1; t-- > 0;) {
        if (std::abs(window_mean(t) - window_mean(t + w)) >= criterion.tolerance) {
            if (t == last) return std::nullopt;
            return t + 1;
        }
    }
    return 0;
}

struct ScalingFit {
    double exponent = 0.0;
    double prefactor = 0.0;
    double r_squared = 0.0;
};

/// Least-squares line through (log L, log iterations).
inline ScalingFit fit_power_law(std::span<const std::pair<double, double>> points) {
    if (points.size() < 3) throw AnalysisError("power-law fit needs at least 3 points");
    double sx = 0, sy = 0;
    for (const auto& [x, y] : points) {
        if (!(x > 0.0) || !(y > 0.0)) throw AnalysisError("power-law fit needs positive values");
        sx += std::log(x);
        sy += std::log(y);
    }
    const double n = static_cast<double>(points.size());
    const double mx = sx / n;
    const double my = sy / n;
    double sxx = 0, sxy = 0, syy = 0;
    for (const auto& [x, y] : points) {
        const double dx = std::log(x) - mx;
        const double dy = std::log(y) - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx == 0.0) throw AnalysisError("power-law fit needs at least two distinct sizes");
    ScalingFit fit;
    fit.exponent = sxy / sxx;
    fit.prefactor = std::exp(my - fit.exponent * mx);
    fit.r_squared = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
    return fit;
}

inline constexpr std::size_t kMaxEnumerationSites = 16;

/// Exact Boltzmann probabilities of every L x L configuration.
///
/// Configuration index c has site k (row-major) up iff bit k of c is set.
/// Z is computed by enumeration, shifted by the ground-state energy.
inline std::vector<double> exact_boltzmann_distribution(std::size_t L, double temperature,
                                                        const IsingParams& params) {
    if (L < 2 || L * L > kMaxEnumerationSites) {
        throw ConfigError("exact enumeration requires 2 <= L and L*L <= 16");
    }
    if (!(temperature > 0.0)) throw ConfigError("temperature must be > 0");
    const std::size_t sites = L * L;
    const std::size_t count = std::size_t{1} << sites;

    std::vector<double> energy(count);
    std::vector<SpinLattice::spin_type> spins(sites);
    double e_min = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < count; ++c) {
        for (std::size_t k = 0; k < sites; ++k) spins[k] = ((c >> k) & 1u) ? 1 : -1;
        energy[c] = total_energy(SpinLattice(L, spins), params);
        e_min = std::min(e_min, energy[c]);
    }
    std::vector<double> p(count);
    double z = 0.0;
    for (std::size_t c = 0; c < count; ++c) {
        p[c] = std::exp(-(energy[c] - e_min) / temperature);
        z += p[c];
    }
    for (auto& v : p) v /= z;
    return p;
}

/// Index of a lattice under the exact_boltzmann_distribution convention.
inline std::size_t configuration_index(const SpinLattice& lattice) {
    if (lattice.size() > 63) throw ConfigError("lattice too large to index");
    std::size_t c = 0;
    for (std::size_t k = 0; k < lattice.size(); ++k) {
        if (lattice[k] > 0) c |= std::size_t{1} << k;
    }
    return c;
}

inline double total_variation(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size()) throw AnalysisError("distributions differ in support size");
    double d = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) d += std::abs(p[i] - q[i]);
    return 0.5 * d;
}

}  // namespace ptmc
