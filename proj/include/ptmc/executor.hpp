#pragma once

#include <algorithm>
#include <atomic>
#include <barrier>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "ptmc/error.hpp"
#include "ptmc/lattice.hpp"
#include "ptmc/mh_kernel.hpp"
#include "ptmc/pt_scheduler.hpp"
#include "ptmc/rng.hpp"

namespace ptmc {

enum class RecordMode { none, observables, full_states };

struct SimulationConfig {
    std::size_t L = 32;
    std::size_t replica_count = 16;
    std::uint64_t total_iterations = 50000;
    /// MH iterations between swap rounds; 0 disables swapping.
    std::uint64_t swap_interval = 100;
    std::size_t workers = 4;
    std::uint64_t master_seed = 42;
    IsingParams params{};
    double init_up_fraction = 0.5;
    RecordMode record_mode = RecordMode::observables;
};

inline void validate(const SimulationConfig& c) {
    if (c.L < 2) throw ConfigError("L must be >= 2");
    if (c.replica_count < 1) throw ConfigError("replica_count must be >= 1");
    if (c.total_iterations < 1) throw ConfigError("total_iterations must be >= 1");
    if (c.workers < 1) throw ConfigError("workers must be >= 1");
    if (!std::isfinite(c.params.J)) throw ConfigError("J must be finite");
    if (!std::isfinite(c.params.B)) throw ConfigError("B must be finite");
    if (!(c.init_up_fraction >= 0.0 && c.init_up_fraction <= 1.0)) {
        throw ConfigError("init_up_fraction must be in [0, 1]");
    }
}

/// Observables recorded for one temperature slot, one entry per iteration.
struct ReplicaSeries {
    double temperature = 0.0;
    std::vector<double> energy;
    std::vector<double> magnetization;
    /// Row-major spin snapshots, only in full_states mode.
    std::vector<std::vector<SpinLattice::spin_type>> states;
    std::uint64_t mh_accepted = 0;
};

struct SwapStats {
    std::uint64_t rounds = 0;
    std::uint64_t attempted = 0;
    std::uint64_t accepted = 0;
};

struct PhaseTimings {
    double init_s = 0.0;
    double exec_s = 0.0;
    double total_s = 0.0;
};

struct RunRecord {
    SimulationConfig config;
    std::vector<ReplicaSeries> series;
    SwapStats swaps;
    PhaseTimings timings;
    /// MH steps executed per slot; equals total_iterations on a complete run.
    std::vector<std::uint64_t> steps_executed;
    /// Swap rounds entered while some replica had not finished the interval.
    std::uint64_t barrier_violations = 0;
    bool valid = true;
    std::string error;
};

struct IndexRange {
    std::size_t begin = 0;
    std::size_t end = 0;
    std::size_t size() const noexcept { return end - begin; }
    friend bool operator==(const IndexRange&, const IndexRange&) = default;
};

/// Contiguous blocks whose sizes differ by at most one; the first
/// replica_count % workers blocks take the extra replica.
inline std::vector<IndexRange> assign_replicas(std::size_t replica_count, std::size_t workers) {
    if (workers < 1) throw ConfigError("workers must be >= 1");
    std::vector<IndexRange> blocks;
    blocks.reserve(workers);
    const std::size_t base = replica_count / workers;
    const std::size_t extra = replica_count % workers;
    std::size_t begin = 0;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t n = base + (w < extra ? 1 : 0);
        blocks.push_back({begin, begin + n});
        begin += n;
    }
    return blocks;
}

/// Optional instrumentation. `after_interval(replica, steps_done)` runs on the
/// owning worker after each interval; throwing from it aborts the run.
struct RunHooks {
    std::function<void(std::size_t, std::uint64_t)> after_interval;
};

/// Builds the replica for slot `index` exactly as run() does.
inline Replica make_replica(const SimulationConfig& config, const TemperatureLadder& ladder,
                            std::size_t index) {
    RngStream init_rng(config.master_seed, streams::init(index));
    return Replica(index, ladder[index], init_lattice(config.L, config.init_up_fraction, init_rng),
                   config.params, RngStream(config.master_seed, streams::mh(index)));
}

namespace detail {

inline void record_iteration(ReplicaSeries& s, const Replica& r, RecordMode mode) {
    if (mode == RecordMode::none) return;
    s.energy.push_back(r.energy());
    s.magnetization.push_back(r.magnetization());
    if (mode == RecordMode::full_states) {
        const auto spins = r.lattice().spins();
        s.states.emplace_back(spins.begin(), spins.end());
    }
}

}  // namespace detail

/// Runs the full parallel-tempering simulation.
///
/// Init phase: every worker builds its replicas and performs iteration 0.
/// Execution phase: workers advance their replicas to the next multiple of
/// swap_interval, synchronize, evaluate one swap round (pairs dealt
/// round-robin over workers), and synchronize again, until every replica
/// has executed total_iterations steps. No round is held at iteration N.
/// The record is identical for every worker count.
inline RunRecord run(const SimulationConfig& config, const RunHooks& hooks = {}) {
    validate(config);
    using clock = std::chrono::steady_clock;
    const auto t_start = clock::now();

    const std::size_t R = config.replica_count;
    const std::size_t W = config.workers;
    const std::uint64_t N = config.total_iterations;
    const std::uint64_t I = config.swap_interval;

    const TemperatureLadder ladder = build_ladder(R);
    const auto blocks = assign_replicas(R, W);
    const SwapStreams swap_rng(config.master_seed, R);

    RunRecord record;
    record.config = config;
    record.series.resize(R);
    record.steps_executed.assign(R, 0);
    for (std::size_t i = 0; i < R; ++i) {
        record.series[i].temperature = ladder[i];
        if (config.record_mode != RecordMode::none) {
            record.series[i].energy.reserve(N);
            record.series[i].magnetization.reserve(N);
        }
    }

    std::vector<std::optional<Replica>> replicas(R);
    std::vector<std::uint64_t> swaps_accepted(W, 0);
    std::vector<std::uint64_t> swaps_attempted(W, 0);
    std::atomic<std::uint64_t> violations{0};
    std::uint64_t rounds = 0;

    std::atomic<bool> failed{false};
    std::mutex error_mutex;
    auto fail = [&](const std::string& what) {
        std::lock_guard lock(error_mutex);
        if (!failed.load()) record.error = what;
        failed.store(true);
    };

    std::optional<clock::time_point> t_init_end;
    auto on_phase = [&t_init_end]() noexcept {
        if (!t_init_end) t_init_end = clock::now();
    };
    std::barrier sync(static_cast<std::ptrdiff_t>(W), on_phase);

    auto advance = [&](std::size_t i, std::uint64_t from, std::uint64_t to) {
        Replica& r = *replicas[i];
        ReplicaSeries& s = record.series[i];
        for (std::uint64_t t = from; t < to; ++t) {
            if (mh_step(r, config.params)) ++s.mh_accepted;
            detail::record_iteration(s, r, config.record_mode);
        }
        record.steps_executed[i] += to - from;
        if (hooks.after_interval) hooks.after_interval(i, to);
    };

    auto worker = [&](std::size_t w) {
        const IndexRange mine = blocks[w];
        try {
            for (std::size_t i = mine.begin; i < mine.end; ++i) {
                replicas[i].emplace(make_replica(config, ladder, i));
                advance(i, 0, 1);
            }
        } catch (const std::exception& e) {
            fail(e.what());
        }
        sync.arrive_and_wait();
        if (failed.load()) return;

        std::uint64_t done = 1;
        std::uint64_t round_index = 0;
        while (true) {
            if (I > 0 && done % I == 0 && done < N) {
                const SwapRound round = pairing(round_index, R);
                try {
                    for (std::size_t p = w; p < round.pairs.size(); p += W) {
                        const auto [lo, hi] = round.pairs[p];
                        if (record.steps_executed[lo] != done || record.steps_executed[hi] != done) {
                            violations.fetch_add(1);
                        }
                        ++swaps_attempted[w];
                        if (try_swap(*replicas[lo], *replicas[hi], swap_rng.uniform(round_index, lo))) {
                            ++swaps_accepted[w];
                        }
                    }
                } catch (const std::exception& e) {
                    fail(e.what());
                }
                if (w == 0) ++rounds;
                ++round_index;
                sync.arrive_and_wait();
                if (failed.load()) return;
            }
            if (done >= N) break;

            const std::uint64_t target = I == 0 ? N : std::min(N, (done / I + 1) * I);
            try {
                for (std::size_t i = mine.begin; i < mine.end; ++i) advance(i, done, target);
            } catch (const std::exception& e) {
                fail(e.what());
            }
            done = target;
            if (I == 0) break;
            sync.arrive_and_wait();
            if (failed.load()) return;
        }
    };

    {
        std::vector<std::jthread> pool;
        pool.reserve(W - 1);
        for (std::size_t w = 1; w < W; ++w) pool.emplace_back(worker, w);
        worker(0);
    }
    const auto t_end = clock::now();

    const auto seconds = [](clock::duration d) { return std::chrono::duration<double>(d).count(); };
    const auto init_end = t_init_end.value_or(t_end);
    record.timings.init_s = seconds(init_end - t_start);
    record.timings.exec_s = seconds(t_end - init_end);
    record.timings.total_s = seconds(t_end - t_start);

    record.swaps.rounds = rounds;
    for (std::size_t w = 0; w < W; ++w) {
        record.swaps.attempted += swaps_attempted[w];
        record.swaps.accepted += swaps_accepted[w];
    }
    record.barrier_violations = violations.load();
    record.valid = !failed.load();
    return record;
}

}  // namespace ptmc
