#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "ptmc/bench.hpp"
#include "ptmc/error.hpp"
#include "ptmc/executor.hpp"

namespace ptmc::cli {

/// Bad flags, unreadable config file, or a parameter outside its domain.
class UsageError : public std::runtime_error {
public:
    explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

/// --help was given; what() holds the help text.
class HelpRequested : public std::runtime_error {
public:
    explicit HelpRequested(const std::string& text) : std::runtime_error(text) {}
};

inline std::optional<SimulationConfig> preset(const std::string& name) {
    SimulationConfig c;  // desk: L=32, |R|=16, N=50000, I=100, W=4, seed=42
    if (name == "desk") return c;
    if (name == "paper-small") {
        c.L = 100;
        c.replica_count = 128;
        c.total_iterations = 100000;
        return c;
    }
    if (name == "paper-full") {
        c.L = 300;
        c.replica_count = 1500;
        c.total_iterations = 300000;
        c.swap_interval = 0;
        c.workers = std::max(1u, std::thread::hardware_concurrency());
        return c;
    }
    return std::nullopt;
}

inline std::optional<RecordMode> parse_record_mode(const std::string& s) {
    if (s == "none") return RecordMode::none;
    if (s == "observables") return RecordMode::observables;
    if (s == "full") return RecordMode::full_states;
    return std::nullopt;
}

/// Builds a SweepSpec from command-line arguments (argv[0] excluded).
///
/// Precedence is flags > config file (--config, TOML/INI) > preset > defaults.
/// Recording defaults to observables for single runs and to none for sweeps.
inline bench::SweepSpec parse_config(std::vector<std::string> args) {
    CLI::App app{"Parallel-tempering Metropolis-Hastings sampler for the 2D Ising model", "ptmc_bench"};
    app.set_config("--config", "", "TOML/INI file with option values");

    std::string preset_name = "desk";
    std::size_t size = 0, replicas = 0, workers = 0, reps = 1;
    std::uint64_t iters = 0, swap_interval = 0, seed = 0;
    double J = 0, B = 0, init_up = 0;
    std::string sweep = "single";
    std::vector<std::uint64_t> axis;
    std::string out = "ptmc_out";
    std::string record;

    auto* o_preset = app.add_option("--preset", preset_name, "desk | paper-small | paper-full");
    auto* o_size = app.add_option("--size", size, "lattice side L");
    auto* o_replicas = app.add_option("--replicas", replicas, "replica count |R|");
    auto* o_iters = app.add_option("--iters", iters, "MH iterations per replica N");
    auto* o_swap = app.add_option("--swap-interval", swap_interval, "iterations between swap rounds (0 = off)");
    auto* o_workers = app.add_option("--workers", workers, "worker threads W");
    auto* o_seed = app.add_option("--seed", seed, "master seed");
    auto* o_J = app.add_option("--J", J, "coupling J");
    auto* o_B = app.add_option("--B", B, "external field B");
    auto* o_init = app.add_option("--init-up", init_up, "initial fraction of up spins");
    app.add_option("--sweep", sweep, "single | worker_scaling | replica_scaling | swap_sweep | size_sweep");
    auto* o_axis = app.add_option("--axis", axis, "comma-separated axis values")->delimiter(',');
    app.add_option("--reps", reps, "repetitions per sweep point");
    app.add_option("--out", out, "output directory");
    auto* o_record = app.add_option("--record", record, "none | observables | full");

    std::vector<const char*> argv{"ptmc_bench"};
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        throw HelpRequested(app.help());
    } catch (const CLI::ParseError& e) {
        throw UsageError(e.what());
    }

    bench::SweepSpec spec;
    auto base = preset(preset_name);
    if (!base) throw UsageError("--preset: unknown preset '" + preset_name + "'");
    (void)o_preset;

    auto kind = bench::parse_sweep_kind(sweep);
    if (!kind) throw UsageError("--sweep: unknown kind '" + sweep + "'");
    spec.kind = *kind;

    const auto given = [](const CLI::Option* o) { return o->count() > 0; };
    if (given(o_size)) base->L = size;
    if (given(o_replicas)) base->replica_count = replicas;
    if (given(o_iters)) base->total_iterations = iters;
    if (given(o_swap)) base->swap_interval = swap_interval;
    if (given(o_workers)) base->workers = workers;
    if (given(o_seed)) base->master_seed = seed;
    if (given(o_J)) base->params.J = J;
    if (given(o_B)) base->params.B = B;
    if (given(o_init)) base->init_up_fraction = init_up;

    base->record_mode = spec.kind == bench::SweepKind::single ? RecordMode::observables : RecordMode::none;
    if (given(o_record)) {
        auto mode = parse_record_mode(record);
        if (!mode) throw UsageError("--record: expected none, observables or full, got '" + record + "'");
        base->record_mode = *mode;
    }

    spec.base = *base;
    spec.axis = given(o_axis) ? axis : bench::default_axis(spec.kind);
    spec.repetitions = reps;
    spec.out_dir = out;

    if (spec.base.L < 2) throw UsageError("--size: must be >= 2");
    if (spec.base.replica_count < 1) throw UsageError("--replicas: must be >= 1");
    if (spec.base.total_iterations < 1) throw UsageError("--iters: must be >= 1");
    if (spec.base.workers < 1) throw UsageError("--workers: must be >= 1");
    if (!(spec.base.init_up_fraction >= 0.0 && spec.base.init_up_fraction <= 1.0)) {
        throw UsageError("--init-up: must be in [0, 1]");
    }
    if (spec.repetitions < 1) throw UsageError("--reps: must be >= 1");
    if (spec.kind != bench::SweepKind::single && spec.axis.empty()) throw UsageError("--axis: must be nonempty");
    try {
        bench::validate(spec);
    } catch (const ConfigError& e) {
        throw UsageError(e.what());
    }
    return spec;
}

}  // namespace ptmc::cli
