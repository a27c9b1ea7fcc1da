#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "ptmc/error.hpp"
#include "ptmc/executor.hpp"
#include "ptmc/rng.hpp"

namespace ptmc::bench {

enum class SweepKind { single, worker_scaling, replica_scaling, swap_sweep, size_sweep };

inline std::string_view to_string(SweepKind k) {
    switch (k) {
        case SweepKind::single: return "single";
        case SweepKind::worker_scaling: return "worker_scaling";
        case SweepKind::replica_scaling: return "replica_scaling";
        case SweepKind::swap_sweep: return "swap_sweep";
        case SweepKind::size_sweep: return "size_sweep";
    }
    return "single";
}

inline std::optional<SweepKind> parse_sweep_kind(std::string_view s) {
    for (auto k : {SweepKind::single, SweepKind::worker_scaling, SweepKind::replica_scaling,
                   SweepKind::swap_sweep, SweepKind::size_sweep}) {
        if (s == to_string(k)) return k;
    }
    return std::nullopt;
}

inline std::vector<std::uint64_t> default_axis(SweepKind k) {
    switch (k) {
        case SweepKind::single: return {};
        case SweepKind::worker_scaling: return {1, 2, 4, 8};
        case SweepKind::replica_scaling: return {16, 32, 64, 128};
        case SweepKind::swap_sweep: return {0, 100, 1000, 10000};
        case SweepKind::size_sweep: return {8, 12, 16, 24, 32};
    }
    return {};
}

struct SweepSpec {
    SweepKind kind = SweepKind::single;
    SimulationConfig base{};
    std::vector<std::uint64_t> axis;
    std::size_t repetitions = 1;
    std::filesystem::path out_dir = "ptmc_out";
};

inline void validate(const SweepSpec& spec) {
    validate(spec.base);
    if (spec.repetitions < 1) throw ConfigError("reps must be >= 1");
    if (spec.kind != SweepKind::single && spec.axis.empty()) throw ConfigError("axis must be nonempty");
}

/// One configuration per sweep point, in axis order.
inline std::vector<SimulationConfig> sweep_points(const SweepSpec& spec) {
    if (spec.kind == SweepKind::single) return {spec.base};
    std::vector<SimulationConfig> out;
    for (auto v : spec.axis) {
        SimulationConfig c = spec.base;
        switch (spec.kind) {
            case SweepKind::worker_scaling: c.workers = v; break;
            case SweepKind::replica_scaling: c.replica_count = v; break;
            case SweepKind::swap_sweep: c.swap_interval = v; break;
            case SweepKind::size_sweep: c.L = v; break;
            case SweepKind::single: break;
        }
        out.push_back(c);
    }
    return out;
}

/// Seed for (point, repetition). Worker-scaling points share seeds so that
/// every worker count simulates the same chains.
inline std::uint64_t repetition_seed(std::uint64_t master_seed, SweepKind kind, std::size_t point,
                                     std::size_t rep) {
    const std::uint64_t point_key = kind == SweepKind::worker_scaling ? 0 : point;
    return hash_combine(hash_combine(master_seed, point_key), rep);
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

inline constexpr std::string_view kTimingsHeader =
    "sweep_point,rep,workers,replicas,L,iters,swap_interval,seed,init_s,exec_s,total_s,"
    "swaps_attempted,swaps_accepted,status";
inline constexpr std::string_view kObservablesHeader = "replica,temperature,iteration,energy,magnetization";

struct TimingRow {
    std::size_t sweep_point = 0;
    std::size_t rep = 0;
    std::size_t workers = 0;
    std::size_t replicas = 0;
    std::size_t L = 0;
    std::uint64_t iters = 0;
    std::uint64_t swap_interval = 0;
    std::uint64_t seed = 0;
    double init_s = 0.0;
    double exec_s = 0.0;
    double total_s = 0.0;
    std::uint64_t swaps_attempted = 0;
    std::uint64_t swaps_accepted = 0;
    std::string status = "ok";

    bool ok() const noexcept { return status == "ok"; }
    friend bool operator==(const TimingRow&, const TimingRow&) = default;
};

/// Shortest round-trip representation.
inline void append_number(std::string& out, double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    out.append(buf, res.ptr);
}

inline void append_number(std::string& out, std::uint64_t v) {
    char buf[24];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    out.append(buf, res.ptr);
}

inline std::string to_csv(const TimingRow& r) {
    std::string s;
    const auto field = [&s](auto v) {
        append_number(s, v);
        s.push_back(',');
    };
    field(std::uint64_t{r.sweep_point});
    field(std::uint64_t{r.rep});
    field(std::uint64_t{r.workers});
    field(std::uint64_t{r.replicas});
    field(std::uint64_t{r.L});
    field(r.iters);
    field(r.swap_interval);
    field(r.seed);
    field(r.init_s);
    field(r.exec_s);
    field(r.total_s);
    field(r.swaps_attempted);
    field(r.swaps_accepted);
    s += r.status;
    return s;
}

namespace detail {

inline std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

template <typename T>
T parse_field(std::string_view text, std::string_view name) {
    T v{};
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
        throw ConfigError("malformed CSV field '" + std::string(name) + "': " + std::string(text));
    }
    return v;
}

}  // namespace detail

inline TimingRow parse_timing_row(std::string_view line) {
    const auto f = detail::split(line, ',');
    if (f.size() != 14) throw ConfigError("timings row must have 14 fields");
    using detail::parse_field;
    TimingRow r;
    r.sweep_point = parse_field<std::size_t>(f[0], "sweep_point");
    r.rep = parse_field<std::size_t>(f[1], "rep");
    r.workers = parse_field<std::size_t>(f[2], "workers");
    r.replicas = parse_field<std::size_t>(f[3], "replicas");
    r.L = parse_field<std::size_t>(f[4], "L");
    r.iters = parse_field<std::uint64_t>(f[5], "iters");
    r.swap_interval = parse_field<std::uint64_t>(f[6], "swap_interval");
    r.seed = parse_field<std::uint64_t>(f[7], "seed");
    r.init_s = parse_field<double>(f[8], "init_s");
    r.exec_s = parse_field<double>(f[9], "exec_s");
    r.total_s = parse_field<double>(f[10], "total_s");
    r.swaps_attempted = parse_field<std::uint64_t>(f[11], "swaps_attempted");
    r.swaps_accepted = parse_field<std::uint64_t>(f[12], "swaps_accepted");
    r.status = std::string(f[13]);
    return r;
}

inline std::vector<TimingRow> read_timings(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line) || line != kTimingsHeader) {
        throw ConfigError("unexpected timings header in " + path.string());
    }
    std::vector<TimingRow> rows;
    while (std::getline(in, line)) {
        if (!line.empty()) rows.push_back(parse_timing_row(line));
    }
    return rows;
}

inline void write_observables(std::ostream& out, const RunRecord& record) {
    out << kObservablesHeader << '\n';
    std::string line;
    for (std::size_t i = 0; i < record.series.size(); ++i) {
        const auto& s = record.series[i];
        for (std::size_t t = 0; t < s.energy.size(); ++t) {
            line.clear();
            append_number(line, std::uint64_t{i});
            line.push_back(',');
            append_number(line, s.temperature);
            line.push_back(',');
            append_number(line, std::uint64_t{t});
            line.push_back(',');
            append_number(line, s.energy[t]);
            line.push_back(',');
            append_number(line, s.magnetization[t]);
            line.push_back('\n');
            out << line;
        }
    }
}

// ---------------------------------------------------------------------------
// Aggregation
// ---------------------------------------------------------------------------

struct Moments {
    double mean = 0.0;
    double stddev = 0.0;
    std::size_t n = 0;
};

/// Mean and sample standard deviation (zero for a single value).
inline Moments moments(const std::vector<double>& xs) {
    Moments m;
    m.n = xs.size();
    if (xs.empty()) return m;
    double sum = 0.0;
    for (double x : xs) sum += x;
    m.mean = sum / static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - m.mean) * (x - m.mean);
        m.stddev = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    }
    return m;
}

inline std::vector<double> ok_totals(const std::vector<TimingRow>& rows, std::size_t point) {
    std::vector<double> out;
    for (const auto& r : rows) {
        if (r.sweep_point == point && r.ok()) out.push_back(r.total_s);
    }
    return out;
}

struct SpeedupRow {
    std::size_t point = 0;
    double mean_speedup = 0.0;
    double stddev = 0.0;
};

/// Speed-up of every point relative to `baseline`: baseline mean total time
/// over the point's mean total time. The spread is the sample standard
/// deviation of baseline_mean / total over the point's rows.
inline std::vector<SpeedupRow> emit_speedup_table(const std::vector<TimingRow>& rows, std::size_t baseline) {
    const auto base = moments(ok_totals(rows, baseline));
    if (base.n == 0) throw AnalysisError("baseline point has no successful rows");

    std::vector<std::size_t> points;
    for (const auto& r : rows) {
        if (std::find(points.begin(), points.end(), r.sweep_point) == points.end()) {
            points.push_back(r.sweep_point);
        }
    }
    std::sort(points.begin(), points.end());

    std::vector<SpeedupRow> table;
    for (auto p : points) {
        const auto totals = ok_totals(rows, p);
        if (totals.empty()) continue;
        std::vector<double> ratios;
        for (double t : totals) ratios.push_back(base.mean / t);
        table.push_back({p, base.mean / moments(totals).mean, moments(ratios).stddev});
    }
    return table;
}

/// Point index whose rows ran with one worker, if any.
inline std::optional<std::size_t> single_worker_point(const std::vector<TimingRow>& rows) {
    for (const auto& r : rows) {
        if (r.workers == 1) return r.sweep_point;
    }
    return std::nullopt;
}

inline nlohmann::json summarize(const SweepSpec& spec, const std::vector<TimingRow>& rows) {
    using nlohmann::json;
    std::map<std::size_t, double> speedups;
    if (spec.kind == SweepKind::worker_scaling) {
        if (auto base = single_worker_point(rows); base && !ok_totals(rows, *base).empty()) {
            for (const auto& s : emit_speedup_table(rows, *base)) speedups[s.point] = s.mean_speedup;
        }
    }

    json points = json::array();
    const auto configs = sweep_points(spec);
    for (std::size_t p = 0; p < configs.size(); ++p) {
        const auto m = moments(ok_totals(rows, p));
        std::uint64_t attempted = 0;
        std::uint64_t accepted = 0;
        std::size_t failed = 0;
        for (const auto& r : rows) {
            if (r.sweep_point != p) continue;
            if (!r.ok()) {
                ++failed;
                continue;
            }
            attempted += r.swaps_attempted;
            accepted += r.swaps_accepted;
        }
        json j;
        j["point"] = p;
        j["workers"] = configs[p].workers;
        j["replicas"] = configs[p].replica_count;
        j["L"] = configs[p].L;
        j["iters"] = configs[p].total_iterations;
        j["swap_interval"] = configs[p].swap_interval;
        j["runs_ok"] = m.n;
        j["runs_failed"] = failed;
        j["mean_total_s"] = m.n ? json(m.mean) : json(nullptr);
        j["std_total_s"] = m.n ? json(m.stddev) : json(nullptr);
        j["speedup"] = speedups.count(p) ? json(speedups[p]) : json(nullptr);
        j["swap_accept_rate"] =
            attempted ? json(static_cast<double>(accepted) / static_cast<double>(attempted)) : json(nullptr);
        points.push_back(std::move(j));
    }
    json out;
    out["kind"] = std::string(to_string(spec.kind));
    out["repetitions"] = spec.repetitions;
    out["master_seed"] = spec.base.master_seed;
    out["speedup_baseline"] = spec.kind == SweepKind::worker_scaling ? json("workers=1") : json(nullptr);
    out["points"] = std::move(points);
    return out;
}

// ---------------------------------------------------------------------------
// Driver
// ---------------------------------------------------------------------------

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitPartialFailure = 2 };

struct SweepResult {
    std::vector<TimingRow> rows;
    nlohmann::json summary;
    int exit_code = kExitOk;
};

inline std::filesystem::path observables_path(const SweepSpec& spec, std::size_t point, std::size_t rep) {
    if (spec.kind == SweepKind::single && spec.repetitions == 1) return spec.out_dir / "observables.csv";
    return spec.out_dir /
           ("observables_p" + std::to_string(point) + "_r" + std::to_string(rep) + ".csv");
}

/// Runs every (point, repetition) sequentially and writes timings.csv,
/// summary.json and, unless recording is off, per-run observables files.
/// A failing run is recorded with status "failed" and the sweep continues.
inline SweepResult run_sweep(const SweepSpec& spec) {
    validate(spec);
    std::filesystem::create_directories(spec.out_dir);
    std::ofstream timings(spec.out_dir / "timings.csv");
    if (!timings) throw ConfigError("cannot write to " + spec.out_dir.string());
    timings << kTimingsHeader << '\n';

    SweepResult result;
    const auto configs = sweep_points(spec);
    for (std::size_t p = 0; p < configs.size(); ++p) {
        for (std::size_t rep = 0; rep < spec.repetitions; ++rep) {
            SimulationConfig cfg = configs[p];
            cfg.master_seed = repetition_seed(spec.base.master_seed, spec.kind, p, rep);

            TimingRow row;
            row.sweep_point = p;
            row.rep = rep;
            row.workers = cfg.workers;
            row.replicas = cfg.replica_count;
            row.L = cfg.L;
            row.iters = cfg.total_iterations;
            row.swap_interval = cfg.swap_interval;
            row.seed = cfg.master_seed;
            try {
                const RunRecord rec = run(cfg);
                row.init_s = rec.timings.init_s;
                row.exec_s = rec.timings.exec_s;
                row.total_s = rec.timings.total_s;
                row.swaps_attempted = rec.swaps.attempted;
                row.swaps_accepted = rec.swaps.accepted;
                row.status = rec.valid ? "ok" : "failed";
                if (rec.valid && cfg.record_mode != RecordMode::none) {
                    std::ofstream obs(observables_path(spec, p, rep));
                    write_observables(obs, rec);
                }
            } catch (const std::exception&) {
                row.status = "failed";
            }
            if (!row.ok()) result.exit_code = kExitPartialFailure;
            timings << to_csv(row) << '\n' << std::flush;
            result.rows.push_back(std::move(row));
        }
    }

    result.summary = summarize(spec, result.rows);
    std::ofstream(spec.out_dir / "summary.json") << result.summary.dump(2) << '\n';
    return result;
}

}  // namespace ptmc::bench
