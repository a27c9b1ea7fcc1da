#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "ptmc/bench.hpp"
#include "ptmc/cli.hpp"

using namespace ptmc;
using namespace ptmc::bench;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("ptmc_test_" + name);
    fs::remove_all(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

SweepSpec tiny_spec(SweepKind kind, std::vector<std::uint64_t> axis, const std::string& dir) {
    SweepSpec spec;
    spec.kind = kind;
    spec.axis = std::move(axis);
    spec.base.L = 8;
    spec.base.replica_count = 4;
    spec.base.total_iterations = 2000;
    spec.base.swap_interval = 100;
    spec.base.workers = 1;
    spec.base.record_mode = RecordMode::none;
    spec.out_dir = scratch_dir(dir);
    return spec;
}

TimingRow row(std::size_t point, std::size_t rep, double total) {
    TimingRow r;
    r.sweep_point = point;
    r.rep = rep;
    r.total_s = total;
    return r;
}

}  // namespace

TEST(TimingRowCsv, PropertyRoundTrip) {
    RngStream rng(1, 1);
    for (int i = 0; i < 500; ++i) {
        TimingRow r;
        r.sweep_point = rng.below(100);
        r.rep = rng.below(10);
        r.workers = 1 + rng.below(64);
        r.replicas = 1 + rng.below(2000);
        r.L = 2 + rng.below(300);
        r.iters = rng.next_u64() >> 20;
        r.swap_interval = rng.below(10001);
        r.seed = rng.next_u64();
        r.init_s = rng.uniform() * 1e-3;
        r.exec_s = rng.uniform() * 1e4;
        r.total_s = r.init_s + r.exec_s;
        r.swaps_attempted = rng.below(1u << 30);
        r.swaps_accepted = r.swaps_attempted / 3;
        r.status = rng.below(2) ? "ok" : "failed";
        ASSERT_EQ(parse_timing_row(to_csv(r)), r);
    }
}

TEST(TimingRowCsv, RejectsMalformedRows) {
    EXPECT_THROW(parse_timing_row("1,2,3"), ConfigError);
    EXPECT_THROW(parse_timing_row("x,0,1,4,8,100,0,1,0.1,0.2,0.3,0,0,ok"), ConfigError);
}

TEST(SpeedupTable, BaselineAgainstItselfIsOne) {
    const std::vector<TimingRow> rows{row(0, 0, 2.0), row(0, 1, 3.0)};
    const auto t = emit_speedup_table(rows, 0);
    ASSERT_EQ(t.size(), 1u);
    EXPECT_EQ(t[0].mean_speedup, 1.0);
}

TEST(SpeedupTable, Arithmetic) {
    const std::vector<TimingRow> rows{row(0, 0, 100.0), row(1, 0, 25.0)};
    const auto t = emit_speedup_table(rows, 0);
    ASSERT_EQ(t.size(), 2u);
    EXPECT_EQ(t[1].point, 1u);
    EXPECT_EQ(t[1].mean_speedup, 4.0);
    EXPECT_EQ(t[1].stddev, 0.0);
}

TEST(SpeedupTable, MissingBaselineIsAnError) {
    const std::vector<TimingRow> rows{row(1, 0, 25.0)};
    EXPECT_THROW(emit_speedup_table(rows, 0), AnalysisError);
    auto failed = row(0, 0, 10.0);
    failed.status = "failed";
    EXPECT_THROW(emit_speedup_table({failed, row(1, 0, 5.0)}, 0), AnalysisError);
}

TEST(Moments, SampleStatistics) {
    const auto m = moments({1.0, 2.0, 3.0});
    EXPECT_EQ(m.n, 3u);
    EXPECT_EQ(m.mean, 2.0);
    EXPECT_EQ(m.stddev, 1.0);
    EXPECT_EQ(moments({5.0}).stddev, 0.0);
}

TEST(RepetitionSeed, StableAndWorkerIndependent) {
    EXPECT_EQ(repetition_seed(42, SweepKind::worker_scaling, 0, 2),
              repetition_seed(42, SweepKind::worker_scaling, 3, 2));
    EXPECT_NE(repetition_seed(42, SweepKind::size_sweep, 0, 2), repetition_seed(42, SweepKind::size_sweep, 3, 2));
    EXPECT_NE(repetition_seed(42, SweepKind::single, 0, 0), repetition_seed(42, SweepKind::single, 0, 1));
}

TEST(RunSweep, WorkerScalingSummaryRecomputesFromCsv) {
    auto spec = tiny_spec(SweepKind::worker_scaling, {1, 2}, "workers");
    spec.repetitions = 2;
    const auto result = run_sweep(spec);
    EXPECT_EQ(result.exit_code, kExitOk);

    const auto rows = read_timings(spec.out_dir / "timings.csv");
    ASSERT_EQ(rows.size(), 4u);
    EXPECT_EQ(rows, result.rows);
    EXPECT_EQ(rows[0].seed, rows[2].seed);  // same chains for every worker count

    std::ifstream js(spec.out_dir / "summary.json");
    const auto summary = nlohmann::json::parse(js);
    const double t1 = moments(ok_totals(rows, 0)).mean;
    const double t2 = moments(ok_totals(rows, 1)).mean;
    EXPECT_EQ(summary["points"][0]["speedup"].get<double>(), 1.0);
    EXPECT_EQ(summary["points"][1]["speedup"].get<double>(), t1 / t2);
    EXPECT_EQ(summary["points"][1]["mean_total_s"].get<double>(), t2);
    for (const auto& r : rows) EXPECT_GE(r.total_s + 1e-3, r.init_s + r.exec_s);
}

TEST(RunSweep, SwapSweepHasFourIntervalGroups) {
    auto spec = tiny_spec(SweepKind::swap_sweep, {0, 100, 1000, 10000}, "swap");
    const auto result = run_sweep(spec);
    ASSERT_EQ(result.rows.size(), 4u);
    const std::vector<std::uint64_t> intervals{0, 100, 1000, 10000};
    for (std::size_t p = 0; p < 4; ++p) {
        EXPECT_EQ(result.rows[p].sweep_point, p);
        EXPECT_EQ(result.rows[p].swap_interval, intervals[p]);
    }
    EXPECT_EQ(result.rows[0].swaps_attempted, 0u);
    EXPECT_GT(result.rows[1].swaps_attempted, 0u);
    EXPECT_EQ(result.summary["points"][0]["swap_accept_rate"], nullptr);
    EXPECT_EQ(result.summary["points"][1]["speedup"], nullptr);
}

TEST(RunSweep, RepetitionsAggregateExactlyThreeRows) {
    auto spec = tiny_spec(SweepKind::replica_scaling, {2, 4}, "reps");
    spec.repetitions = 3;
    const auto result = run_sweep(spec);
    for (std::size_t p = 0; p < 2; ++p) {
        const auto totals = ok_totals(result.rows, p);
        ASSERT_EQ(totals.size(), 3u);
        const auto m = moments(totals);
        EXPECT_EQ(result.summary["points"][p]["mean_total_s"].get<double>(), m.mean);
        EXPECT_EQ(result.summary["points"][p]["std_total_s"].get<double>(), m.stddev);
        EXPECT_EQ(result.summary["points"][p]["runs_ok"].get<std::size_t>(), 3u);
    }
}

TEST(RunSweep, FailedPointIsRecordedAndSweepContinues) {
    auto spec = tiny_spec(SweepKind::size_sweep, {1, 6}, "fail");
    const auto result = run_sweep(spec);
    EXPECT_EQ(result.exit_code, kExitPartialFailure);
    ASSERT_EQ(result.rows.size(), 2u);
    EXPECT_EQ(result.rows[0].status, "failed");
    EXPECT_EQ(result.rows[1].status, "ok");
    EXPECT_EQ(result.summary["points"][0]["runs_failed"].get<std::size_t>(), 1u);
}

TEST(RunSweep, ObservablesReproduceBitForBit) {
    auto a = tiny_spec(SweepKind::single, {}, "obs_a");
    a.base.record_mode = RecordMode::observables;
    auto b = a;
    b.out_dir = scratch_dir("obs_b");
    b.base.workers = 3;
    run_sweep(a);
    run_sweep(b);
    const auto text = slurp(a.out_dir / "observables.csv");
    EXPECT_EQ(text, slurp(b.out_dir / "observables.csv"));
    EXPECT_EQ(text.substr(0, text.find('\n')), kObservablesHeader);
    // 4 replicas x 2000 iterations + header
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 8001);
}

TEST(RunSweep, AddingRepetitionsKeepsEarlierSeeds) {
    auto spec = tiny_spec(SweepKind::size_sweep, {4, 6}, "seeds2");
    spec.repetitions = 2;
    const auto two = run_sweep(spec).rows;
    spec.repetitions = 3;
    spec.out_dir = scratch_dir("seeds3");
    const auto three = run_sweep(spec).rows;
    EXPECT_EQ(two[0].seed, three[0].seed);
    EXPECT_EQ(two[1].seed, three[1].seed);
    EXPECT_EQ(two[2].seed, three[3].seed);
}

// ---------------------------------------------------------------------------
// parse_config
// ---------------------------------------------------------------------------

TEST(ParseConfig, LargeBenchmarkFlags) {
    const auto spec = cli::parse_config({"--size", "300", "--iters", "300000", "--J", "1", "--B", "0"});
    EXPECT_EQ(spec.base.L, 300u);
    EXPECT_EQ(spec.base.total_iterations, 300000u);
    EXPECT_EQ(spec.base.params.J, 1.0);
    EXPECT_EQ(spec.base.params.B, 0.0);
}

TEST(ParseConfig, DefaultsAreDeskPreset) {
    const auto spec = cli::parse_config({});
    EXPECT_EQ(spec.kind, SweepKind::single);
    EXPECT_EQ(spec.base.L, 32u);
    EXPECT_EQ(spec.base.replica_count, 16u);
    EXPECT_EQ(spec.base.total_iterations, 50000u);
    EXPECT_EQ(spec.base.swap_interval, 100u);
    EXPECT_EQ(spec.base.workers, 4u);
    EXPECT_EQ(spec.base.master_seed, 42u);
    EXPECT_EQ(spec.base.record_mode, RecordMode::observables);
}

TEST(ParseConfig, Presets) {
    const auto small = cli::parse_config({"--preset", "paper-small"});
    EXPECT_EQ(small.base.L, 100u);
    EXPECT_EQ(small.base.replica_count, 128u);
    EXPECT_EQ(small.base.total_iterations, 100000u);
    const auto full = cli::parse_config({"--preset", "paper-full", "--workers", "2"});
    EXPECT_EQ(full.base.L, 300u);
    EXPECT_EQ(full.base.replica_count, 1500u);
    EXPECT_EQ(full.base.total_iterations, 300000u);
    EXPECT_EQ(full.base.workers, 2u);
    EXPECT_THROW(cli::parse_config({"--preset", "huge"}), cli::UsageError);
}

TEST(ParseConfig, SweepAxisAndRecordDefaults) {
    const auto spec = cli::parse_config({"--sweep", "swap_sweep", "--reps", "3"});
    EXPECT_EQ(spec.axis, (std::vector<std::uint64_t>{0, 100, 1000, 10000}));
    EXPECT_EQ(spec.repetitions, 3u);
    EXPECT_EQ(spec.base.record_mode, RecordMode::none);
    const auto custom = cli::parse_config({"--sweep", "worker_scaling", "--axis", "1,3", "--record", "observables"});
    EXPECT_EQ(custom.axis, (std::vector<std::uint64_t>{1, 3}));
    EXPECT_EQ(custom.base.record_mode, RecordMode::observables);
}

TEST(ParseConfig, UsageErrorsNameTheField) {
    const auto message = [](std::vector<std::string> args) {
        try {
            cli::parse_config(std::move(args));
        } catch (const cli::UsageError& e) {
            return std::string(e.what());
        }
        return std::string("no error");
    };
    EXPECT_NE(message({"--workers", "0"}).find("--workers"), std::string::npos);
    EXPECT_NE(message({"--size", "1"}).find("--size"), std::string::npos);
    EXPECT_NE(message({"--reps", "0"}).find("--reps"), std::string::npos);
    EXPECT_NE(message({"--init-up", "1.5"}).find("--init-up"), std::string::npos);
    EXPECT_NE(message({"--record", "everything"}).find("--record"), std::string::npos);
    EXPECT_NE(message({"--sweep", "bogus"}).find("--sweep"), std::string::npos);
    EXPECT_NE(message({"--frobnicate", "1"}).find("frobnicate"), std::string::npos);
    EXPECT_NE(message({"--config", "/nonexistent/ptmc.toml"}).find("ptmc.toml"), std::string::npos);
}

TEST(ParseConfig, FlagsOverrideConfigFileOverridesPreset) {
    const auto dir = scratch_dir("config");
    fs::create_directories(dir);
    const auto file = dir / "run.toml";
    std::ofstream(file) << "preset = \"paper-small\"\nsize = 20\nreplicas = 12\nseed = 9\n";
    const auto spec = cli::parse_config({"--config", file.string(), "--replicas", "5"});
    EXPECT_EQ(spec.base.total_iterations, 100000u);  // from preset
    EXPECT_EQ(spec.base.L, 20u);                     // from file
    EXPECT_EQ(spec.base.master_seed, 9u);            // from file
    EXPECT_EQ(spec.base.replica_count, 5u);          // flag wins
}

TEST(ParseConfig, HelpIsNotAnError) {
    EXPECT_THROW(cli::parse_config({"--help"}), cli::HelpRequested);
}
