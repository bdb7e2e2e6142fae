// Command-line driver: trajectory ensembles, population traces and the
// master-equation cross-check.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "rydgrover/config.hpp"
#include "rydgrover/errors.hpp"
#include "rydgrover/experiment.hpp"
#include "rydgrover/schedule.hpp"

namespace {

using namespace rydgrover;

struct Flags {
    std::string config_path;
    std::string preset;
    std::string marked;
    std::optional<std::size_t> k;
    std::string scheme;
    std::optional<std::size_t> iterations;
    std::optional<std::size_t> trajectories;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string estimator;
    bool count_rydberg = false;
    std::optional<std::size_t> threads;
    std::optional<double> resolution;
    std::string dump_schedule;
    // trace
    std::optional<double> trace_interval_ns;
    std::string trace_mode;
    std::optional<std::uint64_t> trace_trajectory;
    // mecheck
    double rate_scale = 1.0;
};

void add_common(CLI::App* cmd, Flags& f) {
    cmd->add_option("--config", f.config_path, "JSON config file")->check(CLI::ExistingFile);
    cmd->add_option("--preset", f.preset, "a1 b1 c1 a2 b2 c2 ideal");
    cmd->add_option("--marked", f.marked, "marked bitstring, atom 0 first");
    cmd->add_option("--k", f.k, "register size");
    cmd->add_option("--scheme", f.scheme, "direct|ancilla");
    cmd->add_option("--iterations", f.iterations, "Grover iterations");
    cmd->add_option("--trajectories", f.trajectories, "trajectory count");
    cmd->add_option("--seed", f.seed, "master seed (required)");
    cmd->add_option("--out", f.out, "output CSV path (default stdout)");
    cmd->add_option("--estimator", f.estimator, "expectation|sampling");
    cmd->add_flag("--count-rydberg-as-nonzero", f.count_rydberg, "read atoms left in r as 'not 0'");
    cmd->add_option("--threads", f.threads, "worker threads");
    cmd->add_option("--resolution", f.resolution, "substep resolution (fraction of the fastest period)");
    cmd->add_option("--dump-schedule", f.dump_schedule, "write the compiled pulse table to this path");
}

config::ExperimentConfig build_config(const Flags& f) {
    config::ExperimentConfig cfg = config::default_config();
    if (!f.config_path.empty()) cfg = config::load(f.config_path, cfg);
    if (!f.preset.empty()) {
        cfg.physics = config::preset(f.preset);
        cfg.preset = f.preset;
    }
    if (!f.marked.empty()) {
        cfg.marked = f.marked;
        if (!f.k) cfg.k = f.marked.size();
    }
    if (f.k) cfg.k = *f.k;
    if (!f.scheme.empty()) cfg.scheme = config::parse_scheme(f.scheme);
    if (f.iterations) cfg.run.iterations = *f.iterations;
    if (f.trajectories) cfg.run.trajectories = *f.trajectories;
    if (f.seed) cfg.run.seed = *f.seed;
    if (!f.out.empty()) cfg.run.out = f.out;
    if (!f.estimator.empty()) {
        try {
            cfg.run.estimator = analysis::parse_estimator(f.estimator);
        } catch (const std::invalid_argument& e) {
            throw ConfigError("estimator", e.what());
        }
    }
    if (f.count_rydberg) cfg.run.count_rydberg_as_nonzero = true;
    if (f.threads) cfg.run.threads = *f.threads;
    if (f.resolution) cfg.run.resolution = *f.resolution;
    if (f.trace_interval_ns) cfg.run.trace_interval_ns = *f.trace_interval_ns;
    if (!f.trace_mode.empty()) cfg.run.trace_mode = f.trace_mode;
    if (f.trace_trajectory) cfg.run.trace_trajectory = *f.trace_trajectory;
    return cfg;
}

void write_output(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ConfigError("out", "cannot write '" + path + "'");
    os << text;
    if (!os) throw ConfigError("out", "write to '" + path + "' failed");
}

void maybe_dump_schedule(const Flags& f, const config::ExperimentConfig& cfg) {
    if (f.dump_schedule.empty()) return;
    const auto resolved = config::resolve(cfg);
    write_output(f.dump_schedule, schedule::dump_table(resolved.build_schedule(cfg.run.iterations)));
}

void print_warnings(const std::vector<std::string>& warnings) {
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Rydberg-blockade Grover search simulator"};
    app.require_subcommand(1);
    Flags flags;

    auto* run = app.add_subcommand("run", "trajectory ensemble, success probability per iteration");
    auto* trace = app.add_subcommand("trace", "population time series of one trajectory or the master equation");
    auto* mecheck = app.add_subcommand("mecheck", "compare the trajectory ensemble against the master equation");
    for (auto* cmd : {run, trace, mecheck}) add_common(cmd, flags);
    trace->add_option("--trace-interval-ns", flags.trace_interval_ns, "row spacing (0 = every substep)");
    trace->add_option("--mode", flags.trace_mode, "trajectory|me");
    trace->add_option("--trajectory", flags.trace_trajectory, "trajectory id to trace");
    mecheck->add_option("--rate-scale", flags.rate_scale, "scale trajectory-side rates (sensitivity fixture)")
        ->group("");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        const auto cfg = build_config(flags);
        maybe_dump_schedule(flags, cfg);

        if (run->parsed()) {
            const auto out = experiment::run_ensemble(cfg);
            print_warnings(out.warnings);
            write_output(cfg.run.out, out.csv);
            for (const auto& it : out.stats.iterations)
                std::fprintf(stderr, "iteration %zu: p = %.6f +/- %.6f (n = %zu)\n", it.iteration, it.p,
                             it.std_err, it.n);
            std::fprintf(stderr, "runtime %.2f s\n", out.runtime_s);
            return 0;
        }
        if (trace->parsed()) {
            print_warnings(config::resolve(cfg).warnings);
            write_output(cfg.run.out, experiment::run_trace(cfg));
            return 0;
        }
        const auto start = std::chrono::steady_clock::now();
        const auto report = experiment::run_mecheck(cfg, flags.rate_scale);
        write_output(cfg.run.out, report.csv);
        for (const auto& r : report.rows)
            std::fprintf(stderr, "iteration %zu: me %.6f mcwf %.6f se %.6f z %.3f %s\n", r.iteration, r.me, r.mcwf,
                         r.std_err, r.z, r.pass ? "ok" : "FAIL");
        std::fprintf(stderr, "mecheck %s, runtime %.2f s\n", report.pass ? "passed" : "failed",
                     std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
        return report.pass ? 0 : 2;
    } catch (const IntegrationFault& e) {
        std::cerr << "integration fault: " << e.what() << "\n";
        return 3;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
