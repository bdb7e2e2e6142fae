#include "rydgrover/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "rydgrover/errors.hpp"
#include "rydgrover/mcwf.hpp"
#include "rydgrover/mesolve.hpp"
#include "rydgrover/random.hpp"

namespace rydgrover::experiment {

std::uint64_t require_seed(const config::ExperimentConfig& cfg) {
    if (!cfg.run.seed) throw ConfigError("run.seed", "a master seed is required");
    return *cfg.run.seed;
}

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

namespace {

std::string header_comment(const config::ExperimentConfig& cfg, std::string_view kind) {
    std::ostringstream os;
    os << "# rydgrover " << kind << " k=" << cfg.k << " scheme=" << hilbert::to_string(cfg.scheme)
       << " marked=" << cfg.marked << " preset=" << (cfg.preset.empty() ? "custom" : cfg.preset)
       << " iterations=" << cfg.run.iterations << " trajectories=" << cfg.run.trajectories
       << " estimator=" << analysis::to_string(cfg.run.estimator)
       << " count_rydberg=" << (cfg.run.count_rydberg_as_nonzero ? 1 : 0)
       << " seed=" << (cfg.run.seed ? std::to_string(*cfg.run.seed) : "none") << " rng=" << RngStream::kScheme
       << "\n";
    return os.str();
}

double elapsed(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

std::string ensemble_csv(const analysis::EnsembleStats& stats, const config::ExperimentConfig& cfg) {
    std::string out = header_comment(cfg, "ensemble");
    out += "iteration,success_prob,std_err,n_traj\n";
    for (const auto& it : stats.iterations) {
        out += std::to_string(it.iteration) + "," + format_double(it.p) + "," + format_double(it.std_err) + "," +
               std::to_string(it.n) + "\n";
    }
    return out;
}

EnsembleOutput run_ensemble(const config::ExperimentConfig& cfg) {
    const auto start = std::chrono::steady_clock::now();
    const std::uint64_t seed = require_seed(cfg);
    const auto resolved = config::resolve(cfg);
    const auto model = resolved.build_model();
    const auto sched = resolved.build_schedule(cfg.run.iterations);
    mcwf::PropagatorCache cache(model, {.resolution = cfg.run.resolution});
    const auto results = mcwf::run_ensemble(sched, cache, seed, cfg.run.trajectories, cfg.run.threads);

    EnsembleOutput out;
    out.stats = analysis::aggregate(results, resolved.reg.marked, resolved.policy, cfg.run.estimator);
    out.csv = ensemble_csv(out.stats, cfg);
    out.warnings = resolved.warnings;
    out.runtime_s = elapsed(start);
    return out;
}

namespace {

class TraceWriter {
public:
    TraceWriter(const hilbert::RegisterConfig& reg, double interval) : reg_(reg), interval_(interval) {
        const auto layout = reg.layout();
        os_ << "time_s";
        static constexpr const char* kLevels[] = {"q0", "q1", "r", "o"};
        for (std::size_t j = 0; j < reg.k; ++j)
            for (const char* l : kLevels) os_ << ",pop_" << j << "_" << l;
        if (layout.ancilla) os_ << ",pop_anc_g,pop_anc_R";
        os_ << ",mw_amp,mw_phase";
        for (std::size_t j = 0; j < reg.k; ++j) os_ << ",det_" << j;
        for (std::size_t j = 0; j < reg.k; ++j) os_ << ",laser_amp_" << j << ",laser_phase_" << j;
        if (layout.ancilla) os_ << ",anc_laser_amp,anc_laser_phase";
        os_ << "\n";
    }

    // Writes a row when at least one interval has passed since the last one.
    void offer(double time, const Eigen::VectorXd& probs, const model::DriveSettings& drive, bool force = false) {
        if (!force && written_ && time < last_ + interval_ * (1.0 - 1e-9)) return;
        row(time, probs, drive);
    }

    void row(double time, const Eigen::VectorXd& probs, const model::DriveSettings& drive) {
        const auto layout = reg_.layout();
        os_ << format_double(time);
        for (std::size_t j = 0; j < layout.atom_count(); ++j) {
            for (std::size_t l = 0; l < layout.levels(j); ++l)
                os_ << "," << format_double(analysis::level_population(probs, layout, j, l));
        }
        os_ << "," << format_double(drive.mw_amp) << "," << format_double(drive.mw_phase);
        for (std::size_t j = 0; j < reg_.k; ++j) os_ << "," << format_double(drive.mw_detuning[j]);
        for (std::size_t j = 0; j < reg_.k; ++j)
            os_ << "," << format_double(drive.laser_amp[j]) << "," << format_double(drive.laser_phase[j]);
        if (layout.ancilla)
            os_ << "," << format_double(drive.ancilla_laser_amp) << "," << format_double(drive.ancilla_laser_phase);
        os_ << "\n";
        last_ = time;
        last_written_time_ = time;
        written_ = true;
    }

    double last_time() const { return last_written_time_; }
    std::string str() const { return os_.str(); }

private:
    hilbert::RegisterConfig reg_;
    double interval_;
    double last_ = 0.0;
    double last_written_time_ = -1.0;
    bool written_ = false;
    std::ostringstream os_;
};

}  // namespace

std::string run_trace(const config::ExperimentConfig& cfg) {
    const auto resolved = config::resolve(cfg);
    const auto model = resolved.build_model();
    const auto sched = resolved.build_schedule(cfg.run.iterations);
    TraceWriter writer(resolved.reg, cfg.run.trace_interval_ns * 1e-9);
    const auto initial = hilbert::initial_state(resolved.reg);
    const auto first_drive = sched.segments.front().drive;
    model::DriveSettings last_drive = first_drive;
    double end_time = 0.0;
    Eigen::VectorXd last_probs;

    if (cfg.run.trace_mode == "me") {
        if (cfg.k > kMaxMeAtoms) throw ConfigError("register.k", "master-equation mode supports k <= 3");
        writer.row(0.0, analysis::basis_probabilities(initial), first_drive);
        mesolve::MeSettings me;
        me.resolution = cfg.run.me_resolution;
        const auto rho0 = mesolve::DensityMatrix::from_state(initial);
        mesolve::evolve_me(rho0, sched, model, me,
                           [&](double t, const Matrix& rho, const schedule::PulseSegment& seg) {
                               last_probs = rho.diagonal().real() / rho.trace().real();
                               last_drive = seg.drive;
                               end_time = t;
                               writer.offer(t, last_probs, seg.drive);
                           });
    } else {
        const std::uint64_t seed = require_seed(cfg);
        writer.row(0.0, analysis::basis_probabilities(initial), first_drive);
        mcwf::PropagatorCache cache(model, {.resolution = cfg.run.resolution});
        mcwf::run_trajectory(sched, cache, seed, cfg.run.trace_trajectory,
                             [&](double t, const Vector& psi, const schedule::PulseSegment& seg) {
                                 last_probs = psi.cwiseAbs2() / psi.squaredNorm();
                                 last_drive = seg.drive;
                                 end_time = t;
                                 writer.offer(t, last_probs, seg.drive);
                             });
    }
    if (last_probs.size() > 0 && writer.last_time() != end_time) writer.row(end_time, last_probs, last_drive);
    return writer.str();
}

MecheckReport run_mecheck(const config::ExperimentConfig& cfg, double mcwf_rate_scale) {
    if (cfg.k > kMaxMeAtoms) throw ConfigError("register.k", "mecheck supports k <= 3");
    const std::uint64_t seed = require_seed(cfg);
    const auto resolved = config::resolve(cfg);
    const auto model = resolved.build_model();
    const auto sched = resolved.build_schedule(cfg.run.iterations);

    mesolve::MeSettings me;
    me.resolution = cfg.run.me_resolution;
    const auto me_result =
        mesolve::evolve_me(mesolve::DensityMatrix::from_state(hilbert::initial_state(resolved.reg)), sched, model, me);

    std::vector<model::RelaxationRates> rates;
    for (const auto& r : resolved.rates) rates.push_back(r.scaled(mcwf_rate_scale));
    const model::SystemModel traj_model(resolved.reg, rates, resolved.ancilla_rates.scaled(mcwf_rate_scale),
                                        resolved.interaction);
    mcwf::PropagatorCache cache(traj_model, {.resolution = cfg.run.resolution});
    const auto results = mcwf::run_ensemble(sched, cache, seed, cfg.run.trajectories, cfg.run.threads);
    const auto stats = analysis::aggregate(results, resolved.reg.marked, resolved.policy, cfg.run.estimator);

    MecheckReport report;
    report.csv = header_comment(cfg, "mecheck");
    report.csv += "iteration,me_prob,mcwf_prob,std_err,z,pass\n";
    for (std::size_t m = 0; m < stats.iterations.size(); ++m) {
        MecheckRow row;
        row.iteration = m + 1;
        row.me = analysis::success_probability(me_result.snapshots.at(m), resolved.reg.marked, resolved.policy);
        row.mcwf = stats.iterations[m].p;
        row.std_err = stats.iterations[m].std_err;
        const double diff = std::abs(row.mcwf - row.me);
        if (row.std_err > 0.0) {
            row.z = diff / row.std_err;
            row.pass = row.z <= 3.0;
        } else {
            row.z = diff > 0.0 ? INFINITY : 0.0;
            row.pass = diff < 1e-6;
        }
        report.pass = report.pass && row.pass;
        report.csv += std::to_string(row.iteration) + "," + format_double(row.me) + "," + format_double(row.mcwf) +
                      "," + format_double(row.std_err) + "," + format_double(row.z) + "," +
                      (row.pass ? "1" : "0") + "\n";
        report.rows.push_back(row);
    }
    return report;
}

}  // namespace rydgrover::experiment
