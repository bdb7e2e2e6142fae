#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rydgrover/analysis.hpp"
#include "rydgrover/config.hpp"

namespace rydgrover::experiment {

/// Largest register accepted by the master-equation paths.
inline constexpr std::size_t kMaxMeAtoms = 3;

/// Throws ConfigError("run.seed") when no seed was given.
std::uint64_t require_seed(const config::ExperimentConfig& cfg);

/// 17 significant digits.
std::string format_double(double x);

struct EnsembleOutput {
    analysis::EnsembleStats stats;
    std::string csv;
    double runtime_s = 0.0;
    std::vector<std::string> warnings;
};

/// Header comment, then `iteration,success_prob,std_err,n_traj`.
std::string ensemble_csv(const analysis::EnsembleStats& stats, const config::ExperimentConfig& cfg);

EnsembleOutput run_ensemble(const config::ExperimentConfig& cfg);

/// Population time series of one trajectory (run.trace_trajectory) or of
/// the density matrix (run.trace_mode = "me"), one row per trace interval.
std::string run_trace(const config::ExperimentConfig& cfg);

struct MecheckRow {
    std::size_t iteration = 0;
    double me = 0.0;
    double mcwf = 0.0;
    double std_err = 0.0;
    double z = 0.0;
    bool pass = false;
};

struct MecheckReport {
    std::vector<MecheckRow> rows;
    bool pass = true;
    std::string csv;
};

/// Master equation against a trajectory ensemble, per iteration. A row fails
/// when |difference| > 3 standard errors, or when the standard error is zero
/// and the difference reaches 1e-6. `mcwf_rate_scale` multiplies every
/// relaxation rate of the trajectory side only (a sensitivity fixture).
MecheckReport run_mecheck(const config::ExperimentConfig& cfg, double mcwf_rate_scale = 1.0);

}  // namespace rydgrover::experiment
