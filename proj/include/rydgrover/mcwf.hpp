#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "rydgrover/hilbert.hpp"
#include "rydgrover/linalg.hpp"
#include "rydgrover/model.hpp"
#include "rydgrover/random.hpp"
#include "rydgrover/schedule.hpp"

namespace rydgrover::mcwf {

struct IntegratorSettings {
    // Substep dt <= resolution * 2 pi / (fastest frequency of the segment).
    double resolution = 0.05;
    // Jump instants are refined until |norm^2 / threshold - 1| or the
    // bracketing interval (relative to dt) falls below this.
    double jump_rtol = 1e-10;
    // Squared norm below which an untriggered trajectory is a fault.
    double norm_floor = 1e-15;

    void validate() const;
};

struct SubstepPlan {
    double dt = 0.0;
    std::size_t steps = 0;
};

/// Fastest angular frequency a segment must resolve: microwave Rabi frequency
/// and Stark detunings while the microwave is on, laser Rabi frequencies, and
/// the largest blockade shift during laser pulses and idles.
double fastest_frequency(const schedule::PulseSegment& segment, const model::SystemModel& model);

SubstepPlan plan_substeps(const schedule::PulseSegment& segment, const model::SystemModel& model,
                          double resolution);

/// Exact propagator of a constant H_eff over one segment: exp(-i H_eff dt)
/// for the substep and its powers 2^l, l = 0..floor(log2(steps)).
class SegmentPropagator {
public:
    SegmentPropagator(Matrix heff, SubstepPlan plan);

    const Matrix& heff() const noexcept { return heff_; }
    double dt() const noexcept { return plan_.dt; }
    std::size_t steps() const noexcept { return plan_.steps; }
    std::size_t levels() const noexcept { return ladder_.size(); }
    /// exp(-i H_eff 2^level dt).
    const Matrix& power(std::size_t level) const { return ladder_.at(level); }

    /// v <- exp(-i H_eff tau) v for 0 <= tau <= dt: dyadic fractions of the
    /// substep, then a Taylor series for the remainder. Used inside a substep
    /// to locate jumps.
    void apply_partial(Vector& v, double tau) const;

private:
    static constexpr double kTaylorReach = 0.5;  // max |H_eff|_1 tau per Taylor piece

    Matrix heff_;
    SubstepPlan plan_;
    double heff_norm1_ = 0.0;
    std::vector<Matrix> ladder_;
    std::vector<Matrix> fractions_;  // exp(-i H_eff dt / 2^(j+1))
};

/// Propagators keyed by (drive settings, duration). Lookups are thread-safe;
/// call prepare() before sharing across workers so the hot loop never
/// computes an exponential.
class PropagatorCache {
public:
    PropagatorCache(const model::SystemModel& model, IntegratorSettings settings = {});

    const SegmentPropagator& get(const schedule::PulseSegment& segment);
    void prepare(const schedule::Schedule& schedule);

    const model::SystemModel& model() const noexcept { return model_; }
    const IntegratorSettings& settings() const noexcept { return settings_; }
    std::size_t size() const;

private:
    struct Key {
        model::DriveSettings drive;
        double duration;
        auto operator<=>(const Key&) const = default;
    };

    const model::SystemModel& model_;
    IntegratorSettings settings_;
    mutable std::mutex mutex_;
    std::map<Key, SegmentPropagator> cache_;
};

struct JumpRecord {
    double time = 0.0;
    std::string label;
    std::size_t atom = 0;

    bool operator==(const JumpRecord&) const = default;
};

/// Mutable state of one trajectory. The amplitude vector is renormalized
/// only at jumps, so its norm decays across segment boundaries.
struct TrajectoryState {
    TrajectoryState(hilbert::StateVector psi, RngStream rng);

    hilbert::StateVector psi;
    double time = 0.0;
    RngStream rng;
    double threshold = 0.0;
    std::vector<JumpRecord> jumps;
};

/// Called after every substep with the unnormalized state.
using Observer = std::function<void(double time, const Vector& psi, const schedule::PulseSegment& segment)>;

/// Waiting-time evolution through one segment: exact substep propagation
/// while |psi|^2 exceeds the drawn threshold, jump instant found by
/// root-finding on the norm, channel m chosen with weight |L_m psi|^2.
/// Throws IntegrationFault on norm growth or underflow.
void evolve_segment(TrajectoryState& state, const schedule::PulseSegment& segment, PropagatorCache& cache,
                    const Observer& observer = {});

struct TrajectoryResult {
    hilbert::StateVector final_state;
    std::vector<hilbert::StateVector> snapshots;  // one per measure marker, normalized
    std::vector<JumpRecord> jumps;
    std::uint64_t master_seed = 0;
    std::uint64_t id = 0;
};

TrajectoryResult run_trajectory(const schedule::Schedule& schedule, PropagatorCache& cache,
                                std::uint64_t master_seed, std::uint64_t id, const Observer& observer = {});

/// Runs trajectories 0..n-1 on `threads` workers. The result vector is
/// indexed by trajectory id and does not depend on the worker count.
std::vector<TrajectoryResult> run_ensemble(const schedule::Schedule& schedule, PropagatorCache& cache,
                                           std::uint64_t master_seed, std::size_t trajectories,
                                           std::size_t threads);

}  // namespace rydgrover::mcwf
