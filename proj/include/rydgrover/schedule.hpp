#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "rydgrover/hilbert.hpp"
#include "rydgrover/linalg.hpp"
#include "rydgrover/model.hpp"

namespace rydgrover::schedule {

enum class SegmentKind {
    prep,
    oracle_x_pre,
    rydberg_up,
    rydberg_down,
    ancilla_2pi,
    oracle_x_post,
    grover_map,
    grover_unmap,
    idle,
    measure_marker,
};

struct SegmentLabel {
    static constexpr int kAllAtoms = -1;

    SegmentKind kind = SegmentKind::idle;
    // Atom for rydberg_up/down (kAllAtoms for simultaneous pulses), iteration
    // number for measure_marker, unused otherwise.
    int index = 0;

    std::string str() const;
    bool operator==(const SegmentLabel&) const = default;
};

struct PulseSegment {
    double duration = 0.0;
    model::DriveSettings drive;
    SegmentLabel label;

    bool is_marker() const noexcept { return label.kind == SegmentKind::measure_marker; }
};

/// Pulse-level parameters in rad/s and seconds.
struct PulseParams {
    double omega_mw = 0.0;  // |Omega_mw|
    double delta_mw = 0.0;  // Stark detuning applied to atoms that must not flip
    double omega_l = 0.0;   // |Omega_l| for register atoms and ancilla
    double gap = 0.0;       // idle time after every pulse

    void validate() const;
};

struct Schedule {
    hilbert::RegisterConfig config;
    std::vector<PulseSegment> segments;
    std::size_t iterations = 0;

    double total_duration() const;
    std::size_t marker_count() const;
};

/// Resonant single-qubit rotation U_phi(theta) in the basis {lower, upper}.
Eigen::Matrix2cd ideal_gate(double phase, double area);

std::vector<PulseSegment> compile_preparation(const hilbert::RegisterConfig& config, const PulseParams& params);
std::vector<PulseSegment> compile_oracle(const hilbert::RegisterConfig& config, const PulseParams& params);
std::vector<PulseSegment> compile_rydberg_block(const hilbert::RegisterConfig& config, const PulseParams& params);
std::vector<PulseSegment> compile_grover(const hilbert::RegisterConfig& config, const PulseParams& params);

/// Preparation, then `iterations` x (oracle, Grover, marker).
/// Throws std::invalid_argument for zero iterations.
Schedule compile_algorithm(const hilbert::RegisterConfig& config, const PulseParams& params,
                           std::size_t iterations);

/// Well-formedness checks on a compiled schedule; throws std::logic_error.
void lint(const Schedule& schedule);

/// One row per segment: start time, duration, label and all drive values.
std::string dump_table(const Schedule& schedule);

/// Applies a segment in the ideal limit: Stark-detuned atoms are left
/// untouched by the microwave, blockaded transitions do not evolve at all,
/// and there is no dissipation. Built from ideal_gate only.
void apply_ideal(const PulseSegment& segment, const hilbert::RegisterConfig& config, hilbert::StateVector& state);

/// Ideal-limit states at each measure marker, starting from initial_state.
std::vector<hilbert::StateVector> ideal_snapshots(const Schedule& schedule);

}  // namespace rydgrover::schedule
