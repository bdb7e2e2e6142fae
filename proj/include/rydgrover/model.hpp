#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rydgrover/hilbert.hpp"
#include "rydgrover/linalg.hpp"

namespace rydgrover::model {

// All frequencies and rates are in rad/s (hbar = 1); times in seconds.

/// Drive settings held constant over one pulse segment. The microwave field
/// is global; Stark detunings and Rydberg lasers are addressed per atom.
struct DriveSettings {
    double mw_amp = 0.0;
    double mw_phase = 0.0;
    std::vector<double> mw_detuning;
    std::vector<double> laser_amp;
    std::vector<double> laser_phase;
    double ancilla_laser_amp = 0.0;
    double ancilla_laser_phase = 0.0;

    /// Everything off for a k-atom register.
    static DriveSettings off(std::size_t k);

    bool microwave_active() const noexcept { return mw_amp > 0.0; }
    bool register_laser_active() const noexcept;
    bool laser_active() const noexcept { return register_laser_active() || ancilla_laser_amp > 0.0; }
    bool detuning_active() const noexcept;

    /// Amplitudes non-negative, phases in (-pi, pi], per-atom vectors of size k.
    void validate(std::size_t k) const;

    auto operator<=>(const DriveSettings&) const = default;
    bool operator==(const DriveSettings&) const = default;
};

/// Phase wrapped into (-pi, pi].
double wrap_phase(double phase);

struct RelaxationRates {
    double gamma0 = 0.0;    // |0> -> |1>
    double gamma1 = 0.0;    // |1> -> |0>
    double gamma_r0 = 0.0;  // |r> -> |0>
    double gamma_r1 = 0.0;  // |r> -> |1>
    double gamma_ro = 0.0;  // |r> -> |o>
    double deph_z = 0.0;    // qubit transition dephasing
    double deph_r = 0.0;    // Rydberg transition dephasing

    double gamma_r() const noexcept { return gamma_r0 + gamma_r1 + gamma_ro; }
    bool all_zero() const noexcept;
    void validate() const;
    RelaxationRates scaled(double factor) const;

    bool operator==(const RelaxationRates&) const = default;
};

/// Pairwise Rydberg level shifts V[i][j] over the atoms of a layout (the
/// ancilla, if present, is index k).
class InteractionSpec {
public:
    InteractionSpec() = default;

    /// Symmetric, non-negative matrix; the diagonal is ignored.
    static InteractionSpec explicit_shifts(Eigen::MatrixXd shifts);

    /// The same shift for every interacting pair of the scheme: all register
    /// pairs (direct) or every register-ancilla pair (ancilla).
    static InteractionSpec uniform(const hilbert::RegisterConfig& config, double shift);

    /// V_ij = C_p / |r_i - r_j|^p with positions in m and C_p in rad m^p / s.
    /// In the ancilla scheme only register-ancilla pairs interact.
    static InteractionSpec from_positions(std::span<const Eigen::Vector3d> positions, double c_p, int p,
                                          const hilbert::RegisterConfig& config);

    const Eigen::MatrixXd& shifts() const noexcept { return shifts_; }
    std::size_t size() const noexcept { return static_cast<std::size_t>(shifts_.rows()); }
    double max_shift() const;
    double min_pair_shift(const hilbert::RegisterConfig& config) const;

private:
    explicit InteractionSpec(Eigen::MatrixXd shifts) : shifts_(std::move(shifts)) {}
    Eigen::MatrixXd shifts_;
};

enum class Channel { gamma0, gamma1, gamma_r0, gamma_r1, gamma_ro, deph_z, deph_r, ancilla_decay, ancilla_deph };

std::string_view to_string(Channel channel);

struct JumpOperator {
    SparseOp op;
    std::string label;
    std::size_t atom = 0;
    Channel channel = Channel::gamma0;
};

SparseOp microwave_hamiltonian(const DriveSettings& drive, const hilbert::RegisterConfig& config);

/// Throws std::invalid_argument when the ancilla laser is on without an ancilla.
SparseOp laser_hamiltonian(const DriveSettings& drive, const hilbert::RegisterConfig& config);

/// Diagonal blockade shifts. Throws std::invalid_argument when the spec does
/// not fit the scheme.
SparseOp interaction_hamiltonian(const InteractionSpec& spec, const hilbert::RegisterConfig& config);

/// Seven channels per register atom (zero-rate channels dropped), then the
/// ancilla's R->g decay and g-R dephasing when its rates are nonzero.
/// Only gamma_r() and deph_r of `ancilla` are used.
std::vector<JumpOperator> jump_operators(std::span<const RelaxationRates> rates, const RelaxationRates& ancilla,
                                         const hilbert::RegisterConfig& config);

/// Sum of L^dagger L over the channels.
SparseOp decay_operator(std::span<const JumpOperator> jumps, std::size_t dim);

/// H - (i/2) sum L^dagger L.
SparseOp effective_hamiltonian(const SparseOp& hamiltonian, std::span<const JumpOperator> jumps);

struct Linewidth {
    double w = 0.0;
    // |Omega_l|^2 >> Gamma_r gamma_r1 holds (checked as strictly greater).
    bool strong_drive = false;
};

/// w = |Omega_l| sqrt(gamma_r1 / Gamma_r), gamma_r1 = (Gamma_1 + Gamma_r)/2 + gamma_r.
/// Throws UndefinedLinewidth when Gamma_r = 0.
Linewidth blockade_linewidth(double laser_amp, const RelaxationRates& rates);

inline constexpr double kBlockadeMargin = 10.0;
inline constexpr double kDefaultShiftOverLinewidth = 50.0;

/// V >= 10 w.
bool blockade_sufficient(double shift, double linewidth);

/// The static parts of one simulated system: register, dissipation and
/// interactions. Hamiltonians for individual drive settings are built on
/// demand.
class SystemModel {
public:
    SystemModel(hilbert::RegisterConfig config, std::vector<RelaxationRates> rates, RelaxationRates ancilla_rates,
                InteractionSpec interaction);

    const hilbert::RegisterConfig& config() const noexcept { return config_; }
    const hilbert::Layout& layout() const noexcept { return layout_; }
    std::size_t dim() const noexcept { return layout_.dim(); }
    const std::vector<RelaxationRates>& rates() const noexcept { return rates_; }
    const RelaxationRates& ancilla_rates() const noexcept { return ancilla_rates_; }
    const InteractionSpec& interaction() const noexcept { return interaction_; }
    const std::vector<JumpOperator>& jumps() const noexcept { return jumps_; }
    const SparseOp& decay() const noexcept { return decay_; }
    double max_shift() const noexcept { return max_shift_; }

    SparseOp hamiltonian(const DriveSettings& drive) const;
    SparseOp effective_hamiltonian(const DriveSettings& drive) const;

private:
    hilbert::RegisterConfig config_;
    hilbert::Layout layout_;
    std::vector<RelaxationRates> rates_;
    RelaxationRates ancilla_rates_;
    InteractionSpec interaction_;
    std::vector<JumpOperator> jumps_;
    SparseOp interaction_h_;
    SparseOp decay_;
    double max_shift_ = 0.0;
};

}  // namespace rydgrover::model
