#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "rydgrover/analysis.hpp"
#include "rydgrover/hilbert.hpp"
#include "rydgrover/model.hpp"
#include "rydgrover/schedule.hpp"

namespace rydgrover::config {

/// Physical parameters in the units named by the config keys. Conversion to
/// rad/s and seconds happens in resolve().
struct PhysicalConfig {
    double omega_mw_khz_over_2pi = 0.0;
    double delta_mw_over_omega_mw = 0.0;
    double omega_l_mhz_over_2pi = 0.0;
    double gap_ns = 0.0;
    model::RelaxationRates rates;          // s^-1, every register atom
    model::RelaxationRates ancilla_rates;  // s^-1, only gamma_r() and deph_r used

    // Exactly one blockade description is set.
    std::optional<double> v_aa_over_linewidth;
    std::optional<double> v_aa_mhz_over_2pi;
    std::vector<Eigen::Vector3d> positions_um;
    double c_p_mhz_um_p_over_2pi = 0.0;
    int p = 6;

    bool operator==(const PhysicalConfig&) const = default;
};

struct RunConfig {
    std::size_t iterations = 3;
    std::size_t trajectories = 200;
    std::optional<std::uint64_t> seed;
    std::size_t threads = 1;
    analysis::Estimator estimator = analysis::Estimator::expectation;
    bool count_rydberg_as_nonzero = false;
    std::string out;
    double resolution = 0.05;
    double me_resolution = 0.025;
    // Trace output
    std::string trace_mode = "trajectory";  // trajectory | me
    std::uint64_t trace_trajectory = 0;
    double trace_interval_ns = 10.0;

    bool operator==(const RunConfig&) const = default;
};

struct ExperimentConfig {
    std::size_t k = 2;
    hilbert::Scheme scheme = hilbert::Scheme::DirectBlockade;
    std::string marked = "01";
    std::string preset;  // informational once physics is filled in
    PhysicalConfig physics;
    RunConfig run;

    bool operator==(const ExperimentConfig&) const = default;
};

/// a1 b1 c1 a2 b2 c2 and ideal.
std::vector<std::string> preset_names();
/// Throws ConfigError("preset", ...) for an unknown name.
PhysicalConfig preset(std::string_view name);

/// Defaults with the b1 preset, k = 2, marked 01.
ExperimentConfig default_config();

/// Starts from `base` (or the named preset when the document has one) and
/// overrides the keys that are present. Unknown keys and bad values throw
/// ConfigError naming the key.
ExperimentConfig parse(std::string_view json_text, const ExperimentConfig& base = default_config());
ExperimentConfig load(const std::string& path, const ExperimentConfig& base = default_config());
std::string serialize(const ExperimentConfig& cfg);

struct Resolved {
    hilbert::RegisterConfig reg;
    std::vector<model::RelaxationRates> rates;
    model::RelaxationRates ancilla_rates;
    model::InteractionSpec interaction;
    schedule::PulseParams pulses;
    analysis::MeasurementPolicy policy;
    std::vector<std::string> warnings;

    model::SystemModel build_model() const;
    schedule::Schedule build_schedule(std::size_t iterations) const;
};

/// Validates everything and converts to rad/s and seconds.
Resolved resolve(const ExperimentConfig& cfg);

hilbert::Scheme parse_scheme(std::string_view text);

}  // namespace rydgrover::config
