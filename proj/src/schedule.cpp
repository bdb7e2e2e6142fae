#include "rydgrover/schedule.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace rydgrover::schedule {

using hilbert::AncillaLevel;
using hilbert::Level;
using hilbert::RegisterConfig;
using hilbert::Scheme;
using model::DriveSettings;

namespace {

constexpr double kHalfPi = kPi / 2.0;

PulseSegment idle(const RegisterConfig& config, double gap) {
    return {gap, DriveSettings::off(config.k), {SegmentKind::idle, 0}};
}

PulseSegment microwave(const RegisterConfig& config, double amp, double phase, double area,
                       std::vector<double> detuning, SegmentKind kind) {
    PulseSegment s{area / amp, DriveSettings::off(config.k), {kind, 0}};
    s.drive.mw_amp = amp;
    s.drive.mw_phase = phase;
    s.drive.mw_detuning = std::move(detuning);
    return s;
}

PulseSegment register_laser(const RegisterConfig& config, double amp, double phase, int atom, SegmentKind kind) {
    PulseSegment s{kPi / amp, DriveSettings::off(config.k), {kind, atom}};
    for (std::size_t j = 0; j < config.k; ++j) {
        if (atom == SegmentLabel::kAllAtoms || static_cast<std::size_t>(atom) == j) {
            s.drive.laser_amp[j] = amp;
            s.drive.laser_phase[j] = phase;
        }
    }
    return s;
}

// Pulses separated by one gap each, no trailing gap.
std::vector<PulseSegment> interleave(const RegisterConfig& config, const std::vector<PulseSegment>& pulses,
                                     double gap) {
    std::vector<PulseSegment> out;
    for (std::size_t i = 0; i < pulses.size(); ++i) {
        if (i > 0) out.push_back(idle(config, gap));
        out.push_back(pulses[i]);
    }
    return out;
}

void append(std::vector<PulseSegment>& out, const std::vector<PulseSegment>& more) {
    out.insert(out.end(), more.begin(), more.end());
}

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

bool close_rel(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(std::abs(a), std::abs(b)); }

// Applies a 2x2 unitary to levels (lower, upper) of `atom` in every sector
// for which `blocked(index)` is false.
template <typename Blocked>
void apply_local(Vector& amps, const hilbert::Layout& layout, std::size_t atom, std::size_t lower,
                 std::size_t upper, const Eigen::Matrix2cd& u, Blocked blocked) {
    const std::size_t stride = layout.stride(atom);
    const std::size_t dim = layout.dim();
    for (std::size_t i = 0; i < dim; ++i) {
        if (hilbert::digit(i, atom, layout) != lower || blocked(i)) continue;
        const std::size_t j = i + (upper - lower) * stride;
        const Complex a = amps(static_cast<Eigen::Index>(i));
        const Complex b = amps(static_cast<Eigen::Index>(j));
        amps(static_cast<Eigen::Index>(i)) = u(0, 0) * a + u(0, 1) * b;
        amps(static_cast<Eigen::Index>(j)) = u(1, 0) * a + u(1, 1) * b;
    }
}

}  // namespace

std::string SegmentLabel::str() const {
    auto with_index = [this](const char* name) {
        return std::string(name) + "(" + (index == kAllAtoms ? std::string("all") : std::to_string(index)) + ")";
    };
    switch (kind) {
    case SegmentKind::prep: return "prep";
    case SegmentKind::oracle_x_pre: return "oracle_x_pre";
    case SegmentKind::rydberg_up: return with_index("rydberg_up");
    case SegmentKind::rydberg_down: return with_index("rydberg_down");
    case SegmentKind::ancilla_2pi: return "ancilla_2pi";
    case SegmentKind::oracle_x_post: return "oracle_x_post";
    case SegmentKind::grover_map: return "grover_map";
    case SegmentKind::grover_unmap: return "grover_unmap";
    case SegmentKind::idle: return "idle";
    case SegmentKind::measure_marker: return "measure_marker(" + std::to_string(index) + ")";
    }
    return "?";
}

void PulseParams::validate() const {
    if (!(omega_mw > 0.0) || !(omega_l > 0.0)) throw std::invalid_argument("Rabi frequencies must be > 0");
    if (!(delta_mw >= 0.0) || !std::isfinite(delta_mw)) throw std::invalid_argument("Stark detuning must be >= 0");
    if (!(gap > 0.0)) throw std::invalid_argument("inter-gate gap must be > 0");
}

double Schedule::total_duration() const {
    double t = 0.0;
    for (const auto& s : segments) t += s.duration;
    return t;
}

std::size_t Schedule::marker_count() const {
    std::size_t n = 0;
    for (const auto& s : segments) n += s.is_marker() ? 1 : 0;
    return n;
}

Eigen::Matrix2cd ideal_gate(double phase, double area) {
    const double c = std::cos(area / 2.0);
    const double s = std::sin(area / 2.0);
    Eigen::Matrix2cd u;
    u << c, kI * std::polar(1.0, -phase) * s, kI * std::polar(1.0, phase) * s, c;
    return u;
}

std::vector<PulseSegment> compile_preparation(const RegisterConfig& config, const PulseParams& params) {
    config.validate();
    params.validate();
    return {microwave(config, params.omega_mw, -kHalfPi, kHalfPi, std::vector<double>(config.k, 0.0),
                      SegmentKind::prep),
            idle(config, params.gap)};
}

std::vector<PulseSegment> compile_rydberg_block(const RegisterConfig& config, const PulseParams& params) {
    config.validate();
    params.validate();
    std::vector<PulseSegment> pulses;
    if (config.scheme == Scheme::DirectBlockade) {
        for (std::size_t j = 0; j < config.k; ++j) {
            pulses.push_back(register_laser(config, params.omega_l, 0.0, static_cast<int>(j), SegmentKind::rydberg_up));
        }
        for (std::size_t j = config.k; j-- > 0;) {
            pulses.push_back(
                register_laser(config, params.omega_l, 0.0, static_cast<int>(j), SegmentKind::rydberg_down));
        }
    } else {
        pulses.push_back(
            register_laser(config, params.omega_l, 0.0, SegmentLabel::kAllAtoms, SegmentKind::rydberg_up));
        PulseSegment anc{2.0 * kPi / params.omega_l, DriveSettings::off(config.k), {SegmentKind::ancilla_2pi, 0}};
        anc.drive.ancilla_laser_amp = params.omega_l;
        pulses.push_back(anc);
        // De-excitation with the opposite sign of the Rabi frequency.
        pulses.push_back(
            register_laser(config, params.omega_l, kPi, SegmentLabel::kAllAtoms, SegmentKind::rydberg_down));
    }
    return interleave(config, pulses, params.gap);
}

std::vector<PulseSegment> compile_oracle(const RegisterConfig& config, const PulseParams& params) {
    config.validate();
    params.validate();
    std::vector<double> detuning(config.k);
    for (std::size_t j = 0; j < config.k; ++j) detuning[j] = (1.0 - config.marked[j]) * params.delta_mw;

    std::vector<PulseSegment> out;
    out.push_back(microwave(config, params.omega_mw, 0.0, kPi, detuning, SegmentKind::oracle_x_pre));
    out.push_back(idle(config, params.gap));
    append(out, compile_rydberg_block(config, params));
    out.push_back(idle(config, params.gap));
    out.push_back(microwave(config, params.omega_mw, 0.0, kPi, detuning, SegmentKind::oracle_x_post));
    out.push_back(idle(config, params.gap));
    return out;
}

std::vector<PulseSegment> compile_grover(const RegisterConfig& config, const PulseParams& params) {
    config.validate();
    params.validate();
    const std::vector<double> resonant(config.k, 0.0);
    std::vector<PulseSegment> out;
    out.push_back(microwave(config, params.omega_mw, kHalfPi, kHalfPi, resonant, SegmentKind::grover_map));
    out.push_back(idle(config, params.gap));
    append(out, compile_rydberg_block(config, params));
    out.push_back(idle(config, params.gap));
    out.push_back(microwave(config, params.omega_mw, -kHalfPi, kHalfPi, resonant, SegmentKind::grover_unmap));
    out.push_back(idle(config, params.gap));
    return out;
}

Schedule compile_algorithm(const RegisterConfig& config, const PulseParams& params, std::size_t iterations) {
    if (iterations < 1) throw std::invalid_argument("at least one Grover iteration is required");
    Schedule s{config, compile_preparation(config, params), iterations};
    const auto oracle = compile_oracle(config, params);
    const auto grover = compile_grover(config, params);
    for (std::size_t m = 1; m <= iterations; ++m) {
        append(s.segments, oracle);
        append(s.segments, grover);
        s.segments.push_back(
            {0.0, DriveSettings::off(config.k), {SegmentKind::measure_marker, static_cast<int>(m)}});
    }
    lint(s);
    return s;
}

void lint(const Schedule& schedule) {
    const auto& config = schedule.config;
    config.validate();
    auto fail = [](std::size_t i, const std::string& what) {
        throw std::logic_error("segment " + std::to_string(i) + ": " + what);
    };

    std::size_t preps = 0;
    std::size_t markers = 0;
    for (std::size_t i = 0; i < schedule.segments.size(); ++i) {
        const auto& s = schedule.segments[i];
        const auto& d = s.drive;
        try {
            d.validate(config.k);
        } catch (const std::invalid_argument& e) {
            fail(i, e.what());
        }
        if (s.is_marker()) {
            if (s.duration != 0.0) fail(i, "marker with nonzero duration");
            if (d != DriveSettings::off(config.k)) fail(i, "marker with drive");
            if (s.label.index != static_cast<int>(++markers)) fail(i, "markers out of order");
            continue;
        }
        if (!(s.duration > 0.0) || !std::isfinite(s.duration)) fail(i, "non-positive duration");
        if (s.label.kind == SegmentKind::prep) {
            if (i != 0) fail(i, "preparation must come first");
            ++preps;
        }
        if (d.microwave_active() && d.laser_active()) fail(i, "microwave and laser overlap");
        if (d.ancilla_laser_amp > 0.0 && d.detuning_active()) fail(i, "ancilla laser during Stark detuning");
        if (d.ancilla_laser_amp > 0.0 && !config.has_ancilla()) fail(i, "ancilla driven without ancilla");
        if (d.detuning_active() && !d.microwave_active()) fail(i, "Stark detuning outside a microwave pulse");

        if (d.microwave_active()) {
            const double area = d.mw_amp * s.duration;
            if (!close_rel(area, kHalfPi) && !close_rel(area, kPi)) fail(i, "microwave pulse area not pi/2 or pi");
        }
        for (double a : d.laser_amp) {
            if (a > 0.0 && !close_rel(a * s.duration, kPi)) fail(i, "register laser pulse area not pi");
        }
        if (d.ancilla_laser_amp > 0.0 && !close_rel(d.ancilla_laser_amp * s.duration, 2.0 * kPi)) {
            fail(i, "ancilla pulse area not 2 pi");
        }
        if (s.label.kind == SegmentKind::idle && (d.microwave_active() || d.laser_active())) {
            fail(i, "idle segment with drive");
        }
    }
    if (preps != 1) throw std::logic_error("schedule must start with exactly one preparation block");
    if (markers != schedule.iterations) throw std::logic_error("marker count differs from iteration count");
}

std::string dump_table(const Schedule& schedule) {
    const auto& config = schedule.config;
    std::ostringstream os;
    os << "start_time_s,duration_s,label,mw_amp,mw_phase";
    for (std::size_t j = 0; j < config.k; ++j) os << ",det_" << j;
    for (std::size_t j = 0; j < config.k; ++j) os << ",laser_amp_" << j << ",laser_phase_" << j;
    if (config.has_ancilla()) os << ",anc_laser_amp,anc_laser_phase";
    os << '\n';
    double t = 0.0;
    for (const auto& s : schedule.segments) {
        const auto& d = s.drive;
        os << fmt(t) << ',' << fmt(s.duration) << ',' << s.label.str() << ',' << fmt(d.mw_amp) << ','
           << fmt(d.mw_phase);
        for (double x : d.mw_detuning) os << ',' << fmt(x);
        for (std::size_t j = 0; j < config.k; ++j) os << ',' << fmt(d.laser_amp[j]) << ',' << fmt(d.laser_phase[j]);
        if (config.has_ancilla()) os << ',' << fmt(d.ancilla_laser_amp) << ',' << fmt(d.ancilla_laser_phase);
        os << '\n';
        t += s.duration;
    }
    return os.str();
}

void apply_ideal(const PulseSegment& segment, const RegisterConfig& config, hilbert::StateVector& state) {
    const auto layout = config.layout();
    if (state.layout() != layout) throw std::invalid_argument("state layout does not match register");
    const auto& d = segment.drive;
    d.validate(config.k);
    Vector& amps = state.amplitudes();
    const auto q0 = static_cast<std::size_t>(Level::q0);
    const auto q1 = static_cast<std::size_t>(Level::q1);
    const auto ryd = static_cast<std::size_t>(Level::ryd);
    const auto big_r = static_cast<std::size_t>(AncillaLevel::R);

    if (d.microwave_active()) {
        const auto u = ideal_gate(d.mw_phase, d.mw_amp * segment.duration);
        for (std::size_t j = 0; j < config.k; ++j) {
            if (d.mw_detuning[j] != 0.0) continue;
            apply_local(amps, layout, j, q0, q1, u, [](std::size_t) { return false; });
        }
    }

    std::size_t driven = 0;
    for (double a : d.laser_amp) driven += a > 0.0 ? 1 : 0;
    const bool ancilla_driven = d.ancilla_laser_amp > 0.0;
    if (config.scheme == Scheme::DirectBlockade && driven > 1) {
        throw std::invalid_argument("ideal limit undefined for simultaneously driven blockading atoms");
    }
    if (ancilla_driven && driven > 0) {
        throw std::invalid_argument("ideal limit undefined for ancilla and register driven together");
    }

    for (std::size_t j = 0; j < config.k; ++j) {
        if (d.laser_amp[j] == 0.0) continue;
        const auto u = ideal_gate(d.laser_phase[j], d.laser_amp[j] * segment.duration);
        apply_local(amps, layout, j, q1, ryd, u, [&](std::size_t index) {
            if (config.has_ancilla()) return hilbert::digit(index, layout.ancilla_index(), layout) == big_r;
            for (std::size_t m = 0; m < config.k; ++m) {
                if (m != j && hilbert::digit(index, m, layout) == ryd) return true;
            }
            return false;
        });
    }
    if (ancilla_driven) {
        const auto u = ideal_gate(d.ancilla_laser_phase, d.ancilla_laser_amp * segment.duration);
        apply_local(amps, layout, layout.ancilla_index(), static_cast<std::size_t>(AncillaLevel::g), big_r, u,
                    [&](std::size_t index) {
                        for (std::size_t m = 0; m < config.k; ++m) {
                            if (hilbert::digit(index, m, layout) == ryd) return true;
                        }
                        return false;
                    });
    }
}

std::vector<hilbert::StateVector> ideal_snapshots(const Schedule& schedule) {
    auto state = hilbert::initial_state(schedule.config);
    std::vector<hilbert::StateVector> out;
    for (const auto& s : schedule.segments) {
        if (s.is_marker()) {
            out.push_back(state);
        } else {
            apply_ideal(s, schedule.config, state);
        }
    }
    return out;
}

}  // namespace rydgrover::schedule
