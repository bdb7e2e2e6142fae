#include "rydgrover/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "rydgrover/errors.hpp"

namespace rydgrover::model {

using hilbert::AncillaLevel;
using hilbert::Level;
using hilbert::RegisterConfig;

namespace {

bool is_phase(double phase) { return std::isfinite(phase) && phase > -kPi && phase <= kPi; }

void check_amp(double amp, const char* what) {
    if (!std::isfinite(amp) || amp < 0.0) throw std::invalid_argument(std::string(what) + " must be >= 0");
}

SparseOp zero_op(std::size_t dim) {
    return SparseOp(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
}

}  // namespace

DriveSettings DriveSettings::off(std::size_t k) {
    DriveSettings d;
    d.mw_detuning.assign(k, 0.0);
    d.laser_amp.assign(k, 0.0);
    d.laser_phase.assign(k, 0.0);
    return d;
}

bool DriveSettings::register_laser_active() const noexcept {
    return std::any_of(laser_amp.begin(), laser_amp.end(), [](double a) { return a > 0.0; });
}

bool DriveSettings::detuning_active() const noexcept {
    return std::any_of(mw_detuning.begin(), mw_detuning.end(), [](double d) { return d != 0.0; });
}

void DriveSettings::validate(std::size_t k) const {
    if (mw_detuning.size() != k || laser_amp.size() != k || laser_phase.size() != k) {
        throw std::invalid_argument("per-atom drive vectors must have k entries");
    }
    check_amp(mw_amp, "microwave amplitude");
    check_amp(ancilla_laser_amp, "ancilla laser amplitude");
    for (double a : laser_amp) check_amp(a, "laser amplitude");
    for (double d : mw_detuning) {
        if (!std::isfinite(d)) throw std::invalid_argument("detuning must be finite");
    }
    if (!is_phase(mw_phase) || !is_phase(ancilla_laser_phase) ||
        !std::all_of(laser_phase.begin(), laser_phase.end(), is_phase)) {
        throw std::invalid_argument("phases must lie in (-pi, pi]");
    }
}

double wrap_phase(double phase) {
    double p = std::remainder(phase, kTwoPi);
    if (p <= -kPi) p += kTwoPi;
    return p;
}

bool RelaxationRates::all_zero() const noexcept {
    return gamma0 == 0 && gamma1 == 0 && gamma_r0 == 0 && gamma_r1 == 0 && gamma_ro == 0 && deph_z == 0 &&
           deph_r == 0;
}

void RelaxationRates::validate() const {
    for (double r : {gamma0, gamma1, gamma_r0, gamma_r1, gamma_ro, deph_z, deph_r}) {
        if (!std::isfinite(r) || r < 0.0) throw std::invalid_argument("relaxation rates must be >= 0");
    }
}

RelaxationRates RelaxationRates::scaled(double factor) const {
    return {gamma0 * factor, gamma1 * factor, gamma_r0 * factor, gamma_r1 * factor,
            gamma_ro * factor, deph_z * factor, deph_r * factor};
}

InteractionSpec InteractionSpec::explicit_shifts(Eigen::MatrixXd shifts) {
    if (shifts.rows() != shifts.cols()) throw std::invalid_argument("interaction matrix must be square");
    for (Eigen::Index i = 0; i < shifts.rows(); ++i) {
        shifts(i, i) = 0.0;
        for (Eigen::Index j = 0; j < shifts.cols(); ++j) {
            if (!std::isfinite(shifts(i, j)) || shifts(i, j) < 0.0) {
                throw std::invalid_argument("interaction shifts must be finite and >= 0");
            }
            if (shifts(i, j) != shifts(j, i)) throw std::invalid_argument("interaction matrix must be symmetric");
        }
    }
    return InteractionSpec(std::move(shifts));
}

InteractionSpec InteractionSpec::uniform(const RegisterConfig& config, double shift) {
    const auto n = static_cast<Eigen::Index>(config.layout().atom_count());
    Eigen::MatrixXd v = Eigen::MatrixXd::Zero(n, n);
    const auto k = static_cast<Eigen::Index>(config.k);
    if (config.has_ancilla()) {
        for (Eigen::Index j = 0; j < k; ++j) v(j, k) = v(k, j) = shift;
    } else {
        for (Eigen::Index i = 0; i < k; ++i)
            for (Eigen::Index j = 0; j < k; ++j)
                if (i != j) v(i, j) = shift;
    }
    return explicit_shifts(std::move(v));
}

InteractionSpec InteractionSpec::from_positions(std::span<const Eigen::Vector3d> positions, double c_p, int p,
                                                const RegisterConfig& config) {
    if (p != 3 && p != 6) throw std::invalid_argument("interaction exponent must be 3 or 6");
    if (!(c_p >= 0.0)) throw std::invalid_argument("C_p must be >= 0");
    const std::size_t n = config.layout().atom_count();
    if (positions.size() != n) throw std::invalid_argument("need one position per atom (ancilla last)");
    Eigen::MatrixXd v = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double r = (positions[i] - positions[j]).norm();
            if (r == 0.0) throw std::invalid_argument("atom positions must be pairwise distinct");
            const bool pair_interacts = !config.has_ancilla() || j == config.k;
            if (!pair_interacts) continue;
            const auto a = static_cast<Eigen::Index>(i);
            const auto b = static_cast<Eigen::Index>(j);
            v(a, b) = v(b, a) = c_p / std::pow(r, p);
        }
    }
    return explicit_shifts(std::move(v));
}

double InteractionSpec::max_shift() const { return shifts_.size() == 0 ? 0.0 : shifts_.maxCoeff(); }

double InteractionSpec::min_pair_shift(const RegisterConfig& config) const {
    double m = std::numeric_limits<double>::infinity();
    const auto k = static_cast<Eigen::Index>(config.k);
    for (Eigen::Index i = 0; i < k; ++i) {
        if (config.has_ancilla()) {
            m = std::min(m, shifts_(i, k));
        } else {
            for (Eigen::Index j = i + 1; j < k; ++j) m = std::min(m, shifts_(i, j));
        }
    }
    return m;
}

std::string_view to_string(Channel channel) {
    switch (channel) {
    case Channel::gamma0: return "gamma0";
    case Channel::gamma1: return "gamma1";
    case Channel::gamma_r0: return "gamma_r0";
    case Channel::gamma_r1: return "gamma_r1";
    case Channel::gamma_ro: return "gamma_ro";
    case Channel::deph_z: return "deph_z";
    case Channel::deph_r: return "deph_r";
    case Channel::ancilla_decay: return "ancilla_decay";
    case Channel::ancilla_deph: return "ancilla_deph";
    }
    return "?";
}

SparseOp microwave_hamiltonian(const DriveSettings& drive, const RegisterConfig& config) {
    drive.validate(config.k);
    const auto layout = config.layout();
    SparseOp h = zero_op(layout.dim());
    const Complex omega = std::polar(drive.mw_amp, drive.mw_phase);
    for (std::size_t j = 0; j < config.k; ++j) {
        if (drive.mw_amp == 0.0 && drive.mw_detuning[j] == 0.0) continue;
        Matrix local = -drive.mw_detuning[j] * hilbert::register_op(Level::q1, Level::q1) -
                       0.5 * omega * hilbert::register_op(Level::q1, Level::q0) -
                       0.5 * std::conj(omega) * hilbert::register_op(Level::q0, Level::q1);
        h += hilbert::embed_single(local, j, layout);
    }
    return h;
}

SparseOp laser_hamiltonian(const DriveSettings& drive, const RegisterConfig& config) {
    drive.validate(config.k);
    const auto layout = config.layout();
    if (!config.has_ancilla() && drive.ancilla_laser_amp != 0.0) {
        throw std::invalid_argument("ancilla laser driven in the direct-blockade scheme");
    }
    SparseOp h = zero_op(layout.dim());
    for (std::size_t j = 0; j < config.k; ++j) {
        if (drive.laser_amp[j] == 0.0) continue;
        const Complex omega = std::polar(drive.laser_amp[j], drive.laser_phase[j]);
        Matrix local = -0.5 * omega * hilbert::register_op(Level::ryd, Level::q1) -
                       0.5 * std::conj(omega) * hilbert::register_op(Level::q1, Level::ryd);
        h += hilbert::embed_single(local, j, layout);
    }
    if (config.has_ancilla() && drive.ancilla_laser_amp != 0.0) {
        const Complex omega = std::polar(drive.ancilla_laser_amp, drive.ancilla_laser_phase);
        Matrix local = -0.5 * omega * hilbert::ancilla_op(AncillaLevel::R, AncillaLevel::g) -
                       0.5 * std::conj(omega) * hilbert::ancilla_op(AncillaLevel::g, AncillaLevel::R);
        h += hilbert::embed_single(local, layout.ancilla_index(), layout);
    }
    return h;
}

SparseOp interaction_hamiltonian(const InteractionSpec& spec, const RegisterConfig& config) {
    const auto layout = config.layout();
    const std::size_t n = layout.atom_count();
    if (spec.size() != n) {
        throw std::invalid_argument("interaction spec has " + std::to_string(spec.size()) +
                                    " atoms, scheme needs " + std::to_string(n));
    }
    const auto& v = spec.shifts();
    if (config.has_ancilla()) {
        for (std::size_t i = 0; i < config.k; ++i)
            for (std::size_t j = 0; j < config.k; ++j)
                if (i != j && v(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) != 0.0) {
                    throw std::invalid_argument("register-register shifts must vanish in the ancilla scheme");
                }
    }

    const std::size_t dim = layout.dim();
    std::vector<Eigen::Triplet<Complex>> triplets;
    std::vector<std::size_t> excited;
    excited.reserve(n);
    for (std::size_t index = 0; index < dim; ++index) {
        excited.clear();
        for (std::size_t a = 0; a < n; ++a) {
            const std::size_t level = hilbert::digit(index, a, layout);
            const bool rydberg = layout.is_ancilla(a) ? level == static_cast<std::size_t>(AncillaLevel::R)
                                                      : level == static_cast<std::size_t>(Level::ryd);
            if (rydberg) excited.push_back(a);
        }
        double shift = 0.0;
        for (std::size_t x = 0; x < excited.size(); ++x)
            for (std::size_t y = x + 1; y < excited.size(); ++y)
                shift += v(static_cast<Eigen::Index>(excited[x]), static_cast<Eigen::Index>(excited[y]));
        if (shift != 0.0) triplets.emplace_back(static_cast<int>(index), static_cast<int>(index), shift);
    }
    SparseOp h = zero_op(dim);
    h.setFromTriplets(triplets.begin(), triplets.end());
    return h;
}

std::vector<JumpOperator> jump_operators(std::span<const RelaxationRates> rates, const RelaxationRates& ancilla,
                                         const RegisterConfig& config) {
    if (rates.size() != config.k) throw std::invalid_argument("need one RelaxationRates record per register atom");
    const auto layout = config.layout();
    const Matrix id4 = Matrix::Identity(4, 4);
    std::vector<JumpOperator> out;

    auto add = [&](double rate, const Matrix& local, std::size_t atom, Channel channel) {
        if (rate == 0.0) return;
        JumpOperator j;
        j.op = hilbert::embed_single(std::sqrt(rate) * local, atom, layout);
        j.atom = atom;
        j.channel = channel;
        j.label = std::string(to_string(channel)) + "(" + std::to_string(atom) + ")";
        out.push_back(std::move(j));
    };

    for (std::size_t j = 0; j < config.k; ++j) {
        const auto& r = rates[j];
        r.validate();
        add(r.gamma0, hilbert::register_op(Level::q1, Level::q0), j, Channel::gamma0);
        add(r.gamma1, hilbert::register_op(Level::q0, Level::q1), j, Channel::gamma1);
        add(r.gamma_r0, hilbert::register_op(Level::q0, Level::ryd), j, Channel::gamma_r0);
        add(r.gamma_r1, hilbert::register_op(Level::q1, Level::ryd), j, Channel::gamma_r1);
        add(r.gamma_ro, hilbert::register_op(Level::lost, Level::ryd), j, Channel::gamma_ro);
        add(r.deph_z / 2.0, 2.0 * hilbert::register_op(Level::q1, Level::q1) - id4, j, Channel::deph_z);
        add(r.deph_r / 2.0, 2.0 * hilbert::register_op(Level::ryd, Level::ryd) - id4, j, Channel::deph_r);
    }
    if (config.has_ancilla()) {
        ancilla.validate();
        const std::size_t a = layout.ancilla_index();
        add(ancilla.gamma_r(), hilbert::ancilla_op(AncillaLevel::g, AncillaLevel::R), a, Channel::ancilla_decay);
        add(ancilla.deph_r / 2.0, 2.0 * hilbert::ancilla_op(AncillaLevel::R, AncillaLevel::R) - Matrix::Identity(2, 2),
            a, Channel::ancilla_deph);
    }
    return out;
}

SparseOp decay_operator(std::span<const JumpOperator> jumps, std::size_t dim) {
    SparseOp sum = zero_op(dim);
    for (const auto& j : jumps) sum += SparseOp(j.op.adjoint()) * j.op;
    return sum;
}

SparseOp effective_hamiltonian(const SparseOp& hamiltonian, std::span<const JumpOperator> jumps) {
    const auto dim = static_cast<std::size_t>(hamiltonian.rows());
    SparseOp heff = hamiltonian - Complex{0.0, 0.5} * decay_operator(jumps, dim);
    heff.prune(Complex{});
    return heff;
}

Linewidth blockade_linewidth(double laser_amp, const RelaxationRates& rates) {
    const double gamma_r = rates.gamma_r();
    if (gamma_r <= 0.0) throw UndefinedLinewidth("blockade linewidth undefined for zero Rydberg decay");
    const double gamma_r1 = 0.5 * (rates.gamma1 + gamma_r) + rates.deph_r;
    const double amp = std::abs(laser_amp);
    return {amp * std::sqrt(gamma_r1 / gamma_r), amp * amp > gamma_r * gamma_r1};
}

bool blockade_sufficient(double shift, double linewidth) { return shift >= kBlockadeMargin * linewidth; }

SystemModel::SystemModel(RegisterConfig config, std::vector<RelaxationRates> rates, RelaxationRates ancilla_rates,
                         InteractionSpec interaction)
    : config_(std::move(config)),
      rates_(std::move(rates)),
      ancilla_rates_(ancilla_rates),
      interaction_(std::move(interaction)) {
    config_.validate();
    layout_ = config_.layout();
    jumps_ = jump_operators(rates_, ancilla_rates_, config_);
    interaction_h_ = interaction_hamiltonian(interaction_, config_);
    decay_ = decay_operator(jumps_, layout_.dim());
    max_shift_ = interaction_.max_shift();
}

SparseOp SystemModel::hamiltonian(const DriveSettings& drive) const {
    SparseOp h = microwave_hamiltonian(drive, config_) + laser_hamiltonian(drive, config_) + interaction_h_;
    h.prune(Complex{});
    return h;
}

SparseOp SystemModel::effective_hamiltonian(const DriveSettings& drive) const {
    SparseOp heff = hamiltonian(drive) - Complex{0.0, 0.5} * decay_;
    heff.prune(Complex{});
    return heff;
}

}  // namespace rydgrover::model
