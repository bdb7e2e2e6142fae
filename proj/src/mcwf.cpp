#include "rydgrover/mcwf.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <optional>
#include <stdexcept>
#include <thread>

#include <unsupported/Eigen/MatrixFunctions>

#include "rydgrover/errors.hpp"

namespace rydgrover::mcwf {

using schedule::PulseSegment;

void IntegratorSettings::validate() const {
    if (!(resolution > 0.0)) throw std::invalid_argument("integrator resolution must be > 0");
    if (!(jump_rtol > 0.0)) throw std::invalid_argument("jump tolerance must be > 0");
}

double fastest_frequency(const PulseSegment& segment, const model::SystemModel& model) {
    const auto& d = segment.drive;
    double f = 0.0;
    if (d.microwave_active()) {
        f = d.mw_amp;
        for (double x : d.mw_detuning) f = std::max(f, std::abs(x));
    }
    for (double a : d.laser_amp) f = std::max(f, a);
    f = std::max(f, d.ancilla_laser_amp);
    if (d.laser_active() || !d.microwave_active()) f = std::max(f, model.max_shift());
    return f;
}

SubstepPlan plan_substeps(const PulseSegment& segment, const model::SystemModel& model, double resolution) {
    if (!(segment.duration > 0.0)) throw std::invalid_argument("cannot plan a zero-length segment");
    const double f = fastest_frequency(segment, model);
    std::size_t steps = 1;
    if (f > 0.0) {
        const double dt_max = resolution * kTwoPi / f;
        steps = static_cast<std::size_t>(std::ceil(segment.duration / dt_max));
        steps = std::max<std::size_t>(steps, 1);
    }
    return {segment.duration / static_cast<double>(steps), steps};
}

SegmentPropagator::SegmentPropagator(Matrix heff, SubstepPlan plan) : heff_(std::move(heff)), plan_(plan) {
    heff_norm1_ = heff_.cwiseAbs().colwise().sum().maxCoeff();
    // Fractions dt/2, dt/4, ... until the Taylor remainder is short.
    const double reach = heff_norm1_ * plan_.dt / kTaylorReach;
    const int depth = reach > 1.0 ? static_cast<int>(std::ceil(std::log2(reach))) : 0;
    if (depth > 0) {
        fractions_.resize(static_cast<std::size_t>(depth));
        Matrix generator = (-kI * std::ldexp(plan_.dt, -depth)) * heff_;
        fractions_.back() = generator.exp();
        for (int j = depth - 2; j >= 0; --j) {
            const Matrix& finer = fractions_[static_cast<std::size_t>(j + 1)];
            fractions_[static_cast<std::size_t>(j)] = finer * finer;
        }
        ladder_.push_back(fractions_.front() * fractions_.front());
    } else {
        Matrix generator = (-kI * plan_.dt) * heff_;
        ladder_.push_back(generator.exp());
    }
    for (std::size_t n = 2; n <= plan_.steps; n *= 2) {
        const Matrix& last = ladder_.back();
        ladder_.push_back(last * last);
    }
}

void SegmentPropagator::apply_partial(Vector& v, double tau) const {
    if (tau <= 0.0) return;
    Vector scratch(v.size());
    double rest = tau;
    for (std::size_t j = 0; j < fractions_.size(); ++j) {
        const double piece = std::ldexp(plan_.dt, -static_cast<int>(j + 1));
        if (rest >= piece) {
            scratch.noalias() = fractions_[j] * v;
            v.swap(scratch);
            rest -= piece;
        }
    }
    if (rest <= 0.0) return;
    const auto pieces = std::max<long>(1, static_cast<long>(std::ceil(heff_norm1_ * rest / kTaylorReach)));
    const double h = rest / static_cast<double>(pieces);
    Vector term(v.size());
    for (long p = 0; p < pieces; ++p) {
        Vector sum = v;
        term = v;
        for (int n = 1; n < 60; ++n) {
            scratch.noalias() = heff_ * term;
            term = (-kI * h / static_cast<double>(n)) * scratch;
            sum += term;
            if (term.norm() <= 1e-17 * sum.norm()) break;
        }
        v = std::move(sum);
    }
}

PropagatorCache::PropagatorCache(const model::SystemModel& model, IntegratorSettings settings)
    : model_(model), settings_(settings) {
    settings_.validate();
}

const SegmentPropagator& PropagatorCache::get(const PulseSegment& segment) {
    std::lock_guard lock(mutex_);
    Key key{segment.drive, segment.duration};
    auto it = cache_.find(key);
    if (it == cache_.end()) {
        const auto plan = plan_substeps(segment, model_, settings_.resolution);
        Matrix heff = Matrix(model_.effective_hamiltonian(segment.drive));
        it = cache_.emplace(std::move(key), SegmentPropagator(std::move(heff), plan)).first;
    }
    return it->second;
}

void PropagatorCache::prepare(const schedule::Schedule& schedule) {
    for (const auto& s : schedule.segments) {
        if (!s.is_marker()) get(s);
    }
}

std::size_t PropagatorCache::size() const {
    std::lock_guard lock(mutex_);
    return cache_.size();
}

TrajectoryState::TrajectoryState(hilbert::StateVector psi_in, RngStream rng_in)
    : psi(std::move(psi_in)), rng(rng_in) {
    threshold = rng.uniform();
}

namespace {

void check_decay(double before, double after, double time) {
    if (!(after <= before * (1.0 + 1e-10))) throw IntegrationFault(time, "norm increased between jumps");
}

// Applies one quantum jump to `psi` and draws the next threshold.
void apply_jump(TrajectoryState& state, Vector& psi, double time, const model::SystemModel& model) {
    const auto& jumps = model.jumps();
    std::vector<double> weights(jumps.size());
    double total = 0.0;
    for (std::size_t m = 0; m < jumps.size(); ++m) {
        weights[m] = (jumps[m].op * psi).squaredNorm();
        total += weights[m];
    }
    if (!(total > 0.0)) throw IntegrationFault(time, "norm crossed threshold with no open jump channel");

    double sum = 0.0;
    for (double& w : weights) {
        w /= total;
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw IntegrationFault(time, "jump probabilities do not sum to one");

    const double u = state.rng.uniform();
    std::size_t chosen = jumps.size() - 1;
    double cumulative = 0.0;
    for (std::size_t m = 0; m < jumps.size(); ++m) {
        cumulative += weights[m];
        if (u <= cumulative && weights[m] > 0.0) {
            chosen = m;
            break;
        }
    }
    while (weights[chosen] == 0.0) --chosen;

    Vector after = jumps[chosen].op * psi;
    after /= after.norm();
    psi = std::move(after);
    state.jumps.push_back({time, jumps[chosen].label, jumps[chosen].atom});
    state.threshold = state.rng.uniform();
}

// On entry psi is the state at the start of a substep beginning at t_start,
// with |psi|^2 above the threshold, and the end of the substep lies below it.
// On exit psi is the state at the end of the substep, after one or more jumps.
void jump_within_substep(TrajectoryState& state, Vector& psi, const SegmentPropagator& prop, double t_start,
                         const model::SystemModel& model, const IntegratorSettings& settings) {
    const double dt = prop.dt();
    double tau_lo = 0.0;
    while (true) {
        Vector end = psi;
        prop.apply_partial(end, dt - tau_lo);
        const double n_lo = psi.squaredNorm();
        const double n_end = end.squaredNorm();
        check_decay(n_lo, n_end, t_start + dt);
        if (n_end > state.threshold) {
            psi = std::move(end);
            return;
        }

        const double r = state.threshold;
        double a = tau_lo;
        double b = dt;
        double na = n_lo;
        double nb = n_end;
        Vector va = psi;
        Vector vm;
        double tau = b;
        bool bisect = false;
        bool converged = false;
        for (int iter = 0; iter < 200; ++iter) {
            const double width = b - a;
            tau = a + width * std::log(na / r) / std::log(na / nb);
            if (bisect || !(tau > a && tau < b)) tau = 0.5 * (a + b);
            vm = va;
            prop.apply_partial(vm, tau - a);
            const double nm = vm.squaredNorm();
            if (std::abs(std::log(nm / r)) <= settings.jump_rtol || width <= settings.jump_rtol * dt) {
                converged = true;
                break;
            }
            if (nm > r) {
                a = tau;
                na = nm;
                va = vm;
            } else {
                b = tau;
                nb = nm;
            }
            bisect = (b - a) > 0.5 * width;
        }
        if (!converged) throw IntegrationFault(t_start + tau, "jump time did not converge");

        psi = std::move(vm);
        apply_jump(state, psi, t_start + tau, model);
        tau_lo = tau;
    }
}

void apply_steps(Vector& psi, Vector& scratch, const SegmentPropagator& prop, std::size_t count) {
    for (std::size_t level = prop.levels(); level-- > 0;) {
        const std::size_t n = std::size_t{1} << level;
        if (count < n) continue;
        scratch.noalias() = prop.power(level) * psi;
        psi.swap(scratch);
        count -= n;
    }
}

}  // namespace

void evolve_segment(TrajectoryState& state, const PulseSegment& segment, PropagatorCache& cache,
                    const Observer& observer) {
    if (segment.is_marker() || segment.duration == 0.0) return;
    const auto& prop = cache.get(segment);
    const auto& model = cache.model();
    const auto& settings = cache.settings();
    const bool stochastic = !model.jumps().empty();
    const double t0 = state.time;
    const double dt = prop.dt();
    const std::size_t steps = prop.steps();

    Vector& psi = state.psi.amplitudes();
    Vector scratch(psi.size());
    double norm2 = psi.squaredNorm();

    if (observer) {
        for (std::size_t i = 0; i < steps; ++i) {
            scratch.noalias() = prop.power(0) * psi;
            const double n2 = scratch.squaredNorm();
            check_decay(norm2, n2, t0 + static_cast<double>(i + 1) * dt);
            if (stochastic && n2 <= state.threshold) {
                jump_within_substep(state, psi, prop, t0 + static_cast<double>(i) * dt, model, settings);
            } else {
                psi.swap(scratch);
            }
            norm2 = psi.squaredNorm();
            observer(t0 + static_cast<double>(i + 1) * dt, psi, segment);
        }
    } else if (!stochastic) {
        apply_steps(psi, scratch, prop, steps);
        norm2 = psi.squaredNorm();
    } else {
        std::size_t done = 0;
        while (done < steps) {
            // Longest prefix of substeps that stays above the threshold; the
            // squared norm is monotone between jumps.
            for (std::size_t level = prop.levels(); level-- > 0;) {
                const std::size_t n = std::size_t{1} << level;
                if (done + n > steps) continue;
                scratch.noalias() = prop.power(level) * psi;
                const double n2 = scratch.squaredNorm();
                check_decay(norm2, n2, t0 + static_cast<double>(done + n) * dt);
                if (n2 > state.threshold) {
                    psi.swap(scratch);
                    norm2 = n2;
                    done += n;
                }
            }
            if (done == steps) break;
            jump_within_substep(state, psi, prop, t0 + static_cast<double>(done) * dt, model, settings);
            norm2 = psi.squaredNorm();
            ++done;
        }
    }

    state.time = t0 + segment.duration;
    if (norm2 < settings.norm_floor) throw IntegrationFault(state.time, "state norm underflow");
}

TrajectoryResult run_trajectory(const schedule::Schedule& schedule, PropagatorCache& cache,
                                std::uint64_t master_seed, std::uint64_t id, const Observer& observer) {
    TrajectoryState state(hilbert::initial_state(schedule.config), RngStream(master_seed, id));
    TrajectoryResult result{state.psi, {}, {}, master_seed, id};
    for (const auto& segment : schedule.segments) {
        if (segment.is_marker()) {
            result.snapshots.push_back(state.psi.normalized());
            continue;
        }
        evolve_segment(state, segment, cache, observer);
    }
    result.final_state = state.psi.normalized();
    result.jumps = std::move(state.jumps);
    return result;
}

std::vector<TrajectoryResult> run_ensemble(const schedule::Schedule& schedule, PropagatorCache& cache,
                                           std::uint64_t master_seed, std::size_t trajectories,
                                           std::size_t threads) {
    if (trajectories == 0) throw std::invalid_argument("need at least one trajectory");
    cache.prepare(schedule);
    threads = std::clamp<std::size_t>(threads, 1, trajectories);

    std::vector<std::optional<TrajectoryResult>> slots(trajectories);
    std::vector<std::exception_ptr> errors(trajectories);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t id = next++; id < trajectories; id = next++) {
            try {
                slots[id] = run_trajectory(schedule, cache, master_seed, id);
            } catch (...) {
                errors[id] = std::current_exception();
            }
        }
    };
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    std::vector<TrajectoryResult> out;
    out.reserve(trajectories);
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
}

}  // namespace rydgrover::mcwf
