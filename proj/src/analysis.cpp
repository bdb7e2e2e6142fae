#include "rydgrover/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rydgrover::analysis {

using hilbert::Level;

bool MeasurementPolicy::nonzero(Level level) const noexcept {
    switch (level) {
    case Level::q0: return false;
    case Level::q1:
    case Level::lost: return true;
    case Level::ryd: return count_rydberg;
    }
    return false;
}

std::string_view to_string(Estimator estimator) {
    return estimator == Estimator::expectation ? "expectation" : "sampling";
}

Estimator parse_estimator(std::string_view text) {
    if (text == "expectation") return Estimator::expectation;
    if (text == "sampling") return Estimator::sampling;
    throw std::invalid_argument("unknown estimator '" + std::string(text) + "'");
}

Eigen::VectorXd basis_probabilities(const hilbert::StateVector& state) {
    const double n2 = state.amplitudes().squaredNorm();
    if (!(n2 > 0.0)) throw std::invalid_argument("cannot measure a zero state");
    return state.amplitudes().cwiseAbs2() / n2;
}

Eigen::VectorXd basis_probabilities(const mesolve::DensityMatrix& rho) {
    return rho.matrix().diagonal().real() / rho.trace().real();
}

double success_probability(const Eigen::VectorXd& probs, const hilbert::Layout& layout,
                           const hilbert::Bitstring& marked, const MeasurementPolicy& policy) {
    if (marked.size() != layout.k) throw std::invalid_argument("marked string length does not match register");
    if (static_cast<std::size_t>(probs.size()) != layout.dim()) throw std::invalid_argument("probability vector size");
    double p = 0.0;
    for (std::size_t i = 0; i < layout.dim(); ++i) {
        bool ok = true;
        for (std::size_t j = 0; j < layout.k && ok; ++j) {
            const auto level = static_cast<Level>(hilbert::digit(i, j, layout));
            ok = marked[j] == 0 ? level == Level::q0 : policy.nonzero(level);
        }
        if (ok) p += probs(static_cast<Eigen::Index>(i));
    }
    return p;
}

double success_probability(const hilbert::StateVector& state, const hilbert::Bitstring& marked,
                           const MeasurementPolicy& policy) {
    return success_probability(basis_probabilities(state), state.layout(), marked, policy);
}

double success_probability(const mesolve::DensityMatrix& rho, const hilbert::Bitstring& marked,
                           const MeasurementPolicy& policy) {
    return success_probability(basis_probabilities(rho), rho.layout(), marked, policy);
}

double level_population(const Eigen::VectorXd& probs, const hilbert::Layout& layout, std::size_t atom,
                        std::size_t level) {
    if (atom >= layout.atom_count()) throw std::out_of_range("atom index");
    if (level >= layout.levels(atom)) throw std::out_of_range("level index");
    double p = 0.0;
    for (std::size_t i = 0; i < layout.dim(); ++i) {
        if (hilbert::digit(i, atom, layout) == level) p += probs(static_cast<Eigen::Index>(i));
    }
    return p;
}

std::vector<double> population_trace(std::span<const PopulationPoint> points, const hilbert::Layout& layout,
                                     std::size_t atom, std::size_t level) {
    std::vector<double> out;
    out.reserve(points.size());
    for (const auto& pt : points) out.push_back(level_population(pt.probs, layout, atom, level));
    return out;
}

std::string sample_outcome(const hilbert::StateVector& state, RngStream& rng, const MeasurementPolicy& policy) {
    const Eigen::VectorXd probs = basis_probabilities(state);
    const double u = rng.uniform();
    double cumulative = 0.0;
    std::size_t pick = state.layout().dim() - 1;
    for (std::size_t i = 0; i < state.layout().dim(); ++i) {
        cumulative += probs(static_cast<Eigen::Index>(i));
        if (u <= cumulative) {
            pick = i;
            break;
        }
    }
    while (pick > 0 && probs(static_cast<Eigen::Index>(pick)) == 0.0) --pick;

    std::string out;
    for (std::size_t j = 0; j < state.layout().k; ++j) {
        const auto level = static_cast<Level>(hilbert::digit(pick, j, state.layout()));
        if (level == Level::q0) out += '0';
        else if (policy.nonzero(level)) out += '1';
        else out += 'x';
    }
    return out;
}

EnsembleStats aggregate(std::span<const mcwf::TrajectoryResult> results, const hilbert::Bitstring& marked,
                        const MeasurementPolicy& policy, Estimator estimator) {
    if (results.empty()) throw std::invalid_argument("cannot aggregate an empty ensemble");
    const std::size_t markers = results.front().snapshots.size();
    const std::string target = marked.str();
    const double n = static_cast<double>(results.size());

    EnsembleStats stats{estimator, {}};
    stats.iterations.resize(markers);
    std::vector<double> sum(markers, 0.0), sum2(markers, 0.0);
    std::vector<std::size_t> hits(markers, 0);
    for (const auto& r : results) {
        if (r.snapshots.size() != markers) throw std::invalid_argument("trajectories disagree on marker count");
        RngStream readout(r.master_seed, r.id, RngStream::Domain::measurement);
        for (std::size_t m = 0; m < markers; ++m) {
            const double p = success_probability(r.snapshots[m], marked, policy);
            sum[m] += p;
            sum2[m] += p * p;
            const std::string outcome = sample_outcome(r.snapshots[m], readout, policy);
            ++stats.iterations[m].histogram[outcome];
            if (outcome == target) ++hits[m];
        }
    }
    for (std::size_t m = 0; m < markers; ++m) {
        auto& it = stats.iterations[m];
        it.iteration = m + 1;
        it.n = results.size();
        if (estimator == Estimator::expectation) {
            it.p = sum[m] / n;
            const double var = results.size() > 1 ? std::max(0.0, (sum2[m] - n * it.p * it.p) / (n - 1.0)) : 0.0;
            it.std_err = std::sqrt(var / n);
        } else {
            it.p = static_cast<double>(hits[m]) / n;
            it.std_err = std::sqrt(it.p * (1.0 - it.p) / n);
        }
        it.p = std::clamp(it.p, 0.0, 1.0);
    }
    return stats;
}

Vote majority_vote(std::span<const std::string> samples) {
    if (samples.empty()) throw std::invalid_argument("majority vote needs at least one sample");
    std::map<std::string, std::size_t> counts;
    for (const auto& s : samples) ++counts[s];
    Vote vote;
    for (const auto& [s, c] : counts) {
        if (c > vote.count) {
            vote = {s, c, false};
        } else if (c == vote.count) {
            vote.tie = true;
        }
    }
    return vote;
}

}  // namespace rydgrover::analysis
