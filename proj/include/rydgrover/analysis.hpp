#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "rydgrover/hilbert.hpp"
#include "rydgrover/mcwf.hpp"
#include "rydgrover/mesolve.hpp"
#include "rydgrover/random.hpp"

namespace rydgrover::analysis {

/// Which levels read out as "not |0>". q1 and lost always do; ryd only
/// when count_rydberg is set.
struct MeasurementPolicy {
    bool count_rydberg = false;

    bool nonzero(hilbert::Level level) const noexcept;
};

enum class Estimator { expectation, sampling };

std::string_view to_string(Estimator estimator);
Estimator parse_estimator(std::string_view text);

/// |c_i|^2 of the normalized state, or the diagonal of rho.
Eigen::VectorXd basis_probabilities(const hilbert::StateVector& state);
Eigen::VectorXd basis_probabilities(const mesolve::DensityMatrix& rho);

/// Probability that every atom reads out as its marked digit; the ancilla is
/// summed over.
double success_probability(const Eigen::VectorXd& probs, const hilbert::Layout& layout,
                           const hilbert::Bitstring& marked, const MeasurementPolicy& policy = {});
double success_probability(const hilbert::StateVector& state, const hilbert::Bitstring& marked,
                           const MeasurementPolicy& policy = {});
double success_probability(const mesolve::DensityMatrix& rho, const hilbert::Bitstring& marked,
                           const MeasurementPolicy& policy = {});

/// <sigma_{mu mu}^{(atom)}>; `level` indexes the atom's own levels, so the
/// ancilla uses 0 = g, 1 = R.
double level_population(const Eigen::VectorXd& probs, const hilbert::Layout& layout, std::size_t atom,
                        std::size_t level);

struct PopulationPoint {
    double time = 0.0;
    Eigen::VectorXd probs;
};

std::vector<double> population_trace(std::span<const PopulationPoint> points, const hilbert::Layout& layout,
                                     std::size_t atom, std::size_t level);

/// One projective readout: '0' for q0, '1' for a nonzero level, 'x' for an
/// atom left in ryd that the policy does not count.
std::string sample_outcome(const hilbert::StateVector& state, RngStream& rng, const MeasurementPolicy& policy = {});

struct IterationStats {
    std::size_t iteration = 0;
    double p = 0.0;
    double std_err = 0.0;
    std::size_t n = 0;
    std::map<std::string, std::size_t> histogram;
};

struct EnsembleStats {
    Estimator estimator = Estimator::expectation;
    std::vector<IterationStats> iterations;
};

/// Per-marker estimate over trajectories. Expectation mode averages the
/// success probability of each snapshot (SE = sample std / sqrt n); sampling
/// mode counts one readout per trajectory (binomial SE). Readouts for the
/// histogram come from the measurement stream of each trajectory id.
EnsembleStats aggregate(std::span<const mcwf::TrajectoryResult> results, const hilbert::Bitstring& marked,
                        const MeasurementPolicy& policy = {}, Estimator estimator = Estimator::expectation);

struct Vote {
    std::string winner;
    std::size_t count = 0;
    bool tie = false;
};

/// Most frequent string; ties go to the lexicographically smallest.
Vote majority_vote(std::span<const std::string> samples);

}  // namespace rydgrover::analysis
