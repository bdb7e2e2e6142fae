#pragma once

#include <functional>
#include <span>
#include <vector>

#include "rydgrover/hilbert.hpp"
#include "rydgrover/linalg.hpp"
#include "rydgrover/model.hpp"
#include "rydgrover/schedule.hpp"

namespace rydgrover::mesolve {

class DensityMatrix {
public:
    DensityMatrix(hilbert::Layout layout, Matrix rho);

    static DensityMatrix from_state(const hilbert::StateVector& state);

    const hilbert::Layout& layout() const noexcept { return layout_; }
    std::size_t dim() const noexcept { return static_cast<std::size_t>(rho_.rows()); }
    const Matrix& matrix() const noexcept { return rho_; }
    Matrix& matrix() noexcept { return rho_; }

    Complex trace() const { return rho_.trace(); }
    double hermiticity_error() const;
    double min_eigenvalue() const;
    /// rho <- (rho + rho^dagger) / 2
    void symmetrize();

private:
    hilbert::Layout layout_;
    Matrix rho_;
};

/// -i[H, rho] + sum_m (L rho L^dagger - {L^dagger L, rho} / 2)
Matrix lindblad_rhs(const Matrix& rho, const SparseOp& hamiltonian, std::span<const model::JumpOperator> jumps);

struct MeSettings {
    // Half the trajectory engine's default resolution.
    double resolution = 0.025;
    double trace_tol = 1e-9;
    double hermiticity_tol = 1e-10;
    double positivity_tol = 1e-9;
};

/// Called after every step.
using MeObserver = std::function<void(double time, const Matrix& rho, const schedule::PulseSegment& segment)>;

struct MeResult {
    DensityMatrix final_state;
    std::vector<DensityMatrix> snapshots;  // one per measure marker
};

/// Fixed-step integration of each segment: the Hamiltonian part is applied
/// exactly as rho -> U rho U^dagger and the dissipator is advanced with RK4
/// in that rotating frame (Lawson RK4). Without jump operators the result is
/// exact. Trace and hermiticity are checked after each segment and
/// positivity at each marker; violations throw IntegrationFault.
MeResult evolve_me(const DensityMatrix& initial, const schedule::Schedule& schedule, const model::SystemModel& model,
                   const MeSettings& settings = {}, const MeObserver& observer = {});

}  // namespace rydgrover::mesolve
