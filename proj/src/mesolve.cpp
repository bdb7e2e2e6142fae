#include "rydgrover/mesolve.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include "rydgrover/errors.hpp"
#include "rydgrover/mcwf.hpp"

namespace rydgrover::mesolve {

DensityMatrix::DensityMatrix(hilbert::Layout layout, Matrix rho) : layout_(layout), rho_(std::move(rho)) {
    const auto d = static_cast<Eigen::Index>(layout_.dim());
    if (rho_.rows() != d || rho_.cols() != d) throw std::invalid_argument("density matrix does not match layout");
}

DensityMatrix DensityMatrix::from_state(const hilbert::StateVector& state) {
    const Vector psi = state.normalized().amplitudes();
    return DensityMatrix(state.layout(), psi * psi.adjoint());
}

double DensityMatrix::hermiticity_error() const { return (rho_ - rho_.adjoint()).cwiseAbs().maxCoeff(); }

double DensityMatrix::min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(rho_, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
}

void DensityMatrix::symmetrize() {
    Matrix h = 0.5 * (rho_ + rho_.adjoint());
    rho_ = std::move(h);
}

Matrix lindblad_rhs(const Matrix& rho, const SparseOp& hamiltonian, std::span<const model::JumpOperator> jumps) {
    Matrix out = -kI * (hamiltonian * rho);
    out += kI * (rho * hamiltonian);
    for (const auto& j : jumps) {
        const SparseOp adj = j.op.adjoint();
        const SparseOp ldl = adj * j.op;
        Matrix l_rho = j.op * rho;
        out += l_rho * adj;
        out -= 0.5 * (ldl * rho);
        out -= 0.5 * (rho * ldl);
    }
    return out;
}

namespace {

// Generator split for one segment: the Hamiltonian flow rho -> U rho U^dagger
// is exact, the dissipator D is advanced by Lawson RK4 in its frame. U keeps
// the block structure of H (drives only mix q0/q1 or q1/r within an atom),
// so it is stored sparse.
class SegmentGenerator {
public:
    SegmentGenerator(const model::SystemModel& model, const model::DriveSettings& drive, double h)
        : gamma_(model.decay()) {
        const Matrix herm = Matrix(model.hamiltonian(drive));
        Matrix gen = (-kI * (0.5 * h)) * herm;
        half_ = sparse_unitary(gen.exp());
        half_adj_ = half_.adjoint();
        for (const auto& j : model.jumps()) {
            ops_.push_back(j.op);
            adj_.push_back(j.op.adjoint());
        }
    }

    // D(u) = sum L u L^dagger - {Gamma, u} / 2 for Hermitian u.
    Matrix dissipator(const Matrix& u) const {
        Matrix m = -0.5 * (gamma_ * u);
        Matrix out = m + m.adjoint();
        for (std::size_t i = 0; i < ops_.size(); ++i) {
            Matrix lu = ops_[i] * u;
            out.noalias() += lu * adj_[i];
        }
        return out;
    }

    Matrix flow_half(const Matrix& u) const {
        Matrix left = half_ * u;
        return left * half_adj_;
    }

    bool dissipative() const noexcept { return !ops_.empty(); }

private:
    static SparseOp sparse_unitary(const Matrix& u) {
        std::vector<Eigen::Triplet<Complex>> trips;
        for (Eigen::Index c = 0; c < u.cols(); ++c)
            for (Eigen::Index r = 0; r < u.rows(); ++r)
                if (std::abs(u(r, c)) > 1e-18) trips.emplace_back(r, c, u(r, c));
        SparseOp out(u.rows(), u.cols());
        out.setFromTriplets(trips.begin(), trips.end());
        return out;
    }

    SparseOp gamma_;
    SparseOp half_;
    SparseOp half_adj_;
    std::vector<SparseOp> ops_;
    std::vector<SparseOp> adj_;
};

std::size_t step_count(const schedule::PulseSegment& segment, const model::SystemModel& model, double resolution) {
    std::size_t steps = mcwf::plan_substeps(segment, model, resolution).steps;
    const SparseOp& decay = model.decay();
    double rate = 0.0;
    for (Eigen::Index col = 0; col < decay.outerSize(); ++col) {
        double s = 0.0;
        for (SparseOp::InnerIterator it(decay, col); it; ++it) s += std::abs(it.value());
        rate = std::max(rate, s);
    }
    // The dissipator's spectral radius is at most 2 |Gamma|_1; keep h times
    // that below 2 * resolution so the RK4 part stays well resolved.
    if (rate > 0.0) {
        const auto n = static_cast<std::size_t>(std::ceil(segment.duration * rate / resolution));
        steps = std::max(steps, n);
    }
    return std::max<std::size_t>(steps, 1);
}

void check_segment(const DensityMatrix& rho, const MeSettings& settings, double time) {
    const Complex tr = rho.trace();
    if (!(std::abs(tr - 1.0) <= settings.trace_tol)) throw IntegrationFault(time, "density matrix trace drifted");
    if (!(rho.hermiticity_error() <= settings.hermiticity_tol))
        throw IntegrationFault(time, "density matrix lost hermiticity");
}

}  // namespace

MeResult evolve_me(const DensityMatrix& initial, const schedule::Schedule& schedule, const model::SystemModel& model,
                   const MeSettings& settings, const MeObserver& observer) {
    if (!(initial.layout() == model.layout())) throw std::invalid_argument("initial state does not match the model");
    if (!(settings.resolution > 0.0)) throw std::invalid_argument("ME resolution must be > 0");

    MeResult result{initial, {}};
    DensityMatrix& rho = result.final_state;
    double time = 0.0;
    for (const auto& segment : schedule.segments) {
        if (segment.is_marker()) {
            if (rho.min_eigenvalue() < -settings.positivity_tol)
                throw IntegrationFault(time, "density matrix lost positivity");
            result.snapshots.push_back(rho);
            continue;
        }
        if (segment.duration == 0.0) continue;

        const std::size_t steps = step_count(segment, model, settings.resolution);
        const double h = segment.duration / static_cast<double>(steps);
        const SegmentGenerator gen(model, segment.drive, h);
        const double t0 = time;
        double herm = 0.0;
        for (std::size_t i = 0; i < steps; ++i) {
            Matrix& u = rho.matrix();
            if (!gen.dissipative()) {
                u = gen.flow_half(gen.flow_half(u));
            } else {
                const Matrix k1 = gen.dissipator(u);
                const Matrix a = gen.flow_half(u);
                const Matrix b = gen.flow_half(k1);
                const Matrix k2 = gen.dissipator(a + (0.5 * h) * b);
                const Matrix k3 = gen.dissipator(a + (0.5 * h) * k2);
                const Matrix c = gen.flow_half(a);
                const Matrix k4 = gen.dissipator(c + h * gen.flow_half(k3));
                Matrix next = c + (h / 6.0) * (gen.flow_half(b) + k4);
                next += (h / 3.0) * gen.flow_half(k2 + k3);
                u = std::move(next);
            }
            herm = std::max(herm, rho.hermiticity_error());
            rho.symmetrize();
            if (observer) observer(t0 + static_cast<double>(i + 1) * h, rho.matrix(), segment);
        }
        time = t0 + segment.duration;
        if (!(herm <= settings.hermiticity_tol)) throw IntegrationFault(time, "density matrix lost hermiticity");
        check_segment(rho, settings, time);
    }
    return result;
}

}  // namespace rydgrover::mesolve
