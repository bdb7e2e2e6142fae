#pragma once

// Reference constructions for the tests. Everything here is built from dense
// Kronecker products and closed-form expressions and shares no code with the
// library.

#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

namespace oracle {

using cd = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

inline constexpr cd I{0.0, 1.0};

// |to><from| on an n-level system.
inline Mat unit(int n, int to, int from) {
    Mat m = Mat::Zero(n, n);
    m(to, from) = 1.0;
    return m;
}

// Factor list: k four-level atoms, then a two-level ancilla if requested.
inline std::vector<int> factor_dims(std::size_t k, bool ancilla) {
    std::vector<int> dims(k, 4);
    if (ancilla) dims.push_back(2);
    return dims;
}

inline Mat kron_all(const std::vector<Mat>& factors) {
    Mat out = Mat::Identity(1, 1);
    for (const auto& f : factors) {
        Mat next = Eigen::kroneckerProduct(out, f).eval();
        out = std::move(next);
    }
    return out;
}

// Operator `op` on factor `atom`, identity elsewhere.
inline Mat on_atom(const Mat& op, std::size_t atom, std::size_t k, bool ancilla) {
    const auto dims = factor_dims(k, ancilla);
    std::vector<Mat> factors;
    for (std::size_t i = 0; i < dims.size(); ++i) factors.push_back(i == atom ? op : Mat::Identity(dims[i], dims[i]));
    return kron_all(factors);
}

inline int full_dim(std::size_t k, bool ancilla) {
    int d = 1;
    for (int n : factor_dims(k, ancilla)) d *= n;
    return d;
}

inline Mat microwave(std::size_t k, bool ancilla, double amp, double phase, const std::vector<double>& detuning) {
    const int d = full_dim(k, ancilla);
    Mat h = Mat::Zero(d, d);
    const cd omega = amp * std::exp(I * phase);
    for (std::size_t j = 0; j < k; ++j) {
        Mat single = -(detuning[j] * unit(4, 1, 1) + 0.5 * omega * unit(4, 1, 0) + 0.5 * std::conj(omega) * unit(4, 0, 1));
        h += on_atom(single, j, k, ancilla);
    }
    return h;
}

inline Mat laser(std::size_t k, bool ancilla, const std::vector<double>& amp, const std::vector<double>& phase,
                 double anc_amp = 0.0, double anc_phase = 0.0) {
    const int d = full_dim(k, ancilla);
    Mat h = Mat::Zero(d, d);
    for (std::size_t j = 0; j < k; ++j) {
        const cd omega = amp[j] * std::exp(I * phase[j]);
        Mat single = -0.5 * (omega * unit(4, 2, 1) + std::conj(omega) * unit(4, 1, 2));
        h += on_atom(single, j, k, ancilla);
    }
    if (ancilla) {
        const cd omega = anc_amp * std::exp(I * anc_phase);
        Mat single = -0.5 * (omega * unit(2, 1, 0) + std::conj(omega) * unit(2, 0, 1));
        h += on_atom(single, k, k, ancilla);
    }
    return h;
}

// Direct: sum_{i<j} V_ij P_r^i P_r^j. Ancilla: sum_j V_ja P_r^j P_R^a.
inline Mat interaction(std::size_t k, bool ancilla, const Eigen::MatrixXd& v) {
    const int d = full_dim(k, ancilla);
    Mat h = Mat::Zero(d, d);
    if (!ancilla) {
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = i + 1; j < k; ++j)
                h += v(i, j) * on_atom(unit(4, 2, 2), i, k, false) * on_atom(unit(4, 2, 2), j, k, false);
    } else {
        for (std::size_t j = 0; j < k; ++j)
            h += v(j, k) * on_atom(unit(4, 2, 2), j, k, true) * on_atom(unit(2, 1, 1), k, k, true);
    }
    return h;
}

struct Rates {
    double g0 = 0, g1 = 0, r0 = 0, r1 = 0, ro = 0, dz = 0, dr = 0;
};

inline std::vector<Mat> jumps(std::size_t k, bool ancilla, const Rates& r) {
    std::vector<Mat> out;
    const Mat id = Mat::Identity(4, 4);
    const std::vector<std::pair<double, Mat>> single = {
        {r.g0, unit(4, 1, 0)},
        {r.g1, unit(4, 0, 1)},
        {r.r0, unit(4, 0, 2)},
        {r.r1, unit(4, 1, 2)},
        {r.ro, unit(4, 3, 2)},
        {r.dz / 2, 2.0 * unit(4, 1, 1) - id},
        {r.dr / 2, 2.0 * unit(4, 2, 2) - id},
    };
    for (std::size_t j = 0; j < k; ++j)
        for (const auto& [rate, op] : single)
            if (rate > 0) out.push_back(std::sqrt(rate) * on_atom(op, j, k, ancilla));
    return out;
}

inline Mat decay_sum(const std::vector<Mat>& ls, int d) {
    Mat g = Mat::Zero(d, d);
    for (const auto& l : ls) g += l.adjoint() * l;
    return g;
}

// Closed-form Grover success after m iterations over N = 2^k items.
inline double grover_success(std::size_t k, std::size_t m) {
    const double theta = std::asin(std::pow(2.0, -0.5 * static_cast<double>(k)));
    const double s = std::sin((2.0 * static_cast<double>(m) + 1.0) * theta);
    return s * s;
}

// Textbook Grover on 2^k amplitudes: phase flip of the marked item, then
// inversion about the mean. Returns the marked-item probability.
inline double grover_simulated(std::size_t k, std::size_t marked, std::size_t m) {
    const std::size_t n = std::size_t{1} << k;
    Eigen::VectorXd a = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), 1.0 / std::sqrt(double(n)));
    for (std::size_t it = 0; it < m; ++it) {
        a(static_cast<Eigen::Index>(marked)) *= -1.0;
        const double mean = a.mean();
        a = (2.0 * mean - a.array()).matrix();
    }
    return a(static_cast<Eigen::Index>(marked)) * a(static_cast<Eigen::Index>(marked));
}

// Index of a qubit bitstring (digit 0 most significant) in the 4-level basis,
// with the ancilla (if any) in g.
inline int qubit_index(const std::string& bits, bool ancilla) {
    int idx = 0;
    for (char c : bits) idx = idx * 4 + (c - '0');
    return ancilla ? idx * 2 : idx;
}

inline double max_abs(const Mat& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

}  // namespace oracle
