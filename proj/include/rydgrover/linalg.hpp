#pragma once

#include <complex>
#include <numbers>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace rydgrover {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using SparseOp = Eigen::SparseMatrix<Complex>;

inline constexpr Complex kI{0.0, 1.0};
inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

}  // namespace rydgrover
