#pragma once

#include <complex>

#include <Eigen/Dense>

namespace lcns {

using cplx = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

inline constexpr double kPi = 3.14159265358979323846264338327950288;
inline constexpr double kTwoPi = 2.0 * kPi;
inline constexpr cplx kI{0.0, 1.0};

}  // namespace lcns
