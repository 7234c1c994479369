#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace bdgskin {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

inline constexpr cplx kI{0.0, 1.0};

// Invalid input: bad lattice shape, out-of-range site, malformed parameters.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Numerical failure: eigensolver non-convergence, singular resolvent, root collision.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Entry-wise max norm, ‖A‖_max.
inline double max_abs(const CMatrix& a) {
  return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
}

}  // namespace bdgskin
