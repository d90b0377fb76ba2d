#pragma once

#include <complex>
#include <Eigen/Dense>

namespace increpr {

using cxd = std::complex<double>;
using Vec = Eigen::VectorXd;
using CVec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXd;
using CMat = Eigen::MatrixXcd;

// Scalar field of the measurement model. Real forces every sampled vector
// (and planted signal) to have exactly zero imaginary part.
enum class Field { Real, Complex };

enum class Fidelity { LeastSquares, Poisson };

// The lifted variable is factored as X = Y Y* with Y n-by-p; p is the
// current rank bound, 1 <= p <= n. A plain complex matrix carries the
// factor throughout; column count is p.
using Factor = CMat;

// Real inner product on complex matrices: Re tr(A* B). Directional
// derivatives of every objective in this library are taken with respect
// to this inner product, i.e. d/dh f(Y + h Z)|_0 = rdot(gradient, Z).
inline double rdot(const CMat& a, const CMat& b) {
  return a.cwiseProduct(b.conjugate()).sum().real();
}

}  // namespace increpr
