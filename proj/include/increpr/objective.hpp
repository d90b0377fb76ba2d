#pragma once

#include "increpr/ensemble.hpp"
#include "increpr/types.hpp"

namespace increpr {

// Which data fidelity to fit, plus the trace weight. The factorized
// objective evaluated everywhere below is
//
//   LeastSquares:  f(Y) = 1/(2m) ||A(YY*) - b||^2        + lambda ||Y||_F^2
//   Poisson:       f(Y) = sum_i [t_i - b_i log(t_i)]     + lambda ||Y||_F^2
//
// with t = A(YY*) and the Poisson log/division clamped at poisson_floor.
// Gradients are Euclidean on C^{n x p} ~ R^{2np}: the returned matrix g
// satisfies d/dh f(Y + h Z)|_0 = rdot(g, Z) for every direction Z.
struct ObjectiveSpec {
  Fidelity fidelity = Fidelity::LeastSquares;
  double lambda = 0.0;
  double poisson_floor = 1e-12;

  // clamp recommended by the measured intensities: 1e-12 * max(1, mean(b))
  static double recommended_floor(const Vec& b) {
    const double mean = b.size() ? b.mean() : 0.0;
    return 1e-12 * std::max(1.0, mean);
  }
};

double value(const ObjectiveSpec& spec, const MeasurementEnsemble& ens,
             const CMat& Y);

CMat gradient(const ObjectiveSpec& spec, const MeasurementEnsemble& ens,
              const CMat& Y);

// Hessian action along xi (same shape as Y), matrix-free: the symmetric
// cross term A(Y xi* + xi Y*) is assembled by polarization of the
// transformed factors.
CMat hessian_vec(const ObjectiveSpec& spec, const MeasurementEnsemble& ens,
                 const CMat& Y, const CMat& xi);

// ----------------------------------------------------------------------
// Scalar pieces shared by the solvers and the certificate. With t the
// intensity vector, the fidelity part of the objective is sum_i F(t_i),
// the gradient is 2 T*(F'(t) o TY) + 2 lambda Y, and the certificate
// operator is S v = T*(F'(t) o Tv) + lambda v.

// sum_i F(t_i) for the given fidelity
double fidelity_value(const ObjectiveSpec& spec, const Vec& t, const Vec& b);

// F'(t) entrywise: LeastSquares (t - b)/m, Poisson 1 - b/max(t, floor)
Vec fidelity_weights(const ObjectiveSpec& spec, const Vec& t, const Vec& b);

// F''(t) entrywise: LeastSquares 1/m, Poisson b/max(t, floor)^2
Vec fidelity_curvature(const ObjectiveSpec& spec, const Vec& t, const Vec& b);

// Full evaluation reusing one transform; the solvers build on this.
struct Evaluation {
  double value = 0.0;
  CMat gradient;
  CMat TY;  // transformed factor, m x p
  Vec t;    // intensities A(YY*)
};
Evaluation evaluate(const ObjectiveSpec& spec, const MeasurementEnsemble& ens,
                    const CMat& Y);

}  // namespace increpr
