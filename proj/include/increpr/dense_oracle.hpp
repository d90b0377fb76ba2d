#pragma once

#include "increpr/objective.hpp"

namespace increpr {

// Reference solver for the lifted convex problem
//
//   min f0(X) + lambda tr(X)  over Hermitian X >= 0
//
// on the full n x n variable: projected gradient with dense
// eigendecomposition onto the PSD cone and a Barzilai-Borwein step
// behind a monotone safeguard. Independent of the factorized path; used
// by the certificate audit (n <= 16) and as the equivalence reference
// in the test suites. DenseRows ensembles only.
struct DenseSolveResult {
  CMat X;
  double value = 0.0;
  double pg_norm = 0.0;  // projected-gradient stationarity measure
  int iterations = 0;
  bool converged = false;
};

DenseSolveResult dense_lifted_solve(const ObjectiveSpec& spec,
                                    const MeasurementEnsemble& ens,
                                    double tol = 1e-10,
                                    int max_iters = 200000);

// Dense gradient of the lifted objective at X (Hermitian), for audits.
CMat dense_lifted_gradient(const ObjectiveSpec& spec,
                           const MeasurementEnsemble& ens, const CMat& X);

double dense_lifted_value(const ObjectiveSpec& spec,
                          const MeasurementEnsemble& ens, const CMat& X);

}  // namespace increpr
