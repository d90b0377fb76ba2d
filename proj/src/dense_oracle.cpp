#include "increpr/dense_oracle.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>

namespace increpr {

namespace {

Vec lifted_intensity(const MeasurementEnsemble& ens, const CMat& X) {
  const CMat& R = ens.rows();
  return (R * X).cwiseProduct(R.conjugate()).rowwise().sum().real();
}

CMat psd_project(const CMat& X) {
  const CMat H = 0.5 * (X + X.adjoint());
  Eigen::SelfAdjointEigenSolver<CMat> eig(H);
  const Vec lam = eig.eigenvalues().cwiseMax(0.0);
  return eig.eigenvectors() * lam.asDiagonal() *
         eig.eigenvectors().adjoint();
}

}  // namespace

double dense_lifted_value(const ObjectiveSpec& spec,
                          const MeasurementEnsemble& ens, const CMat& X) {
  const Vec t = lifted_intensity(ens, X);
  return fidelity_value(spec, t, ens.intensities()) +
         spec.lambda * X.trace().real();
}

CMat dense_lifted_gradient(const ObjectiveSpec& spec,
                           const MeasurementEnsemble& ens, const CMat& X) {
  const CMat& R = ens.rows();
  const Vec t = lifted_intensity(ens, X);
  const Vec w = fidelity_weights(spec, t, ens.intensities());
  CMat G = R.adjoint() * (w.asDiagonal() * R);
  if (spec.lambda != 0.0)
    G += spec.lambda * CMat::Identity(ens.n(), ens.n());
  return G;
}

DenseSolveResult dense_lifted_solve(const ObjectiveSpec& spec,
                                    const MeasurementEnsemble& ens,
                                    double tol, int max_iters) {
  if (ens.backend() != MeasurementEnsemble::Backend::DenseRows)
    throw std::invalid_argument("dense_lifted_solve: dense ensembles only");
  const int n = ens.n();

  DenseSolveResult res;
  res.X = CMat::Zero(n, n);
  double f = dense_lifted_value(spec, ens, res.X);
  CMat G = dense_lifted_gradient(spec, ens, res.X);
  double step = 1.0 / std::max(1.0, G.norm());

  for (int k = 0; k < max_iters; ++k) {
    res.iterations = k;

    if (k % 10 == 0) {
      // stationarity probe with a fixed unit step
      const double pg = (res.X - psd_project(res.X - G)).norm();
      res.pg_norm = pg;
      if (pg <= tol * std::max(1.0, std::abs(f))) {
        res.converged = true;
        break;
      }
    }

    CMat X_new = psd_project(res.X - step * G);
    double f_new = dense_lifted_value(spec, ens, X_new);
    int halvings = 0;
    while (f_new > f && halvings < 60) {
      step *= 0.5;
      X_new = psd_project(res.X - step * G);
      f_new = dense_lifted_value(spec, ens, X_new);
      ++halvings;
    }
    const CMat dX = X_new - res.X;
    if (dX.norm() == 0.0) {
      res.pg_norm = (res.X - psd_project(res.X - G)).norm();
      res.converged = res.pg_norm <= tol * std::max(1.0, std::abs(f));
      break;
    }

    const CMat G_new = dense_lifted_gradient(spec, ens, X_new);
    const double num = rdot(dX, dX);
    const double den = rdot(dX, G_new - G);
    step = den > 0.0 ? std::clamp(num / den, 1e-12, 1e12) : step * 2.0;

    res.X = std::move(X_new);
    f = f_new;
    G = G_new;
  }
  res.value = f;
  if (!res.converged)
    res.pg_norm = (res.X - psd_project(res.X - G)).norm();
  return res;
}

}  // namespace increpr
