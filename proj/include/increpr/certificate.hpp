#pragma once

#include <functional>

#include "increpr/objective.hpp"

namespace increpr {

// Global-optimality certificate for the lifted convex problem. At a
// stationary factor Y, positive semidefiniteness of
//
//   S_Y = grad_X f0(Y Y*) + lambda I
//
// proves that Y Y* globally minimizes f0(X) + lambda tr(X) over the PSD
// cone. S_Y is applied matrix-free: S v = T*(F'(t) o T v) + lambda v,
// which makes S_Y Y = gradient(Y)/2 hold as an exact identity.

struct CertificateResult {
  double nu_min = 0.0;   // smallest eigenvalue of S_Y
  CVec v;                // corresponding unit eigenvector
  double psd_within = 0.0;  // the epsilon used
  bool is_certified = false;  // nu_min >= -epsilon (and eigensolver converged)
  bool eig_converged = false;
};

struct EigOptions {
  double tol = 1e-6;   // residual bound relative to max(1, |nu|)
  int max_iters = 500;  // cap on operator applications
  std::uint64_t seed = 0;  // start-vector seed
};

struct EigResult {
  double nu = 0.0;
  CVec v;
  bool converged = false;
  int applies = 0;
};

// Reusable handle on S_Y: the fidelity weights are fixed at construction
// so each apply costs one transform and one adjoint.
class CertificateOperator {
 public:
  CertificateOperator(const ObjectiveSpec& spec,
                      const MeasurementEnsemble& ens, const CMat& Y);
  CVec apply(const CVec& v) const;
  int n() const { return static_cast<int>(ens_->n()); }

 private:
  const MeasurementEnsemble* ens_;
  Vec weights_;
  double lambda_;
};

CVec s_apply(const ObjectiveSpec& spec, const MeasurementEnsemble& ens,
             const CMat& Y, const CVec& v);

// Smallest eigenpair of a Hermitian operator via Lanczos iteration with
// full reorthogonalization and restarts. Returns the best iterate with
// converged=false if the residual bound ||S v - nu v|| <= tol*max(1,|nu|)
// is not met within max_iters applications.
EigResult smallest_eigpair(const std::function<CVec(const CVec&)>& op, int n,
                           const EigOptions& opts);

// Certificate decision at Y: certified iff nu_min(S_Y) >= -epsilon.
// Eigensolver non-convergence yields an uncertified result with
// eig_converged = false.
CertificateResult check_certificate(const ObjectiveSpec& spec,
                                    const MeasurementEnsemble& ens,
                                    const CMat& Y, double epsilon,
                                    const EigOptions& opts = {});

}  // namespace increpr
