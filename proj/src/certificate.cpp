#include "increpr/certificate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "increpr/rng.hpp"

namespace increpr {

CertificateOperator::CertificateOperator(const ObjectiveSpec& spec,
                                         const MeasurementEnsemble& ens,
                                         const CMat& Y)
    : ens_(&ens), lambda_(spec.lambda) {
  const Vec t = ens.forward_intensity(Y);
  weights_ = fidelity_weights(spec, t, ens.intensities());
}

CVec CertificateOperator::apply(const CVec& v) const {
  if (v.size() != ens_->n())
    throw std::invalid_argument("certificate operator: dimension mismatch");
  CVec out = ens_->adjoint_transformed(weights_, ens_->transform(v));
  if (lambda_ != 0.0) out += lambda_ * v;
  return out;
}

CVec s_apply(const ObjectiveSpec& spec, const MeasurementEnsemble& ens,
             const CMat& Y, const CVec& v) {
  return CertificateOperator(spec, ens, Y).apply(v);
}

// Lanczos with full reorthogonalization. Each sweep builds a Krylov
// section from the start vector; if the smallest Ritz pair does not meet
// the residual bound within the section, the sweep restarts from the
// best Ritz vector (or a fresh random vector after an invariant-subspace
// breakdown).
EigResult smallest_eigpair(const std::function<CVec(const CVec&)>& op, int n,
                           const EigOptions& opts) {
  if (n < 1) throw std::invalid_argument("smallest_eigpair: empty operator");

  rng::SplitMix64 gen(rng::derive_seed(opts.seed, 0x0e1617a1u));
  auto random_unit = [&]() {
    CVec v(n);
    for (int i = 0; i < n; ++i) v(i) = gen.cnormal();
    v /= v.norm();
    return v;
  };

  CVec start = random_unit();
  EigResult best;
  best.v = start;

  while (best.applies + 1 <= opts.max_iters) {
    const int cap = std::min({n, 200, opts.max_iters - best.applies});
    CMat Q(n, cap);
    Vec ad(cap), bd(cap);
    Q.col(0) = start;
    bool invariant = false;

    for (int k = 0; k < cap; ++k) {
      CVec w = op(Q.col(k));
      ++best.applies;
      ad(k) = std::real(Q.col(k).dot(w));
      w -= ad(k) * Q.col(k);
      if (k > 0) w -= bd(k - 1) * Q.col(k - 1);
      for (int pass = 0; pass < 2; ++pass)
        w -= Q.leftCols(k + 1) * (Q.leftCols(k + 1).adjoint() * w);
      const double bnorm = w.norm();

      Eigen::SelfAdjointEigenSolver<Mat> tri;
      tri.computeFromTridiagonal(ad.head(k + 1), bd.head(k),
                                 Eigen::ComputeEigenvectors);
      const double theta = tri.eigenvalues()(0);
      const Vec s = tri.eigenvectors().col(0);
      const double res_est = bnorm * std::abs(s(k));

      CVec ritz = Q.leftCols(k + 1) * s.cast<cxd>();
      ritz /= ritz.norm();
      best.nu = theta;
      best.v = std::move(ritz);

      const double bound = opts.tol * std::max(1.0, std::abs(theta));
      invariant =
          bnorm <= 1e-13 * std::max(1.0, ad.head(k + 1).cwiseAbs().maxCoeff());

      if (res_est <= bound || invariant || k + 1 == cap || k + 1 == n) {
        if (res_est <= 4.0 * bound || invariant || k + 1 == n) {
          const CVec Sv = op(best.v);
          ++best.applies;
          if ((Sv - best.nu * best.v).norm() <= bound) {
            best.converged = true;
            return best;
          }
        }
        break;
      }
      bd(k) = bnorm;
      Q.col(k + 1) = w / bnorm;
    }

    // restart; a breakdown means the swept subspace is exhausted, so only
    // a fresh direction can make progress
    start = invariant ? random_unit() : best.v;
  }
  return best;
}

CertificateResult check_certificate(const ObjectiveSpec& spec,
                                    const MeasurementEnsemble& ens,
                                    const CMat& Y, double epsilon,
                                    const EigOptions& opts) {
  CertificateOperator S(spec, ens, Y);
  EigResult eig = smallest_eigpair(
      [&S](const CVec& v) { return S.apply(v); }, ens.n(), opts);

  // For a real ensemble S is a real symmetric operator, so a real
  // eigenvector exists; strip the arbitrary Lanczos phase. Escape
  // directions built from v must not leak imaginary parts into real
  // factorizations (a complex rank-one factor hides a real rank-two
  // lifted iterate).
  if (ens.field() == Field::Real && (Y.imag().array() == 0.0).all()) {
    const cxd c = eig.v.transpose() * eig.v;  // e^{2i phase} for real modes
    const double phase = 0.5 * std::arg(c);
    const CVec rotated = std::polar(1.0, -phase) * eig.v;
    Vec re = rotated.real();
    const double nrm = re.norm();
    if (nrm > 0.9) {  // clean rotation; keep complex vector otherwise
      re /= nrm;
      CVec v_real = re.cast<cxd>();
      const CVec Sv = S.apply(v_real);
      if ((Sv - eig.nu * v_real).norm() <=
          2.0 * opts.tol * std::max(1.0, std::abs(eig.nu)))
        eig.v = std::move(v_real);
    }
  }

  CertificateResult out;
  out.nu_min = eig.nu;
  out.v = std::move(eig.v);
  out.psd_within = epsilon;
  out.eig_converged = eig.converged;
  out.is_certified = eig.converged && eig.nu >= -epsilon;
  return out;
}

}  // namespace increpr
