#pragma once

#include <memory>
#include <string>

#include "increpr/types.hpp"

namespace increpr {

namespace detail {
class Fft2D;  // RAII wrapper over FFTW plans, defined in ensemble.cpp
}

// A measurement ensemble holds the sampling vectors a_1..a_m (implicitly
// for the Fourier backend) together with the recorded intensities b. It
// exposes the lifted linear map A(X)_i = a_i* X a_i and its adjoint in
// matrix-free form through the factor map
//
//   T : C^{n x q} -> C^{m x q},  (T V)_{ij} = a_i* v_j,
//
// so that A(Y Y*)_i = sum_j |(T Y)_ij|^2 and A*(w) V = T*(diag(w) T V).
// The n-by-n lifted matrix is never materialized.
//
// Backends:
//  - DenseRows: a_i stacked as the rows of an m-by-n complex matrix.
//  - FourierOversampled: a_i are the rows of the unitary 2-D DFT of the
//    zero-padded (2*n1 by 2*n2) image plane, flattened row-major; so
//    m = 4*n1*n2 and n = n1*n2. The DFT is unitary (scaled by 1/sqrt(m)),
//    hence sum_i A(YY*)_i = ||Y||_F^2 and intensity scales carry over
//    from the dense Gaussian backend.
//
// Ensembles are immutable after construction; all apply methods are const
// and safe to call concurrently.
class MeasurementEnsemble {
 public:
  enum class Backend { DenseRows, FourierOversampled };

  // i.i.d. Gaussian rows: Real -> N(0,1) per entry, Complex -> CN(0,1).
  // Deterministic per seed. b is left empty; attach it with
  // with_intensities once measured.
  static MeasurementEnsemble gaussian(int n, int m, Field field,
                                      std::uint64_t seed);

  // Dense ensemble from explicit rows (m-by-n). For Field::Real every
  // imaginary part must be exactly zero.
  static MeasurementEnsemble from_rows(CMat rows, Field field);

  // Oversampled Fourier ensemble of an n1-by-n2 nonnegative image
  // (n1, n2 >= 2). b is filled with the squared moduli of the unitary
  // DFT of the zero-padded image.
  static MeasurementEnsemble fourier(const Mat& image);

  // Copy with intensities attached (size m, finite, >= 0).
  MeasurementEnsemble with_intensities(Vec b) const;

  int n() const { return n_; }
  int m() const { return m_; }
  Field field() const { return field_; }
  Backend backend() const { return backend_; }
  bool has_intensities() const { return b_.size() == m_; }
  const Vec& intensities() const;
  const CMat& rows() const;          // DenseRows only
  int fourier_rows() const { return n1_; }  // image dims, Fourier only
  int fourier_cols() const { return n2_; }

  // The factor map T and its adjoint.
  CMat transform(const CMat& V) const;                       // m x q
  CMat adjoint_transformed(const Vec& w, const CMat& TV) const;  // n x q

  // A(Y Y*): entrywise nonnegative intensities of the factor Y.
  Vec forward_intensity(const CMat& Y) const;

  // A*(w) V = sum_i w_i a_i (a_i* V), without forming the n-by-n matrix.
  CMat adjoint_weighted_apply(const Vec& w, const CMat& V) const;

  // Polarization A(Y Xi* + Xi Y*)_i = 2 Re sum_j (TY)_ij conj((TXi)_ij),
  // assembled from already-transformed factors.
  static Vec polarized_intensity(const CMat& TY, const CMat& TXi);

  // Plain-text serialization of dense ensembles (PRMAT v1, see README).
  void save(const std::string& path) const;
  static MeasurementEnsemble load(const std::string& path);

 private:
  MeasurementEnsemble() = default;

  Backend backend_ = Backend::DenseRows;
  Field field_ = Field::Real;
  int n_ = 0;
  int m_ = 0;
  CMat rows_;      // DenseRows: m x n
  Vec b_;          // intensities, empty until attached
  int n1_ = 0, n2_ = 0;  // Fourier: image dims (padded plane is 2n1 x 2n2)
  std::shared_ptr<const detail::Fft2D> fft_;  // shared, execution is const
};

}  // namespace increpr
