#pragma once

#include <cstdint>
#include <vector>

#include "increpr/types.hpp"

namespace increpr::metrics {

struct TrialOutcome {
  double relerr = 0.0;
  bool success = false;  // relerr < threshold
  std::uint64_t seed = 0;
  double m_over_n = 0.0;
};

// Relative error up to a global phase: the minimizing |c| = 1 has the
// closed form c* = <x, x_true>/|<x, x_true>| (c* = 1 when the inner
// product vanishes), giving ||c* x - x_true|| / ||x_true||.
double relerr_phase(const CVec& x, const CVec& x_true);

// Relative Frobenius error of an n1 x n2 reconstruction against the true
// image, minimized over the oversampled-Fourier ambiguity group on the
// padded 2n1 x 2n2 plane: every cyclic translation, the conjugate mirror
// (180-degree rotation), and a global unit scalar (sign for the real
// overload, phase for the complex one). Translations are searched via
// FFT cross-correlation.
double relerr_fourier(const Mat& img, const Mat& img_true);
double relerr_fourier(const CMat& img, const Mat& img_true);

// Applies the error-minimizing group element to img and returns the
// real part cropped back to the image frame, for display next to
// img_true.
Mat align_fourier(const CMat& img, const Mat& img_true);

double recovery_rate(const std::vector<TrialOutcome>& outcomes);

// Additive Gaussian noise on the intensities, scaled so the realized
// signal-to-noise ratio 10 log10(||b||^2/||eta||^2) equals snr_db
// exactly. Negative entries are clamped at zero only when requested
// (Poisson fidelity); the count of clamped entries is reported.
struct NoisyIntensities {
  Vec b;
  int clamped = 0;
};
NoisyIntensities add_gaussian_noise(const Vec& b, double snr_db,
                                    std::uint64_t seed,
                                    bool clamp_negative = false);

}  // namespace increpr::metrics
