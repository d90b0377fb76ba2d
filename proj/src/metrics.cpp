#include "increpr/metrics.hpp"

#include <cmath>
#include <stdexcept>

#include "increpr/fft.hpp"
#include "increpr/rng.hpp"

namespace increpr::metrics {

double relerr_phase(const CVec& x, const CVec& x_true) {
  if (x.size() != x_true.size())
    throw std::invalid_argument("relerr_phase: length mismatch");
  const double denom = x_true.norm();
  if (denom == 0.0) throw std::invalid_argument("relerr_phase: zero truth");
  const cxd ip = x_true.dot(x);  // <x, x_true> in conjugate-first form
  const cxd c = std::abs(ip) > 0.0 ? std::conj(ip) / std::abs(ip) : cxd(1, 0);
  return (c * x - x_true).norm() / denom;
}

namespace {

struct BestShift {
  cxd corr = 0.0;  // <shift(A), B> at the best shift
  int si = 0, sj = 0;
};

// best |<shift_s(A), B>| over all cyclic shifts of the padded plane,
// computed for every s at once through the correlation theorem
BestShift best_correlation(const detail::Fft2D& fft, std::vector<cxd> a,
                           std::vector<cxd> b) {
  fft.forward(a.data());
  fft.forward(b.data());
  for (size_t i = 0; i < a.size(); ++i) a[i] = std::conj(a[i]) * b[i];
  fft.backward(a.data());
  const double scale =
      std::sqrt(static_cast<double>(fft.rows()) * fft.cols());
  BestShift best;
  size_t arg = 0;
  double best_abs = -1.0;
  for (size_t i = 0; i < a.size(); ++i)
    if (std::abs(a[i]) > best_abs) {
      best_abs = std::abs(a[i]);
      arg = i;
    }
  best.corr = a[arg] * scale;
  best.si = static_cast<int>(arg) / fft.cols();
  best.sj = static_cast<int>(arg) % fft.cols();
  return best;
}

// embed an n1 x n2 image at the origin of the 2n1 x 2n2 plane
template <typename Matrix>
std::vector<cxd> embed(const Matrix& img, int P1, int P2) {
  std::vector<cxd> out(static_cast<size_t>(P1) * P2, cxd(0, 0));
  for (Eigen::Index i = 0; i < img.rows(); ++i)
    for (Eigen::Index j = 0; j < img.cols(); ++j)
      out[static_cast<size_t>(i) * P2 + j] = cxd(img(i, j));
  return out;
}

// conjugate mirror on the padded plane: A'(r) = conj(A(-r mod P))
std::vector<cxd> conj_mirror(const std::vector<cxd>& a, int P1, int P2) {
  std::vector<cxd> out(a.size());
  for (int i = 0; i < P1; ++i)
    for (int j = 0; j < P2; ++j)
      out[static_cast<size_t>(i) * P2 + j] =
          std::conj(a[static_cast<size_t>((P1 - i) % P1) * P2 +
                      (P2 - j) % P2]);
  return out;
}

struct Alignment {
  BestShift shift;
  bool mirrored = false;
};

Alignment best_alignment(const std::vector<cxd>& a, const Mat& img_true,
                         int P1, int P2) {
  if (img_true.squaredNorm() == 0.0)
    throw std::invalid_argument("relerr_fourier: zero truth image");
  const detail::Fft2D fft(P1, P2);
  const std::vector<cxd> b = embed(img_true, P1, P2);
  const BestShift plain = best_correlation(fft, a, b);
  const BestShift mirrored =
      best_correlation(fft, conj_mirror(a, P1, P2), b);
  if (std::abs(mirrored.corr) > std::abs(plain.corr))
    return {mirrored, true};
  return {plain, false};
}

// the correlation only locates the best group element; the residual is
// then evaluated directly, which avoids the cancellation in
// ||A||^2 + ||B||^2 - 2 corr
double relerr_fourier_impl(std::vector<cxd> a, const Mat& img_true, int P1,
                           int P2) {
  const Alignment al = best_alignment(a, img_true, P1, P2);
  if (al.mirrored) a = conj_mirror(a, P1, P2);
  const cxd phase = std::abs(al.shift.corr) > 0.0
                        ? al.shift.corr / std::abs(al.shift.corr)
                        : cxd(1, 0);
  double err2 = 0.0;
  for (int i = 0; i < P1; ++i)
    for (int j = 0; j < P2; ++j) {
      const int ti = (i + al.shift.si) % P1;
      const int tj = (j + al.shift.sj) % P2;
      const cxd truth = (ti < img_true.rows() && tj < img_true.cols())
                            ? cxd(img_true(ti, tj), 0.0)
                            : cxd(0, 0);
      err2 += std::norm(phase * a[static_cast<size_t>(i) * P2 + j] - truth);
    }
  return std::sqrt(err2 / img_true.squaredNorm());
}

}  // namespace

double relerr_fourier(const Mat& img, const Mat& img_true) {
  if (img.rows() != img_true.rows() || img.cols() != img_true.cols())
    throw std::invalid_argument("relerr_fourier: shape mismatch");
  const int P1 = 2 * static_cast<int>(img.rows());
  const int P2 = 2 * static_cast<int>(img.cols());
  return relerr_fourier_impl(embed(img, P1, P2), img_true, P1, P2);
}

double relerr_fourier(const CMat& img, const Mat& img_true) {
  if (img.rows() != img_true.rows() || img.cols() != img_true.cols())
    throw std::invalid_argument("relerr_fourier: shape mismatch");
  const int P1 = 2 * static_cast<int>(img.rows());
  const int P2 = 2 * static_cast<int>(img.cols());
  return relerr_fourier_impl(embed(img, P1, P2), img_true, P1, P2);
}

Mat align_fourier(const CMat& img, const Mat& img_true) {
  if (img.rows() != img_true.rows() || img.cols() != img_true.cols())
    throw std::invalid_argument("align_fourier: shape mismatch");
  const int n1 = static_cast<int>(img.rows());
  const int n2 = static_cast<int>(img.cols());
  const int P1 = 2 * n1, P2 = 2 * n2;

  std::vector<cxd> a = embed(img, P1, P2);
  const Alignment al = best_alignment(a, img_true, P1, P2);
  if (al.mirrored) a = conj_mirror(a, P1, P2);
  const cxd phase = std::abs(al.shift.corr) > 0.0
                        ? al.shift.corr / std::abs(al.shift.corr)
                        : cxd(1, 0);

  Mat out = Mat::Zero(n1, n2);
  for (int i = 0; i < P1; ++i)
    for (int j = 0; j < P2; ++j) {
      const int ti = (i + al.shift.si) % P1;
      const int tj = (j + al.shift.sj) % P2;
      if (ti < n1 && tj < n2)
        out(ti, tj) =
            (phase * a[static_cast<size_t>(i) * P2 + j]).real();
    }
  return out;
}

double recovery_rate(const std::vector<TrialOutcome>& outcomes) {
  if (outcomes.empty())
    throw std::invalid_argument("recovery_rate: no outcomes");
  int hits = 0;
  for (const auto& o : outcomes) hits += o.success ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(outcomes.size());
}

NoisyIntensities add_gaussian_noise(const Vec& b, double snr_db,
                                    std::uint64_t seed, bool clamp_negative) {
  if (!b.allFinite())
    throw std::invalid_argument("add_gaussian_noise: non-finite intensities");
  rng::SplitMix64 gen(rng::derive_seed(seed, 0x7015e));
  Vec eta(b.size());
  for (Eigen::Index i = 0; i < b.size(); ++i) eta(i) = gen.normal();
  const double eta_norm = eta.norm();
  NoisyIntensities out;
  if (eta_norm > 0.0)
    eta *= b.norm() * std::pow(10.0, -snr_db / 20.0) / eta_norm;
  out.b = b + eta;
  if (clamp_negative)
    for (Eigen::Index i = 0; i < out.b.size(); ++i)
      if (out.b(i) < 0.0) {
        out.b(i) = 0.0;
        ++out.clamped;
      }
  return out;
}

}  // namespace increpr::metrics
