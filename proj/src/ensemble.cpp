#include "increpr/ensemble.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "increpr/fft.hpp"
#include "increpr/rng.hpp"

namespace increpr {

MeasurementEnsemble MeasurementEnsemble::gaussian(int n, int m, Field field,
                                                  std::uint64_t seed) {
  if (n < 1 || m < 1)
    throw std::invalid_argument("gaussian ensemble: need n >= 1 and m >= 1");
  CMat rows(m, n);
  rng::SplitMix64 gen(seed);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j)
      rows(i, j) = (field == Field::Real) ? cxd(gen.normal(), 0.0)
                                          : gen.cnormal();
  return from_rows(std::move(rows), field);
}

MeasurementEnsemble MeasurementEnsemble::from_rows(CMat rows, Field field) {
  if (rows.rows() < 1 || rows.cols() < 1)
    throw std::invalid_argument("dense ensemble: empty row matrix");
  if (!rows.allFinite())
    throw std::invalid_argument("dense ensemble: non-finite row entries");
  if (field == Field::Real && (rows.imag().array() != 0.0).any())
    throw std::invalid_argument(
        "dense ensemble: real field but rows have imaginary parts");
  MeasurementEnsemble e;
  e.backend_ = Backend::DenseRows;
  e.field_ = field;
  e.m_ = static_cast<int>(rows.rows());
  e.n_ = static_cast<int>(rows.cols());
  e.rows_ = std::move(rows);
  return e;
}

MeasurementEnsemble MeasurementEnsemble::fourier(const Mat& image) {
  const int n1 = static_cast<int>(image.rows());
  const int n2 = static_cast<int>(image.cols());
  if (n1 < 2 || n2 < 2)
    throw std::invalid_argument("fourier ensemble: image must be >= 2x2");
  if ((image.array() < 0.0).any())
    throw std::invalid_argument("fourier ensemble: negative pixel values");

  MeasurementEnsemble e;
  e.backend_ = Backend::FourierOversampled;
  e.field_ = Field::Complex;
  e.n1_ = n1;
  e.n2_ = n2;
  e.n_ = n1 * n2;
  e.m_ = 4 * n1 * n2;
  e.fft_ = std::make_shared<detail::Fft2D>(2 * n1, 2 * n2);

  // b = squared moduli of the unitary DFT of the zero-padded image,
  // flattened row-major over the 2n1 x 2n2 plane
  CVec x(e.n_);
  for (int i = 0; i < n1; ++i)
    for (int j = 0; j < n2; ++j) x(i * n2 + j) = cxd(image(i, j), 0.0);
  CMat tx = e.transform(x);
  e.b_ = tx.col(0).cwiseAbs2();
  return e;
}

MeasurementEnsemble MeasurementEnsemble::with_intensities(Vec b) const {
  if (b.size() != m_)
    throw std::invalid_argument("with_intensities: size mismatch");
  if (!b.allFinite() || (b.array() < 0.0).any())
    throw std::invalid_argument(
        "with_intensities: intensities must be finite and >= 0");
  MeasurementEnsemble e = *this;
  e.b_ = std::move(b);
  return e;
}

const Vec& MeasurementEnsemble::intensities() const {
  if (!has_intensities())
    throw std::logic_error("ensemble has no intensities attached");
  return b_;
}

const CMat& MeasurementEnsemble::rows() const {
  if (backend_ != Backend::DenseRows)
    throw std::logic_error("rows() requires the DenseRows backend");
  return rows_;
}

CMat MeasurementEnsemble::transform(const CMat& V) const {
  if (V.rows() != n_)
    throw std::invalid_argument("transform: dimension mismatch");
  if (backend_ == Backend::DenseRows) return rows_ * V;

  const int P1 = 2 * n1_, P2 = 2 * n2_;
  const int q = static_cast<int>(V.cols());
  CMat out(m_, q);
  std::vector<cxd> buf(static_cast<size_t>(P1) * P2);
  for (int j = 0; j < q; ++j) {
    std::fill(buf.begin(), buf.end(), cxd(0.0, 0.0));
    for (int r = 0; r < n1_; ++r)
      for (int c = 0; c < n2_; ++c)
        buf[static_cast<size_t>(r) * P2 + c] = V(r * n2_ + c, j);
    fft_->forward(buf.data());
    for (int i = 0; i < m_; ++i) out(i, j) = buf[i];
  }
  return out;
}

CMat MeasurementEnsemble::adjoint_transformed(const Vec& w,
                                              const CMat& TV) const {
  if (w.size() != m_ || TV.rows() != m_)
    throw std::invalid_argument("adjoint_transformed: dimension mismatch");
  if (!w.allFinite())
    throw std::invalid_argument("adjoint_transformed: non-finite weights");
  if (backend_ == Backend::DenseRows)
    return rows_.adjoint() * (w.asDiagonal() * TV);

  const int P1 = 2 * n1_, P2 = 2 * n2_;
  const int q = static_cast<int>(TV.cols());
  CMat out(n_, q);
  std::vector<cxd> buf(static_cast<size_t>(P1) * P2);
  for (int j = 0; j < q; ++j) {
    for (int i = 0; i < m_; ++i) buf[i] = w(i) * TV(i, j);
    fft_->backward(buf.data());
    for (int r = 0; r < n1_; ++r)
      for (int c = 0; c < n2_; ++c)
        out(r * n2_ + c, j) = buf[static_cast<size_t>(r) * P2 + c];
  }
  return out;
}

Vec MeasurementEnsemble::forward_intensity(const CMat& Y) const {
  return transform(Y).cwiseAbs2().rowwise().sum();
}

CMat MeasurementEnsemble::adjoint_weighted_apply(const Vec& w,
                                                 const CMat& V) const {
  return adjoint_transformed(w, transform(V));
}

Vec MeasurementEnsemble::polarized_intensity(const CMat& TY, const CMat& TXi) {
  if (TY.rows() != TXi.rows() || TY.cols() != TXi.cols())
    throw std::invalid_argument("polarized_intensity: shape mismatch");
  return 2.0 * TY.cwiseProduct(TXi.conjugate()).real().rowwise().sum();
}

// ---------------------------------------------------------------------
// PRMAT v1 serialization (dense ensembles)
//
//   PRMAT v1 <real|complex> <m> <n>
//   m rows of n (real) or 2n (complex, re/im interleaved) floats
//   B
//   m lines of one intensity each

namespace {

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void MeasurementEnsemble::save(const std::string& path) const {
  if (backend_ != Backend::DenseRows)
    throw std::logic_error("save: only dense ensembles are serializable");
  if (!has_intensities())
    throw std::logic_error("save: ensemble has no intensities attached");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save: cannot open " + path);
  out << "PRMAT v1 " << (field_ == Field::Real ? "real" : "complex") << ' '
      << m_ << ' ' << n_ << '\n';
  for (int i = 0; i < m_; ++i) {
    for (int j = 0; j < n_; ++j) {
      if (j) out << ' ';
      out << fmt_double(rows_(i, j).real());
      if (field_ == Field::Complex)
        out << ' ' << fmt_double(rows_(i, j).imag());
    }
    out << '\n';
  }
  out << "B\n";
  for (int i = 0; i < m_; ++i) out << fmt_double(b_(i)) << '\n';
  if (!out) throw std::runtime_error("save: write failure on " + path);
}

MeasurementEnsemble MeasurementEnsemble::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load: cannot open " + path);
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("load: empty file " + path);

  std::istringstream header(line);
  std::string magic, version, field_str;
  long m = 0, n = 0;
  header >> magic >> version >> field_str >> m >> n;
  if (magic != "PRMAT" || version != "v1" ||
      (field_str != "real" && field_str != "complex") || header.fail())
    throw std::runtime_error("load: malformed header: " + line);
  if (m < 1 || n < 1)
    throw std::runtime_error("load: header has non-positive dimensions");
  const Field field = field_str == "real" ? Field::Real : Field::Complex;
  const int vals_per_row = field == Field::Real ? static_cast<int>(n)
                                                : static_cast<int>(2 * n);

  CMat rows(m, n);
  for (long i = 0; i < m; ++i) {
    if (!std::getline(in, line))
      throw std::runtime_error("load: truncated file at row " +
                               std::to_string(i + 1));
    std::istringstream ls(line);
    std::vector<double> vals;
    vals.reserve(vals_per_row);
    double v;
    while (ls >> v) vals.push_back(v);
    if (static_cast<int>(vals.size()) != vals_per_row)
      throw std::runtime_error("load: row " + std::to_string(i + 1) +
                               " has " + std::to_string(vals.size()) +
                               " values, expected " +
                               std::to_string(vals_per_row));
    for (long j = 0; j < n; ++j)
      rows(i, j) = field == Field::Real ? cxd(vals[j], 0.0)
                                        : cxd(vals[2 * j], vals[2 * j + 1]);
  }

  if (!std::getline(in, line) || line != "B")
    throw std::runtime_error("load: expected intensity marker 'B'");
  Vec b(m);
  for (long i = 0; i < m; ++i) {
    if (!std::getline(in, line))
      throw std::runtime_error("load: truncated intensities at row " +
                               std::to_string(i + 1));
    std::istringstream ls(line);
    double v;
    if (!(ls >> v))
      throw std::runtime_error("load: bad intensity at row " +
                               std::to_string(i + 1));
    if (v < 0.0)
      throw std::runtime_error("load: negative intensity at row " +
                               std::to_string(i + 1));
    b(i) = v;
  }
  return from_rows(std::move(rows), field).with_intensities(std::move(b));
}

}  // namespace increpr
