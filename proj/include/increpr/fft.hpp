#pragma once

#include <fftw3.h>

#include <cmath>
#include <cstddef>
#include <mutex>
#include <stdexcept>
#include <vector>

#include "increpr/types.hpp"

namespace increpr::detail {

// Unitary 2-D DFT over a row-major buffer. FFTW planner state is global,
// so plan creation is serialized behind a mutex; execution through the
// new-array interface is thread-safe, and plans are created
// FFTW_UNALIGNED so any buffer is acceptable.
class Fft2D {
 public:
  Fft2D(int rows, int cols) : rows_(rows), cols_(cols) {
    static std::mutex planner_mutex;
    std::lock_guard<std::mutex> lock(planner_mutex);
    std::vector<cxd> probe(static_cast<size_t>(rows) * cols);
    auto* p = reinterpret_cast<fftw_complex*>(probe.data());
    fwd_ = fftw_plan_dft_2d(rows, cols, p, p, FFTW_FORWARD,
                            FFTW_ESTIMATE | FFTW_UNALIGNED);
    bwd_ = fftw_plan_dft_2d(rows, cols, p, p, FFTW_BACKWARD,
                            FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (!fwd_ || !bwd_) throw std::runtime_error("fftw plan creation failed");
  }
  ~Fft2D() {
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(bwd_);
  }
  Fft2D(const Fft2D&) = delete;
  Fft2D& operator=(const Fft2D&) = delete;

  void forward(cxd* buf) const {
    auto* p = reinterpret_cast<fftw_complex*>(buf);
    fftw_execute_dft(fwd_, p, p);
    scale(buf);
  }
  void backward(cxd* buf) const {
    auto* p = reinterpret_cast<fftw_complex*>(buf);
    fftw_execute_dft(bwd_, p, p);
    scale(buf);
  }
  int rows() const { return rows_; }
  int cols() const { return cols_; }

 private:
  void scale(cxd* buf) const {
    const double s = 1.0 / std::sqrt(static_cast<double>(rows_) * cols_);
    const size_t total = static_cast<size_t>(rows_) * cols_;
    for (size_t i = 0; i < total; ++i) buf[i] *= s;
  }
  fftw_plan fwd_, bwd_;
  int rows_, cols_;
};

}  // namespace increpr::detail
