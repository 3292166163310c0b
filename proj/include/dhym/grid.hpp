#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace dhym::flow {

// Unnormalized c2c FFT over the periodic grid [0,1)^{2n} with N points per
// real dimension, row-major layout with dimension order (x_1..x_n, y_1..y_n).
// Plans use FFTW_ESTIMATE so planning is deterministic across runs, and
// transforms copy through internal aligned buffers, so callers may pass any
// storage. Instances are not thread-safe (the internal buffers are shared
// between calls); distinct instances are independent.
class SpectralGrid {
 public:
  SpectralGrid(int n, int N);
  ~SpectralGrid();
  SpectralGrid(const SpectralGrid&) = delete;
  SpectralGrid& operator=(const SpectralGrid&) = delete;

  int complex_dim() const { return n_; }
  int points_per_dim() const { return N_; }
  std::size_t total() const { return total_; }

  // Signed integer frequency of index i in one dimension: i for i <= N/2,
  // i - N otherwise.
  int freq(int i) const { return i <= N_ / 2 ? i : i - N_; }

  // out = sum_x in(x) e^{-2 pi i m.x} (FFTW forward, unnormalized).
  void forward(const std::complex<double>* in, std::complex<double>* out);
  // out = sum_m in(m) e^{+2 pi i m.x} (FFTW backward, unnormalized).
  void backward(const std::complex<double>* in, std::complex<double>* out);

 private:
  int n_ = 0;
  int N_ = 0;
  std::size_t total_ = 0;
  void* plan_fwd_ = nullptr;  // fftw_plan
  void* plan_bwd_ = nullptr;
  void* buf_in_ = nullptr;  // fftw_complex arrays
  void* buf_out_ = nullptr;
};

}  // namespace dhym::flow
