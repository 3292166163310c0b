#include "dhym/grid.hpp"

#include <fftw3.h>

#include <cstring>
#include <stdexcept>
#include <vector>

namespace dhym::flow {

SpectralGrid::SpectralGrid(int n, int N) : n_(n), N_(N) {
  if (n < 1 || N < 2) throw std::invalid_argument("SpectralGrid: need n >= 1 and N >= 2");
  total_ = 1;
  for (int d = 0; d < 2 * n; ++d) total_ *= static_cast<std::size_t>(N);
  auto* in = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * total_));
  auto* out = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * total_));
  if (!in || !out) {
    fftw_free(in);
    fftw_free(out);
    throw std::bad_alloc();
  }
  buf_in_ = in;
  buf_out_ = out;
  std::vector<int> dims(2 * n, N);
  plan_fwd_ = fftw_plan_dft(2 * n, dims.data(), in, out, FFTW_FORWARD, FFTW_ESTIMATE);
  plan_bwd_ = fftw_plan_dft(2 * n, dims.data(), in, out, FFTW_BACKWARD, FFTW_ESTIMATE);
  if (!plan_fwd_ || !plan_bwd_) {
    throw std::runtime_error("SpectralGrid: FFTW plan creation failed");
  }
}

SpectralGrid::~SpectralGrid() {
  if (plan_fwd_) fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
  if (plan_bwd_) fftw_destroy_plan(static_cast<fftw_plan>(plan_bwd_));
  fftw_free(buf_in_);
  fftw_free(buf_out_);
}

void SpectralGrid::forward(const std::complex<double>* in, std::complex<double>* out) {
  std::memcpy(buf_in_, in, sizeof(std::complex<double>) * total_);
  fftw_execute(static_cast<fftw_plan>(plan_fwd_));
  std::memcpy(out, buf_out_, sizeof(std::complex<double>) * total_);
}

void SpectralGrid::backward(const std::complex<double>* in, std::complex<double>* out) {
  std::memcpy(buf_in_, in, sizeof(std::complex<double>) * total_);
  fftw_execute(static_cast<fftw_plan>(plan_bwd_));
  std::memcpy(out, buf_out_, sizeof(std::complex<double>) * total_);
}

}  // namespace dhym::flow
