#include "rfft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>

namespace ks2d::detail {
namespace {

struct RPlanSet {
  int n;
  double* real = nullptr;
  fftw_complex* cplx = nullptr;
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
  std::mutex exec_mutex;

  explicit RPlanSet(int n_) : n(n_) {
    real = fftw_alloc_real(static_cast<std::size_t>(n) * n);
    cplx = fftw_alloc_complex(half_size(n));
    fwd = fftw_plan_dft_r2c_2d(n, n, real, cplx, FFTW_ESTIMATE);
    bwd = fftw_plan_dft_c2r_2d(n, n, cplx, real, FFTW_ESTIMATE);
  }
  ~RPlanSet() {
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(bwd);
    fftw_free(real);
    fftw_free(cplx);
  }
};

RPlanSet& rplans_for(int n) {
  static std::mutex table_mutex;
  static std::map<int, RPlanSet*> table;
  std::lock_guard<std::mutex> lock(table_mutex);
  auto it = table.find(n);
  if (it == table.end()) it = table.emplace(n, new RPlanSet(n)).first;
  return *it->second;
}

} // namespace

void rfft_forward(int n, const double* in, std::complex<double>* out) {
  RPlanSet& ps = rplans_for(n);
  const std::size_t nn = static_cast<std::size_t>(n) * n;
  const std::size_t nc = half_size(n);
  std::lock_guard<std::mutex> lock(ps.exec_mutex);
  for (std::size_t i = 0; i < nn; ++i) ps.real[i] = in[i];
  fftw_execute(ps.fwd);
  const double scale = 1.0 / static_cast<double>(nn);
  for (std::size_t i = 0; i < nc; ++i) out[i] = {ps.cplx[i][0] * scale, ps.cplx[i][1] * scale};
}

void rfft_inverse(int n, const std::complex<double>* in, double* out) {
  RPlanSet& ps = rplans_for(n);
  const std::size_t nn = static_cast<std::size_t>(n) * n;
  const std::size_t nc = half_size(n);
  std::lock_guard<std::mutex> lock(ps.exec_mutex);
  for (std::size_t i = 0; i < nc; ++i) {
    ps.cplx[i][0] = in[i].real();
    ps.cplx[i][1] = in[i].imag();
  }
  fftw_execute(ps.bwd);
  for (std::size_t i = 0; i < nn; ++i) out[i] = ps.real[i];
}

} // namespace ks2d::detail
