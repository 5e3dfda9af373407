#include "ks2d/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>

namespace ks2d {
namespace {

// FFTW planning is not thread-safe; execution on distinct buffers is.
// One plan pair + scratch buffers per grid size, guarded for concurrent
// sweep workers.
struct PlanSet {
  int n = 0;
  fftw_complex* in = nullptr;
  fftw_complex* out = nullptr;
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
  std::mutex exec_mutex;

  explicit PlanSet(int n_) : n(n_) {
    const std::size_t m = static_cast<std::size_t>(n) * n;
    in = fftw_alloc_complex(m);
    out = fftw_alloc_complex(m);
    // FFTW_ESTIMATE keeps plan selection deterministic across runs.
    fwd = fftw_plan_dft_2d(n, n, in, out, FFTW_FORWARD, FFTW_ESTIMATE);
    bwd = fftw_plan_dft_2d(n, n, in, out, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  ~PlanSet() {
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(bwd);
    fftw_free(in);
    fftw_free(out);
  }
};

PlanSet& plans_for(int n) {
  static std::mutex table_mutex;
  static std::map<int, PlanSet*> table;
  std::lock_guard<std::mutex> lock(table_mutex);
  auto it = table.find(n);
  if (it == table.end()) it = table.emplace(n, new PlanSet(n)).first;
  return *it->second;
}

} // namespace

SpectralCoeffs fft_forward(const ScalarField& f) {
  const int n = f.grid.n;
  const std::size_t m = f.grid.size();
  PlanSet& ps = plans_for(n);
  SpectralCoeffs c{f.grid, std::vector<std::complex<double>>(m)};
  {
    std::lock_guard<std::mutex> lock(ps.exec_mutex);
    for (std::size_t i = 0; i < m; ++i) {
      ps.in[i][0] = f.values[i];
      ps.in[i][1] = 0.0;
    }
    fftw_execute(ps.fwd);
    const double scale = 1.0 / static_cast<double>(m);
    for (std::size_t i = 0; i < m; ++i) c.modes[i] = {ps.out[i][0] * scale, ps.out[i][1] * scale};
  }
  return c;
}

ScalarField fft_inverse(const SpectralCoeffs& c) {
  const int n = c.grid.n;
  const std::size_t m = c.grid.size();
  PlanSet& ps = plans_for(n);
  ScalarField f{c.grid, std::vector<double>(m)};
  {
    std::lock_guard<std::mutex> lock(ps.exec_mutex);
    for (std::size_t i = 0; i < m; ++i) {
      ps.in[i][0] = c.modes[i].real();
      ps.in[i][1] = c.modes[i].imag();
    }
    fftw_execute(ps.bwd);
    for (std::size_t i = 0; i < m; ++i) f.values[i] = ps.out[i][0];
  }
  return f;
}

} // namespace ks2d
