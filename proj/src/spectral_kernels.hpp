#pragma once

// Internal half-spectrum machinery shared by the time stepper and the
// fixed-point harness. Not installed; include from src/ only.

#include "ks2d/grid.hpp"
#include "rfft.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

namespace ks2d::detail {

using cd = std::complex<double>;

/// Half-spectrum mode tables for the r2c stepping path.
struct ModeTables {
  int n = 0;
  std::size_t nc = 0;
  std::vector<double> kxd, kyd; // derivative wavenumbers (Nyquist zeroed)
  std::vector<double> k2;       // |k|^2 with full Nyquist contribution
  std::vector<float> keep;      // dealias mask (1 = keep)
  std::vector<float> tail;      // top third of the active band
  std::vector<float> herm;      // Hermitian multiplicity (1 or 2)

  ModeTables(const GridSpec& g, bool dealias) {
    n = g.n;
    nc = half_size(n);
    kxd.resize(nc);
    kyd.resize(nc);
    k2.resize(nc);
    keep.resize(nc);
    tail.resize(nc);
    herm.resize(nc);
    const int nh = n / 2 + 1;
    const int m_act = dealias ? n / 3 : n / 2;
    const int m_tail = 2 * m_act / 3;
    for (int my = 0; my < n; ++my) {
      const int sy = signed_index(my, n);
      const double ky = 2.0 * M_PI * sy / g.box_length;
      for (int mx = 0; mx < nh; ++mx) {
        const std::size_t i = static_cast<std::size_t>(my) * nh + mx;
        const double kx = 2.0 * M_PI * mx / g.box_length;
        kxd[i] = mx == n / 2 ? 0.0 : kx;
        kyd[i] = my == n / 2 ? 0.0 : ky;
        k2[i] = kx * kx + ky * ky;
        const int mmax = std::max(std::abs(sy), mx);
        keep[i] = mmax <= m_act ? 1.0f : 0.0f;
        tail[i] = (mmax <= m_act && mmax > m_tail) ? 1.0f : 0.0f;
        herm[i] = (mx == 0 || mx == n / 2) ? 1.0f : 2.0f;
      }
    }
  }
};

struct Workspace {
  int n = 0;
  std::vector<double> u, u_save, vx, vy, fx, fy;
  std::vector<cd> tmp_a, tmp_b, nl;

  explicit Workspace(int n_) : n(n_) {
    const std::size_t nn = static_cast<std::size_t>(n) * n;
    const std::size_t nc = half_size(n);
    u.resize(nn);
    u_save.resize(nn);
    vx.resize(nn);
    vy.resize(nn);
    fx.resize(nn);
    fy.resize(nn);
    tmp_a.resize(nc);
    tmp_b.resize(nc);
    nl.resize(nc);
  }
};

/// N_u = -div(u grad v) in spectral form; also leaves u in ws.u. The k = 0
/// entry is exactly zero (both wavenumber factors vanish), which is what
/// conserves mass bit-for-bit.
inline void flux_divergence(const std::vector<cd>& u_hat, const std::vector<cd>& v_hat,
                            const ModeTables& mt, Workspace& ws) {
  const std::size_t nc = mt.nc;
  rfft_inverse(mt.n, u_hat.data(), ws.u.data());
  for (std::size_t i = 0; i < nc; ++i) {
    ws.tmp_a[i] = cd(0.0, mt.kxd[i]) * v_hat[i];
    ws.tmp_b[i] = cd(0.0, mt.kyd[i]) * v_hat[i];
  }
  rfft_inverse(mt.n, ws.tmp_a.data(), ws.vx.data());
  rfft_inverse(mt.n, ws.tmp_b.data(), ws.vy.data());
  const std::size_t nn = static_cast<std::size_t>(mt.n) * mt.n;
  for (std::size_t i = 0; i < nn; ++i) {
    ws.fx[i] = ws.u[i] * ws.vx[i];
    ws.fy[i] = ws.u[i] * ws.vy[i];
  }
  rfft_forward(mt.n, ws.fx.data(), ws.tmp_a.data());
  rfft_forward(mt.n, ws.fy.data(), ws.tmp_b.data());
  for (std::size_t i = 0; i < nc; ++i) {
    const cd div = cd(0.0, mt.kxd[i]) * ws.tmp_a[i] + cd(0.0, mt.kyd[i]) * ws.tmp_b[i];
    ws.nl[i] = -static_cast<double>(mt.keep[i]) * div;
  }
}

} // namespace ks2d::detail
