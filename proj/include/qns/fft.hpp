#pragma once

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <map>
#include <mutex>
#include <tuple>
#include <vector>

#include "qns/grid.hpp"

namespace qns::fft {

namespace detail {

// FFTW plan creation is not thread safe; execution via the new-array
// interface is. Plans are created once per (dim, M, direction) and reused.
class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan get(int dim, int m, int sign) {
    std::lock_guard<std::mutex> lock(mutex_);
    auto key = std::make_tuple(dim, m, sign);
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second;

    std::size_t n = 1;
    for (int a = 0; a < dim; ++a) n *= static_cast<std::size_t>(m);
    std::vector<std::complex<double>> in(n), out(n);
    int dims[3] = {m, m, m};
    fftw_plan plan = fftw_plan_dft(
        dim, dims, reinterpret_cast<fftw_complex*>(in.data()),
        reinterpret_cast<fftw_complex*>(out.data()), sign,
        FFTW_ESTIMATE | FFTW_UNALIGNED);
    plans_.emplace(key, plan);
    return plan;
  }

 private:
  PlanCache() = default;
  std::mutex mutex_;
  std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

}  // namespace detail

using Spectrum = std::vector<std::complex<double>>;

/// Forward transform of nodal values; coefficients are unnormalized
/// (inverse divides by the node count).
inline Spectrum forward(const Grid& g, const std::vector<double>& values) {
  Spectrum in(values.size()), out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) in[i] = values[i];
  fftw_plan plan = detail::PlanCache::instance().get(g.dim(), g.points_per_dim(), FFTW_FORWARD);
  fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(in.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

/// Inverse transform, returning the real part of the normalized result.
inline std::vector<double> inverse(const Grid& g, const Spectrum& coeffs) {
  Spectrum in(coeffs), out(coeffs.size());
  fftw_plan plan = detail::PlanCache::instance().get(g.dim(), g.points_per_dim(), FFTW_BACKWARD);
  fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(in.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
  std::vector<double> values(coeffs.size());
  const double scale = 1.0 / static_cast<double>(coeffs.size());
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = out[i].real() * scale;
  return values;
}

/// Visit every coefficient with its integer wavenumber multi-index.
template <typename F>
inline void for_each_mode(const Grid& g, Spectrum& coeffs, F&& fn) {
  const int m = g.points_per_dim();
  std::array<int, 3> k{0, 0, 0};
  for (std::size_t idx = 0; idx < coeffs.size(); ++idx) {
    auto mi = g.unflatten(idx);
    for (int a = 0; a < g.dim(); ++a) k[a] = mi[a] <= m / 2 ? mi[a] : mi[a] - m;
    fn(coeffs[idx], k);
  }
}

/// Spectral derivative along one axis. The Nyquist mode (index M/2) gets a
/// zero coefficient, the standard symmetric convention for odd derivatives.
inline void apply_derivative(const Grid& g, Spectrum& coeffs, int axis) {
  const double scale = 2.0 * M_PI / g.length();
  const int nyquist = g.points_per_dim() / 2;
  for_each_mode(g, coeffs, [&](std::complex<double>& c, const std::array<int, 3>& k) {
    if (k[axis] == nyquist) {
      c = 0.0;
    } else {
      c *= std::complex<double>(0.0, scale * k[axis]);
    }
  });
}

/// Laplacian symbol consistent with apply_derivative applied twice per axis
/// (Nyquist contributes zero).
inline void apply_laplacian(const Grid& g, Spectrum& coeffs) {
  const double scale = 2.0 * M_PI / g.length();
  const int nyquist = g.points_per_dim() / 2;
  for_each_mode(g, coeffs, [&](std::complex<double>& c, const std::array<int, 3>& k) {
    double sym = 0.0;
    for (int a = 0; a < g.dim(); ++a) {
      if (k[a] == nyquist) continue;
      const double ka = scale * k[a];
      sym -= ka * ka;
    }
    c *= sym;
  });
}

/// 2/3-rule dealiasing: zero every mode with |k| > M/3 in any direction.
inline void apply_dealias(const Grid& g, Spectrum& coeffs) {
  const int cutoff = g.points_per_dim() / 3;
  for_each_mode(g, coeffs, [&](std::complex<double>& c, const std::array<int, 3>& k) {
    for (int a = 0; a < g.dim(); ++a) {
      if (std::abs(k[a]) > cutoff) {
        c = 0.0;
        return;
      }
    }
  });
}

/// Keep modes with |k| <= cap in every direction, zero the rest. Idempotent.
inline void apply_mode_cap(const Grid& g, Spectrum& coeffs, int cap) {
  for_each_mode(g, coeffs, [&](std::complex<double>& c, const std::array<int, 3>& k) {
    for (int a = 0; a < g.dim(); ++a) {
      if (std::abs(k[a]) > cap) {
        c = 0.0;
        return;
      }
    }
  });
}

}  // namespace qns::fft
