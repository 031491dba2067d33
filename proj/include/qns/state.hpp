#pragma once

#include <cmath>
#include <random>
#include <string>

#include "qns/field.hpp"
#include "qns/params.hpp"

namespace qns {

enum class Formulation { physical, effective };  // vel = u, or vel = w
enum class PositivityMode { strict, clamp };

/// Immutable simulation snapshot: density, velocity, time.
struct SimState {
  ScalarField n;
  VectorField vel;
  Formulation formulation = Formulation::physical;
  double time = 0.0;
};

struct InitialData {
  ScalarField n0;
  VectorField u0;
};

/// Pointwise square root of the density; requires strict positivity.
inline ScalarField sqrt_density(const ScalarField& n, double n_floor = 0.0) {
  const double mn = n.min();
  if (!(mn > 0.0))
    throw VacuumError("sqrt_density: non-positive density (min " + std::to_string(mn) + ")",
                      0.0, 0, mn);
  (void)n_floor;
  return n.map([](double v) { return std::sqrt(v); });
}

inline ScalarField sqrt_density(const SimState& s) { return sqrt_density(s.n); }

/// nu * grad(log n), the osmotic velocity of the effective-velocity change
/// of variables.
inline VectorField log_density_gradient(const ScalarField& n, double nu) {
  if (!(n.min() > 0.0))
    throw VacuumError("log density gradient: non-positive density", 0.0, 0, n.min());
  ScalarField logn = n.map([](double v) { return std::log(v); });
  VectorField g = gradient(logn);
  g *= nu;
  return g;
}

/// w = u + nu * grad(log n).
inline VectorField to_effective_velocity(const VectorField& u, const ScalarField& n,
                                         const PhysParams& p) {
  return u + log_density_gradient(n, p.nu);
}

/// u = w - nu * grad(log n); inverse of to_effective_velocity.
inline VectorField from_effective_velocity(const VectorField& w, const ScalarField& n,
                                           const PhysParams& p) {
  return w - log_density_gradient(n, p.nu);
}

struct PositivityEvent {
  double time = 0.0;
  double min_before = 0.0;
  std::size_t clamped_nodes = 0;
};

/// Strict mode: error below the floor. Clamp mode: raise to the floor and
/// report the event through `event` (clamped_nodes == 0 means untouched).
inline SimState enforce_positivity(const SimState& s, const PhysParams& p, PositivityMode mode,
                                   PositivityEvent* event = nullptr) {
  double mn = s.n.min();
  if (event) *event = PositivityEvent{s.time, mn, 0};
  if (mn >= p.n_floor) return s;
  if (mode == PositivityMode::strict) {
    std::size_t at = 0;
    for (std::size_t i = 0; i < s.n.size(); ++i)
      if (s.n[i] == mn) {
        at = i;
        break;
      }
    throw VacuumError("density " + std::to_string(mn) + " fell below floor " +
                          std::to_string(p.n_floor) + " at t=" + std::to_string(s.time),
                      s.time, at, mn);
  }
  SimState out = s;
  std::size_t count = 0;
  for (std::size_t i = 0; i < out.n.size(); ++i)
    if (out.n[i] < p.n_floor) {
      out.n[i] = p.n_floor;
      ++count;
    }
  if (event) event->clamped_nodes = count;
  return out;
}

// ---------------------------------------------------------------------------
// Named analytic initial-data profiles.
//
//   constant:           n0 = n_base,  u0_i = u_amp
//   cosine_bump:        n0 = n_base + n_amp * prod_i cos(2 pi x_i / L)
//                       u0_i = u_amp * sin(2 pi x_i / L)
//   gaussian_on_torus:  n0 = n_base + n_amp * prod_i G(x_i), G the
//                       periodized Gaussian sum_{m=-3..3} exp(-(x - L/2 - mL)^2 / (2 sigma^2))
//                       u0 = 0
//   random_bandlimited: n0 = n_base + n_amp * B1, u0_i = u_amp * B2_i, where
//                       B are seeded random Fourier sums over 1 <= |k| <= kmax
//                       with coefficients ~ U(-1,1)/k^2, normalized to unit
//                       max amplitude
// ---------------------------------------------------------------------------

struct ProfileSpec {
  std::string name = "cosine_bump";
  double n_base = 2.0;
  double n_amp = 0.5;
  double u_amp = 0.0;
  double sigma = 0.1;   // gaussian width
  int kmax = 4;         // random band limit
  unsigned long seed = 1;
};

namespace detail {

inline ScalarField random_bandlimited_1d_basis(GridPtr g, int kmax, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const double L = g->length();
  // Coefficients drawn per (k, axis-direction) pair; smooth by 1/k^2 falloff.
  std::vector<double> a(kmax + 1), b(kmax + 1);
  for (int k = 1; k <= kmax; ++k) {
    a[k] = unit(rng) / (k * k);
    b[k] = unit(rng) / (k * k);
  }
  ScalarField f = sample(g, [&](double x, double y, double z) {
    double s = 0.0;
    double c[3] = {x, y, z};
    for (int ax = 0; ax < g->dim(); ++ax)
      for (int k = 1; k <= kmax; ++k)
        s += a[k] * std::cos(2 * M_PI * k * c[ax] / L) + b[k] * std::sin(2 * M_PI * k * c[ax] / L);
    return s;
  });
  double mx = std::max(std::abs(f.min()), std::abs(f.max()));
  if (mx > 0) f *= 1.0 / mx;
  return f;
}

}  // namespace detail

inline InitialData make_initial_data(GridPtr g, const ProfileSpec& spec, const PhysParams& p) {
  const double L = g->length();
  ScalarField n0;
  VectorField u0(g);
  if (spec.name == "constant") {
    n0 = ScalarField(g, spec.n_base);
    for (int a = 0; a < g->dim(); ++a) u0.comp(a) += spec.u_amp;
  } else if (spec.name == "cosine_bump") {
    n0 = sample(g, [&](double x, double y, double z) {
      double c[3] = {x, y, z};
      double v = 1.0;
      for (int a = 0; a < g->dim(); ++a) v *= std::cos(2 * M_PI * c[a] / L);
      return spec.n_base + spec.n_amp * v;
    });
    for (int a = 0; a < g->dim(); ++a) {
      ScalarField s = sample(g, [&](double x, double y, double z) {
        double c[3] = {x, y, z};
        return spec.u_amp * std::sin(2 * M_PI * c[a] / L);
      });
      u0.comp(a) += s;
    }
  } else if (spec.name == "gaussian_on_torus") {
    n0 = sample(g, [&](double x, double y, double z) {
      double c[3] = {x, y, z};
      double v = 1.0;
      for (int a = 0; a < g->dim(); ++a) {
        double gsum = 0.0;
        for (int m = -3; m <= 3; ++m) {
          double d = c[a] - 0.5 * L - m * L;
          gsum += std::exp(-d * d / (2.0 * spec.sigma * spec.sigma));
        }
        v *= gsum;
      }
      return spec.n_base + spec.n_amp * v;
    });
  } else if (spec.name == "random_bandlimited") {
    std::mt19937_64 rng(spec.seed);
    ScalarField b1 = detail::random_bandlimited_1d_basis(g, spec.kmax, rng);
    n0 = ScalarField(g, spec.n_base) + spec.n_amp * b1;
    for (int a = 0; a < g->dim(); ++a)
      u0.comp(a) += spec.u_amp * detail::random_bandlimited_1d_basis(g, spec.kmax, rng);
  } else {
    throw ValidationError("unknown initial profile '" + spec.name + "'");
  }
  if (!(n0.min() >= p.n_floor))
    throw ValidationError("initial density min " + std::to_string(n0.min()) +
                          " is below the vacuum floor");
  n0.require_finite("initial density");
  u0.require_finite("initial velocity");
  return InitialData{std::move(n0), std::move(u0)};
}

}  // namespace qns
