#pragma once

#include <cmath>

#include "qns/field.hpp"
#include "qns/params.hpp"
#include "qns/state.hpp"

namespace qns {

// ---------------------------------------------------------------------------
// Constitutive laws.
//
// Cold pressure: p_c'(n) = c n^{-4k-1} for n <= 1 and n^{gamma-1} for n > 1.
// The antiderivative is -(c/4k) n^{-4k} on the lower branch; the upper branch
// n^gamma/gamma + K takes K = -c/(4k) - 1/gamma so the two branches meet at
// n = 1. With the default c = 1 the derivative is continuous there as well.
//
// Enthalpies solve H''(n) = p'(n)/n and H_c''(n) = p_c'(n)/n. H_c is
// normalized by H_c(1) = 0, H_c'(1) = 0, which makes the C^1 match at n = 1
// automatic.
// ---------------------------------------------------------------------------

struct ColdPressureLaw {
  double c = 1.0;
  double k = 2.0;
  double gamma = 2.0;

  static ColdPressureLaw from_params(const PhysParams& p) {
    return ColdPressureLaw{p.cold_c, p.cold_k, p.gamma};
  }

  double deriv(double n) const {
    return n <= 1.0 ? c * std::pow(n, -4.0 * k - 1.0) : std::pow(n, gamma - 1.0);
  }

  double value(double n) const {
    if (n <= 1.0) return -(c / (4.0 * k)) * std::pow(n, -4.0 * k);
    return std::pow(n, gamma) / gamma - c / (4.0 * k) - 1.0 / gamma;
  }

  double enthalpy(double n) const {
    if (n <= 1.0) {
      const double fk = 4.0 * k;
      return c * (std::pow(n, -fk) / (fk * (fk + 1.0)) + n / (fk + 1.0) - 1.0 / fk);
    }
    return std::pow(n, gamma) / (gamma * (gamma - 1.0)) - n / (gamma - 1.0) + 1.0 / gamma;
  }

  double enthalpy_deriv(double n) const {
    if (n <= 1.0) return c * (1.0 - std::pow(n, -4.0 * k - 1.0)) / (4.0 * k + 1.0);
    return (std::pow(n, gamma - 1.0) - 1.0) / (gamma - 1.0);
  }

  double enthalpy_second(double n) const { return deriv(n) / n; }
};

inline double pressure_scalar(double n, double gamma) { return std::pow(n, gamma); }
inline double enthalpy_scalar(double n, double gamma) { return std::pow(n, gamma) / (gamma - 1.0); }
inline double enthalpy_deriv_scalar(double n, double gamma) {
  return gamma * std::pow(n, gamma - 1.0) / (gamma - 1.0);
}
inline double enthalpy_second_scalar(double n, double gamma) {
  return gamma * std::pow(n, gamma - 2.0);
}

namespace detail {
inline void require_positive(const ScalarField& n, const char* what) {
  const double mn = n.min();
  if (!(mn > 0.0)) throw VacuumError(std::string(what) + ": non-positive density", 0.0, 0, mn);
}
}  // namespace detail

inline ScalarField pressure(const ScalarField& n, const PhysParams& p) {
  detail::require_positive(n, "pressure");
  return n.map([&](double v) { return pressure_scalar(v, p.gamma); });
}

inline ScalarField cold_pressure(const ScalarField& n, const ColdPressureLaw& law) {
  detail::require_positive(n, "cold_pressure");
  return n.map([&](double v) { return law.value(v); });
}

inline ScalarField cold_pressure_derivative(const ScalarField& n, const ColdPressureLaw& law) {
  detail::require_positive(n, "cold_pressure_derivative");
  return n.map([&](double v) { return law.deriv(v); });
}

inline ScalarField enthalpy(const ScalarField& n, const PhysParams& p) {
  detail::require_positive(n, "enthalpy");
  return n.map([&](double v) { return enthalpy_scalar(v, p.gamma); });
}

inline ScalarField enthalpy_cold(const ScalarField& n, const ColdPressureLaw& law) {
  detail::require_positive(n, "enthalpy_cold");
  return n.map([&](double v) { return law.enthalpy(v); });
}

// ---------------------------------------------------------------------------
// Quantum (Bohm) operator.
// ---------------------------------------------------------------------------

/// Delta(sqrt n)/sqrt n, the Bohm potential kernel, dealiased.
inline ScalarField bohm_kernel(const ScalarField& n) {
  detail::require_positive(n, "bohm kernel");
  ScalarField s = sqrt_density(n);
  ScalarField ls = laplacian(s);
  ScalarField q(n.grid_ptr());
  for (std::size_t i = 0; i < q.size(); ++i) q[i] = ls[i] / s[i];
  return dealias(q);
}

/// 2 eps^2 n grad(Delta sqrt(n)/sqrt(n)).
inline VectorField bohm_force_direct(const ScalarField& n, const PhysParams& p) {
  ScalarField q = bohm_kernel(n);
  VectorField f(n.grid_ptr());
  const double coeff = 2.0 * p.eps * p.eps;
  for (int a = 0; a < n.grid().dim(); ++a) {
    ScalarField dq = ddx(q, a);
    f.comp(a) = dealias(coeff * (n * dq));
  }
  f.require_finite("bohm_force_direct");
  return f;
}

/// eps^2 div(n Hess(log n)), the divergence form of the same operator.
inline VectorField bohm_force_divergence_form(const ScalarField& n, const PhysParams& p) {
  detail::require_positive(n, "bohm_force_divergence_form");
  ScalarField logn = n.map([](double v) { return std::log(v); });
  logn = dealias(logn);
  const int d = n.grid().dim();
  VectorField f(n.grid_ptr());
  const double coeff = p.eps * p.eps;
  for (int a = 0; a < d; ++a) {
    ScalarField acc(n.grid_ptr());
    for (int b = 0; b < d; ++b) {
      ScalarField hess_ab = ddx(ddx(logn, a), b);
      acc += ddx(dealias(n * hess_ab), b);
    }
    f.comp(a) = coeff * acc;
  }
  f.require_finite("bohm_force_divergence_form");
  return f;
}

/// Relative sup-norm residual of div(n Hess log n) = 2 n grad(Bohm kernel).
/// Falls back to the absolute residual when the reference norm vanishes.
inline double check_bohm_identity(const ScalarField& n) {
  PhysParams p;
  p.eps = 1.0;
  VectorField direct = bohm_force_direct(n, p);     // 2 n grad(Delta sqrt n / sqrt n)
  VectorField divform = bohm_force_divergence_form(n, p);
  const double ref = linf_norm(direct);
  const double res = linf_norm(divform - direct);
  return ref > 0.0 ? res / ref : res;
}

/// Weak rewriting of the quantum pairing:
///   int sqrt(n) grad sqrt(n) . grad div(phi) + 2 grad sqrt(n) (x) grad sqrt(n) : grad phi.
inline double quantum_weak_form(const ScalarField& n, const VectorField& phi) {
  if (!(n.grid() == phi.grid())) throw ValidationError("quantum_weak_form: grid mismatch");
  detail::require_positive(n, "quantum_weak_form");
  ScalarField s = sqrt_density(n);
  VectorField gs = gradient(s);
  VectorField grad_div_phi = gradient(divergence(phi));
  const int d = n.grid().dim();

  ScalarField integrand(n.grid_ptr());
  for (int a = 0; a < d; ++a) integrand += s * gs.comp(a) * grad_div_phi.comp(a);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) {
      ScalarField dphib = ddx(phi.comp(b), a);
      integrand += 2.0 * (gs.comp(a) * gs.comp(b) * dphib);
    }
  return integrate(integrand);
}

/// Strong pairing int n grad(Delta sqrt n / sqrt n) . phi; agrees with the
/// weak form up to discretization error.
inline double quantum_strong_pairing(const ScalarField& n, const VectorField& phi) {
  if (!(n.grid() == phi.grid())) throw ValidationError("quantum_strong_pairing: grid mismatch");
  ScalarField q = bohm_kernel(n);
  ScalarField integrand(n.grid_ptr());
  for (int a = 0; a < n.grid().dim(); ++a) integrand += n * ddx(q, a) * phi.comp(a);
  return integrate(integrand);
}

}  // namespace qns
