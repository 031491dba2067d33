#pragma once

#include <cmath>
#include <string>

#include "qns/errors.hpp"

namespace qns {

/// Physical parameters of the barotropic quantum Navier-Stokes system with
/// singular cold pressure.
struct PhysParams {
  double gamma = 2.0;    // pressure exponent, > 1
  double nu = 0.1;       // viscosity, > 0
  double eps = 0.05;     // scaled Planck constant, >= 0
  double cold_c = 1.0;   // cold-pressure constant, > 0
  double cold_k = 2.0;   // cold-pressure exponent, > 1
  double delta = 0.0;    // Galerkin damping, >= 0
  double n_floor = 1e-6; // vacuum floor, > 0

  /// eps0 = eps^2 - nu^2, always recomputed. Negative when eps < nu.
  double eps0() const { return eps * eps - nu * nu; }

  void validate() const {
    if (!(gamma > 1.0)) throw ValidationError("gamma must be > 1");
    if (!(nu > 0.0)) throw ValidationError("nu must be > 0");
    if (!(eps >= 0.0)) throw ValidationError("eps must be >= 0");
    if (!(cold_c > 0.0)) throw ValidationError("cold_c must be > 0");
    if (!(cold_k > 1.0)) throw ValidationError("cold_k must be > 1");
    if (!(delta >= 0.0)) throw ValidationError("delta must be >= 0");
    if (!(n_floor > 0.0)) throw ValidationError("n_floor must be > 0");
  }
};

/// Integrability exponents attached to the monitored norms, all derived
/// from the cold-pressure exponent k.
struct NormExponents {
  double p;          // 8k/(4k+1)
  double q;          // 24k/(12k+1)
  double q_star;     // same value as q; monitored alongside the Sobolev variant
  double q_embed;    // 3q/(3-q), the d = 3 embedding exponent
  double time_inv_sqrtn;   // 8k, time exponent for 1/sqrt(n)
  double space_inv_sqrtn;  // 24k, space exponent for 1/sqrt(n)
  double s = 0.1;    // monitor ||sqrt(n) u|| at exponent 2 + s

  static NormExponents from_k(double k) {
    NormExponents e{};
    e.p = 8.0 * k / (4.0 * k + 1.0);
    e.q = 24.0 * k / (12.0 * k + 1.0);
    e.q_star = e.q;
    e.q_embed = 3.0 * e.q / (3.0 - e.q);
    e.time_inv_sqrtn = 8.0 * k;
    e.space_inv_sqrtn = 24.0 * k;
    e.s = 0.1;
    return e;
  }
};

/// Smooth monotone cutoff: zeta(y) = y for y <= 1/2, 0 for y >= 1, with a
/// C^2 quintic Hermite blend on [1/2, 1].
struct CutoffSpec {
  double operator()(double y) const {
    if (y <= 0.5) return y;
    if (y >= 1.0) return 0.0;
    // Quintic Hermite on [1/2, 1]: value 1/2, slope 1, curvature 0 at the
    // left end; value/slope/curvature 0 at the right end.
    const double t = 2.0 * (y - 0.5);  // t in [0, 1]
    const double h = 0.5;              // interval width in y
    const double t2 = t * t, t3 = t2 * t, t4 = t3 * t, t5 = t4 * t;
    const double H0 = 1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5;          // value at left
    const double H1 = t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5;              // slope at left
    return 0.5 * H0 + 1.0 * h * H1;
  }
};

}  // namespace qns
