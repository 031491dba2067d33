#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <optional>
#include <sstream>
#include <vector>

#include "qns/functionals.hpp"
#include "qns/physics.hpp"
#include "qns/state.hpp"

namespace qns {

enum class SystemForm { eq2, eqw, eql };

inline const char* to_string(SystemForm f) {
  switch (f) {
    case SystemForm::eq2: return "eq2";
    case SystemForm::eqw: return "eqw";
    case SystemForm::eql: return "eql";
  }
  return "?";
}

struct GridSpec {
  int dim = 1;
  int points = 64;
  double length = 1.0;
};

struct RunConfig {
  GridSpec grid;
  PhysParams physics;
  ProfileSpec initial;
  SystemForm formulation = SystemForm::eq2;
  double final_time = 0.5;
  double dt = 0.0;          // <= 0 means adaptive
  double cfl_safety = 0.5;  // advective CFL factor
  double quantum_cap = 0.25;  // C_q in dt <= C_q (L/M)^2 / eps
  int galerkin_cap = 0;     // 0 means M/2 (no truncation)
  int cadence = 10;         // diagnostics every this many steps
  PositivityMode positivity = PositivityMode::strict;

  void validate() const {
    physics.validate();
    if (!(final_time >= 0.0)) throw ValidationError("T must be >= 0");
    if (dt > 0.0 && !(dt < 1e6)) throw ValidationError("dt out of range");
    if (cadence < 1) throw ValidationError("cadence must be >= 1");
    if (galerkin_cap < 0 || galerkin_cap > grid.points / 2)
      throw ValidationError("galerkin_N must be in [1, M/2]");
    if (formulation == SystemForm::eql && physics.eps != 0.0)
      throw ValidationError("formulation eql requires eps = 0");
  }
};

struct Tendency {
  ScalarField dn;
  VectorField dm;  // momentum tendency (n u or n w)
};

// ---------------------------------------------------------------------------
// Semi-discrete right-hand sides, momentum form, dealiased products.
// ---------------------------------------------------------------------------

namespace detail {

inline VectorField quantum_force(const ScalarField& n, double coeff2) {
  // coeff2 multiplies n grad(Delta sqrt n / sqrt n); 2 eps^2 for eq2,
  // 2 eps0 for eqw (signed), 0 for eql.
  VectorField f(n.grid_ptr());
  if (coeff2 == 0.0) return f;
  ScalarField q = bohm_kernel(n);
  for (int a = 0; a < n.grid().dim(); ++a)
    f.comp(a) = dealias(coeff2 * (n * ddx(q, a)));
  return f;
}

inline ScalarField total_pressure(const ScalarField& n, const PhysParams& p) {
  auto law = ColdPressureLaw::from_params(p);
  return dealias(pressure(n, p) + cold_pressure(n, law));
}

}  // namespace detail

/// Tendencies of the eps > 0 system in physical velocity:
///   d_t n = -div(n u)
///   d_t(n u) = -div(n u x u) - grad(p + p_c) + 2 eps^2 n grad(Dsqrt/sqrt) + 2 nu div(n D(u)).
inline Tendency rhs_eq2(const SimState& state, const PhysParams& p) {
  if (state.formulation != Formulation::physical)
    throw ValidationError("rhs_eq2 expects the physical formulation");
  const ScalarField& n = state.n;
  const VectorField& u = state.vel;
  const int d = n.grid().dim();

  VectorField m(n.grid_ptr());
  for (int a = 0; a < d; ++a) m.comp(a) = dealias(n * u.comp(a));
  Tendency t{ScalarField(n.grid_ptr()), VectorField(n.grid_ptr())};
  t.dn = -1.0 * divergence(m);

  ScalarField ptot = detail::total_pressure(n, p);
  auto Du = symmetric_gradient(u);
  for (int a = 0; a < d; ++a) {
    ScalarField acc(n.grid_ptr());
    for (int b = 0; b < d; ++b) {
      acc -= ddx(dealias(n * u.comp(a) * u.comp(b)), b);
      acc += 2.0 * p.nu * ddx(dealias(n * Du[a * d + b]), b);
    }
    acc -= ddx(ptot, a);
    t.dm.comp(a) = acc;
  }
  t.dm += detail::quantum_force(n, 2.0 * p.eps * p.eps);
  return t;
}

/// eps = 0 limit system; identical to rhs_eq2 with the quantum term removed.
inline Tendency rhs_eql(const SimState& state, const PhysParams& p) {
  PhysParams p0 = p;
  p0.eps = 0.0;
  return rhs_eq2(state, p0);
}

/// delta (Laplacian(w) - w), the strong form of the Galerkin damping term.
inline VectorField delta_regularization_force(const VectorField& w, const PhysParams& p) {
  VectorField f(w.grid_ptr());
  if (p.delta == 0.0) return f;
  for (int a = 0; a < w.dim(); ++a)
    f.comp(a) = p.delta * (laplacian(w.comp(a)) - w.comp(a));
  return f;
}

/// Tendencies of the effective-velocity system (w = u + nu grad log n):
///   d_t n = -div(n w) + nu Laplacian(n)
///   d_t(n w) = -div(n w x w) - grad(p + p_c) + 2 eps0 n grad(Dsqrt/sqrt)
///              + nu Laplacian(n w) + delta (Laplacian w - w),
/// with eps0 = eps^2 - nu^2 (signed; negative when eps < nu).
inline Tendency rhs_eqw(const SimState& state, const PhysParams& p) {
  if (state.formulation != Formulation::effective)
    throw ValidationError("rhs_eqw expects the effective formulation");
  const ScalarField& n = state.n;
  const VectorField& w = state.vel;
  const int d = n.grid().dim();

  VectorField m(n.grid_ptr());
  for (int a = 0; a < d; ++a) m.comp(a) = dealias(n * w.comp(a));
  Tendency t{ScalarField(n.grid_ptr()), VectorField(n.grid_ptr())};
  t.dn = p.nu * laplacian(n) - divergence(m);

  ScalarField ptot = detail::total_pressure(n, p);
  for (int a = 0; a < d; ++a) {
    ScalarField acc(n.grid_ptr());
    for (int b = 0; b < d; ++b) acc -= ddx(dealias(n * w.comp(a) * w.comp(b)), b);
    acc -= ddx(ptot, a);
    acc += p.nu * laplacian(m.comp(a));
    t.dm.comp(a) = acc;
  }
  t.dm += detail::quantum_force(n, 2.0 * p.eps0());
  t.dm += delta_regularization_force(w, p);
  return t;
}

inline Tendency rhs(SystemForm form, const SimState& s, const PhysParams& p) {
  switch (form) {
    case SystemForm::eq2: return rhs_eq2(s, p);
    case SystemForm::eqw: return rhs_eqw(s, p);
    case SystemForm::eql: return rhs_eql(s, p);
  }
  throw ValidationError("unknown formulation");
}

/// Zero all Fourier coefficients with per-axis mode index above cap.
inline ScalarField galerkin_project(const ScalarField& f, int cap) { return project_modes(f, cap); }
inline VectorField galerkin_project(const VectorField& f, int cap) { return project_modes(f, cap); }

// ---------------------------------------------------------------------------
// IMEX time stepping.
//
// The linear, Fourier-diagonalizable part of each system is integrated
// implicitly with the second-order IMEX-SSP2(2,2,2) tableau (both implicit
// stages use the coefficient g = 1 - 1/sqrt(2)); everything else is explicit.
// Implicit rows, per mode k:
//   n:   nu Laplacian(n)                            (eqw)
//   m:   linearized viscosity about the mean density
//          eq2/eql: nu (Laplacian m + grad div m)
//          eqw:     nu Laplacian m  +  (delta/n_mean)(Laplacian - 1) m
//   m<-n: the leading quantum linearization eps_q grad Laplacian n,
//          eps_q = eps^2 (eq2), eps0 (eqw), 0 (eql),
// which makes the implicit solve block-triangular: n first, then a small
// d x d momentum solve (Sherman-Morrison for the grad-div coupling).
// ---------------------------------------------------------------------------

namespace detail {

struct SpectralState {
  fft::Spectrum n;
  std::vector<fft::Spectrum> m;
};

struct LinearOp {
  const Grid* grid;
  SystemForm form;
  double nu, delta, eps_q, n_mean;

  // Per-mode symbols matching the ddx/laplacian conventions.
  void symbols(const std::array<int, 3>& k, double& lap, std::array<double, 3>& kg) const {
    const double scale = 2.0 * M_PI / grid->length();
    const int nyq = grid->points_per_dim() / 2;
    lap = 0.0;
    kg = {0, 0, 0};
    for (int a = 0; a < grid->dim(); ++a) {
      if (k[a] == nyq) continue;
      const double ka = scale * k[a];
      lap -= ka * ka;
      kg[a] = ka;
    }
  }

  double n_row(double lap) const { return form == SystemForm::eqw ? nu * lap : 0.0; }

  double m_diag(double lap) const {
    if (form == SystemForm::eqw) return nu * lap + (delta / n_mean) * (lap - 1.0);
    return nu * lap;
  }
  // grad-div coupling coefficient: m-row gets + nu * (i k_a)(i k_b) m_b = -nu k_a k_b m_b
  double m_graddiv() const { return form == SystemForm::eqw ? 0.0 : nu; }
};

inline SpectralState apply_linear(const LinearOp& op, const SpectralState& u) {
  const Grid& g = *op.grid;
  const int d = g.dim();
  SpectralState out;
  out.n.assign(u.n.size(), 0.0);
  out.m.assign(d, fft::Spectrum(u.n.size(), 0.0));
  const int m = g.points_per_dim();
  for (std::size_t idx = 0; idx < u.n.size(); ++idx) {
    auto mi = g.unflatten(idx);
    std::array<int, 3> k{0, 0, 0};
    for (int a = 0; a < d; ++a) k[a] = mi[a] <= m / 2 ? mi[a] : mi[a] - m;
    double lap;
    std::array<double, 3> kg;
    op.symbols(k, lap, kg);
    out.n[idx] = op.n_row(lap) * u.n[idx];
    std::complex<double> kdotm = 0.0;
    for (int a = 0; a < d; ++a) kdotm += kg[a] * u.m[a][idx];
    for (int a = 0; a < d; ++a) {
      std::complex<double> v = op.m_diag(lap) * u.m[a][idx];
      v -= op.m_graddiv() * kg[a] * kdotm;                       // -nu k_a (k . m)
      v += op.eps_q * std::complex<double>(0.0, kg[a]) * lap * u.n[idx];  // eps_q i k_a lap n
      out.m[a][idx] = v;
    }
  }
  return out;
}

/// Solve (I - a L) x = rhs, exploiting the block-triangular structure.
inline SpectralState solve_linear(const LinearOp& op, double a, const SpectralState& rhs) {
  const Grid& g = *op.grid;
  const int d = g.dim();
  SpectralState out;
  out.n.assign(rhs.n.size(), 0.0);
  out.m.assign(d, fft::Spectrum(rhs.n.size(), 0.0));
  const int m = g.points_per_dim();
  for (std::size_t idx = 0; idx < rhs.n.size(); ++idx) {
    auto mi = g.unflatten(idx);
    std::array<int, 3> k{0, 0, 0};
    for (int aa = 0; aa < d; ++aa) k[aa] = mi[aa] <= m / 2 ? mi[aa] : mi[aa] - m;
    double lap;
    std::array<double, 3> kg;
    op.symbols(k, lap, kg);

    const std::complex<double> nh = rhs.n[idx] / (1.0 - a * op.n_row(lap));
    out.n[idx] = nh;

    std::array<std::complex<double>, 3> mr{0.0, 0.0, 0.0};
    for (int aa = 0; aa < d; ++aa)
      mr[aa] = rhs.m[aa][idx] + a * op.eps_q * std::complex<double>(0.0, kg[aa]) * lap * nh;

    // (beta I + alpha k k^T) x = mr with beta = 1 - a m_diag, alpha = a nu.
    const double beta = 1.0 - a * op.m_diag(lap);
    const double alpha = a * op.m_graddiv();
    double k2 = 0.0;
    for (int aa = 0; aa < d; ++aa) k2 += kg[aa] * kg[aa];
    std::complex<double> kdotmr = 0.0;
    for (int aa = 0; aa < d; ++aa) kdotmr += kg[aa] * mr[aa];
    const double denom = beta + alpha * k2;
    for (int aa = 0; aa < d; ++aa)
      out.m[aa][idx] = (mr[aa] - (alpha * kg[aa] / denom) * kdotmr) / beta;
  }
  return out;
}

inline SpectralState to_spectral(const SimState& s) {
  const Grid& g = s.n.grid();
  SpectralState u;
  u.n = fft::forward(g, s.n.values());
  for (int a = 0; a < g.dim(); ++a) {
    ScalarField ma = s.n * s.vel.comp(a);
    u.m.push_back(fft::forward(g, ma.values()));
  }
  return u;
}

inline SimState to_state(const SpectralState& u, const GridPtr& grid, const PhysParams& p,
                         Formulation formulation, double time) {
  SimState s;
  s.n = ScalarField(grid, fft::inverse(*grid, u.n));
  s.vel = VectorField(grid);
  for (int a = 0; a < grid->dim(); ++a) {
    ScalarField ma(grid, fft::inverse(*grid, u.m[a]));
    ScalarField v(grid);
    for (std::size_t i = 0; i < v.size(); ++i)
      v[i] = ma[i] / std::max(s.n[i], p.n_floor);  // floor-guarded division
    s.vel.comp(a) = v;
  }
  s.formulation = formulation;
  s.time = time;
  return s;
}

inline SpectralState axpy(const SpectralState& x, double a, const SpectralState& y) {
  SpectralState out = x;
  for (std::size_t i = 0; i < out.n.size(); ++i) out.n[i] += a * y.n[i];
  for (std::size_t c = 0; c < out.m.size(); ++c)
    for (std::size_t i = 0; i < out.m[c].size(); ++i) out.m[c][i] += a * y.m[c][i];
  return out;
}

}  // namespace detail

/// One IMEX-SSP2 time step of the configured system. The mean of n is
/// preserved exactly (zero-mode tendency pinned to zero).
inline SimState step(const SimState& state, const PhysParams& p, const RunConfig& cfg, double dt) {
  const GridPtr grid = state.n.grid_ptr();
  const Formulation vf =
      cfg.formulation == SystemForm::eqw ? Formulation::effective : Formulation::physical;
  if (state.formulation != vf)
    throw ValidationError("step: state formulation does not match the configured system");

  detail::LinearOp op;
  op.grid = grid.get();
  op.form = cfg.formulation;
  op.nu = p.nu;
  op.delta = cfg.formulation == SystemForm::eqw ? p.delta : 0.0;
  op.eps_q = cfg.formulation == SystemForm::eq2   ? p.eps * p.eps
             : cfg.formulation == SystemForm::eqw ? p.eps0()
                                                  : 0.0;
  op.n_mean = integrate(state.n) / grid->volume();

  const int cap = cfg.galerkin_cap > 0 ? cfg.galerkin_cap : grid->points_per_dim() / 2;
  const bool truncate = cap < grid->points_per_dim() / 2;

  // Explicit remainder N(U) = rhs(U) - L U, in spectral space.
  auto explicit_part = [&](const detail::SpectralState& u,
                           double t) -> detail::SpectralState {
    SimState s = detail::to_state(u, grid, p, vf, t);
    s.n.require_finite("density during step");
    if (!(s.n.min() > 0.0))
      throw VacuumError("density lost positivity inside a step", t, 0, s.n.min());
    Tendency tend = rhs(cfg.formulation, s, p);
    if (truncate) tend.dm = galerkin_project(tend.dm, cap);
    detail::SpectralState nten;
    nten.n = fft::forward(*grid, tend.dn.values());
    for (int a = 0; a < grid->dim(); ++a)
      nten.m.push_back(fft::forward(*grid, tend.dm.comp(a).values()));
    nten = detail::axpy(nten, -1.0, detail::apply_linear(op, u));
    nten.n[0] = 0.0;  // exact mean preservation
    return nten;
  };

  const double g = 1.0 - 1.0 / std::sqrt(2.0);
  detail::SpectralState u0 = detail::to_spectral(state);

  detail::SpectralState u1 = detail::solve_linear(op, g * dt, u0);
  detail::SpectralState n1 = explicit_part(u1, state.time);
  detail::SpectralState lu1 = detail::apply_linear(op, u1);

  detail::SpectralState r2 = detail::axpy(u0, dt, n1);
  r2 = detail::axpy(r2, (1.0 - 2.0 * g) * dt, lu1);
  detail::SpectralState u2 = detail::solve_linear(op, g * dt, r2);
  detail::SpectralState n2 = explicit_part(u2, state.time + dt);
  detail::SpectralState lu2 = detail::apply_linear(op, u2);

  detail::SpectralState unew = detail::axpy(u0, 0.5 * dt, n1);
  unew = detail::axpy(unew, 0.5 * dt, n2);
  unew = detail::axpy(unew, 0.5 * dt, lu1);
  unew = detail::axpy(unew, 0.5 * dt, lu2);
  // Keep the evolved momentum inside the Galerkin subspace: the implicit
  // stages couple it to the uncapped density and would otherwise source
  // out-of-band momentum modes.
  if (truncate)
    for (auto& mc : unew.m) fft::apply_mode_cap(*grid, mc, cap);

  SimState out = detail::to_state(unew, grid, p, vf, state.time + dt);
  if (!out.n.finite() || !out.vel.finite())
    throw NumericsError("NaN/Inf after time step", state.time + dt);
  return out;
}

/// Stability limits: advective CFL (velocity plus barotropic sound speed)
/// and the quantum dispersion cap dt <= C_q (L/M)^2 / eps.
inline double stable_dt(const SimState& state, const PhysParams& p, const RunConfig& cfg) {
  const double h = state.n.grid().spacing();
  auto law = ColdPressureLaw::from_params(p);
  double cs_max = 0.0;
  for (double v : state.n.values()) {
    const double c2 = p.gamma * std::pow(v, p.gamma - 1.0) + law.deriv(v);
    cs_max = std::max(cs_max, std::sqrt(std::max(c2, 0.0)));
  }
  const double vmax = linf_norm(state.vel);
  double dt = cfg.cfl_safety * h / std::max(vmax + cs_max, 1e-12);
  double eps_eff = 0.0;
  switch (cfg.formulation) {
    case SystemForm::eq2: eps_eff = p.eps; break;
    case SystemForm::eqw: eps_eff = std::sqrt(std::abs(p.eps0())); break;
    case SystemForm::eql: eps_eff = 0.0; break;
  }
  if (eps_eff > 0.0) dt = std::min(dt, cfg.quantum_cap * h * h / eps_eff);
  return dt;
}

// ---------------------------------------------------------------------------
// Trajectories.
// ---------------------------------------------------------------------------

struct Trajectory {
  std::vector<SimState> snapshots;          // at diagnostics cadence
  std::vector<DiagnosticsRecord> records;   // one per snapshot
  std::vector<std::string> events;
  std::map<std::string, double> bochner;    // finalized time-integrated norms
  std::size_t clamp_events = 0;
  std::size_t step_rejections = 0;
  bool failed = false;
  std::string failure_reason;
  double initial_mass = 0.0;
};

/// Residual of the energy balance between two consecutive records, using the
/// trapezoidal dissipation average:
///   (E1 - E0)/dt + kappa * (D0 + D1)/2.
inline double balance_residual(const DiagnosticsRecord& r0, const DiagnosticsRecord& r1,
                               double kappa) {
  const double dt = r1.time - r0.time;
  return (r1.energy - r0.energy) / dt +
         kappa * 0.5 * (r0.energy_dissipation + r1.energy_dissipation);
}

inline Trajectory simulate(const RunConfig& cfg) {
  cfg.validate();
  GridPtr grid = make_grid(cfg.grid.dim, cfg.grid.points, cfg.grid.length);
  const PhysParams& p = cfg.physics;
  InitialData init = make_initial_data(grid, cfg.initial, p);

  SimState state;
  state.n = init.n0;
  state.time = 0.0;
  if (cfg.formulation == SystemForm::eqw) {
    state.vel = to_effective_velocity(init.u0, init.n0, p);
    state.formulation = Formulation::effective;
  } else {
    state.vel = init.u0;
    state.formulation = Formulation::physical;
  }
  const int cap = cfg.galerkin_cap > 0 ? cfg.galerkin_cap : grid->points_per_dim() / 2;
  if (cap < grid->points_per_dim() / 2) state.vel = galerkin_project(state.vel, cap);

  NormExponents exps = NormExponents::from_k(p.cold_k);
  CutoffSpec zeta;
  BochnerAccumulator bochner(exps);

  Trajectory traj;
  traj.initial_mass = integrate(state.n);

  auto record_snapshot = [&](const SimState& s) {
    DiagnosticsRecord r = norm_dashboard(s, p, exps, zeta);
    if (!traj.records.empty()) {
      const DiagnosticsRecord& prev = traj.records.back();
      r.energy_residual = balance_residual(prev, r, 2.0 * p.nu);
      const double dt = r.time - prev.time;
      r.bd_residual = (r.bd_entropy - prev.bd_entropy) / dt +
                      0.5 * (r.bd_dissipation + prev.bd_dissipation);
      bochner.add(r, dt);
    } else {
      bochner.add(r, 0.0);
    }
    traj.records.push_back(r);
    traj.snapshots.push_back(s);
  };

  record_snapshot(state);
  if (cfg.final_time == 0.0) {
    traj.bochner = bochner.finalize();
    return traj;
  }

  try {
    int steps_since_record = 0;
    while (state.time < cfg.final_time - 1e-14) {
      double limit = stable_dt(state, p, cfg);
      double dt = cfg.dt > 0.0 ? cfg.dt : limit;
      // Rounding slivers at the end of the interval: never take a step that
      // is a negligible fraction of the nominal step.
      if (cfg.final_time - state.time < 1e-9 * dt) break;
      dt = std::min(dt, cfg.final_time - state.time);
      if (cfg.dt > 0.0 && dt > limit * (1.0 + 1e-9)) {
        // Fixed step violates the stability bound: reject and substep.
        const int sub = static_cast<int>(std::ceil(dt / limit));
        ++traj.step_rejections;
        std::ostringstream msg;
        msg << "step rejection at t=" << state.time << ": dt=" << dt << " > limit=" << limit
            << ", substepping x" << sub;
        traj.events.push_back(msg.str());
        for (int i = 0; i < sub; ++i) state = step(state, p, cfg, dt / sub);
      } else {
        state = step(state, p, cfg, dt);
      }
      PositivityEvent ev;
      state = enforce_positivity(state, p, cfg.positivity, &ev);
      if (ev.clamped_nodes > 0) {
        ++traj.clamp_events;
        std::ostringstream msg;
        msg << "clamped " << ev.clamped_nodes << " nodes at t=" << state.time
            << " (min was " << ev.min_before << ")";
        traj.events.push_back(msg.str());
      }
      if (++steps_since_record >= cfg.cadence || state.time >= cfg.final_time - 1e-14) {
        record_snapshot(state);
        steps_since_record = 0;
      }
    }
    if (traj.records.back().time < state.time) record_snapshot(state);
  } catch (const VacuumError& e) {
    traj.failed = true;
    traj.failure_reason = e.what();
    traj.events.push_back(std::string("terminated: ") + e.what());
  } catch (const NumericsError& e) {
    traj.failed = true;
    traj.failure_reason = e.what();
    traj.events.push_back(std::string("terminated: ") + e.what());
  }

  traj.bochner = bochner.finalize();
  return traj;
}

}  // namespace qns
