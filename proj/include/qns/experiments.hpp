#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include "qns/integrator.hpp"

namespace qns {

/// Worker cap for sweep/study members; QNS_THREADS overrides, default is the
/// hardware concurrency.
inline unsigned thread_budget() {
  if (const char* env = std::getenv("QNS_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<unsigned>(v);
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? hc : 1;
}

namespace detail {

/// Run `fn(i)` for i in [0, count), at most thread_budget() at a time.
inline void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn) {
  const unsigned budget = std::min<std::size_t>(thread_budget(), count);
  if (budget <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::atomic<std::size_t> next{0};
  for (unsigned t = 0; t < budget; ++t)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) fn(i);
    });
  for (auto& th : pool) th.join();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Trajectory distances (Bochner composition over matched snapshots).
// ---------------------------------------------------------------------------

struct TrajectoryDistance {
  double n_l2linf = 0.0;       // || n_a - n_b ||_{L^2(0,T; L^inf)}
  double sqrtn_l2h1 = 0.0;     // || sqrt(n_a) - sqrt(n_b) ||_{L^2(0,T; H^1)}
  double momentum_l2l2 = 0.0;  // || sqrt(n_a) v_a - sqrt(n_b) v_b ||_{L^2(0,T; L^2)}
};

inline TrajectoryDistance trajectory_distance(const Trajectory& a, const Trajectory& b) {
  if (a.snapshots.size() != b.snapshots.size())
    throw ValidationError("trajectory_distance: snapshot counts differ");
  double acc_inf = 0.0, acc_h1 = 0.0, acc_mom = 0.0;
  double prev_t = a.snapshots.front().time;
  auto instant = [&](const SimState& sa, const SimState& sb, double& d_inf, double& d_h1,
                     double& d_mom) {
    ScalarField dn = sa.n - sb.n;
    d_inf = linf_norm(dn);
    ScalarField ds = sqrt_density(sa.n) - sqrt_density(sb.n);
    d_h1 = std::sqrt(integrate(ds * ds) + integrate(gradient(ds).norm2()));
    ScalarField sqa = sqrt_density(sa.n), sqb = sqrt_density(sb.n);
    ScalarField acc(sa.n.grid_ptr());
    for (int c = 0; c < sa.vel.dim(); ++c) {
      ScalarField dm = sqa * sa.vel.comp(c) - sqb * sb.vel.comp(c);
      acc += dm * dm;
    }
    d_mom = std::sqrt(integrate(acc));
  };
  double pi, ph, pm;
  instant(a.snapshots.front(), b.snapshots.front(), pi, ph, pm);
  for (std::size_t i = 1; i < a.snapshots.size(); ++i) {
    const double t = a.snapshots[i].time;
    if (std::abs(t - b.snapshots[i].time) > 1e-10)
      throw ValidationError("trajectory_distance: snapshot times do not match");
    const double dt = t - prev_t;
    double ci, ch, cm;
    instant(a.snapshots[i], b.snapshots[i], ci, ch, cm);
    acc_inf += 0.5 * (pi * pi + ci * ci) * dt;
    acc_h1 += 0.5 * (ph * ph + ch * ch) * dt;
    acc_mom += 0.5 * (pm * pm + cm * cm) * dt;
    prev_t = t;
    pi = ci;
    ph = ch;
    pm = cm;
  }
  return TrajectoryDistance{std::sqrt(acc_inf), std::sqrt(acc_h1), std::sqrt(acc_mom)};
}

/// Combined scalar distance used by the refinement studies.
inline double trajectory_gap(const Trajectory& a, const Trajectory& b) {
  TrajectoryDistance d = trajectory_distance(a, b);
  return std::sqrt(d.n_l2linf * d.n_l2linf + d.momentum_l2l2 * d.momentum_l2l2);
}

// ---------------------------------------------------------------------------
// Semiclassical sweep.
// ---------------------------------------------------------------------------

struct SweepEntry {
  double eps = 0.0;
  double dist_n_l2linf = 0.0;
  double dist_sqrtn_l2h1 = 0.0;
  double dist_momentum_l2l2 = 0.0;
  double quantum_weak_magnitude = 0.0;  // Q(eps)
  std::map<std::string, double> bochner;
};

struct SweepReport {
  std::vector<SweepEntry> entries;  // sorted by descending eps
  double slope_all = std::numeric_limits<double>::quiet_NaN();
  double slope_tail = std::numeric_limits<double>::quiet_NaN();  // first point excluded
  std::map<std::string, double> max_norms;  // max over eps of each dashboard norm
  std::map<std::string, double> baseline_norms;
};

namespace detail {

inline double fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t m = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) continue;
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++m;
  }
  if (m < 2) return std::numeric_limits<double>::quiet_NaN();
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

/// 2 eps^2 times the time integral of the weak quantum pairing against
/// phi(x,t) = psi(x) g(t), trapezoidal in time.
inline double quantum_weak_magnitude(const Trajectory& traj, const SpaceTimeTestFunction& phi,
                                     const PhysParams& p) {
  double acc = 0.0;
  double prev_t = traj.snapshots.front().time;
  double prev_v = quantum_weak_form(traj.snapshots.front().n, phi.psi) * phi.g(prev_t);
  for (std::size_t i = 1; i < traj.snapshots.size(); ++i) {
    const double t = traj.snapshots[i].time;
    const double v = quantum_weak_form(traj.snapshots[i].n, phi.psi) * phi.g(t);
    acc += 0.5 * (prev_v + v) * (t - prev_t);
    prev_t = t;
    prev_v = v;
  }
  return std::abs(2.0 * p.eps * p.eps * acc);
}

}  // namespace detail

/// Run the eps = 0 limit system once, then the eps > 0 system per entry of
/// eps_list (identical grid, step size, cadence, seed), and assemble the
/// convergence metrics. eps_list must be sorted descending; a fixed step
/// size is required so snapshot times match across members.
inline SweepReport epsilon_sweep(const RunConfig& base, const std::vector<double>& eps_list,
                                 const SpaceTimeTestFunction& phi) {
  if (eps_list.empty()) throw ValidationError("epsilon_sweep: empty eps list");
  if (!std::is_sorted(eps_list.rbegin(), eps_list.rend()))
    throw ValidationError("epsilon_sweep: eps list must be sorted descending");
  for (double e : eps_list)
    if (!(e > 0.0)) throw ValidationError("epsilon_sweep: eps values must be positive");
  if (!(base.dt > 0.0))
    throw ValidationError("epsilon_sweep: a fixed dt is required so member runs stay aligned");

  RunConfig limit_cfg = base;
  limit_cfg.formulation = SystemForm::eql;
  limit_cfg.physics.eps = 0.0;
  limit_cfg.validate();

  std::vector<RunConfig> member(eps_list.size());
  for (std::size_t i = 0; i < eps_list.size(); ++i) {
    member[i] = base;
    member[i].formulation = SystemForm::eq2;
    member[i].physics.eps = eps_list[i];
    member[i].validate();
  }

  Trajectory baseline;
  std::vector<Trajectory> runs(eps_list.size());
  {
    std::vector<std::string> errors(eps_list.size() + 1);
    detail::parallel_for(eps_list.size() + 1, [&](std::size_t i) {
      try {
        if (i == 0)
          baseline = simulate(limit_cfg);
        else
          runs[i - 1] = simulate(member[i - 1]);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    });
    for (std::size_t i = 0; i <= eps_list.size(); ++i) {
      if (!errors[i].empty())
        throw NumericsError("sweep member " +
                                (i == 0 ? std::string("eps=0") : "eps=" + std::to_string(eps_list[i - 1])) +
                                " failed: " + errors[i],
                            0.0);
      const Trajectory& t = i == 0 ? baseline : runs[i - 1];
      if (t.failed)
        throw NumericsError("sweep member " +
                                (i == 0 ? std::string("eps=0") : "eps=" + std::to_string(eps_list[i - 1])) +
                                " failed: " + t.failure_reason,
                            0.0);
    }
  }

  SweepReport report;
  report.baseline_norms = baseline.bochner;
  std::vector<double> q(eps_list.size());
  for (std::size_t i = 0; i < eps_list.size(); ++i) {
    SweepEntry e;
    e.eps = eps_list[i];
    TrajectoryDistance d = trajectory_distance(runs[i], baseline);
    e.dist_n_l2linf = d.n_l2linf;
    e.dist_sqrtn_l2h1 = d.sqrtn_l2h1;
    e.dist_momentum_l2l2 = d.momentum_l2l2;
    e.quantum_weak_magnitude =
        detail::quantum_weak_magnitude(runs[i], phi, member[i].physics);
    e.bochner = runs[i].bochner;
    q[i] = e.quantum_weak_magnitude;
    for (const auto& [key, val] : e.bochner) {
      auto it = report.max_norms.find(key);
      if (it == report.max_norms.end())
        report.max_norms[key] = val;
      else
        it->second = std::max(it->second, val);
    }
    report.entries.push_back(std::move(e));
  }
  report.slope_all = detail::fit_loglog_slope(eps_list, q);
  if (eps_list.size() >= 3)
    report.slope_tail = detail::fit_loglog_slope(
        std::vector<double>(eps_list.begin() + 1, eps_list.end()),
        std::vector<double>(q.begin() + 1, q.end()));
  return report;
}

// ---------------------------------------------------------------------------
// Galerkin N-refinement and delta -> 0 studies.
// ---------------------------------------------------------------------------

struct RefinementLevel {
  double parameter = 0.0;  // N or delta
  double gap_to_previous = 0.0;
  std::map<std::string, double> bochner;
};

struct RefinementReport {
  std::string parameter_name;  // "galerkin_N" or "delta"
  std::vector<RefinementLevel> levels;
};

namespace detail {

inline RefinementReport refinement_study(const RunConfig& base, const char* name,
                                         const std::vector<RunConfig>& configs,
                                         const std::vector<double>& parameters) {
  (void)base;
  std::vector<Trajectory> runs(configs.size());
  std::vector<std::string> errors(configs.size());
  parallel_for(configs.size(), [&](std::size_t i) {
    try {
      runs[i] = simulate(configs[i]);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });
  for (std::size_t i = 0; i < configs.size(); ++i) {
    if (!errors[i].empty())
      throw NumericsError(std::string(name) + " study member failed: " + errors[i], 0.0);
    if (runs[i].failed)
      throw NumericsError(std::string(name) + " study member failed: " + runs[i].failure_reason,
                          0.0);
  }
  RefinementReport report;
  report.parameter_name = name;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    RefinementLevel lvl;
    lvl.parameter = parameters[i];
    lvl.gap_to_previous = i == 0 ? 0.0 : trajectory_gap(runs[i], runs[i - 1]);
    lvl.bochner = runs[i].bochner;
    report.levels.push_back(std::move(lvl));
  }
  return report;
}

}  // namespace detail

/// Effective-velocity runs with increasing Galerkin mode caps; gaps between
/// consecutive levels should decay spectrally on smooth data.
inline RefinementReport galerkin_study(const RunConfig& base, const std::vector<int>& n_list) {
  if (n_list.empty()) throw ValidationError("galerkin_study: empty N list");
  if (!std::is_sorted(n_list.begin(), n_list.end()))
    throw ValidationError("galerkin_study: N list must be increasing");
  if (!(base.dt > 0.0)) throw ValidationError("galerkin_study: a fixed dt is required");
  std::vector<RunConfig> configs;
  std::vector<double> params;
  for (int n : n_list) {
    RunConfig c = base;
    c.formulation = SystemForm::eqw;
    c.galerkin_cap = n;
    c.validate();
    configs.push_back(c);
    params.push_back(static_cast<double>(n));
  }
  return detail::refinement_study(base, "galerkin_N", configs, params);
}

/// Effective-velocity runs with delta decreasing toward 0.
inline RefinementReport delta_study(const RunConfig& base, const std::vector<double>& delta_list) {
  if (delta_list.empty()) throw ValidationError("delta_study: empty delta list");
  if (!std::is_sorted(delta_list.rbegin(), delta_list.rend()))
    throw ValidationError("delta_study: delta list must be decreasing");
  if (!(base.dt > 0.0)) throw ValidationError("delta_study: a fixed dt is required");
  std::vector<RunConfig> configs;
  for (double d : delta_list) {
    RunConfig c = base;
    c.formulation = SystemForm::eqw;
    c.physics.delta = d;
    c.validate();
    configs.push_back(c);
  }
  return detail::refinement_study(base, "delta", configs, delta_list);
}

// ---------------------------------------------------------------------------
// Identity battery.
// ---------------------------------------------------------------------------

struct IdentityResiduals {
  std::string profile;
  double bohm = 0.0;              // divergence-form vs direct quantum force
  double weak_vs_strong = 0.0;    // relative, worst over the test functions
  double entropy_identity = 0.0;  // bd_entropy - energy algebraic decomposition
};

struct IdentityReport {
  int resolution = 0;
  std::vector<IdentityResiduals> rows;
  double max_bohm = 0.0;
  double max_weak_vs_strong = 0.0;
  double max_entropy_identity = 0.0;
};

/// The bundled library of smooth, strictly positive 1D densities with values
/// in [0.5, 4]. Each has a localized feature so that spectral residuals
/// decrease visibly from M = 32 through M = 128.
inline std::vector<std::pair<std::string, std::function<double(double)>>>
bundled_density_library() {
  auto bump = [](double x, double x0, double sigma) {
    double s = 0.0;
    for (int m = -3; m <= 3; ++m) {
      const double d = x - x0 - m;
      s += std::exp(-d * d / (2.0 * sigma * sigma));
    }
    return s;
  };
  return {
      {"cosine_pair",
       [bump](double x) { return 2.0 + 1.1 * std::cos(2 * M_PI * x) + 0.8 * bump(x, 0.5, 0.05); }},
      {"two_mode",
       [bump](double x) {
         return 2.0 + 0.8 * std::sin(2 * M_PI * x) + 0.4 * std::cos(4 * M_PI * x) +
                0.7 * bump(x, 0.3, 0.05);
       }},
      {"exp_wave",
       [bump](double x) {
         return 0.7 + std::exp(0.8 * std::sin(2 * M_PI * x)) + 0.6 * bump(x, 0.7, 0.055);
       }},
      {"narrow_peak", [bump](double x) { return 1.1 + 1.9 * bump(x, 0.5, 0.055); }},
      {"asymmetric",
       [bump](double x) {
         return 1.8 + 0.9 * std::sin(2 * M_PI * x + 0.7) + 0.25 * std::sin(6 * M_PI * x) +
                0.8 * bump(x, 0.25, 0.06);
       }},
  };
}

/// Max residuals of the pointwise quantum identity, the weak/strong pairing
/// rewriting (three test functions), and the algebraic entropy decomposition
///   B - E = int (n/2)(|w|^2 - |u|^2) + weight nu^2 int |grad sqrt n|^2
/// over a library of smooth density samples.
inline IdentityReport identity_battery(int resolution) {
  GridPtr g = make_grid(1, resolution, 1.0);
  PhysParams p;  // defaults; the identities hold for any admissible parameters
  const double L = g->length();

  std::vector<VectorField> phis;
  for (int mode = 1; mode <= 3; ++mode) {
    VectorField phi(g);
    phi.comp(0) = sample(g, [&](double x, double, double) {
      return mode == 3 ? std::cos(2 * M_PI * 2 * x / L) : std::sin(2 * M_PI * mode * x / L);
    });
    phis.push_back(std::move(phi));
  }

  IdentityReport report;
  report.resolution = resolution;
  for (const auto& [name, fn] : bundled_density_library()) {
    ScalarField n = sample(g, [&](double x, double, double) { return fn(x); });
    IdentityResiduals row;
    row.profile = name;
    row.bohm = check_bohm_identity(n);
    for (const auto& phi : phis) {
      const double strong = quantum_strong_pairing(n, phi);
      const double weak = quantum_weak_form(n, phi);
      // Normalize by the Cauchy-Schwarz scale of the pairing so symmetric
      // (n, phi) combinations with a vanishing integral stay meaningful.
      ScalarField q = bohm_kernel(n);
      ScalarField force2(n.grid_ptr());
      for (int a = 0; a < n.grid().dim(); ++a) {
        ScalarField fa = n * ddx(q, a);
        force2 += fa * fa;
      }
      const double scale = std::sqrt(integrate(force2)) * l2_norm(phi);
      const double denom = std::max(std::abs(strong), std::max(scale, 1e-30));
      row.weak_vs_strong = std::max(row.weak_vs_strong, std::abs(weak - strong) / denom);
    }
    {
      SimState s;
      s.n = n;
      s.vel = VectorField(g);
      s.vel.comp(0) = sample(g, [&](double x, double, double) { return 0.3 * std::sin(2 * M_PI * x / L); });
      const double weight = 2.0;  // matches bd_entropy
      const double lhs = bd_entropy_weighted(s, p, weight) - energy(s, p);
      VectorField w = to_effective_velocity(s.vel, s.n, p);
      const double rhs = integrate(0.5 * (s.n * (w.norm2() - s.vel.norm2()))) +
                         weight * p.nu * p.nu * integrate(gradient(sqrt_density(s.n)).norm2());
      row.entropy_identity = std::abs(lhs - rhs) / std::max(std::abs(lhs), 1e-30);
    }
    report.max_bohm = std::max(report.max_bohm, row.bohm);
    report.max_weak_vs_strong = std::max(report.max_weak_vs_strong, row.weak_vs_strong);
    report.max_entropy_identity = std::max(report.max_entropy_identity, row.entropy_identity);
    report.rows.push_back(std::move(row));
  }
  return report;
}

// ---------------------------------------------------------------------------
// Balance audit.
// ---------------------------------------------------------------------------

struct BalanceAudit {
  std::vector<double> times;                 // midpoint interval labels
  std::vector<double> energy_residual_nu;    // kappa = nu
  std::vector<double> energy_residual_2nu;   // kappa = 2 nu
  std::vector<double> bd_residual;           // identified BD variant
  std::vector<double> bd_residual_printed;   // 4 nu^2 weight, doubled kinetic term
  double max_energy_residual_nu = 0.0;
  double max_energy_residual_2nu = 0.0;
  double max_bd_residual = 0.0;
  double max_bd_residual_printed = 0.0;
  double identified_kappa = 0.0;  // the kappa (nu or 2 nu) with the smaller residual
};

inline BalanceAudit balance_audit(const Trajectory& traj, const PhysParams& p) {
  if (traj.records.size() < 3)
    throw ValidationError("balance_audit: trajectory too sparse (need >= 3 records)");
  BalanceAudit audit;
  auto printed_bd = [&](const SimState& s) {
    BdDissipationTerms t = bd_dissipation_terms(s, p);
    return std::pair<double, double>{
        bd_entropy_weighted(s, p, 4.0),
        p.nu * (t.enthalpy_grad + t.cold_enthalpy_grad + p.eps * p.eps * t.quantum +
                2.0 * t.kinetic)};
  };
  auto [pb, pd] = printed_bd(traj.snapshots.front());
  for (std::size_t i = 1; i < traj.records.size(); ++i) {
    const DiagnosticsRecord& r0 = traj.records[i - 1];
    const DiagnosticsRecord& r1 = traj.records[i];
    const double dt = r1.time - r0.time;
    audit.times.push_back(0.5 * (r0.time + r1.time));
    audit.energy_residual_nu.push_back(std::abs(balance_residual(r0, r1, p.nu)));
    audit.energy_residual_2nu.push_back(std::abs(balance_residual(r0, r1, 2.0 * p.nu)));
    audit.bd_residual.push_back(std::abs((r1.bd_entropy - r0.bd_entropy) / dt +
                                         0.5 * (r0.bd_dissipation + r1.bd_dissipation)));
    auto [cb, cd] = printed_bd(traj.snapshots[i]);
    audit.bd_residual_printed.push_back(std::abs((cb - pb) / dt + 0.5 * (pd + cd)));
    pb = cb;
    pd = cd;
  }
  auto maxof = [](const std::vector<double>& v) {
    return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end());
  };
  audit.max_energy_residual_nu = maxof(audit.energy_residual_nu);
  audit.max_energy_residual_2nu = maxof(audit.energy_residual_2nu);
  audit.max_bd_residual = maxof(audit.bd_residual);
  audit.max_bd_residual_printed = maxof(audit.bd_residual_printed);
  audit.identified_kappa =
      audit.max_energy_residual_2nu <= audit.max_energy_residual_nu ? 2.0 * p.nu : p.nu;
  return audit;
}

/// Rerun `base` at dt, dt/2, dt/4 and report how the identified residuals
/// contract; second-order stepping gives a factor near 4 per halving.
struct BalanceRefinement {
  std::vector<double> dts;
  std::vector<double> energy_residuals;  // identified kappa
  std::vector<double> bd_residuals;
  double identified_kappa = 0.0;
};

inline BalanceRefinement balance_refinement(const RunConfig& base, int levels = 3) {
  if (!(base.dt > 0.0)) throw ValidationError("balance_refinement: a fixed dt is required");
  if (levels < 2) throw ValidationError("balance_refinement: need >= 2 levels");
  BalanceRefinement out;
  for (int l = 0; l < levels; ++l) {
    RunConfig c = base;
    c.dt = base.dt / std::pow(2.0, l);
    // Record every step: the midpoint residual must be formed over single
    // steps, otherwise the record-spacing quadrature error dominates and the
    // dt-refinement rate is invisible.
    c.cadence = 1;
    Trajectory traj = simulate(c);
    if (traj.failed)
      throw NumericsError("balance_refinement member failed: " + traj.failure_reason, 0.0);
    BalanceAudit audit = balance_audit(traj, c.physics);
    out.dts.push_back(c.dt);
    out.identified_kappa = audit.identified_kappa;
    out.energy_residuals.push_back(audit.identified_kappa == 2.0 * c.physics.nu
                                       ? audit.max_energy_residual_2nu
                                       : audit.max_energy_residual_nu);
    out.bd_residuals.push_back(audit.max_bd_residual);
  }
  return out;
}

}  // namespace qns
