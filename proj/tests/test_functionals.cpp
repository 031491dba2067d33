#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "qns/functionals.hpp"

using namespace qns;

namespace {

// Frozen 30-digit symbolic quadratures for n = 2 + cos(2 pi x),
// u = sin(2 pi x) with gamma = 2, nu = 0.1, eps = 0.05, c = 1, k = 2.
constexpr double kEnergyOracle = 5.7632227626444327;
constexpr double kEnergyDissOracle = 39.478417604357434;
constexpr double kBdEntropyOracle = 5.5548455984409153;  // weight 2 nu^2
constexpr double kBd1 = 39.478417604357434;   // int H'' |grad n|^2
constexpr double kBd2 = 19.739208802178717;   // int H_c'' |grad n|^2
constexpr double kBd3 = 449.91331943998455;   // int n |Hess log n|^2
constexpr double kBd4 = 39.478417604357434;   // int n |grad u|^2

SimState manufactured_state(GridPtr g) {
  SimState s;
  s.n = sample(g, [](double x, double, double) { return 2.0 + std::cos(2 * M_PI * x); });
  s.vel = VectorField(g);
  s.vel.comp(0) = sample(g, [](double x, double, double) { return std::sin(2 * M_PI * x); });
  return s;
}

PhysParams oracle_params() {
  PhysParams p;
  p.gamma = 2.0;
  p.nu = 0.1;
  p.eps = 0.05;
  p.cold_c = 1.0;
  p.cold_k = 2.0;
  return p;
}

}  // namespace

TEST_CASE("energy matches the symbolic quadrature oracle") {
  GridPtr g = make_grid(1, 128, 1.0);
  SimState s = manufactured_state(g);
  PhysParams p = oracle_params();
  CHECK(energy(s, p) == doctest::Approx(kEnergyOracle).epsilon(1e-12));
  CHECK(energy_dissipation(s, p) == doctest::Approx(kEnergyDissOracle).epsilon(1e-12));
}

TEST_CASE("bd entropy and its dissipation terms match the oracle") {
  GridPtr g = make_grid(1, 128, 1.0);
  SimState s = manufactured_state(g);
  PhysParams p = oracle_params();
  CHECK(bd_entropy(s, p) == doctest::Approx(kBdEntropyOracle).epsilon(1e-12));
  BdDissipationTerms t = bd_dissipation_terms(s, p);
  CHECK(t.enthalpy_grad == doctest::Approx(kBd1).epsilon(1e-12));
  CHECK(t.cold_enthalpy_grad == doctest::Approx(kBd2).epsilon(1e-12));
  CHECK(t.quantum == doctest::Approx(kBd3).epsilon(1e-10));
  CHECK(t.kinetic == doctest::Approx(kBd4).epsilon(1e-12));
  CHECK(bd_dissipation(s, p) ==
        doctest::Approx(p.nu * (kBd1 + kBd2 + p.eps * p.eps * kBd3 + kBd4)).epsilon(1e-11));
}

TEST_CASE("constant states: E = B at zero velocity, dissipations vanish") {
  GridPtr g = make_grid(1, 32, 1.0);
  PhysParams p = oracle_params();
  SimState s;
  s.n = ScalarField(g, 1.7);
  s.vel = VectorField(g);
  CHECK(energy(s, p) == doctest::Approx(bd_entropy(s, p)).epsilon(1e-14));
  CHECK(energy_dissipation(s, p) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(bd_dissipation(s, p) == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("entropy minus energy decomposes algebraically") {
  GridPtr g = make_grid(1, 64, 1.0);
  PhysParams p = oracle_params();
  SimState s = manufactured_state(g);
  for (double weight : {2.0, 4.0}) {
    const double lhs = bd_entropy_weighted(s, p, weight) - energy(s, p);
    VectorField w = to_effective_velocity(s.vel, s.n, p);
    const double rhs = integrate(0.5 * (s.n * (w.norm2() - s.vel.norm2()))) +
                       weight * p.nu * p.nu * integrate(gradient(sqrt_density(s.n)).norm2());
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
}

TEST_CASE("first variation of the energy against centered differences") {
  GridPtr g = make_grid(1, 64, 1.0);
  PhysParams p = oracle_params();
  ScalarField n = sample(g, [](double x, double, double) {
    return 2.0 + 0.5 * std::cos(2 * M_PI * x) + 0.2 * std::sin(4 * M_PI * x);
  });
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  auto E = [&](const ScalarField& nn) {
    SimState s;
    s.n = nn;
    s.vel = VectorField(g);
    return energy(s, p);
  };
  ScalarField var = energy_first_variation(n, p);
  for (int trial = 0; trial < 3; ++trial) {
    ScalarField dir(g);
    for (int k = 1; k <= 6; ++k) {
      const double a = unif(rng) / k, b = unif(rng) / k;
      dir += sample(g, [&](double x, double, double) {
        return a * std::cos(2 * M_PI * k * x) + b * std::sin(2 * M_PI * k * x);
      });
    }
    const double eta = 1e-5;
    const double fd = (E(n + eta * dir) - E(n + (-eta) * dir)) / (2 * eta);
    const double an = integrate(var * dir);
    CHECK(fd == doctest::Approx(an).epsilon(1e-6));
  }
}

TEST_CASE("quantum part of the variation is the Bohm kernel") {
  GridPtr g = make_grid(1, 64, 1.0);
  PhysParams p = oracle_params();
  ScalarField n = sample(g, [](double x, double, double) { return 2.0 + std::cos(2 * M_PI * x); });
  PhysParams p0 = p;
  p0.eps = 0.0;
  ScalarField quantum_part = energy_first_variation(n, p) - energy_first_variation(n, p0);
  ScalarField expect = (-2.0 * p.eps * p.eps) * bohm_kernel(n);
  for (std::size_t i = 0; i < n.size(); i += 5)
    CHECK(quantum_part[i] == doctest::Approx(expect[i]).epsilon(1e-10));
}

TEST_CASE("dashboard is invariant under spatial translation") {
  GridPtr g = make_grid(1, 64, 1.0);
  PhysParams p = oracle_params();
  NormExponents e = NormExponents::from_k(p.cold_k);
  CutoffSpec zeta;
  auto shifted_state = [&](int shift) {
    SimState s;
    s.n = sample(g, [&](double x, double, double) {
      const double y = x + shift * g->spacing();
      return 2.0 + 0.7 * std::cos(2 * M_PI * y) + 0.2 * std::sin(4 * M_PI * y);
    });
    s.vel = VectorField(g);
    s.vel.comp(0) = sample(g, [&](double x, double, double) {
      return 0.4 * std::sin(2 * M_PI * (x + shift * g->spacing()));
    });
    return s;
  };
  DiagnosticsRecord a = norm_dashboard(shifted_state(0), p, e, zeta);
  DiagnosticsRecord b = norm_dashboard(shifted_state(13), p, e, zeta);
  for (const auto& col : dashboard_columns(e))
    CHECK(a.*(col.member) == doctest::Approx(b.*(col.member)).epsilon(1e-10));
  CHECK(a.energy == doctest::Approx(b.energy).epsilon(1e-12));
  CHECK(a.bd_entropy == doctest::Approx(b.bd_entropy).epsilon(1e-12));
}

TEST_CASE("vacuum cutoff") {
  CutoffSpec zeta;
  CHECK(zeta(0.25) == doctest::Approx(0.25));
  CHECK(zeta(0.5) == doctest::Approx(0.5));
  CHECK(zeta(1.0) == 0.0);
  CHECK(zeta(2.0) == 0.0);
  // C^1 across the blend: small secant slopes near the knots.
  const double h = 1e-6;
  CHECK((zeta(0.5 + h) - zeta(0.5 - h)) / (2 * h) == doctest::Approx(1.0).epsilon(1e-4));
  CHECK((zeta(1.0 + h) - zeta(1.0 - h)) / (2 * h) == doctest::Approx(0.0).epsilon(1e-4));
}

TEST_CASE("bochner accumulator composes space norms with the documented rule") {
  NormExponents e = NormExponents::from_k(2.0);
  BochnerAccumulator acc(e);
  DiagnosticsRecord r;
  r.l2_sqrtn_Du = 3.0;  // time exponent 2
  r.l2_sqrtn_u = 5.0;   // sup in time
  acc.add(r, 0.0);
  acc.add(r, 0.5);
  r.l2_sqrtn_Du = 1.0;
  r.l2_sqrtn_u = 2.0;
  acc.add(r, 0.5);
  auto out = acc.finalize();
  CHECK(out.at("l2_sqrtn_Du") == doctest::Approx(std::sqrt(9.0 * 0.5 + 1.0 * 0.5)));
  CHECK(out.at("l2_sqrtn_u") == doctest::Approx(5.0));
}

TEST_CASE("norm exponents derived from k") {
  NormExponents e = NormExponents::from_k(2.0);
  CHECK(e.p == doctest::Approx(16.0 / 9.0));
  CHECK(e.q == doctest::Approx(48.0 / 25.0));
  CHECK(e.q_star == doctest::Approx(e.q));
  CHECK(e.q_embed == doctest::Approx(3.0 * e.q / (3.0 - e.q)));
  CHECK(e.time_inv_sqrtn == doctest::Approx(16.0));
  CHECK(e.space_inv_sqrtn == doctest::Approx(48.0));
}

TEST_CASE("weak residual input validation") {
  GridPtr g = make_grid(1, 32, 1.0);
  PhysParams p = oracle_params();
  SimState s = manufactured_state(g);
  auto phi = default_test_function(g, 1.0);
  CHECK_THROWS_AS(weak_residual({s}, phi, p, WeakSystem::eps_system), ValidationError);
  SpaceTimeTestFunction bad = default_test_function(g, 1.0);
  bad.g = [](double) { return 1.0; };  // does not vanish at T
  SimState s2 = s;
  s2.time = 1.0;
  CHECK_THROWS_AS(weak_residual({s, s2}, bad, p, WeakSystem::eps_system), ValidationError);
}
