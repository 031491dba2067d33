#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "qns/fft.hpp"
#include "qns/grid.hpp"

using namespace qns;

TEST_CASE("grid construction validates its arguments") {
  CHECK_THROWS_AS(Grid::make(0, 16, 1.0), ValidationError);
  CHECK_THROWS_AS(Grid::make(4, 16, 1.0), ValidationError);
  CHECK_THROWS_AS(Grid::make(1, 15, 1.0), ValidationError);
  CHECK_THROWS_AS(Grid::make(1, 6, 1.0), ValidationError);
  CHECK_THROWS_AS(Grid::make(1, 16, 0.0), ValidationError);
  CHECK_THROWS_AS(Grid::make(1, 16, -2.0), ValidationError);
  CHECK_NOTHROW(Grid::make(3, 8, 2.0));
}

TEST_CASE("grid geometry") {
  GridPtr g = make_grid(2, 16, 2.0);
  CHECK(g->node_count() == 256);
  CHECK(g->spacing() == doctest::Approx(0.125));
  CHECK(g->cell_volume() == doctest::Approx(0.125 * 0.125));
  CHECK(g->volume() == doctest::Approx(4.0));

  // Row-major unflatten, axis 0 slowest.
  auto mi = g->unflatten(16 * 3 + 5);
  CHECK(mi[0] == 3);
  CHECK(mi[1] == 5);
  CHECK(g->coord(16 * 3 + 5, 0) == doctest::Approx(3 * 0.125));
  CHECK(g->coord(16 * 3 + 5, 1) == doctest::Approx(5 * 0.125));
}

TEST_CASE("wave index convention") {
  GridPtr g = make_grid(1, 8, 1.0);
  CHECK(g->wave_index(0) == 0);
  CHECK(g->wave_index(3) == 3);
  CHECK(g->wave_index(4) == 4);   // Nyquist kept positive
  CHECK(g->wave_index(5) == -3);
  CHECK(g->wave_index(7) == -1);
}

TEST_CASE("fft round trip") {
  GridPtr g = make_grid(1, 32, 1.0);
  std::vector<double> v(g->node_count());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::sin(0.37 * i) + 0.2 * i;
  auto coeffs = fft::forward(*g, v);
  auto back = fft::inverse(*g, coeffs);
  for (std::size_t i = 0; i < v.size(); ++i) CHECK(back[i] == doctest::Approx(v[i]).epsilon(1e-12));
}

TEST_CASE("spectral derivative is exact on trigonometric modes") {
  GridPtr g = make_grid(1, 32, 2.0);
  const double L = 2.0;
  for (int k : {1, 3, 7}) {
    std::vector<double> v(g->node_count());
    for (std::size_t i = 0; i < v.size(); ++i)
      v[i] = std::sin(2 * M_PI * k * (i * g->spacing()) / L);
    auto coeffs = fft::forward(*g, v);
    fft::apply_derivative(*g, coeffs, 0);
    auto d = fft::inverse(*g, coeffs);
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double expect = (2 * M_PI * k / L) * std::cos(2 * M_PI * k * (i * g->spacing()) / L);
      CHECK(d[i] == doctest::Approx(expect).epsilon(1e-10));
    }
  }
}

TEST_CASE("laplacian symbol equals the derivative applied twice") {
  GridPtr g = make_grid(1, 16, 1.0);
  std::vector<double> v(g->node_count());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::cos(0.9 * i) + 0.1 * i * i;
  auto a = fft::forward(*g, v);
  auto b = a;
  fft::apply_laplacian(*g, a);
  fft::apply_derivative(*g, b, 0);
  fft::apply_derivative(*g, b, 0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].real() == doctest::Approx(b[i].real()).epsilon(1e-12));
    CHECK(a[i].imag() == doctest::Approx(b[i].imag()).epsilon(1e-12));
  }
}

TEST_CASE("nyquist mode is annihilated by the derivative") {
  GridPtr g = make_grid(1, 8, 1.0);
  // Pure Nyquist signal (-1)^j.
  std::vector<double> v(g->node_count());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = (i % 2 == 0) ? 1.0 : -1.0;
  auto coeffs = fft::forward(*g, v);
  fft::apply_derivative(*g, coeffs, 0);
  auto d = fft::inverse(*g, coeffs);
  for (double x : d) CHECK(std::abs(x) < 1e-12);
}

TEST_CASE("dealiasing zeroes the top third of modes") {
  GridPtr g = make_grid(1, 24, 1.0);
  fft::Spectrum coeffs(g->node_count(), 1.0);
  fft::apply_dealias(*g, coeffs);
  fft::for_each_mode(*g, coeffs, [&](std::complex<double>& c, const std::array<int, 3>& k) {
    if (std::abs(k[0]) > 8)
      CHECK(std::abs(c) == 0.0);
    else
      CHECK(std::abs(c) == doctest::Approx(1.0));
  });
}

TEST_CASE("mode cap keeps exactly the requested band and is idempotent") {
  GridPtr g = make_grid(1, 16, 1.0);
  fft::Spectrum coeffs(g->node_count(), 1.0);
  fft::apply_mode_cap(*g, coeffs, 3);
  auto once = coeffs;
  fft::apply_mode_cap(*g, coeffs, 3);
  for (std::size_t i = 0; i < coeffs.size(); ++i) CHECK(coeffs[i] == once[i]);
  fft::for_each_mode(*g, coeffs, [&](std::complex<double>& c, const std::array<int, 3>& k) {
    CHECK(std::abs(c) == doctest::Approx(std::abs(k[0]) <= 3 ? 1.0 : 0.0));
  });
}

TEST_CASE("2d transform and derivative act per axis") {
  GridPtr g = make_grid(2, 16, 1.0);
  std::vector<double> v(g->node_count());
  for (std::size_t i = 0; i < v.size(); ++i) {
    auto mi = g->unflatten(i);
    const double x = mi[0] * g->spacing(), y = mi[1] * g->spacing();
    v[i] = std::sin(2 * M_PI * x) * std::cos(4 * M_PI * y);
  }
  auto coeffs = fft::forward(*g, v);
  fft::apply_derivative(*g, coeffs, 1);
  auto d = fft::inverse(*g, coeffs);
  for (std::size_t i = 0; i < v.size(); ++i) {
    auto mi = g->unflatten(i);
    const double x = mi[0] * g->spacing(), y = mi[1] * g->spacing();
    const double expect = -4 * M_PI * std::sin(2 * M_PI * x) * std::sin(4 * M_PI * y);
    CHECK(d[i] == doctest::Approx(expect).epsilon(1e-10));
  }
}
