#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "qns/fft.hpp"
#include "qns/grid.hpp"

namespace qns {

/// One real value per grid node. Value type; operations return fresh fields.
class ScalarField {
 public:
  ScalarField() = default;
  explicit ScalarField(GridPtr grid, double fill = 0.0)
      : grid_(std::move(grid)), values_(grid_->node_count(), fill) {}
  ScalarField(GridPtr grid, std::vector<double> values)
      : grid_(std::move(grid)), values_(std::move(values)) {
    if (values_.size() != grid_->node_count())
      throw ValidationError("field size does not match grid node count");
  }

  const Grid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  double min() const { return *std::min_element(values_.begin(), values_.end()); }
  double max() const { return *std::max_element(values_.begin(), values_.end()); }

  bool finite() const {
    for (double v : values_)
      if (!std::isfinite(v)) return false;
    return true;
  }
  void require_finite(const char* what) const {
    if (!finite()) throw NumericsError(std::string("non-finite values in ") + what);
  }

  ScalarField& operator+=(const ScalarField& o) { return zip(o, std::plus<>{}); }
  ScalarField& operator-=(const ScalarField& o) { return zip(o, std::minus<>{}); }
  ScalarField& operator*=(const ScalarField& o) { return zip(o, std::multiplies<>{}); }
  ScalarField& operator*=(double s) {
    for (double& v : values_) v *= s;
    return *this;
  }
  ScalarField& operator+=(double s) {
    for (double& v : values_) v += s;
    return *this;
  }

  friend ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
  friend ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
  friend ScalarField operator*(ScalarField a, const ScalarField& b) { return a *= b; }
  friend ScalarField operator*(double s, ScalarField a) { return a *= s; }
  friend ScalarField operator*(ScalarField a, double s) { return a *= s; }

  /// Pointwise map, fresh output.
  template <typename F>
  ScalarField map(F&& fn) const {
    ScalarField out(grid_);
    for (std::size_t i = 0; i < values_.size(); ++i) out[i] = fn(values_[i]);
    return out;
  }

 private:
  template <typename Op>
  ScalarField& zip(const ScalarField& o, Op op) {
    if (!(grid() == o.grid())) throw ValidationError("field grids do not match");
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] = op(values_[i], o.values_[i]);
    return *this;
  }

  GridPtr grid_;
  std::vector<double> values_;
};

/// dim scalar components per node.
class VectorField {
 public:
  VectorField() = default;
  explicit VectorField(GridPtr grid, double fill = 0.0) {
    for (int a = 0; a < grid->dim(); ++a) comps_.emplace_back(grid, fill);
  }
  explicit VectorField(std::vector<ScalarField> comps) : comps_(std::move(comps)) {}

  const Grid& grid() const { return comps_.front().grid(); }
  const GridPtr& grid_ptr() const { return comps_.front().grid_ptr(); }
  int dim() const { return static_cast<int>(comps_.size()); }
  ScalarField& comp(int a) { return comps_[a]; }
  const ScalarField& comp(int a) const { return comps_[a]; }

  bool finite() const {
    for (const auto& c : comps_)
      if (!c.finite()) return false;
    return true;
  }
  void require_finite(const char* what) const {
    for (const auto& c : comps_) c.require_finite(what);
  }

  VectorField& operator+=(const VectorField& o) {
    for (int a = 0; a < dim(); ++a) comps_[a] += o.comps_[a];
    return *this;
  }
  VectorField& operator-=(const VectorField& o) {
    for (int a = 0; a < dim(); ++a) comps_[a] -= o.comps_[a];
    return *this;
  }
  VectorField& operator*=(double s) {
    for (auto& c : comps_) c *= s;
    return *this;
  }
  friend VectorField operator+(VectorField a, const VectorField& b) { return a += b; }
  friend VectorField operator-(VectorField a, const VectorField& b) { return a -= b; }
  friend VectorField operator*(double s, VectorField a) { return a *= s; }

  /// Pointwise squared magnitude.
  ScalarField norm2() const {
    ScalarField out(grid_ptr());
    for (const auto& c : comps_)
      for (std::size_t i = 0; i < out.size(); ++i) out[i] += c[i] * c[i];
    return out;
  }

 private:
  std::vector<ScalarField> comps_;
};

// ---------------------------------------------------------------------------
// Spectral calculus
// ---------------------------------------------------------------------------

inline ScalarField ddx(const ScalarField& f, int axis) {
  if (axis < 0 || axis >= f.grid().dim()) throw ValidationError("ddx: axis out of range");
  f.require_finite("ddx input");
  auto coeffs = fft::forward(f.grid(), f.values());
  fft::apply_derivative(f.grid(), coeffs, axis);
  ScalarField out(f.grid_ptr(), fft::inverse(f.grid(), coeffs));
  out.require_finite("ddx output");
  return out;
}

inline ScalarField laplacian(const ScalarField& f) {
  f.require_finite("laplacian input");
  auto coeffs = fft::forward(f.grid(), f.values());
  fft::apply_laplacian(f.grid(), coeffs);
  ScalarField out(f.grid_ptr(), fft::inverse(f.grid(), coeffs));
  out.require_finite("laplacian output");
  return out;
}

inline double integrate(const ScalarField& f) {
  f.require_finite("integrate input");
  double sum = 0.0;
  for (double v : f.values()) sum += v;
  return sum * f.grid().cell_volume();
}

inline VectorField gradient(const ScalarField& f) {
  std::vector<ScalarField> comps;
  for (int a = 0; a < f.grid().dim(); ++a) comps.push_back(ddx(f, a));
  return VectorField(std::move(comps));
}

inline ScalarField divergence(const VectorField& v) {
  ScalarField out(v.grid_ptr());
  for (int a = 0; a < v.dim(); ++a) out += ddx(v.comp(a), a);
  return out;
}

inline ScalarField laplacian(const VectorField& v, int comp) { return laplacian(v.comp(comp)); }

/// 2/3-rule dealiasing filter.
inline ScalarField dealias(const ScalarField& f) {
  auto coeffs = fft::forward(f.grid(), f.values());
  fft::apply_dealias(f.grid(), coeffs);
  return ScalarField(f.grid_ptr(), fft::inverse(f.grid(), coeffs));
}

inline VectorField dealias(const VectorField& v) {
  std::vector<ScalarField> comps;
  for (int a = 0; a < v.dim(); ++a) comps.push_back(dealias(v.comp(a)));
  return VectorField(std::move(comps));
}

/// Zero every Fourier mode with index above cap; idempotent.
inline ScalarField project_modes(const ScalarField& f, int cap) {
  if (cap < 1 || cap > f.grid().points_per_dim() / 2)
    throw ValidationError("mode cap out of range");
  auto coeffs = fft::forward(f.grid(), f.values());
  fft::apply_mode_cap(f.grid(), coeffs, cap);
  return ScalarField(f.grid_ptr(), fft::inverse(f.grid(), coeffs));
}

inline VectorField project_modes(const VectorField& v, int cap) {
  std::vector<ScalarField> comps;
  for (int a = 0; a < v.dim(); ++a) comps.push_back(project_modes(v.comp(a), cap));
  return VectorField(std::move(comps));
}

// ---------------------------------------------------------------------------
// Norms
// ---------------------------------------------------------------------------

inline double lp_norm(const ScalarField& f, double p) {
  if (std::isinf(p)) {
    double mx = 0.0;
    for (double v : f.values()) mx = std::max(mx, std::abs(v));
    return mx;
  }
  double acc = 0.0;
  for (double v : f.values()) acc += std::pow(std::abs(v), p);
  return std::pow(acc * f.grid().cell_volume(), 1.0 / p);
}

inline double l2_norm(const ScalarField& f) { return lp_norm(f, 2.0); }

inline double l2_norm(const VectorField& v) {
  double acc = 0.0;
  for (int a = 0; a < v.dim(); ++a) {
    double n = l2_norm(v.comp(a));
    acc += n * n;
  }
  return std::sqrt(acc);
}

inline double linf_norm(const ScalarField& f) { return lp_norm(f, std::numeric_limits<double>::infinity()); }

inline double linf_norm(const VectorField& v) {
  double mx = 0.0;
  for (int a = 0; a < v.dim(); ++a) mx = std::max(mx, linf_norm(v.comp(a)));
  return mx;
}

/// Fill from an analytic function of the node coordinates.
template <typename F>
inline ScalarField sample(GridPtr grid, F&& fn) {
  ScalarField out(grid);
  for (std::size_t i = 0; i < out.size(); ++i) {
    auto mi = grid->unflatten(i);
    double x[3] = {0, 0, 0};
    for (int a = 0; a < grid->dim(); ++a) x[a] = mi[a] * grid->spacing();
    out[i] = fn(x[0], x[1], x[2]);
  }
  return out;
}

}  // namespace qns
