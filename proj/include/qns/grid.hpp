#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <vector>

#include "qns/errors.hpp"

namespace qns {

/// Uniform periodic torus discretization, immutable after construction.
///
/// Nodes along each axis sit at x_j = j*L/M, j = 0..M-1, and the spectral
/// representation uses integer wavenumbers {-M/2+1, ..., M/2} scaled by 2*pi/L.
class Grid {
 public:
  static std::shared_ptr<const Grid> make(int dim, int points_per_dim, double length) {
    if (dim < 1 || dim > 3)
      throw ValidationError("grid.dim must be 1, 2 or 3 (got " + std::to_string(dim) + ")");
    if (points_per_dim < 8 || points_per_dim % 2 != 0)
      throw ValidationError("grid.points must be even and >= 8 (got " +
                            std::to_string(points_per_dim) + ")");
    if (!(length > 0.0)) throw ValidationError("grid.length must be positive");
    return std::shared_ptr<const Grid>(new Grid(dim, points_per_dim, length));
  }

  int dim() const { return dim_; }
  int points_per_dim() const { return m_; }
  double length() const { return length_; }
  double spacing() const { return length_ / m_; }
  std::size_t node_count() const { return nodes_; }
  /// Cell volume (L/M)^dim, the quadrature weight of every node.
  double cell_volume() const { return cellvol_; }
  double volume() const { return cellvol_ * static_cast<double>(nodes_); }

  /// Integer wavenumber for flat index j along one axis: j <= M/2 ? j : j - M.
  int wave_index(int j) const { return j <= m_ / 2 ? j : j - m_; }

  /// Multi-index of a flat node index (row-major, axis 0 slowest).
  std::array<int, 3> unflatten(std::size_t idx) const {
    std::array<int, 3> out{0, 0, 0};
    for (int a = dim_ - 1; a >= 0; --a) {
      out[a] = static_cast<int>(idx % m_);
      idx /= m_;
    }
    return out;
  }

  double coord(std::size_t idx, int axis) const {
    return unflatten(idx)[axis] * spacing();
  }

  bool operator==(const Grid& o) const {
    return dim_ == o.dim_ && m_ == o.m_ && length_ == o.length_;
  }

 private:
  Grid(int dim, int m, double length) : dim_(dim), m_(m), length_(length) {
    nodes_ = 1;
    for (int a = 0; a < dim_; ++a) nodes_ *= static_cast<std::size_t>(m_);
    const double h = length_ / m_;
    cellvol_ = 1.0;
    for (int a = 0; a < dim_; ++a) cellvol_ *= h;
  }

  int dim_;
  int m_;
  double length_;
  std::size_t nodes_;
  double cellvol_;
};

using GridPtr = std::shared_ptr<const Grid>;

inline GridPtr make_grid(int dim, int points_per_dim, double length) {
  return Grid::make(dim, points_per_dim, length);
}

}  // namespace qns
