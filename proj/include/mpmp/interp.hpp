#pragma once

#include <array>

#include "mpmp/types.hpp"

namespace mpmp {

// Cubic Lagrange weights on the nodes -1, 0, 1, 2 at offset s.
inline std::array<double, 4> lagrange_weights(double s) {
  return {-s * (s - 1.0) * (s - 2.0) / 6.0, (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0,
          -s * (s + 1.0) * (s - 2.0) / 2.0, s * (s + 1.0) * (s - 1.0) / 6.0};
}

// 4x4 tensor stencil around the cell containing r. Indices are already clamped
// to the grid (replicate padding); the base cell is the unclamped containing cell.
struct BicubicStencil {
  int cell_i = 0, cell_j = 0;
  std::array<int, 4> ix{}, iy{};
  std::array<double, 4> wx{}, wy{};
};

// Throws std::out_of_range when r is outside the grid's closed domain.
BicubicStencil bicubic_stencil(const Grid &g, const Vec2 &r);

double interpolate(const DenseField &f, const Vec2 &r);
double interpolate(const DenseField &f, const BicubicStencil &st);
Mat2 interpolate(const CoreOperatorField &f, const Vec2 &r);
Mat2 interpolate(const CoreOperatorField &f, const BicubicStencil &st);

}  // namespace mpmp
