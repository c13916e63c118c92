#include "mpmp/interp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mpmp {

namespace {

void axis(double x, double lo, double h, int n, int &cell, std::array<int, 4> &idx,
          std::array<double, 4> &w) {
  int i = static_cast<int>(std::floor((x - lo) / h));
  i = std::clamp(i, 0, n - 1);
  const double s = (x - (lo + (i + 0.5) * h)) / h;
  cell = i;
  w = lagrange_weights(s);
  for (int k = 0; k < 4; ++k) idx[k] = std::clamp(i - 1 + k, 0, n - 1);
}

}  // namespace

BicubicStencil bicubic_stencil(const Grid &g, const Vec2 &r) {
  if (!g.domain.contains(r)) throw std::out_of_range("interpolation point outside the domain");
  BicubicStencil st;
  axis(r.x, g.domain.xmin, g.hx(), g.nx, st.cell_i, st.ix, st.wx);
  axis(r.y, g.domain.ymin, g.hy(), g.ny, st.cell_j, st.iy, st.wy);
  return st;
}

double interpolate(const DenseField &f, const BicubicStencil &st) {
  double acc = 0.0;
  for (int b = 0; b < 4; ++b) {
    double row = 0.0;
    for (int a = 0; a < 4; ++a) row += st.wx[a] * f(st.ix[a], st.iy[b]);
    acc += st.wy[b] * row;
  }
  return acc;
}

double interpolate(const DenseField &f, const Vec2 &r) {
  return interpolate(f, bicubic_stencil(f.grid, r));
}

Mat2 interpolate(const CoreOperatorField &f, const BicubicStencil &st) {
  Mat2 acc;
  for (int b = 0; b < 4; ++b) {
    for (int a = 0; a < 4; ++a) {
      const double w = st.wx[a] * st.wy[b];
      const Mat2 &m = f(st.ix[a], st.iy[b]);
      acc.a11 += w * m.a11;
      acc.a12 += w * m.a12;
      acc.a21 += w * m.a21;
      acc.a22 += w * m.a22;
    }
  }
  return acc;
}

Mat2 interpolate(const CoreOperatorField &f, const Vec2 &r) {
  return interpolate(f, bicubic_stencil(f.grid, r));
}

}  // namespace mpmp
