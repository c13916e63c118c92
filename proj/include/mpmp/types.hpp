#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace mpmp {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 &operator+=(const Vec2 &o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  Vec2 &operator-=(const Vec2 &o) {
    x -= o.x;
    y -= o.y;
    return *this;
  }
  friend Vec2 operator+(Vec2 a, const Vec2 &b) { return a += b; }
  friend Vec2 operator-(Vec2 a, const Vec2 &b) { return a -= b; }
  friend Vec2 operator-(const Vec2 &a) { return {-a.x, -a.y}; }
  friend Vec2 operator*(double s, const Vec2 &a) { return {s * a.x, s * a.y}; }
  friend bool operator==(const Vec2 &, const Vec2 &) = default;
};

inline double dot(const Vec2 &a, const Vec2 &b) { return a.x * b.x + a.y * b.y; }
inline double norm(const Vec2 &a) { return std::hypot(a.x, a.y); }

// 2x2 matrix, entries m[p][q] stored row-major.
struct Mat2 {
  double a11 = 0.0, a12 = 0.0, a21 = 0.0, a22 = 0.0;

  static Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }

  double operator()(int p, int q) const {
    return p == 0 ? (q == 0 ? a11 : a12) : (q == 0 ? a21 : a22);
  }
  double &operator()(int p, int q) {
    return p == 0 ? (q == 0 ? a11 : a12) : (q == 0 ? a21 : a22);
  }

  double trace() const { return a11 + a22; }
  double det() const { return a11 * a22 - a12 * a21; }
  Mat2 transposed() const { return {a11, a21, a12, a22}; }

  Mat2 &operator+=(const Mat2 &o) {
    a11 += o.a11;
    a12 += o.a12;
    a21 += o.a21;
    a22 += o.a22;
    return *this;
  }
  friend Mat2 operator+(Mat2 a, const Mat2 &b) { return a += b; }
  friend Mat2 operator-(const Mat2 &a, const Mat2 &b) {
    return {a.a11 - b.a11, a.a12 - b.a12, a.a21 - b.a21, a.a22 - b.a22};
  }
  friend Mat2 operator*(double s, const Mat2 &a) {
    return {s * a.a11, s * a.a12, s * a.a21, s * a.a22};
  }
  friend Vec2 operator*(const Mat2 &m, const Vec2 &v) {
    return {m.a11 * v.x + m.a12 * v.y, m.a21 * v.x + m.a22 * v.y};
  }
  friend Mat2 operator*(const Mat2 &a, const Mat2 &b) {
    return {a.a11 * b.a11 + a.a12 * b.a21, a.a11 * b.a12 + a.a12 * b.a22,
            a.a21 * b.a11 + a.a22 * b.a21, a.a21 * b.a12 + a.a22 * b.a22};
  }
  friend bool operator==(const Mat2 &, const Mat2 &) = default;
};

inline double frobenius_sq(const Mat2 &m) {
  return m.a11 * m.a11 + m.a12 * m.a12 + m.a21 * m.a21 + m.a22 * m.a22;
}

// Axis-aligned box [xmin, xmax] x [ymin, ymax].
struct Rect {
  double xmin = -1.0, xmax = 1.0, ymin = -1.0, ymax = 1.0;

  double width() const { return xmax - xmin; }
  double height() const { return ymax - ymin; }
  Vec2 center() const { return {0.5 * (xmin + xmax), 0.5 * (ymin + ymax)}; }
  bool contains(const Vec2 &p) const {
    return p.x >= xmin && p.x <= xmax && p.y >= ymin && p.y <= ymax;
  }
  bool valid() const { return xmax > xmin && ymax > ymin; }
  friend bool operator==(const Rect &, const Rect &) = default;
};

// Cell-centered Cartesian grid. Cell (i, j) has center
// (xmin + (i + 1/2) hx, ymin + (j + 1/2) hy); flat index is j * nx + i,
// i.e. rows run along x.
struct Grid {
  int nx = 1;
  int ny = 1;
  Rect domain;

  Grid() = default;
  Grid(int nx_, int ny_, Rect d) : nx(nx_), ny(ny_), domain(d) {
    if (nx < 1 || ny < 1)
      throw std::invalid_argument("grid needs at least one cell per axis");
    if (!domain.valid())
      throw std::invalid_argument("grid domain is degenerate");
  }

  double hx() const { return domain.width() / nx; }
  double hy() const { return domain.height() / ny; }
  double cell_area() const { return hx() * hy(); }
  std::size_t size() const { return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny); }
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(j) * static_cast<std::size_t>(nx) + static_cast<std::size_t>(i);
  }
  Vec2 center(int i, int j) const {
    return {domain.xmin + (i + 0.5) * hx(), domain.ymin + (j + 0.5) * hy()};
  }
  friend bool operator==(const Grid &, const Grid &) = default;
};

// Scalar field sampled at the cell centers of a grid.
struct DenseField {
  Grid grid;
  std::vector<double> values;

  DenseField() = default;
  explicit DenseField(const Grid &g, double fill = 0.0) : grid(g), values(g.size(), fill) {}
  DenseField(const Grid &g, std::vector<double> v) : grid(g), values(std::move(v)) {
    if (values.size() != grid.size())
      throw std::invalid_argument("field value count does not match grid");
  }

  double operator()(int i, int j) const { return values[grid.index(i, j)]; }
  double &operator()(int i, int j) { return values[grid.index(i, j)]; }
  std::size_t size() const { return values.size(); }
};

// 2x2-matrix field on a grid; the unknown of the core-operator estimation.
struct CoreOperatorField {
  Grid grid;
  std::vector<Mat2> values;

  CoreOperatorField() = default;
  explicit CoreOperatorField(const Grid &g) : grid(g), values(g.size()) {}

  const Mat2 &operator()(int i, int j) const { return values[grid.index(i, j)]; }
  Mat2 &operator()(int i, int j) { return values[grid.index(i, j)]; }
  std::size_t size() const { return values.size(); }
};

class SolverDivergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MetricUndefined : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace mpmp
