#include <doctest.h>

#include <algorithm>
#include <set>

#include "mpmp/phantoms.hpp"
#include "support.hpp"

using namespace mpmp;

namespace {

const PhantomKind kAll[] = {PhantomKind::Vessel, PhantomKind::Shape, PhantomKind::Concentration,
                            PhantomKind::Frame, PhantomKind::Plus};

std::size_t support_size(const DenseField &f) {
  return static_cast<std::size_t>(std::count_if(f.values.begin(), f.values.end(),
                                                [](double v) { return v > 0.0; }));
}

// Nonzero cells with a zero 4-neighbor.
std::size_t boundary_cells(const DenseField &f) {
  const Grid &g = f.grid;
  std::size_t n = 0;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      if (f(i, j) <= 0.0) continue;
      const bool edge = (i > 0 && f(i - 1, j) <= 0) || (i + 1 < g.nx && f(i + 1, j) <= 0) ||
                        (j > 0 && f(i, j - 1) <= 0) || (j + 1 < g.ny && f(i, j + 1) <= 0);
      if (edge) ++n;
    }
  return n;
}

}  // namespace

TEST_CASE("delta phantom") {
  const Grid g(20, 20, {-1, 1, -1, 1});
  const DenseField d = render(make_delta_spec(g, 0, 0));
  CHECK(support_size(d) == 1);
  CHECK(d(0, 0) == 1.0);
  double sum = 0.0;
  for (double v : d.values) sum += v;
  CHECK(sum == 1.0);
  CHECK_THROWS(render(make_delta_spec(g, 20, 0)));
  CHECK_THROWS(render(make_delta_spec(g, 0, -1)));
}

TEST_CASE("concentration phantom has four levels") {
  const Grid g(64, 64, {-1, 1, -1, 1});
  const DenseField f = render(make_phantom_spec(PhantomKind::Concentration, g));
  std::set<double> levels;
  for (double v : f.values)
    if (v != 0.0) levels.insert(v);
  CHECK(levels == std::set<double>{0.25, 0.5, 0.75, 1.0});
}

TEST_CASE("phantoms are in [0,1] with a zero boundary ring") {
  for (int n : {20, 64, 100}) {
    const Grid g(n, n, {-2, 2, -2, 2});
    for (PhantomKind k : kAll) {
      CAPTURE(to_string(k));
      const DenseField f = render(make_phantom_spec(k, g));
      CHECK(*std::min_element(f.values.begin(), f.values.end()) >= 0.0);
      CHECK(*std::max_element(f.values.begin(), f.values.end()) <= 1.0);
      CHECK(support_size(f) > 0);
      for (int i = 0; i < n; ++i) {
        CHECK(f(i, 0) == 0.0);
        CHECK(f(i, n - 1) == 0.0);
        CHECK(f(0, i) == 0.0);
        CHECK(f(n - 1, i) == 0.0);
      }
      CHECK(render(make_phantom_spec(k, g)).values == f.values);
    }
  }
}

TEST_CASE("plus phantom is centered") {
  const Grid g(40, 40, {-1, 1, -1, 1});
  const DenseField f = render(make_phantom_spec(PhantomKind::Plus, g));
  for (int j = 0; j < 40; ++j)
    for (int i = 0; i < 40; ++i) {
      CHECK(f(i, j) == f(39 - i, j));
      CHECK(f(i, j) == f(i, 39 - j));
    }
  CHECK(f(20, 20) > 0.0);
}

TEST_CASE("rendered area converges with resolution") {
  for (PhantomKind k : kAll) {
    CAPTURE(to_string(k));
    const Grid coarse(50, 50, {-1, 1, -1, 1}), fine(100, 100, {-1, 1, -1, 1});
    const DenseField a = render(make_phantom_spec(k, coarse));
    const DenseField b = render(make_phantom_spec(k, fine));
    const double area_a = support_size(a) * coarse.cell_area();
    const double area_b = support_size(b) * fine.cell_area();
    CHECK(std::abs(area_a - area_b) <= 2.0 * boundary_cells(a) * coarse.cell_area());
  }
}

TEST_CASE("resample") {
  const Grid g(16, 12, {-1, 1, -2, 2});
  const DenseField f = testing::random_field(g, 3);
  CHECK(testing::max_abs_diff(resample(f, 16, 12).values, f.values) <= 1e-12);

  const DenseField c(g, 0.5);
  for (auto [nx, ny] : {std::pair{5, 7}, {33, 20}, {64, 64}})
    for (double v : resample(c, nx, ny).values) CHECK(v == doctest::Approx(0.5).epsilon(1e-13));

  const DenseField vessel = render(make_phantom_spec(PhantomKind::Vessel, Grid(200, 200, {-1, 1, -1, 1})));
  const DenseField small = resample(vessel, 100, 100);
  CHECK(small.grid.nx == 100);
  CHECK(small.grid.domain == vessel.grid.domain);
  bool intermediate = false;
  for (double v : small.values) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    if (v > 0.05 && v < 0.95) intermediate = true;
  }
  CHECK(intermediate);
}

TEST_CASE("phantom names round trip") {
  for (PhantomKind k : kAll) CHECK(phantom_kind_from_string(to_string(k)) == k);
  CHECK_THROWS(phantom_kind_from_string("teapot"));
}
