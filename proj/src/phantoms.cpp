#include "mpmp/phantoms.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <vector>

#include "mpmp/interp.hpp"

namespace mpmp {

const char *to_string(PhantomKind k) {
  switch (k) {
    case PhantomKind::Vessel: return "vessel";
    case PhantomKind::Shape: return "shape";
    case PhantomKind::Concentration: return "concentration";
    case PhantomKind::Frame: return "frame";
    case PhantomKind::Plus: return "plus";
    case PhantomKind::Delta: return "delta";
  }
  return "?";
}

PhantomKind phantom_kind_from_string(const std::string &s) {
  for (PhantomKind k : {PhantomKind::Vessel, PhantomKind::Shape, PhantomKind::Concentration,
                        PhantomKind::Frame, PhantomKind::Plus, PhantomKind::Delta})
    if (s == to_string(k)) return k;
  throw std::invalid_argument("unknown phantom kind: " + s);
}

std::map<std::string, double> default_phantom_params(PhantomKind kind) {
  switch (kind) {
    case PhantomKind::Vessel:
      return {{"amp", 0.3},         {"freq", 2.5},       {"phase", 0.4},
              {"x0", -0.75},        {"x1", 0.75},        {"width", 0.08},
              {"branch1_x", -0.1},  {"branch1_ex", 0.35}, {"branch1_ey", 0.7},
              {"branch1_width", 0.06}, {"branch2_x", 0.3}, {"branch2_ex", 0.6},
              {"branch2_ey", -0.7}, {"branch2_width", 0.05}};
    case PhantomKind::Shape:
      return {{"radius", 0.45}, {"spike", 0.35}, {"spikes", 6}, {"hole", 0.12}, {"rotation", 0.2}};
    case PhantomKind::Concentration:
      return {{"center", 0.4}, {"half_size", 0.25}};
    case PhantomKind::Frame:
      return {{"outer", 0.7}, {"thickness", 0.16}};
    case PhantomKind::Plus:
      return {{"half_length", 0.62}, {"half_width", 0.16}};
    case PhantomKind::Delta:
      return {};
  }
  return {};
}

PhantomSpec make_phantom_spec(PhantomKind kind, const Grid &grid) {
  PhantomSpec s;
  s.kind = kind;
  s.grid = grid;
  s.params = default_phantom_params(kind);
  return s;
}

PhantomSpec make_delta_spec(const Grid &grid, int i, int j) {
  PhantomSpec s;
  s.kind = PhantomKind::Delta;
  s.grid = grid;
  s.delta_i = i;
  s.delta_j = j;
  return s;
}

namespace {

struct Params {
  std::map<std::string, double> values;
  double operator[](const char *key) const {
    auto it = values.find(key);
    if (it == values.end()) throw std::invalid_argument(std::string("missing phantom parameter ") + key);
    return it->second;
  }
};

Params merged(const PhantomSpec &spec) {
  Params p{default_phantom_params(spec.kind)};
  for (const auto &[k, v] : spec.params) p.values[k] = v;
  return p;
}

double segment_distance(const Vec2 &p, const Vec2 &a, const Vec2 &b) {
  const Vec2 ab = b - a;
  const double len2 = dot(ab, ab);
  double t = len2 > 0 ? dot(p - a, ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return norm(p - (a + t * ab));
}

double polyline_distance(const Vec2 &p, const std::vector<Vec2> &pts) {
  double d = INFINITY;
  for (std::size_t k = 0; k + 1 < pts.size(); ++k)
    d = std::min(d, segment_distance(p, pts[k], pts[k + 1]));
  return d;
}

class VesselShape {
 public:
  explicit VesselShape(const Params &p) : p_(p) {
    const int n = 200;
    for (int k = 0; k <= n; ++k) {
      const double x = p["x0"] + (p["x1"] - p["x0"]) * k / n;
      main_.push_back({x, curve(x)});
    }
  }
  double operator()(const Vec2 &u) const {
    if (polyline_distance(u, main_) <= p_["width"]) return 1.0;
    const Vec2 a1{p_["branch1_x"], curve(p_["branch1_x"])};
    if (segment_distance(u, a1, {p_["branch1_ex"], p_["branch1_ey"]}) <= p_["branch1_width"])
      return 1.0;
    const Vec2 a2{p_["branch2_x"], curve(p_["branch2_x"])};
    if (segment_distance(u, a2, {p_["branch2_ex"], p_["branch2_ey"]}) <= p_["branch2_width"])
      return 1.0;
    return 0.0;
  }

 private:
  double curve(double x) const { return p_["amp"] * std::sin(p_["freq"] * x + p_["phase"]); }
  Params p_;
  std::vector<Vec2> main_;
};

double shape_value(const Params &p, const Vec2 &u) {
  const double r = norm(u);
  if (r < p["hole"]) return 0.0;
  const double theta = std::atan2(u.y, u.x) - p["rotation"];
  const double edge = p["radius"] * (1.0 + p["spike"] * std::cos(p["spikes"] * theta));
  return r <= edge ? 1.0 : 0.0;
}

double concentration_value(const Params &p, const Vec2 &u) {
  const double c = p["center"], hs = p["half_size"];
  // Levels by quadrant: upper-left, upper-right, lower-left, lower-right.
  const struct {
    double cx, cy, level;
  } squares[] = {{-c, c, 1.0}, {c, c, 0.75}, {-c, -c, 0.5}, {c, -c, 0.25}};
  for (const auto &s : squares)
    if (std::abs(u.x - s.cx) <= hs && std::abs(u.y - s.cy) <= hs) return s.level;
  return 0.0;
}

double frame_value(const Params &p, const Vec2 &u) {
  const double m = std::max(std::abs(u.x), std::abs(u.y));
  return (m <= p["outer"] && m >= p["outer"] - p["thickness"]) ? 1.0 : 0.0;
}

double plus_value(const Params &p, const Vec2 &u) {
  const double L = p["half_length"], w = p["half_width"];
  const bool horiz = std::abs(u.x) <= L && std::abs(u.y) <= w;
  const bool vert = std::abs(u.y) <= L && std::abs(u.x) <= w;
  return (horiz || vert) ? 1.0 : 0.0;
}

}  // namespace

DenseField render(const PhantomSpec &spec) {
  const Grid &g = spec.grid;
  DenseField f(g);
  if (spec.kind == PhantomKind::Delta) {
    if (spec.delta_i < 0 || spec.delta_i >= g.nx || spec.delta_j < 0 || spec.delta_j >= g.ny)
      throw std::out_of_range("delta index outside the grid");
    f(spec.delta_i, spec.delta_j) = 1.0;
    return f;
  }
  const Params p = merged(spec);
  const Vec2 c = g.domain.center();
  const double sx = 2.0 / g.domain.width(), sy = 2.0 / g.domain.height();
  std::optional<VesselShape> vessel;
  if (spec.kind == PhantomKind::Vessel) vessel.emplace(p);
  for (int j = 1; j + 1 < g.ny; ++j) {
    for (int i = 1; i + 1 < g.nx; ++i) {
      const Vec2 x = g.center(i, j);
      const Vec2 u{(x.x - c.x) * sx, (x.y - c.y) * sy};
      double v = 0.0;
      switch (spec.kind) {
        case PhantomKind::Vessel: v = (*vessel)(u); break;
        case PhantomKind::Shape: v = shape_value(p, u); break;
        case PhantomKind::Concentration: v = concentration_value(p, u); break;
        case PhantomKind::Frame: v = frame_value(p, u); break;
        case PhantomKind::Plus: v = plus_value(p, u); break;
        case PhantomKind::Delta: break;
      }
      f(i, j) = v;
    }
  }
  return f;
}

DenseField resample(const DenseField &field, int nx, int ny) {
  if (nx < 4 || ny < 4) throw std::invalid_argument("resample target needs at least 4 cells per axis");
  const Grid target(nx, ny, field.grid.domain);
  DenseField out(target);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      out(i, j) = std::clamp(interpolate(field, target.center(i, j)), 0.0, 1.0);
  return out;
}

}  // namespace mpmp
