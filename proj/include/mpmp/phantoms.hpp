#pragma once

#include <map>
#include <string>

#include "mpmp/types.hpp"

namespace mpmp {

enum class PhantomKind { Vessel, Shape, Concentration, Frame, Plus, Delta };

const char *to_string(PhantomKind k);
PhantomKind phantom_kind_from_string(const std::string &s);

// Geometry is written in normalized coordinates u in [-1, 1]^2 spanning the
// domain. Parameters missing from `params` take the defaults of
// default_phantom_params(kind).
struct PhantomSpec {
  PhantomKind kind = PhantomKind::Vessel;
  Grid grid;
  std::map<std::string, double> params;
  int delta_i = 0, delta_j = 0;
};

std::map<std::string, double> default_phantom_params(PhantomKind kind);

PhantomSpec make_phantom_spec(PhantomKind kind, const Grid &grid);
PhantomSpec make_delta_spec(const Grid &grid, int i, int j);

// Values in [0, 1]; the outermost ring of cells is always zero.
DenseField render(const PhantomSpec &spec);

// Bicubic values at the new cell centers (same domain), clamped to [0, 1].
DenseField resample(const DenseField &field, int nx, int ny);

}  // namespace mpmp
