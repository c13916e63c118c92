#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "mpmp/rng.hpp"
#include "mpmp/types.hpp"

namespace testing {

inline mpmp::DenseField random_field(const mpmp::Grid &g, std::uint64_t seed, double lo = 0.0,
                                     double hi = 1.0) {
  mpmp::CounterRng rng(seed, 99);
  mpmp::DenseField f(g);
  for (double &v : f.values) v = rng.uniform(lo, hi);
  return f;
}

inline double dot(const std::vector<double> &a, const std::vector<double> &b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double l2(const std::vector<double> &a) { return std::sqrt(dot(a, a)); }

inline double max_abs_diff(const std::vector<double> &a, const std::vector<double> &b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double rel_l2(const std::vector<double> &a, const std::vector<double> &ref) {
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - ref[i];
  return l2(d) / l2(ref);
}

}  // namespace testing
