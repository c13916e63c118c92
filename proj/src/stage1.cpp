#include "mpmp/stage1.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <tuple>

namespace mpmp {

void Stage1Config::validate() const {
  if (!(lambda > 0.0)) throw std::invalid_argument("stage 1 lambda must be positive");
  if (cg_max_iters < 1) throw std::invalid_argument("stage 1 needs at least one CG iteration");
  if (!(cg_tolerance > 0.0)) throw std::invalid_argument("stage 1 CG tolerance must be positive");
}

SampleCache::SampleCache(const Grid &grid, std::span<const ScanSample> samples) : grid_(grid) {
  std::vector<Entry> entries;
  entries.reserve(samples.size());
  std::vector<std::size_t> cell(samples.size());
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const ScanSample &smp = samples[k];
    Entry e{bicubic_stencil(grid, smp.r), smp.s, smp.v};
    cell[k] = grid.index(e.stencil.cell_i, e.stencil.cell_j);
    entries.push_back(e);
  }
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto key = [&](std::size_t k) {
    const ScanSample &s = samples[k];
    return std::make_tuple(cell[k], s.r.x, s.r.y, s.v.x, s.v.y, s.s.x, s.s.y);
  };
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return key(a) < key(b); });

  stencils_.reserve(order.size());
  offsets_.assign(grid.size() + 1, 0);
  for (std::size_t k : order) {
    stencils_.push_back(entries[k]);
    ++offsets_[cell[k] + 1];
  }
  std::partial_sum(offsets_.begin(), offsets_.end(), offsets_.begin());
}

std::vector<Vec2> predict(const CoreOperatorField &A, const SampleCache &cache) {
  std::vector<Vec2> out(cache.size());
  const auto n = static_cast<std::ptrdiff_t>(cache.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t k = 0; k < n; ++k) {
    const auto &e = cache[static_cast<std::size_t>(k)];
    out[static_cast<std::size_t>(k)] = interpolate(A, e.stencil) * e.v;
  }
  return out;
}

namespace {

void check_grid(const CoreOperatorField &A, const SampleCache &cache) {
  if (!(A.grid == cache.grid())) throw std::invalid_argument("field and sample cache grids differ");
}

// One stencil contribution w * value (x) v.
inline void accumulate(Mat2 &acc, double w, const Vec2 &val, const Vec2 &v) {
  acc.a11 += w * (val.x * v.x);
  acc.a12 += w * (val.x * v.y);
  acc.a21 += w * (val.y * v.x);
  acc.a22 += w * (val.y * v.y);
}

// Adds (2 lambda / N) times the Neumann Laplacian of A (positive semidefinite
// form, 1/h^2 scaled) to out.
void add_regularizer_gradient(const CoreOperatorField &A, double lambda, CoreOperatorField &out) {
  const Grid &g = A.grid;
  const double cx = 1.0 / (g.hx() * g.hx()), cy = 1.0 / (g.hy() * g.hy());
  const double scale = 2.0 * lambda / static_cast<double>(g.size());
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const Mat2 &c = A(i, j);
      Mat2 lap;
      if (i > 0) lap += cx * (c - A(i - 1, j));
      if (i + 1 < g.nx) lap += cx * (c - A(i + 1, j));
      if (j > 0) lap += cy * (c - A(i, j - 1));
      if (j + 1 < g.ny) lap += cy * (c - A(i, j + 1));
      out(i, j) += scale * lap;
    }
  }
}

}  // namespace

double regularizer(const CoreOperatorField &A) {
  const Grid &g = A.grid;
  const double cx = 1.0 / (g.hx() * g.hx()), cy = 1.0 / (g.hy() * g.hy());
  double acc = 0.0;
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      if (i + 1 < g.nx) acc += cx * frobenius_sq(A(i + 1, j) - A(i, j));
      if (j + 1 < g.ny) acc += cy * frobenius_sq(A(i, j + 1) - A(i, j));
    }
  }
  return acc;
}

double stage1_objective(const CoreOperatorField &A, const SampleCache &cache, double lambda) {
  check_grid(A, cache);
  const std::vector<Vec2> p = predict(A, cache);
  double data = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    const Vec2 e = p[k] - cache[k].s;
    data += dot(e, e);
  }
  const double L = static_cast<double>(std::max<std::size_t>(cache.size(), 1));
  return lambda / static_cast<double>(A.grid.size()) * regularizer(A) + data / L;
}

namespace kernels {

void spread_serial(std::span<const Vec2> values, const SampleCache &cache, double scale,
                   CoreOperatorField &out) {
  const Grid &g = cache.grid();
  out = CoreOperatorField(g);
  for (std::size_t k = 0; k < cache.size(); ++k) {
    const auto &e = cache[k];
    const BicubicStencil &st = e.stencil;
    for (int b = 0; b < 4; ++b)
      for (int a = 0; a < 4; ++a) accumulate(out(st.ix[a], st.iy[b]), st.wx[a] * st.wy[b], values[k], e.v);
  }
  for (Mat2 &m : out.values) m = scale * m;
}

void spread_parallel(std::span<const Vec2> values, const SampleCache &cache, double scale,
                     CoreOperatorField &out) {
  const Grid &g = cache.grid();
  out = CoreOperatorField(g);
  const int nx = g.nx, ny = g.ny;
#pragma omp parallel for schedule(static)
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      Mat2 acc;
      for (int cj = std::max(j - 2, 0); cj <= std::min(j + 1, ny - 1); ++cj) {
        for (int ci = std::max(i - 2, 0); ci <= std::min(i + 1, nx - 1); ++ci) {
          const std::size_t c = g.index(ci, cj);
          for (std::size_t k = cache.bucket_begin(c); k < cache.bucket_begin(c + 1); ++k) {
            const auto &e = cache[k];
            const BicubicStencil &st = e.stencil;
            for (int b = 0; b < 4; ++b) {
              if (st.iy[b] != j) continue;
              for (int a = 0; a < 4; ++a)
                if (st.ix[a] == i) accumulate(acc, st.wx[a] * st.wy[b], values[k], e.v);
            }
          }
        }
      }
      out(i, j) = scale * acc;
    }
  }
}

}  // namespace kernels

CoreOperatorField apply_G(const CoreOperatorField &A, const SampleCache &cache, double lambda) {
  check_grid(A, cache);
  const std::vector<Vec2> p = predict(A, cache);
  CoreOperatorField out;
  const double L = static_cast<double>(std::max<std::size_t>(cache.size(), 1));
  kernels::spread_parallel(p, cache, 2.0 / L, out);
  add_regularizer_gradient(A, lambda, out);
  return out;
}

CoreOperatorField assemble_rhs(const SampleCache &cache) {
  std::vector<Vec2> s(cache.size());
  for (std::size_t k = 0; k < cache.size(); ++k) s[k] = cache[k].s;
  CoreOperatorField out;
  const double L = static_cast<double>(std::max<std::size_t>(cache.size(), 1));
  kernels::spread_parallel(s, cache, 2.0 / L, out);
  return out;
}

DenseField trace_field(const CoreOperatorField &A) {
  DenseField u(A.grid);
  for (std::size_t c = 0; c < A.size(); ++c) u.values[c] = A.values[c].trace();
  return u;
}

namespace {

double inner(const CoreOperatorField &x, const CoreOperatorField &y) {
  double acc = 0.0;
  for (std::size_t c = 0; c < x.size(); ++c) {
    const Mat2 &a = x.values[c], &b = y.values[c];
    acc += a.a11 * b.a11 + a.a12 * b.a12 + a.a21 * b.a21 + a.a22 * b.a22;
  }
  return acc;
}

// y += alpha x
void axpy(double alpha, const CoreOperatorField &x, CoreOperatorField &y) {
  for (std::size_t c = 0; c < x.size(); ++c) y.values[c] += alpha * x.values[c];
}

}  // namespace

Stage1Result solve_stage1(const SampleCache &cache, const Stage1Config &config) {
  config.validate();
  if (cache.size() == 0) throw std::invalid_argument("stage 1 needs at least one sample");
  const Grid &g = cache.grid();
  Stage1Result res;
  res.diagnostics.sample_count = cache.size();

  CoreOperatorField x(g);
  CoreOperatorField r = assemble_rhs(cache);  // b - G*0
  const double bnorm = std::sqrt(inner(r, r));
  auto &hist = res.diagnostics.residual_history;
  if (bnorm == 0.0) {
    res.A = x;
    res.trace = trace_field(x);
    res.diagnostics.converged = true;
    hist.push_back(0.0);
    return res;
  }
  // Conjugate residuals: the conjugate-direction recurrence in the G inner
  // product, which minimizes ||b - G x|| over the Krylov space, so the residual
  // never grows. Same space and one G product per iteration as plain CG.
  CoreOperatorField p = r;
  CoreOperatorField Gr = apply_G(r, cache, config.lambda);
  CoreOperatorField Gp = Gr;
  double rGr = inner(r, Gr);
  double rr = inner(r, r);
  hist.push_back(1.0);
  int it = 0;
  while (it < config.cg_max_iters && std::sqrt(rr) / bnorm > config.cg_tolerance) {
    const double GpGp = inner(Gp, Gp);
    if (!std::isfinite(GpGp) || !std::isfinite(rGr))
      throw SolverDivergence("stage 1 CG produced a non-finite value");
    if (GpGp <= 0.0 || rGr <= 0.0) break;  // residual already in the null space
    const double alpha = rGr / GpGp;
    axpy(alpha, p, x);
    axpy(-alpha, Gp, r);
    const double rr_new = inner(r, r);
    if (!std::isfinite(rr_new)) throw SolverDivergence("stage 1 CG produced a non-finite value");
    if (rr_new > rr) {
      // Only rounding can do this; undo the step and stop.
      axpy(-alpha, p, x);
      axpy(alpha, Gp, r);
      break;
    }
    ++it;
    rr = rr_new;
    hist.push_back(std::sqrt(rr) / bnorm);
    if (std::sqrt(rr) / bnorm <= config.cg_tolerance) break;
    Gr = apply_G(r, cache, config.lambda);
    const double rGr_new = inner(r, Gr);
    const double beta = rGr_new / rGr;
    rGr = rGr_new;
    for (std::size_t c = 0; c < p.size(); ++c) {
      p.values[c] = r.values[c] + beta * p.values[c];
      Gp.values[c] = Gr.values[c] + beta * Gp.values[c];
    }
  }
  res.diagnostics.iterations = it;
  res.diagnostics.final_residual = std::sqrt(rr) / bnorm;
  res.diagnostics.converged = res.diagnostics.final_residual <= config.cg_tolerance;
  res.A = std::move(x);
  res.trace = trace_field(res.A);
  return res;
}

Stage1Result solve_stage1(std::span<const ScanSample> samples, const Grid &grid,
                          const Stage1Config &config) {
  return solve_stage1(SampleCache(grid, samples), config);
}

}  // namespace mpmp
