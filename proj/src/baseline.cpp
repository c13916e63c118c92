#include "mpmp/baseline.hpp"

#include <cmath>
#include <stdexcept>

namespace mpmp {

SystemMatrix::SystemMatrix(const Grid &grid, std::size_t rows, std::vector<double> data)
    : grid_(grid), rows_(rows), data_(std::move(data)) {
  if (data_.size() != rows_ * grid_.size())
    throw std::invalid_argument("system matrix storage does not match its shape");
}

void SystemMatrix::apply(std::span<const double> x, std::span<double> y) const {
  if (x.size() != cols() || y.size() != rows_) throw std::invalid_argument("shape mismatch in S x");
  std::fill(y.begin(), y.end(), 0.0);
  for (std::size_t c = 0; c < cols(); ++c) {
    const double xc = x[c];
    if (xc == 0.0) continue;
    const double *col = data_.data() + c * rows_;
    for (std::size_t r = 0; r < rows_; ++r) y[r] += col[r] * xc;
  }
}

void SystemMatrix::apply_adjoint(std::span<const double> y, std::span<double> x) const {
  if (x.size() != cols() || y.size() != rows_) throw std::invalid_argument("shape mismatch in S^T y");
  const auto n = static_cast<std::ptrdiff_t>(cols());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t c = 0; c < n; ++c) {
    const double *col = data_.data() + static_cast<std::size_t>(c) * rows_;
    double acc = 0.0;
    for (std::size_t r = 0; r < rows_; ++r) acc += col[r] * y[r];
    x[static_cast<std::size_t>(c)] = acc;
  }
}

std::vector<double> stack_signals(std::span<const ScanSample> samples) {
  const std::size_t L = samples.size();
  std::vector<double> out(2 * L);
  for (std::size_t k = 0; k < L; ++k) {
    out[k] = samples[k].s.x;
    out[L + k] = samples[k].s.y;
  }
  return out;
}

SystemMatrix build_system_matrix(const Grid &grid, std::span<const ScanSample> samples,
                                 ResolutionParam h) {
  const std::size_t L = samples.size();
  const std::size_t rows = 2 * L;
  std::vector<double> data(rows * grid.size());
  const double area = grid.cell_area();
  const auto n = static_cast<std::ptrdiff_t>(grid.size());
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t c = 0; c < n; ++c) {
    const int i = static_cast<int>(c % grid.nx), j = static_cast<int>(c / grid.nx);
    const Vec2 x = grid.center(i, j);
    double *col = data.data() + static_cast<std::size_t>(c) * rows;
    for (std::size_t k = 0; k < L; ++k) {
      const Vec2 s = (area * kernel_jacobian(samples[k].r - x, h)) * samples[k].v;
      col[k] = s.x;
      col[L + k] = s.y;
    }
  }
  return SystemMatrix(grid, rows, std::move(data));
}

SystemMatrix build_system_matrix(const Grid &grid, const ScanPlan &plan, ResolutionParam h) {
  const std::vector<ScanSample> samples = sample_plan(plan, grid.domain);
  return build_system_matrix(grid, samples, h);
}

NormalEquations normal_equations(const SystemMatrix &S, std::span<const double> s) {
  if (s.size() != S.rows()) throw std::invalid_argument("signal length does not match S");
  NormalEquations ne;
  ne.n = S.cols();
  ne.gram.assign(ne.n * ne.n, 0.0);
  ne.rhs.resize(ne.n);
  const std::size_t rows = S.rows();
  const auto n = static_cast<std::ptrdiff_t>(ne.n);
#pragma omp parallel for schedule(dynamic, 8)
  for (std::ptrdiff_t a = 0; a < n; ++a) {
    const double *ca = S.column(static_cast<std::size_t>(a)).data();
    auto store = [&](std::ptrdiff_t b, double v) {
      ne.gram[static_cast<std::size_t>(a * n + b)] = v;
      ne.gram[static_cast<std::size_t>(b * n + a)] = v;
    };
    // Four columns per sweep over ca for independent accumulation chains.
    std::ptrdiff_t b = a;
    for (; b + 4 <= n; b += 4) {
      const double *c0 = S.column(static_cast<std::size_t>(b)).data();
      const double *c1 = c0 + rows, *c2 = c1 + rows, *c3 = c2 + rows;
      double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
      for (std::size_t r = 0; r < rows; ++r) {
        const double x = ca[r];
        s0 += x * c0[r];
        s1 += x * c1[r];
        s2 += x * c2[r];
        s3 += x * c3[r];
      }
      store(b, s0);
      store(b + 1, s1);
      store(b + 2, s2);
      store(b + 3, s3);
    }
    for (; b < n; ++b) {
      const double *cb = S.column(static_cast<std::size_t>(b)).data();
      double acc = 0.0;
      for (std::size_t r = 0; r < rows; ++r) acc += ca[r] * cb[r];
      store(b, acc);
    }
    double acc = 0.0;
    for (std::size_t r = 0; r < rows; ++r) acc += ca[r] * s[r];
    ne.rhs[static_cast<std::size_t>(a)] = acc;
  }
  for (double v : s) ne.yy += v * v;
  return ne;
}

namespace {

double dot(const std::vector<double> &a, const std::vector<double> &b) {
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) acc += a[k] * b[k];
  return acc;
}

// CG on (N + mu I) x = b from x = 0, where normal(p, q) writes N p into q.
template <class Normal>
TikhonovResult tikhonov_cg(Normal normal, std::vector<double> r, const Grid &grid, double mu,
                           int max_iters, double tol) {
  const std::size_t n = r.size();
  std::vector<double> x(n, 0.0), p = r, q(n);
  const double bnorm = std::sqrt(dot(r, r));
  double rr = dot(r, r);
  int it = 0;
  if (bnorm > 0.0) {
    while (it < max_iters && std::sqrt(rr) / bnorm > tol) {
      normal(p, q);
      for (std::size_t k = 0; k < n; ++k) q[k] += mu * p[k];
      const double pq = dot(p, q);
      if (!std::isfinite(pq) || pq <= 0.0)
        throw SolverDivergence("Tikhonov CG broke down at iteration " + std::to_string(it + 1));
      const double alpha = rr / pq;
      for (std::size_t k = 0; k < n; ++k) {
        x[k] += alpha * p[k];
        r[k] -= alpha * q[k];
      }
      const double rr_new = dot(r, r);
      if (!std::isfinite(rr_new)) throw SolverDivergence("Tikhonov CG produced a non-finite residual");
      const double beta = rr_new / rr;
      for (std::size_t k = 0; k < n; ++k) p[k] = r[k] + beta * p[k];
      rr = rr_new;
      ++it;
    }
  }
  TikhonovResult res;
  res.iterations = it;
  res.final_residual = bnorm > 0.0 ? std::sqrt(rr) / bnorm : 0.0;
  res.converged = res.final_residual <= tol;
  res.rho = DenseField(grid, std::move(x));
  return res;
}

}  // namespace

TikhonovResult tikhonov_solve(const SystemMatrix &S, std::span<const double> s, double mu,
                              int max_iters, double tol) {
  if (!(mu > 0.0)) throw std::invalid_argument("Tikhonov weight must be positive");
  if (s.size() != S.rows()) throw std::invalid_argument("signal length does not match S");
  std::vector<double> b(S.cols()), tmp(S.rows());
  S.apply_adjoint(s, b);
  auto normal = [&](const std::vector<double> &p, std::vector<double> &q) {
    S.apply(p, tmp);
    S.apply_adjoint(tmp, q);
  };
  return tikhonov_cg(normal, std::move(b), S.grid(), mu, max_iters, tol);
}

TikhonovResult tikhonov_solve(const NormalEquations &ne, const Grid &grid, double mu,
                              int max_iters, double tol) {
  if (!(mu > 0.0)) throw std::invalid_argument("Tikhonov weight must be positive");
  if (ne.n != grid.size()) throw std::invalid_argument("normal equations do not match the grid");
  auto normal = [&](const std::vector<double> &p, std::vector<double> &q) { ne.apply_gram(p, q); };
  return tikhonov_cg(normal, ne.rhs, grid, mu, max_iters, tol);
}

DenseField stitch(const Grid &target, std::span<const PatchImage> patches) {
  std::vector<double> sum(target.size(), 0.0);
  std::vector<int> count(target.size(), 0);
  for (const PatchImage &p : patches) {
    const Grid &g = p.field.grid;
    if (p.offset_i < 0 || p.offset_j < 0 || p.offset_i + g.nx > target.nx ||
        p.offset_j + g.ny > target.ny)
      throw std::invalid_argument("patch does not fit inside the target grid");
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        const std::size_t c = target.index(p.offset_i + i, p.offset_j + j);
        sum[c] += p.field(i, j);
        ++count[c];
      }
  }
  DenseField out(target);
  for (std::size_t c = 0; c < target.size(); ++c) {
    if (count[c] == 0) throw std::invalid_argument("patches leave a gap in the target grid");
    out.values[c] = sum[c] / count[c];
  }
  return out;
}

Stage2Result fused_lasso_sm_solve(const SystemMatrix &S, std::span<const double> s,
                                  const Stage2Config &cfg) {
  return solve_gfb(S, S.grid(), s, DenseField(S.grid()), cfg);
}

Stage2Result fused_lasso_sm_solve(const NormalEquations &ne, const Grid &grid,
                                  const Stage2Config &cfg) {
  return solve_gfb(ne, grid, DenseField(grid), cfg);
}

}  // namespace mpmp
