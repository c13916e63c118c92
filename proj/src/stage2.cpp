#include "mpmp/stage2.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "mpmp/rng.hpp"

namespace mpmp {

namespace {

// FFTW's planner is not thread safe; execution is.
std::mutex &fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

int next_pow2(int n) {
  int p = 1;
  while (p < n) p <<= 1;
  return p;
}

struct FftwBuffer {
  explicit FftwBuffer(std::size_t n) : ptr(fftw_malloc(n)) {
    if (!ptr) throw std::bad_alloc();
  }
  ~FftwBuffer() { fftw_free(ptr); }
  FftwBuffer(const FftwBuffer &) = delete;
  FftwBuffer &operator=(const FftwBuffer &) = delete;
  void *ptr;
};

double norm2(std::span<const double> x) {
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return std::sqrt(acc);
}

}  // namespace

struct ConvolutionOperator::Plans {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
  ~Plans() {
    std::lock_guard lock(fftw_planner_mutex());
    if (forward) fftw_destroy_plan(forward);
    if (backward) fftw_destroy_plan(backward);
  }
};

ConvolutionOperator::ConvolutionOperator(const Grid &grid, ResolutionParam h)
    : grid_(grid), h_(h.h), pad_(next_pow2(2 * std::max(grid.nx, grid.ny) - 1)) {
  const int kx = 2 * grid.nx - 1, ky = 2 * grid.ny - 1;
  const double hx = grid.hx(), hy = grid.hy(), area = grid.cell_area();
  kernel_.resize(static_cast<std::size_t>(kx) * ky);
  for (int dj = -(grid.ny - 1); dj <= grid.ny - 1; ++dj)
    for (int di = -(grid.nx - 1); di <= grid.nx - 1; ++di)
      kernel_[static_cast<std::size_t>(dj + grid.ny - 1) * kx + (di + grid.nx - 1)] =
          area * kernel_scalar({di * hx, dj * hy}, h);

  const std::size_t P = static_cast<std::size_t>(pad_);
  const std::size_t nc = P * (P / 2 + 1);
  FftwBuffer real(sizeof(double) * P * P);
  FftwBuffer spec(sizeof(fftw_complex) * nc);
  auto *r = static_cast<double *>(real.ptr);
  auto *c = static_cast<fftw_complex *>(spec.ptr);
  plans_ = std::make_unique<Plans>();
  {
    std::lock_guard lock(fftw_planner_mutex());
    plans_->forward = fftw_plan_dft_r2c_2d(pad_, pad_, r, c, FFTW_ESTIMATE);
    plans_->backward = fftw_plan_dft_c2r_2d(pad_, pad_, c, r, FFTW_ESTIMATE);
  }
  if (!plans_->forward || !plans_->backward) throw std::runtime_error("FFTW planning failed");

  std::fill(r, r + P * P, 0.0);
  for (int dj = -(grid.ny - 1); dj <= grid.ny - 1; ++dj) {
    const std::size_t row = static_cast<std::size_t>((dj + pad_) % pad_);
    for (int di = -(grid.nx - 1); di <= grid.nx - 1; ++di) {
      const std::size_t col = static_cast<std::size_t>((di + pad_) % pad_);
      r[row * P + col] = kernel(di, dj);
    }
  }
  fftw_execute_dft_r2c(plans_->forward, r, c);
  kernel_hat_.resize(nc);
  for (std::size_t k = 0; k < nc; ++k) kernel_hat_[k] = {c[k][0], c[k][1]};
}

ConvolutionOperator::~ConvolutionOperator() = default;

double ConvolutionOperator::kernel(int di, int dj) const {
  if (std::abs(di) > grid_.nx - 1 || std::abs(dj) > grid_.ny - 1) return 0.0;
  const int kx = 2 * grid_.nx - 1;
  return kernel_[static_cast<std::size_t>(dj + grid_.ny - 1) * kx + (di + grid_.nx - 1)];
}

double ConvolutionOperator::kernel_l1() const {
  double acc = 0.0;
  for (double v : kernel_) acc += std::abs(v);
  return acc;
}

namespace {

// Per-thread FFT scratch so that apply() does not allocate on every call.
struct FftWorkspace {
  std::size_t P = 0;
  std::unique_ptr<FftwBuffer> real, spec;
  void ensure(std::size_t p) {
    if (P == p) return;
    real = std::make_unique<FftwBuffer>(sizeof(double) * p * p);
    spec = std::make_unique<FftwBuffer>(sizeof(fftw_complex) * p * (p / 2 + 1));
    P = p;
  }
};

}  // namespace

void ConvolutionOperator::apply(std::span<const double> x, std::span<double> y) const {
  if (x.size() != grid_.size() || y.size() != grid_.size())
    throw std::invalid_argument("convolution input does not match the operator grid");
  const std::size_t P = static_cast<std::size_t>(pad_);
  const std::size_t nc = P * (P / 2 + 1);
  thread_local FftWorkspace ws;
  ws.ensure(P);
  auto *r = static_cast<double *>(ws.real->ptr);
  auto *c = static_cast<fftw_complex *>(ws.spec->ptr);
  const auto nx = static_cast<std::size_t>(grid_.nx), ny = static_cast<std::size_t>(grid_.ny);
  for (std::size_t j = 0; j < ny; ++j) {
    std::copy_n(x.data() + j * nx, nx, r + j * P);
    std::fill(r + j * P + nx, r + (j + 1) * P, 0.0);
  }
  std::fill(r + ny * P, r + P * P, 0.0);
  fftw_execute_dft_r2c(plans_->forward, r, c);
  const auto *kh = reinterpret_cast<const double *>(kernel_hat_.data());
  for (std::size_t k = 0; k < nc; ++k) {
    const double a = c[k][0], b = c[k][1], kr = kh[2 * k], ki = kh[2 * k + 1];
    c[k][0] = a * kr - b * ki;
    c[k][1] = a * ki + b * kr;
  }
  fftw_execute_dft_c2r(plans_->backward, c, r);
  const double scale = 1.0 / static_cast<double>(P * P);
  for (std::size_t j = 0; j < ny; ++j)
    for (std::size_t i = 0; i < nx; ++i) y[j * nx + i] = r[j * P + i] * scale;
}

DenseField ConvolutionOperator::convolve(const DenseField &rho) const {
  if (!(rho.grid == grid_)) throw std::invalid_argument("field grid differs from operator grid");
  DenseField out(grid_);
  apply(rho.values, out.values);
  return out;
}

DenseField convolve(const ConvolutionOperator &K, const DenseField &rho) { return K.convolve(rho); }

DenseField convolve_direct(const ConvolutionOperator &K, const DenseField &rho) {
  const Grid &g = K.grid();
  if (!(rho.grid == g)) throw std::invalid_argument("field grid differs from operator grid");
  DenseField out(g);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      double acc = 0.0;
      for (int jj = 0; jj < g.ny; ++jj)
        for (int ii = 0; ii < g.nx; ++ii) acc += K.kernel(i - ii, j - jj) * rho(ii, jj);
      out(i, j) = acc;
    }
  return out;
}

namespace {

struct TvTerms {
  std::vector<double> root;  // sqrt(W + delta)
  std::vector<double> dxp, dxm, dyp, dym;
};

TvTerms tv_terms(const Grid &g, std::span<const double> rho, double delta) {
  const int nx = g.nx, ny = g.ny;
  const double hx = g.hx(), hy = g.hy();
  auto at = [&](int i, int j) {
    return (i < 0 || i >= nx || j < 0 || j >= ny) ? 0.0 : rho[g.index(i, j)];
  };
  TvTerms t;
  t.root.resize(g.size());
  t.dxp.resize(g.size());
  t.dxm.resize(g.size());
  t.dyp.resize(g.size());
  t.dym.resize(g.size());
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const std::size_t c = g.index(i, j);
      const double v = at(i, j);
      t.dxp[c] = (at(i + 1, j) - v) / hx;
      t.dxm[c] = (v - at(i - 1, j)) / hx;
      t.dyp[c] = (at(i, j + 1) - v) / hy;
      t.dym[c] = (v - at(i, j - 1)) / hy;
      const double W = 0.5 * (t.dxp[c] * t.dxp[c] + t.dxm[c] * t.dxm[c]) +
                       0.5 * (t.dyp[c] * t.dyp[c] + t.dym[c] * t.dym[c]);
      t.root[c] = std::sqrt(W + delta);
    }
  return t;
}

}  // namespace

double tv_functional(const DenseField &rho, double delta) {
  const TvTerms t = tv_terms(rho.grid, rho.values, delta);
  double acc = 0.0;
  for (double r : t.root) acc += r;
  return rho.grid.cell_area() * acc;
}

namespace {

// out += scale * grad R_delta. Works on a copy of rho with a one-cell zero
// border so the stencils need no bounds checks.
void add_tv_gradient(const Grid &g, std::span<const double> rho, double delta, double scale,
                     std::span<double> out) {
  const int nx = g.nx, ny = g.ny, W = nx + 2;
  const double ihx = 1.0 / g.hx(), ihy = 1.0 / g.hy();
  thread_local std::vector<double> pad, gv;
  pad.assign(static_cast<std::size_t>(W) * (ny + 2), 0.0);
  gv.assign(pad.size(), 0.0);
  for (int j = 0; j < ny; ++j)
    std::copy_n(rho.data() + static_cast<std::size_t>(j) * nx, nx, pad.data() + (j + 1) * W + 1);
  for (int j = 1; j <= ny; ++j)
    for (int i = 1; i <= nx; ++i) {
      const int c = j * W + i;
      const double v = pad[c];
      const double dxp = (pad[c + 1] - v) * ihx, dxm = (v - pad[c - 1]) * ihx;
      const double dyp = (pad[c + W] - v) * ihy, dym = (v - pad[c - W]) * ihy;
      gv[c] = 1.0 / std::sqrt(0.5 * (dxp * dxp + dxm * dxm) + 0.5 * (dyp * dyp + dym * dym) + delta);
    }
  const double f = -scale * g.cell_area();
  for (int j = 1; j <= ny; ++j)
    for (int i = 1; i <= nx; ++i) {
      const int c = j * W + i;
      const double v = pad[c], gc = gv[c];
      const double x = 0.5 * (gv[c + 1] + gc) * (pad[c + 1] - v) - 0.5 * (gc + gv[c - 1]) * (v - pad[c - 1]);
      const double y = 0.5 * (gv[c + W] + gc) * (pad[c + W] - v) - 0.5 * (gc + gv[c - W]) * (v - pad[c - W]);
      out[static_cast<std::size_t>(j - 1) * nx + (i - 1)] += f * (x * ihx * ihx + y * ihy * ihy);
    }
}

}  // namespace

std::vector<double> tv_values_gradient(const Grid &g, std::span<const double> rho, double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("TV smoothing delta must be positive");
  if (rho.size() != g.size()) throw std::invalid_argument("field does not match the grid");
  std::vector<double> out(g.size(), 0.0);
  add_tv_gradient(g, rho, delta, 1.0, out);
  return out;
}

DenseField tv_gradient(const DenseField &rho, double delta) {
  return DenseField(rho.grid, tv_values_gradient(rho.grid, rho.values, delta));
}

void data_tv_gradient(const LinearMap &A, const Grid &g, std::span<const double> rho,
                      std::span<const double> y, double mu, double delta, std::span<double> grad) {
  thread_local std::vector<double> r;
  r.resize(A.rows());
  A.apply(rho, r);
  for (std::size_t k = 0; k < r.size(); ++k) r[k] = 2.0 * (r[k] - y[k]);
  A.apply_adjoint(r, grad);
  if (mu != 0.0) {
    if (!(delta > 0.0)) throw std::invalid_argument("TV smoothing delta must be positive");
    add_tv_gradient(g, rho, delta, mu, grad);
  }
}

DenseField grad_F(const DenseField &rho, const DenseField &u, const ConvolutionOperator &K,
                  double mu, double delta) {
  DenseField out(rho.grid);
  data_tv_gradient(K, rho.grid, rho.values, u.values, mu, delta, out.values);
  return out;
}

double smooth_objective(const LinearMap &A, const Grid &g, std::span<const double> rho,
                        std::span<const double> y, double mu, double delta) {
  std::vector<double> r(A.rows());
  A.apply(rho, r);
  double data = 0.0;
  for (std::size_t k = 0; k < r.size(); ++k) data += (r[k] - y[k]) * (r[k] - y[k]);
  if (mu == 0.0) return data;
  const TvTerms t = tv_terms(g, rho, delta);
  double tv = 0.0;
  for (double v : t.root) tv += v;
  return data + mu * g.cell_area() * tv;
}

double stage2_objective(const LinearMap &A, const Grid &g, std::span<const double> rho,
                        std::span<const double> y, const Stage2Config &cfg) {
  double l1 = 0.0;
  for (double v : rho) l1 += std::abs(v);
  return smooth_objective(A, g, rho, y, cfg.mu, cfg.delta) + cfg.beta * l1;
}

DenseField prox_l1(const DenseField &v, double threshold) {
  if (threshold < 0.0) throw std::invalid_argument("soft threshold must be nonnegative");
  DenseField out(v.grid);
  for (std::size_t c = 0; c < v.size(); ++c) {
    const double x = v.values[c];
    out.values[c] = std::copysign(std::max(std::abs(x) - threshold, 0.0), x);
  }
  return out;
}

DenseField prox_nonneg(const DenseField &v) {
  DenseField out(v.grid);
  for (std::size_t c = 0; c < v.size(); ++c) out.values[c] = std::max(0.0, v.values[c]);
  return out;
}

void Stage2Config::validate() const {
  if (!(mu >= 0.0)) throw std::invalid_argument("mu must be nonnegative");
  if (!(beta >= 0.0)) throw std::invalid_argument("beta must be nonnegative");
  if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
  if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
  if (!(relaxation > 0.0)) throw std::invalid_argument("relaxation must be positive");
  if (!(tolerance >= 0.0)) throw std::invalid_argument("tolerance must be nonnegative");
  if (max_iters < 0) throw std::invalid_argument("max_iters must be nonnegative");
  if (objective_every < 1) throw std::invalid_argument("objective_every must be >= 1");
}

namespace {

double relative_change(std::span<const double> next, std::span<const double> prev) {
  double diff = 0.0, base = 0.0;
  for (std::size_t c = 0; c < next.size(); ++c) {
    diff += (next[c] - prev[c]) * (next[c] - prev[c]);
    base += prev[c] * prev[c];
  }
  if (diff == 0.0) return 0.0;
  return base == 0.0 ? std::sqrt(diff) : std::sqrt(diff / base);
}

[[noreturn]] void diverged(const char *solver, int iteration) {
  std::ostringstream msg;
  msg << solver << " produced a non-finite iterate at iteration " << iteration;
  throw SolverDivergence(msg.str());
}

}  // namespace

namespace {

// Data term through the operator itself.
struct OperatorData {
  const LinearMap &A;
  std::span<const double> y;
  void gradient(std::span<const double> rho, std::span<double> out) const {
    thread_local std::vector<double> r;
    r.resize(A.rows());
    A.apply(rho, r);
    for (std::size_t k = 0; k < r.size(); ++k) r[k] = 2.0 * (r[k] - y[k]);
    A.apply_adjoint(r, out);
  }
  double value(std::span<const double> rho) const {
    std::vector<double> r(A.rows());
    A.apply(rho, r);
    double acc = 0.0;
    for (std::size_t k = 0; k < r.size(); ++k) acc += (r[k] - y[k]) * (r[k] - y[k]);
    return acc;
  }
};

// Data term through A^T A, A^T y and ||y||^2.
struct GramData {
  const NormalEquations &ne;
  void gradient(std::span<const double> rho, std::span<double> out) const {
    ne.apply_gram(rho, out);
    for (std::size_t c = 0; c < out.size(); ++c) out[c] = 2.0 * (out[c] - ne.rhs[c]);
  }
  double value(std::span<const double> rho) const {
    std::vector<double> q(rho.size());
    ne.apply_gram(rho, q);
    double acc = ne.yy;
    for (std::size_t c = 0; c < rho.size(); ++c) acc += rho[c] * (q[c] - 2.0 * ne.rhs[c]);
    return acc;
  }
};

template <class Data>
double full_objective(const Data &data, const Grid &g, std::span<const double> rho,
                      const Stage2Config &cfg) {
  double l1 = 0.0;
  for (double v : rho) l1 += std::abs(v);
  double obj = data.value(rho) + cfg.beta * l1;
  if (cfg.mu != 0.0) obj += cfg.mu * tv_functional(DenseField(g, {rho.begin(), rho.end()}), cfg.delta);
  return obj;
}

template <class Data>
Stage2Result gfb_loop(const Data &data, const Grid &g, const DenseField &init,
                      const Stage2Config &cfg) {
  const std::size_t n = init.size();
  std::vector<double> rho = init.values, z1 = rho, z2 = rho, next(n), grad(n);
  // Output of the positivity prox in the last sweep. It has the same limit as
  // rho and is feasible at every iteration, so it is what gets returned.
  std::vector<double> feasible = rho;
  const double thr = 2.0 * cfg.gamma * cfg.beta;
  const double lam = cfg.relaxation;

  Stage2Result res;
  auto &d = res.diagnostics;
  d.initial_objective = full_objective(data, g, rho, cfg);
  d.objective_trace.push_back({0, d.initial_objective});
  d.final_residual = 0.0;

  int it = 0;
  while (it < cfg.max_iters) {
    data.gradient(rho, grad);
    if (cfg.mu != 0.0) add_tv_gradient(g, rho, cfg.delta, cfg.mu, grad);
    for (std::size_t c = 0; c < n; ++c) {
      const double step = 2.0 * rho[c] - cfg.gamma * grad[c];
      const double a1 = step - z1[c];
      const double p1 = std::copysign(std::max(std::abs(a1) - thr, 0.0), a1);
      const double p2 = std::max(0.0, step - z2[c]);
      feasible[c] = p2;
      z1[c] += lam * (p1 - rho[c]);
      z2[c] += lam * (p2 - rho[c]);
      next[c] = 0.5 * (z1[c] + z2[c]);
    }
    ++it;
    const double resid = relative_change(next, rho);
    if (!std::isfinite(resid)) diverged("stage 2 splitting", it);
    rho.swap(next);
    d.final_residual = resid;
    if (it % cfg.objective_every == 0)
      d.objective_trace.push_back({it, full_objective(data, g, rho, cfg)});
    if (resid <= cfg.tolerance) {
      d.converged = true;
      break;
    }
  }
  d.iterations = it;
  if (it == 0) feasible = rho;
  d.final_objective = full_objective(data, g, feasible, cfg);
  if (d.objective_trace.back().iteration != it)
    d.objective_trace.push_back({it, d.final_objective});
  else
    d.objective_trace.back().value = d.final_objective;
  res.rho = DenseField(g, std::move(feasible));
  return res;
}

}  // namespace

void NormalEquations::apply_gram(std::span<const double> x, std::span<double> out) const {
  const auto nn = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t a = 0; a < nn; ++a) {
    const double *row = gram.data() + static_cast<std::size_t>(a) * n;
    double acc[4] = {0.0, 0.0, 0.0, 0.0};
    std::size_t b = 0;
    for (; b + 4 <= n; b += 4)
      for (int l = 0; l < 4; ++l) acc[l] += row[b + l] * x[b + l];
    for (; b < n; ++b) acc[0] += row[b] * x[b];
    out[static_cast<std::size_t>(a)] = (acc[0] + acc[1]) + (acc[2] + acc[3]);
  }
}

Stage2Result solve_gfb(const LinearMap &A, const Grid &g, std::span<const double> y,
                       const DenseField &init, const Stage2Config &cfg) {
  cfg.validate();
  if (init.size() != A.cols() || y.size() != A.rows() || A.cols() != g.size())
    throw std::invalid_argument("solver inputs do not match the operator shape");
  return gfb_loop(OperatorData{A, y}, g, init, cfg);
}

Stage2Result solve_gfb(const NormalEquations &ne, const Grid &g, const DenseField &init,
                       const Stage2Config &cfg) {
  cfg.validate();
  if (init.size() != ne.n || ne.n != g.size() || ne.gram.size() != ne.n * ne.n ||
      ne.rhs.size() != ne.n)
    throw std::invalid_argument("solver inputs do not match the normal equations");
  return gfb_loop(GramData{ne}, g, init, cfg);
}

Stage2Result solve_stage2(const DenseField &u, const Stage2Config &cfg,
                          const ConvolutionOperator &K) {
  if (!(u.grid == K.grid())) throw std::invalid_argument("trace grid differs from operator grid");
  return solve_gfb(K, u.grid, u.values, u, cfg);
}

Stage2Result solve_landweber(const DenseField &u, double mu, double delta, double gamma,
                             const ConvolutionOperator &K, int iters, double tolerance) {
  if (!(u.grid == K.grid())) throw std::invalid_argument("trace grid differs from operator grid");
  if (!(gamma >= 0.0)) throw std::invalid_argument("gamma must be nonnegative");
  const Grid &g = u.grid;
  std::vector<double> rho = u.values, grad(rho.size()), next(rho.size());
  Stage2Result res;
  auto &d = res.diagnostics;
  d.initial_objective = smooth_objective(K, g, rho, u.values, mu, delta);
  int it = 0;
  for (; it < iters; ++it) {
    data_tv_gradient(K, g, rho, u.values, mu, delta, grad);
    for (std::size_t c = 0; c < rho.size(); ++c) next[c] = rho[c] - gamma * grad[c];
    const double resid = relative_change(next, rho);
    if (!std::isfinite(resid)) diverged("landweber", it + 1);
    rho.swap(next);
    d.final_residual = resid;
    if (tolerance > 0.0 && resid <= tolerance) {
      d.converged = true;
      ++it;
      break;
    }
  }
  d.iterations = it;
  d.final_objective = smooth_objective(K, g, rho, u.values, mu, delta);
  res.rho = DenseField(g, std::move(rho));
  return res;
}

PowerIterationResult normal_operator_norm(const LinearMap &A, int max_iters, double rel_tol,
                                          std::uint64_t seed) {
  CounterRng rng(seed, 4);
  std::vector<double> x(A.cols()), Ax(A.rows()), y(A.cols());
  for (double &v : x) v = rng.normal();
  double nx = norm2(x);
  for (double &v : x) v /= nx;
  PowerIterationResult res;
  double prev = 0.0;
  for (int it = 1; it <= max_iters; ++it) {
    A.apply(x, Ax);
    A.apply_adjoint(Ax, y);
    const double lam = norm2(y);
    res.value = lam;
    res.iterations = it;
    if (lam == 0.0) {
      res.converged = true;
      break;
    }
    for (std::size_t c = 0; c < x.size(); ++c) x[c] = y[c] / lam;
    if (it > 1 && std::abs(lam - prev) <= rel_tol * lam) {
      res.converged = true;
      break;
    }
    prev = lam;
  }
  return res;
}

double tv_lipschitz_c1(const Grid &g, double delta) {
  const double hx = g.hx(), hy = g.hy();
  return 2.0 * std::sqrt(2.0) / (std::pow(3.0, 1.5) * std::sqrt(delta)) *
         std::sqrt(1.0 / (hx * hx) + 1.0 / (hy * hy));
}

LipschitzBound lipschitz_bound(const Grid &g, double mu, double delta, const LinearMap &A) {
  if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
  LipschitzBound b;
  b.C1 = tv_lipschitz_c1(g, delta);
  b.tv_constant = 2.0 * static_cast<double>(g.size()) * (1.0 / g.hx() + 1.0 / g.hy()) *
                  (std::sqrt(2.0) + b.C1);
  b.normal_norm = normal_operator_norm(A).value;
  b.value = mu * g.cell_area() * b.tv_constant + 2.0 * b.normal_norm;
  b.unscaled_value = mu * b.tv_constant + b.normal_norm;
  return b;
}

ConvergenceCheck check_convergence_params(const Stage2Config &cfg, double lipschitz) {
  if (!(lipschitz > 0.0)) throw std::invalid_argument("Lipschitz constant must be positive");
  ConvergenceCheck c;
  c.eta = 1.0 / lipschitz;
  c.gamma_ok = cfg.gamma > 0.0 && cfg.gamma < 2.0 * c.eta;
  const double lam_max = std::min(1.5, 0.5 + c.eta / cfg.gamma);
  c.relaxation_ok = cfg.relaxation > 0.0 && cfg.relaxation < lam_max;
  c.certified = c.gamma_ok && c.relaxation_ok;
  std::ostringstream msg;
  msg << "eta=" << c.eta << " gamma=" << cfg.gamma << (c.gamma_ok ? " in" : " outside")
      << " (0, 2 eta); relaxation=" << cfg.relaxation << (c.relaxation_ok ? " in" : " outside")
      << " (0, " << lam_max << ")";
  c.message = msg.str();
  return c;
}

}  // namespace mpmp
