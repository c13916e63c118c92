// One PASS/FAIL line per acceptance criterion. Exit status is nonzero if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "mpmp/baseline.hpp"
#include "mpmp/experiments.hpp"
#include "mpmp/metrics.hpp"
#include "mpmp/phantoms.hpp"
#include "mpmp/rng.hpp"
#include "mpmp/stage1.hpp"
#include "mpmp/stage2.hpp"

using namespace mpmp;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass;
  std::string detail;
};

int failures = 0;

void report(int id, const char *title, const std::function<Outcome()> &check) {
  Outcome o;
  try {
    o = check();
  } catch (const std::exception &e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  if (!o.pass) ++failures;
  std::printf("%s %2d %s: %s\n", o.pass ? "PASS" : "FAIL", id, title, o.detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char *f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

DenseField random_field(const Grid &g, CounterRng &rng, double lo, double hi) {
  DenseField f(g);
  for (double &v : f.values) v = rng.uniform(lo, hi);
  return f;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double nrm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

std::vector<double> moved(const std::vector<double> &x, double t, const std::vector<double> &d) {
  std::vector<double> y = x;
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += t * d[i];
  return y;
}

Outcome kernel_trace() {
  const auto t0 = Clock::now();
  CounterRng rng(101);
  double worst = 0.0;
  for (double hv : {0.005, 0.01, 0.02}) {
    const ResolutionParam h(hv);
    for (int k = 0; k < 1000; ++k) {
      const double scale = std::pow(10.0, rng.uniform(-4, 0.5));
      const Vec2 z{scale * rng.uniform(-1, 1), scale * rng.uniform(-1, 1)};
      const double ks = kernel_scalar(z, h);
      worst = std::max(worst, std::abs(kernel_jacobian(z, h).trace() - ks) / std::abs(ks));
    }
  }
  const double t = seconds_since(t0);
  return {worst <= 1e-12 && t < 1.0, fmt("max rel err %.2e, %.3f s", worst, t)};
}

Outcome kernel_limit() {
  double worst_limit = 0.0;
  for (double hv : {0.005, 0.01, 0.02, 0.1}) {
    const double expect = 2.0 / (3.0 * hv);
    worst_limit = std::max(worst_limit, std::abs(kernel_scalar({0, 0}, ResolutionParam(hv)) - expect) / expect);
  }
  double worst_branch = 0.0;
  for (int k = 0; k <= 1000; ++k) {
    const double x = kLangevinSeriesThreshold * (0.5 + k / 1000.0);
    worst_branch = std::max(worst_branch, std::abs(langevin_series(x) - langevin_direct(x)) /
                                              std::abs(langevin_direct(x)));
    worst_branch = std::max(worst_branch,
                            std::abs(langevin_derivative_series(x) - langevin_derivative_direct(x)) /
                                std::abs(langevin_derivative_direct(x)));
  }
  return {worst_limit <= 1e-9 && worst_branch <= 1e-10,
          fmt("limit rel err %.2e, branch rel gap %.2e", worst_limit, worst_branch)};
}

Outcome stage2_gradient() {
  const auto t0 = Clock::now();
  const Grid g(8, 8, {-1, 1, -1, 1});
  const ConvolutionOperator K(g, ResolutionParam(0.05));
  CounterRng rng(102);
  const double mu = 1e-4, delta = 1e-16;
  const DenseField rho = random_field(g, rng, 0, 1), u = random_field(g, rng, 0, 1);
  const DenseField grad = grad_F(rho, u, K, mu, delta);
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    std::vector<double> d(g.size());
    for (double &v : d) v = rng.uniform(-1, 1);
    const double e = 1e-6;
    const double fd = (smooth_objective(K, g, moved(rho.values, e, d), u.values, mu, delta) -
                       smooth_objective(K, g, moved(rho.values, -e, d), u.values, mu, delta)) /
                      (2 * e);
    const double an = dot(grad.values, d);
    worst = std::max(worst, std::abs(fd - an) / std::abs(an));
  }
  const double t = seconds_since(t0);
  return {worst <= 1e-5 && t < 5.0, fmt("max rel err %.2e over 20 directions, %.3f s", worst, t)};
}

double inner(const CoreOperatorField &a, const CoreOperatorField &b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const Mat2 &x = a.values[k], &y = b.values[k];
    s += x.a11 * y.a11 + x.a12 * y.a12 + x.a21 * y.a21 + x.a22 * y.a22;
  }
  return s;
}

CoreOperatorField random_op(const Grid &g, CounterRng &rng) {
  CoreOperatorField f(g);
  for (Mat2 &m : f.values) m = {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
  return f;
}

CoreOperatorField plus(const CoreOperatorField &a, double t, const CoreOperatorField &d) {
  CoreOperatorField out = a;
  for (std::size_t k = 0; k < a.size(); ++k) out.values[k] += t * d.values[k];
  return out;
}

Outcome stage1_gradient() {
  const Grid g(6, 6, {-1, 1, -1, 1});
  CounterRng rng(103);
  std::vector<ScanSample> samples;
  for (int k = 0; k < 50; ++k)
    samples.push_back({double(k), 0, {rng.normal(), rng.normal()},
                       {rng.uniform(-1, 1), rng.uniform(-1, 1)}, {rng.uniform(-5, 5), rng.uniform(-5, 5)}});
  const SampleCache cache(g, samples);
  const double lambda = 0.5;
  const CoreOperatorField A = random_op(g, rng);
  const CoreOperatorField grad = plus(apply_G(A, cache, lambda), -1.0, assemble_rhs(cache));

  double fd_err = 0.0, sym = 0.0, psd = 0.0;
  for (int k = 0; k < 20; ++k) {
    const CoreOperatorField E = random_op(g, rng);
    const double e = 1e-4;
    const double fd = (stage1_objective(plus(A, e, E), cache, lambda) -
                       stage1_objective(plus(A, -e, E), cache, lambda)) /
                      (2 * e);
    const double an = inner(grad, E);
    fd_err = std::max(fd_err, std::abs(fd - an) / std::abs(an));

    const CoreOperatorField X = random_op(g, rng), Y = random_op(g, rng);
    const double gap = std::abs(inner(apply_G(X, cache, lambda), Y) - inner(X, apply_G(Y, cache, lambda)));
    sym = std::max(sym, gap / std::sqrt(inner(X, X) * inner(Y, Y)));
    psd = std::min(psd, inner(apply_G(X, cache, lambda), X));
  }
  return {fd_err <= 1e-6 && sym <= 1e-10 && psd >= -1e-12,
          fmt("fd rel err %.2e, symmetry %.2e, min <GX,X> %.2e", fd_err, sym, psd)};
}

double brute_argmin(const std::function<double(double)> &f, double lo, double hi) {
  double arg = lo, best = f(lo);
  for (double x = lo; x <= hi; x += 1e-3)
    if (const double y = f(x); y < best) best = y, arg = x;
  const double c = arg;
  for (double x = c - 1e-3; x <= c + 1e-3; x += 1e-6)
    if (const double y = f(x); y < best) best = y, arg = x;
  return arg;
}

Outcome prox_oracles() {
  CounterRng rng(104);
  const Grid one(1, 1, {0, 1, 0, 1});
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const double v = rng.uniform(-2, 2), t = rng.uniform(0, 1);
    const double l1 = brute_argmin([&](double x) { return t * std::abs(x) + 0.5 * (x - v) * (x - v); }, -3, 3);
    const double pos = brute_argmin([&](double x) { return x < 0 ? 1e300 : 0.5 * (x - v) * (x - v); }, -3, 3);
    worst = std::max(worst, std::abs(prox_l1(DenseField(one, {v}), t).values[0] - l1));
    worst = std::max(worst, std::abs(prox_nonneg(DenseField(one, {v})).values[0] - pos));
  }
  return {worst <= 2e-6, fmt("max deviation from brute force %.2e (grid 1e-6)", worst)};
}

RigidMotion random_motion(CounterRng &rng, bool moving) {
  RigidMotion m{{rng.uniform(-3, 3), rng.uniform(-3, 3)}, rng.uniform(-std::numbers::pi, std::numbers::pi), {}, 0};
  if (moving) {
    m.offset_rate = {rng.uniform(-2, 2), rng.uniform(-2, 2)};
    m.angle_rate = rng.uniform(-5, 5);
  }
  return m;
}

Outcome frame_round_trips() {
  CounterRng rng(105);
  const int n = 1000;
  double worst = 0.0;
  // Static scanner, moving specimen, both moving; then the scanner-FoV-specimen chain.
  for (int c = 0; c < 3; ++c) {
    std::vector<ScanSample> in;
    std::vector<RigidMotion> scanner, omega;
    for (int k = 0; k < n; ++k) {
      in.push_back({0, 0, {rng.normal(), rng.normal()}, {rng.uniform(-2, 2), rng.uniform(-2, 2)},
                    {rng.uniform(-50, 50), rng.uniform(-50, 50)}});
      scanner.push_back(c == 1 ? RigidMotion{} : random_motion(rng, true));
      omega.push_back(c == 0 ? RigidMotion{} : random_motion(rng, true));
    }
    const auto back = transform_to_omega_frame(transform_to_scanner_frame(in, scanner, omega), scanner, omega);
    for (int k = 0; k < n; ++k) {
      worst = std::max({worst, norm(back[k].r - in[k].r), norm(back[k].v - in[k].v), norm(back[k].s - in[k].s)});
    }
  }
  for (int k = 0; k < n; ++k) {
    const RigidMotion s = random_motion(rng, true), f = random_motion(rng, true), o = random_motion(rng, true);
    const ScanSample x{0, 0, {rng.normal(), rng.normal()}, {rng.uniform(-1, 1), rng.uniform(-1, 1)},
                       {rng.uniform(-50, 50), rng.uniform(-50, 50)}};
    // FoV curve into scanner coordinates, then scanner into the specimen frame.
    const TrajectoryPoint sc = fov_trajectory_in_scanner({x.r, x.v}, s, f);
    const ScanSample in_scanner{0, 0, x.s, sc.position, sc.velocity};
    // FoV -> scanner is S F^-1; scanner -> specimen undoes S O^-1.
    const RigidMotion total = compose(compose(o, inverse(s)), compose(s, inverse(f)));
    const ScanSample direct = apply_motion(total, x);
    const RigidMotion so = relative_motion(s, o);
    const ScanSample via = invert_motion(so, in_scanner);
    worst = std::max({worst, norm(direct.r - via.r), norm(direct.v - via.v)});
    const ScanSample home = invert_motion(total, direct);
    worst = std::max({worst, norm(home.r - x.r), norm(home.v - x.v), norm(home.s - x.s)});
  }
  return {worst <= 1e-12, fmt("max abs err %.2e over 4 x 1000 motions", worst)};
}

Outcome fft_convolution() {
  const Grid g(16, 16, {-1, 1, -1, 1});
  CounterRng rng(106);
  double worst = 0.0;
  for (double hv : {0.01, 0.05}) {
    const ConvolutionOperator K(g, ResolutionParam(hv));
    for (int k = 0; k < 5; ++k) {
      const DenseField rho = random_field(g, rng, -1, 1);
      const DenseField a = K.convolve(rho), b = convolve_direct(K, rho);
      std::vector<double> d(g.size());
      for (std::size_t i = 0; i < d.size(); ++i) d[i] = a.values[i] - b.values[i];
      worst = std::max(worst, nrm(d) / nrm(b.values));
    }
  }
  return {worst <= 1e-12, fmt("max rel err %.2e", worst)};
}

Outcome lipschitz() {
  const Grid g(8, 8, {-1, 1, -1, 1});
  const ConvolutionOperator K(g, ResolutionParam(0.05));
  const double mu = 1e-4, delta = 1e-16;
  const LipschitzBound b = lipschitz_bound(g, mu, delta, K);
  CounterRng rng(107);
  const DenseField u = random_field(g, rng, 0, 1);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const DenseField r1 = random_field(g, rng, -1, 1);
    DenseField r2 = r1;
    const double scale = std::pow(10.0, rng.uniform(-6, 0));
    for (double &v : r2.values) v += scale * rng.uniform(-1, 1);
    const DenseField g1 = grad_F(r1, u, K, mu, delta), g2 = grad_F(r2, u, K, mu, delta);
    std::vector<double> dg(g.size()), dr(g.size());
    for (std::size_t i = 0; i < dg.size(); ++i) {
      dg[i] = g1.values[i] - g2.values[i];
      dr[i] = r1.values[i] - r2.values[i];
    }
    worst = std::max(worst, nrm(dg) / nrm(dr));
  }
  return {worst <= b.value, fmt("max ratio %.4e <= bound %.4e", worst, b.value)};
}

const TableRow *find_row(const ExperimentResult &r, const std::string &scan, const std::string &method) {
  for (const TableRow &t : r.table)
    if (t.scan == scan && t.method == method) return &t;
  return nullptr;
}

Outcome multipatch_trend() {
  const auto t0 = Clock::now();
  ExperimentOptions opt;
  const ExperimentResult r = run_experiment("exp1", opt);
  std::string detail;
  double prev = -1e300;
  bool ok = true;
  for (int k : opt.scale.patch_sets) {
    const std::string scan = std::to_string(k) + "x" + std::to_string(k);
    const TableRow *row = find_row(r, scan, "two-stage");
    if (!row) return {false, "missing row " + scan};
    ok = ok && row->psnr > prev;
    prev = row->psnr;
    detail += scan + " " + fmt("%.2f dB", row->psnr) + ", ";
  }
  return {ok, detail + fmt("%.0f s", seconds_since(t0))};
}

Outcome ablation() {
  const auto t0 = Clock::now();
  const ExperimentResult r = run_experiment("exp2", ExperimentOptions{});
  const TableRow *gfb = nullptr, *lw = nullptr;
  for (const TableRow &t : r.table) {
    if (t.method == "two-stage") gfb = &t;
    if (t.method == "landweber") lw = &t;
  }
  if (!gfb || !lw) return {false, "missing table rows"};
  return {gfb->ssim > lw->ssim,
          fmt("priors SSIM %.4f vs Landweber SSIM %.4f, %.0f s", gfb->ssim, lw->ssim, seconds_since(t0))};
}

Outcome gfb_contract() {
  const Grid g(40, 40, {-2, 2, -2, 2});
  const ResolutionParam h(0.01);
  const DenseField gt = render(make_phantom_spec(PhantomKind::Vessel, g));
  LissajousParams base;
  base.samples_per_period = 408;
  const auto scan = simulate_scan(gt, make_grid_plan(g.domain, base, 4, 4), h, {0.1, 42});
  Stage1Config c1;
  c1.lambda = 5.0;
  const DenseField u = solve_stage1(scan.samples, g, c1).trace;
  const ConvolutionOperator K(g, h);
  const Stage2Config cfg;  // gamma 1e-3, tolerance 5e-6, 100000 iterations
  const Stage2Result r = solve_stage2(u, cfg, K);
  const auto &d = r.diagnostics;
  const double mn = *std::min_element(r.rho.values.begin(), r.rho.values.end());
  const bool ok = d.converged && d.final_residual <= cfg.tolerance && d.iterations <= cfg.max_iters &&
                  d.final_objective <= d.initial_objective && mn >= -1e-12;
  return {ok, fmt("%.0f iterations, residual %.2e, objective %.4e -> %.4e", d.iterations,
                  d.final_residual, d.initial_objective, d.final_objective) +
                  fmt(", min %.2e", mn)};
}

Outcome baseline_ordering() {
  const auto t0 = Clock::now();
  const ExperimentResult e7 = run_experiment("exp7", ExperimentOptions{});
  const TableRow *two = nullptr, *stitched = nullptr;
  for (const TableRow &t : e7.table) {
    if (t.method == "two-stage") two = &t;
    if (t.method == "sm-tikhonov-stitched") stitched = &t;
  }
  const ExperimentResult e8 = run_experiment("exp8", ExperimentOptions{});
  const TableRow *tik = nullptr, *lasso = nullptr;
  for (const TableRow &t : e8.table) {
    if (t.method == "sm-tikhonov-joint") tik = &t;
    if (t.method == "sm-fused-lasso-joint") lasso = &t;
  }
  if (!two || !stitched || !tik || !lasso) return {false, "missing table rows"};
  return {two->psnr > stitched->psnr && lasso->ssim > tik->ssim,
          fmt("exp7 PSNR two-stage %.2f vs stitched %.2f; exp8 SSIM lasso %.4f vs Tikhonov %.4f",
              two->psnr, stitched->psnr, lasso->ssim, tik->ssim) +
              fmt(", %.0f s", seconds_since(t0))};
}

Outcome forward_tie() {
  const Grid g(20, 20, {-1, 1, -1, 1});
  const ResolutionParam h(0.01);
  LissajousParams base;
  const ScanPlan plan = make_grid_plan(g.domain, base, 1, 1);
  const SystemMatrix S = build_system_matrix(g, plan, h);
  const DenseField gt = render(make_phantom_spec(PhantomKind::Plus, g));
  std::vector<double> y(S.rows());
  S.apply(gt.values, y);
  const auto s = stack_signals(simulate_scan(gt, plan, h, {}).samples);
  if (s.size() != y.size()) return {false, "row count mismatch"};
  std::vector<double> d(y.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = y[i] - s[i];
  const double rel = nrm(d) / nrm(s);
  return {rel <= 1e-10, fmt("S is %.0f x %.0f, rel err %.2e", double(S.rows()), double(S.cols()), rel)};
}

}  // namespace

int main() {
  report(1, "kernel trace identity", kernel_trace);
  report(2, "kernel limit and Langevin branches", kernel_limit);
  report(3, "stage 2 gradient vs finite differences", stage2_gradient);
  report(4, "stage 1 gradient, symmetry, PSD", stage1_gradient);
  report(5, "prox oracles", prox_oracles);
  report(6, "frame transform round trips", frame_round_trips);
  report(7, "FFT convolution vs direct quadrature", fft_convolution);
  report(8, "Lipschitz bound", lipschitz);
  report(9, "multi-patch PSNR trend (desk exp1)", multipatch_trend);
  report(10, "priors vs Landweber SSIM (desk exp2)", ablation);
  report(11, "GFB convergence contract (40x40)", gfb_contract);
  report(12, "baseline orderings (desk exp7, exp8)", baseline_ordering);
  report(13, "system matrix forward tie", forward_tie);
  return failures == 0 ? 0 : 1;
}
