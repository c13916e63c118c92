#include "mpmp/physics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mpmp/phantoms.hpp"
#include "mpmp/rng.hpp"

namespace mpmp {

namespace {

constexpr std::uint64_t kNoiseStream = 3;

// Taylor coefficients of L(x) = sum c_k x^(2k+1).
constexpr double kL1 = 1.0 / 3.0;
constexpr double kL3 = -1.0 / 45.0;
constexpr double kL5 = 2.0 / 945.0;
constexpr double kL7 = -1.0 / 4725.0;
constexpr double kL9 = 2.0 / 93555.0;
constexpr double kL11 = -1382.0 / 638512875.0;

double series_value(double x) {
  const double x2 = x * x;
  return x * (kL1 + x2 * (kL3 + x2 * (kL5 + x2 * (kL7 + x2 * (kL9 + x2 * kL11)))));
}

double series_slope(double x) {
  const double x2 = x * x;
  return kL1 + x2 * (3 * kL3 + x2 * (5 * kL5 + x2 * (7 * kL7 + x2 * (9 * kL9 + x2 * 11 * kL11))));
}

// Direct branch on a = |x| > 0, both values from one expm1.
LangevinPair direct_pair(double a) {
  const double em = std::expm1(-2.0 * a);  // e^{-2a} - 1, in (-1, 0)
  const double coth = (2.0 + em) / (-em);
  const double inv_sinh2 = 4.0 * (1.0 + em) / (em * em);
  return {coth - 1.0 / a, 1.0 / (a * a) - inv_sinh2};
}

}  // namespace

double langevin_series(double xi) { return series_value(xi); }

double langevin_direct(double xi) {
  if (xi == 0.0) return 0.0;
  const double v = direct_pair(std::abs(xi)).value;
  return xi < 0 ? -v : v;
}

double langevin_derivative_series(double xi) { return series_slope(xi); }

double langevin_derivative_direct(double xi) {
  if (xi == 0.0) return 1.0 / 3.0;
  return direct_pair(std::abs(xi)).slope;
}

LangevinPair langevin_pair(double xi) {
  const double a = std::abs(xi);
  if (a < kLangevinSeriesThreshold) return {series_value(xi), series_slope(xi)};
  LangevinPair p = direct_pair(a);
  if (xi < 0) p.value = -p.value;
  return p;
}

double langevin(double xi) { return langevin_pair(xi).value; }
double langevin_derivative(double xi) { return langevin_pair(xi).slope; }

ResolutionParam::ResolutionParam(double value) : h(value) {
  if (!(value > 0.0) || !std::isfinite(value))
    throw std::invalid_argument("resolution parameter h must be positive");
}

namespace {

// L(x)/x, finite at 0.
double langevin_over_xi(double xi, double value) {
  if (std::abs(xi) < kLangevinSeriesThreshold) {
    const double x2 = xi * xi;
    return kL1 + x2 * (kL3 + x2 * (kL5 + x2 * (kL7 + x2 * (kL9 + x2 * kL11))));
  }
  return value / xi;
}

}  // namespace

Vec2 kernel_field(const Vec2 &z, ResolutionParam h) {
  const double r = norm(z);
  if (r == 0.0) return {};
  const double l = langevin(r / h.h);
  return (l / r) * z;
}

double kernel_scalar(const Vec2 &y, ResolutionParam h) {
  const double r = norm(y);
  if (r == 0.0) return 2.0 / (3.0 * h.h);
  const double xi = r / h.h;
  const LangevinPair p = langevin_pair(xi);
  return (p.slope + langevin_over_xi(xi, p.value)) / h.h;
}

Mat2 kernel_jacobian(const Vec2 &z, ResolutionParam h) {
  const double r = norm(z);
  if (r == 0.0) return (1.0 / (3.0 * h.h)) * Mat2::identity();
  const double xi = r / h.h;
  const LangevinPair p = langevin_pair(xi);
  const double radial = p.slope / h.h;
  const double tangential = langevin_over_xi(xi, p.value) / h.h;  // L(r/h)/r
  const double ux = z.x / r, uy = z.y / r;
  const double d = radial - tangential;
  return {tangential + d * ux * ux, d * ux * uy, d * ux * uy, tangential + d * uy * uy};
}

namespace {

// Accumulates the core operator at r over all cells in row-major order.
Mat2 core_sum(const DenseField &rho, const Vec2 &r, ResolutionParam h) {
  const Grid &g = rho.grid;
  Mat2 acc;
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const double w = rho.values[g.index(i, j)];
      if (w == 0.0) continue;
      const Mat2 J = kernel_jacobian(r - g.center(i, j), h);
      acc.a11 += w * J.a11;
      acc.a12 += w * J.a12;
      acc.a21 += w * J.a21;
      acc.a22 += w * J.a22;
    }
  }
  return g.cell_area() * acc;
}

}  // namespace

Mat2 core_operator_apply(const DenseField &rho, const Vec2 &r, ResolutionParam h) {
  return core_sum(rho, r, h);
}

namespace kernels {

void signals_serial(const DenseField &rho, ResolutionParam h, std::span<ScanSample> samples) {
  for (ScanSample &s : samples) s.s = core_sum(rho, s.r, h) * s.v;
}

void signals_parallel(const DenseField &rho, ResolutionParam h, std::span<ScanSample> samples) {
  const auto n = static_cast<std::ptrdiff_t>(samples.size());
#pragma omp parallel for schedule(dynamic, 64)
  for (std::ptrdiff_t k = 0; k < n; ++k) {
    ScanSample &s = samples[static_cast<std::size_t>(k)];
    s.s = core_sum(rho, s.r, h) * s.v;
  }
}

}  // namespace kernels

void compute_signals(const DenseField &rho, ResolutionParam h, std::span<ScanSample> samples) {
  kernels::signals_parallel(rho, h, samples);
}

double add_noise(std::span<ScanSample> samples, const NoiseModel &noise) {
  if (noise.level < 0.0) throw std::invalid_argument("noise level must be nonnegative");
  double peak = 0.0;
  for (const ScanSample &s : samples) peak = std::max(peak, norm(s.s));
  const double eps = noise.level * peak;
  if (eps == 0.0) return 0.0;
  CounterRng rng(noise.seed, kNoiseStream);
  for (ScanSample &s : samples) {
    const double nx = rng.normal();
    const double ny = rng.normal();
    s.s.x += eps * nx;
    s.s.y += eps * ny;
  }
  return eps;
}

SimulatedScan simulate_scan(const DenseField &rho, const ScanPlan &plan, ResolutionParam h,
                            const NoiseModel &noise, const SimulationOptions &opts) {
  if (opts.oversample < 1) throw std::invalid_argument("oversample factor must be >= 1");
  SimulatedScan out;
  if (plan.patch_count() == 0) return out;
  out.generated = sample_times(plan).size();
  out.samples = sample_plan(plan, rho.grid.domain);
  if (opts.oversample == 1) {
    compute_signals(rho, h, out.samples);
  } else {
    const DenseField fine =
        resample(rho, rho.grid.nx * opts.oversample, rho.grid.ny * opts.oversample);
    compute_signals(fine, h, out.samples);
  }
  out.epsilon = add_noise(out.samples, noise);
  return out;
}

}  // namespace mpmp
