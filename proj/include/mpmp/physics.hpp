#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mpmp/geometry.hpp"
#include "mpmp/types.hpp"

namespace mpmp {

// Below this |xi| the Langevin function and its derivative use Taylor series.
inline constexpr double kLangevinSeriesThreshold = 0.05;

double langevin(double xi);
double langevin_derivative(double xi);

// The two branches, exposed so their agreement can be checked.
double langevin_series(double xi);
double langevin_direct(double xi);
double langevin_derivative_series(double xi);
double langevin_derivative_direct(double xi);

struct LangevinPair {
  double value;
  double slope;
};
// L(xi) and L'(xi) from a single exponential.
LangevinPair langevin_pair(double xi);

// Dimensionless resolution h = H_sat / (g L).
struct ResolutionParam {
  double h = 0.01;
  explicit ResolutionParam(double value = 0.01);
};

// z -> L(|z|/h) z/|z|
Vec2 kernel_field(const Vec2 &z, ResolutionParam h);

// kappa_h(y) = div(L(|y|/h) y/|y|) in 2D: L'(r/h)/h + L(r/h)/r; 2/(3h) at y = 0.
double kernel_scalar(const Vec2 &y, ResolutionParam h);

// Jacobian of kernel_field; (1/(3h)) Id at z = 0.
Mat2 kernel_jacobian(const Vec2 &z, ResolutionParam h);

// Midpoint-rule MPI core operator at r: cell_area * sum rho_c J(r - x_c).
Mat2 core_operator_apply(const DenseField &rho, const Vec2 &r, ResolutionParam h);

struct NoiseModel {
  double level = 0.0;
  std::uint64_t seed = 0;
};

struct SimulationOptions {
  // Bicubic upsampling factor applied to the phantom before quadrature.
  int oversample = 1;
};

struct SimulatedScan {
  std::vector<ScanSample> samples;
  double epsilon = 0.0;  // noise standard deviation actually applied
  std::size_t generated = 0;  // sample instants before dropping out-of-domain points
};

// Signals s_k = A_h[rho](r_k) v_k along the plan, plus Gaussian noise with
// standard deviation level * max_k |s_k| per component.
SimulatedScan simulate_scan(const DenseField &rho, const ScanPlan &plan, ResolutionParam h,
                            const NoiseModel &noise, const SimulationOptions &opts = {});

// Fills s for the given positions/velocities (noiseless).
void compute_signals(const DenseField &rho, ResolutionParam h, std::span<ScanSample> samples);

// Adds noise in place, returns epsilon.
double add_noise(std::span<ScanSample> samples, const NoiseModel &noise);

namespace kernels {
// Reference path: plain loops over samples and all cells.
void signals_serial(const DenseField &rho, ResolutionParam h, std::span<ScanSample> samples);
// OpenMP over samples; each sample's quadrature runs in fixed cell order, so the
// result is bitwise identical to the serial path for any thread count.
void signals_parallel(const DenseField &rho, ResolutionParam h, std::span<ScanSample> samples);
}  // namespace kernels

}  // namespace mpmp
