#pragma once

#include "mpmp/physics.hpp"
#include "mpmp/types.hpp"

namespace mpmp {

double mse(const DenseField &gt, const DenseField &rec);

// 10 log10(max(gt)^2 / MSE); +inf for identical images.
double psnr(const DenseField &gt, const DenseField &rec);

// Mean SSIM: 11x11 Gaussian window (sigma 1.5), K1 = 0.01, K2 = 0.03,
// dynamic range max(gt) - min(gt), reflective boundary.
double ssim(const DenseField &gt, const DenseField &rec);

// kappa_h * rho_gt on rho_gt's grid, through the same FFT convolution as stage 2.
DenseField trace_reference(const DenseField &rho_gt, ResolutionParam h);

}  // namespace mpmp
