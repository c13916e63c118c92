#include "mpmp/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "mpmp/stage2.hpp"

namespace mpmp {

namespace {

void same_grid(const DenseField &a, const DenseField &b) {
  if (!(a.grid == b.grid)) throw std::invalid_argument("metric inputs live on different grids");
}

constexpr int kWin = 11;
constexpr double kSigma = 1.5;

std::array<double, kWin> gaussian_taps() {
  std::array<double, kWin> w{};
  double sum = 0.0;
  for (int k = 0; k < kWin; ++k) {
    const double d = k - kWin / 2;
    w[k] = std::exp(-d * d / (2 * kSigma * kSigma));
    sum += w[k];
  }
  for (double &v : w) v /= sum;
  return w;
}

// Mirror about the edge (d c b a | a b c d | d c b a).
int reflect(int i, int n) {
  if (n == 1) return 0;
  while (i < 0 || i >= n) {
    if (i < 0) i = -i - 1;
    if (i >= n) i = 2 * n - i - 1;
  }
  return i;
}

std::vector<double> blur(const std::vector<double> &img, int nx, int ny) {
  static const std::array<double, kWin> w = gaussian_taps();
  std::vector<double> tmp(img.size()), out(img.size());
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      double acc = 0.0;
      for (int k = 0; k < kWin; ++k) acc += w[k] * img[j * nx + reflect(i + k - kWin / 2, nx)];
      tmp[j * nx + i] = acc;
    }
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      double acc = 0.0;
      for (int k = 0; k < kWin; ++k) acc += w[k] * tmp[reflect(j + k - kWin / 2, ny) * nx + i];
      out[j * nx + i] = acc;
    }
  return out;
}

}  // namespace

double mse(const DenseField &gt, const DenseField &rec) {
  same_grid(gt, rec);
  double acc = 0.0;
  for (std::size_t c = 0; c < gt.size(); ++c) {
    const double d = gt.values[c] - rec.values[c];
    acc += d * d;
  }
  return acc / static_cast<double>(gt.size());
}

double psnr(const DenseField &gt, const DenseField &rec) {
  same_grid(gt, rec);
  const double peak = *std::max_element(gt.values.begin(), gt.values.end());
  if (peak == 0.0) throw MetricUndefined("PSNR is undefined for a ground truth with zero maximum");
  const double e = mse(gt, rec);
  if (e == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(peak * peak / e);
}

double ssim(const DenseField &gt, const DenseField &rec) {
  same_grid(gt, rec);
  const auto [mn, mx] = std::minmax_element(gt.values.begin(), gt.values.end());
  const double range = *mx - *mn;
  if (range == 0.0) throw MetricUndefined("SSIM is undefined for a constant ground truth");
  const double c1 = (0.01 * range) * (0.01 * range);
  const double c2 = (0.03 * range) * (0.03 * range);
  const int nx = gt.grid.nx, ny = gt.grid.ny;
  const std::vector<double> &x = gt.values, &y = rec.values;
  std::vector<double> xx(x.size()), yy(x.size()), xy(x.size());
  for (std::size_t c = 0; c < x.size(); ++c) {
    xx[c] = x[c] * x[c];
    yy[c] = y[c] * y[c];
    xy[c] = x[c] * y[c];
  }
  const auto mx_ = blur(x, nx, ny), my = blur(y, nx, ny);
  const auto sxx = blur(xx, nx, ny), syy = blur(yy, nx, ny), sxy = blur(xy, nx, ny);
  double acc = 0.0;
  for (std::size_t c = 0; c < x.size(); ++c) {
    const double vx = sxx[c] - mx_[c] * mx_[c];
    const double vy = syy[c] - my[c] * my[c];
    const double cov = sxy[c] - mx_[c] * my[c];
    acc += ((2 * mx_[c] * my[c] + c1) * (2 * cov + c2)) /
           ((mx_[c] * mx_[c] + my[c] * my[c] + c1) * (vx + vy + c2));
  }
  return acc / static_cast<double>(x.size());
}

DenseField trace_reference(const DenseField &rho_gt, ResolutionParam h) {
  const ConvolutionOperator K(rho_gt.grid, h);
  return K.convolve(rho_gt);
}

}  // namespace mpmp
