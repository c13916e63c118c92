#pragma once

#include <span>
#include <vector>

#include "mpmp/geometry.hpp"
#include "mpmp/physics.hpp"
#include "mpmp/stage2.hpp"
#include "mpmp/types.hpp"

namespace mpmp {

// Dense column-major system matrix. Column c holds the noiseless scan of the
// delta phantom on pixel c: all x components first, then all y components.
class SystemMatrix final : public LinearMap {
 public:
  SystemMatrix() = default;
  SystemMatrix(const Grid &grid, std::size_t rows, std::vector<double> data);

  const Grid &grid() const { return grid_; }
  std::size_t rows() const override { return rows_; }
  std::size_t cols() const override { return grid_.size(); }
  double operator()(std::size_t r, std::size_t c) const { return data_[c * rows_ + r]; }
  std::span<const double> column(std::size_t c) const {
    return {data_.data() + c * rows_, rows_};
  }
  const std::vector<double> &data() const { return data_; }

  void apply(std::span<const double> x, std::span<double> y) const override;
  void apply_adjoint(std::span<const double> y, std::span<double> x) const override;

 private:
  Grid grid_;
  std::size_t rows_ = 0;
  std::vector<double> data_;
};

// [s_x(1..L), s_y(1..L)]
std::vector<double> stack_signals(std::span<const ScanSample> samples);

// Columns from the noiseless delta scans of every pixel along the plan.
SystemMatrix build_system_matrix(const Grid &grid, const ScanPlan &plan, ResolutionParam h);
SystemMatrix build_system_matrix(const Grid &grid, std::span<const ScanSample> samples,
                                 ResolutionParam h);

// S^T S, S^T s and ||s||^2. Iterating on these costs cols^2 per step instead
// of two passes over S, which pays off for tall joint matrices.
NormalEquations normal_equations(const SystemMatrix &S, std::span<const double> s);

struct TikhonovResult {
  DenseField rho;
  int iterations = 0;
  double final_residual = 0.0;
  bool converged = false;
};

// argmin ||S rho - s||^2 + mu ||rho||^2 by CG on (S^T S + mu I) rho = S^T s.
TikhonovResult tikhonov_solve(const SystemMatrix &S, std::span<const double> s, double mu,
                              int max_iters = 10000, double tol = 1e-12);
TikhonovResult tikhonov_solve(const NormalEquations &ne, const Grid &grid, double mu,
                              int max_iters = 10000, double tol = 1e-12);

struct PatchImage {
  DenseField field;
  int offset_i = 0;  // cell offset of the patch inside the target grid
  int offset_j = 0;
};

// Copies patches into the target grid, averaging where they overlap. Every
// target cell must be covered.
DenseField stitch(const Grid &target, std::span<const PatchImage> patches);

// Stage 2 splitting with S in place of the convolution, started from zero.
Stage2Result fused_lasso_sm_solve(const SystemMatrix &S, std::span<const double> s,
                                  const Stage2Config &cfg);
Stage2Result fused_lasso_sm_solve(const NormalEquations &ne, const Grid &grid,
                                  const Stage2Config &cfg);

}  // namespace mpmp
