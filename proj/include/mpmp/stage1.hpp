#pragma once

#include <span>
#include <vector>

#include "mpmp/geometry.hpp"
#include "mpmp/interp.hpp"
#include "mpmp/types.hpp"

namespace mpmp {

struct Stage1Config {
  double lambda = 5.0;
  int cg_max_iters = 1000;
  double cg_tolerance = 1e-12;  // on ||r|| / ||b||

  void validate() const;
};

// Samples with their bicubic stencils, sorted canonically and bucketed by
// containing cell so every accumulation runs in a fixed order regardless of
// the input order.
class SampleCache {
 public:
  SampleCache(const Grid &grid, std::span<const ScanSample> samples);

  const Grid &grid() const { return grid_; }
  std::size_t size() const { return stencils_.size(); }

  struct Entry {
    BicubicStencil stencil;
    Vec2 s;
    Vec2 v;
  };
  const Entry &operator[](std::size_t k) const { return stencils_[k]; }
  // Samples whose containing cell has flat index c occupy [begin(c), begin(c+1)).
  std::size_t bucket_begin(std::size_t c) const { return offsets_[c]; }

 private:
  Grid grid_;
  std::vector<Entry> stencils_;
  std::vector<std::size_t> offsets_;
};

// I[A](r_k) v_k for every cached sample.
std::vector<Vec2> predict(const CoreOperatorField &A, const SampleCache &cache);

// J(A) = (lambda/N) ||DA||^2 + (1/L) sum_k |s_k - I[A](r_k) v_k|^2.
double stage1_objective(const CoreOperatorField &A, const SampleCache &cache, double lambda);
double regularizer(const CoreOperatorField &A);

// G A: Hessian of J applied to A (data part plus regularizer part).
CoreOperatorField apply_G(const CoreOperatorField &A, const SampleCache &cache, double lambda);
// b = (2/L) sum_k s_k (x) v_k spread over the stencil.
CoreOperatorField assemble_rhs(const SampleCache &cache);

namespace kernels {
// Data term of G by scattering samples into cells (serial reference).
void spread_serial(std::span<const Vec2> values, const SampleCache &cache, double scale,
                   CoreOperatorField &out);
// Same sums gathered per output cell; OpenMP over cells, bitwise equal to the serial path.
void spread_parallel(std::span<const Vec2> values, const SampleCache &cache, double scale,
                     CoreOperatorField &out);
}  // namespace kernels

struct Stage1Diagnostics {
  int iterations = 0;
  double final_residual = 0.0;  // relative
  bool converged = false;
  std::vector<double> residual_history;  // relative, starting with iteration 0
  std::size_t sample_count = 0;
};

struct Stage1Result {
  CoreOperatorField A;
  DenseField trace;
  Stage1Diagnostics diagnostics;
};

DenseField trace_field(const CoreOperatorField &A);

Stage1Result solve_stage1(std::span<const ScanSample> samples, const Grid &grid,
                          const Stage1Config &config);
Stage1Result solve_stage1(const SampleCache &cache, const Stage1Config &config);

}  // namespace mpmp
